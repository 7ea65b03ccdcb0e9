"""Static figures for CLI results, rendered with the Agg backend to files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Ellipse  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.frameon": False,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def bound_figure(payload: dict, path):
    """Holevo value against the Helstrom (SLD) bound for one parameter point."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        names = ["Helstrom", "Holevo"]
        vals = [payload.get("helstrom_bound", np.nan), payload["value"]]
        ax.bar(names, vals, color=["0.6", "C0"])
        for i, v in enumerate(vals):
            ax.annotate(f"{v:.4g}", (i, v), ha="center", va="bottom")
        ax.set_ylabel("weighted risk bound")
        ax.set_title(payload.get("model", ""))
        return _save(fig, path)


def sweep_figure(rows: list, axis: str, columns: list, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ok = [r for r in rows if not r.get("error")]
        x = [float(r[axis]) for r in ok]
        for col in columns:
            y = [float(r[col]) if r.get(col) not in (None, "") else np.nan for r in ok]
            ax.plot(x, y, marker="o", ms=3, label=col)
        if axis == "N" and x and min(x) > 0:
            ax.set_xscale("log")
        ax.set_xlabel(axis)
        ax.legend()
        return _save(fig, path)


def dual_figure(payload: dict, path):
    """Histogram of trace(K0 I_M) over the tested POVMs with the cap C^K."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.hist(payload["values"], bins=40, color="C0", alpha=0.8)
        ax.axvline(payload["c_k"], color="C3", label="C^K")
        ax.set_xlabel("trace(K0 I_M)")
        ax.set_ylabel("POVMs")
        ax.legend()
        return _save(fig, path)


def covariance_figure(cov: np.ndarray, path, reference=None):
    """One-sigma ellipse of a 2 x 2 block (first two coordinates)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 4))
        for c, color, label in ((cov, "C0", "measurement"), (reference, "0.5", "state")):
            if c is None:
                continue
            w, v = np.linalg.eigh(np.asarray(c)[:2, :2])
            angle = np.degrees(np.arctan2(v[1, 1], v[0, 1]))
            ax.add_patch(Ellipse((0, 0), 2 * np.sqrt(w[1]), 2 * np.sqrt(w[0]), angle=angle,
                                 fill=False, color=color, label=label))
        lim = 1.2 * np.sqrt(np.max(np.linalg.eigvalsh(np.asarray(cov)[:2, :2])))
        ax.set_xlim(-lim, lim)
        ax.set_ylim(-lim, lim)
        ax.set_aspect("equal")
        ax.legend()
        return _save(fig, path)


def clt_figure(rows: list, path):
    with plt.rc_context(STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7, 3.2))
        labels = [r["observable"] for r in rows]
        idx = np.arange(len(rows))
        ax1.bar(idx - 0.2, [r["variance"] for r in rows], 0.4, label="empirical")
        ax1.bar(idx + 0.2, [r["predicted_variance"] for r in rows], 0.4, label="predicted")
        ax1.set_xticks(idx, labels)
        ax1.set_ylabel("variance")
        ax1.legend()
        ax2.bar(idx, [r["ks"] for r in rows], color="C2")
        ax2.set_xticks(idx, labels)
        ax2.set_ylabel("KS distance")
        return _save(fig, path)


def matrix_figure(mat: np.ndarray, path, title: str = ""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 3.4))
        im = ax.imshow(np.asarray(mat), cmap="viridis")
        fig.colorbar(im, ax=ax)
        ax.grid(False)
        ax.set_title(title)
        return _save(fig, path)


def risk_figure(payload: dict, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 3.4))
        ax.errorbar([0], [payload["empirical_risk"]], yerr=[3 * payload["std_error"]], fmt="o",
                    capsize=4, label="N x risk (3 SE)")
        if payload.get("bound") is not None:
            ax.axhline(payload["bound"], color="C3", label="bound")
        ax.set_xticks([])
        ax.legend()
        return _save(fig, path)


def van_trees_figure(rows: list, path):
    """C_{G0} at quadrature nodes against |theta|."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        r = [float(np.linalg.norm(row["theta"])) for row in rows]
        ax.scatter(r, [row["holevo"] for row in rows], s=4)
        ax.set_xlabel("|theta|")
        ax.set_ylabel("C_G0(theta)")
        return _save(fig, path)
