"""Figure rendering for the CLI report path. Writes image files only."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_rank_surface", "plot_lambda_sweep", "plot_trace", "plot_affinity"]

golden_mean = (np.sqrt(5.0) - 1.0) / 2.0
fig_width = 6.0

params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "savefig.dpi": 150,
}


def _figure(ncols=1, height_scale=1.0, **kw):
    with plt.rc_context(params):
        return plt.subplots(1, ncols, figsize=(fig_width, fig_width * golden_mean * height_scale),
                            **kw)


def _save(fig, path):
    with plt.rc_context(params):
        fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def plot_rank_surface(rows, path):
    """Rank-2 surrogate surfaces: arctangent (left) and nuclear norm (right).

    ``rows`` are the tuples emitted by ``rank_approx_profile``.
    """
    data = np.asarray(rows, dtype=np.float64)
    steps = int(round(np.sqrt(len(data))))
    s1 = data[:, 0].reshape(steps, steps)
    s2 = data[:, 1].reshape(steps, steps)
    rank = data[:, 2].reshape(steps, steps)
    fig = plt.figure(figsize=(fig_width * 1.6, fig_width * golden_mean))
    for i, (col, title) in enumerate([(3, "(2/pi) sum arctan(sigma)"), (4, "sum sigma")]):
        ax = fig.add_subplot(1, 2, i + 1, projection="3d")
        ax.plot_surface(s1, s2, data[:, col].reshape(steps, steps), cmap="viridis",
                        linewidth=0, alpha=0.85)
        ax.plot_wireframe(s1, s2, rank, color="k", linewidth=0.4,
                          rstride=max(1, steps // 10), cstride=max(1, steps // 10))
        ax.set_xlabel("sigma1")
        ax.set_ylabel("sigma2")
        ax.set_title(title)
    _save(fig, path)


def plot_lambda_sweep(lambdas, errors, path):
    fig, ax = _figure()
    ax.plot(lambdas, 100.0 * np.asarray(errors), "o-")
    ax.set_xlabel("lambda")
    ax.set_ylabel("clustering error (%)")
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_trace(result, path):
    """Objective and feasibility residuals per iteration, log scale for the residuals."""
    it = result.trace_array("iter")
    fig, (ax0, ax1) = _figure(ncols=2)
    ax0.plot(it, result.trace_array("objective"))
    ax0.set_xlabel("iteration")
    ax0.set_ylabel("objective")
    ax1.semilogy(it, np.maximum(result.trace_array("r1"), 1e-300), label="|X-XZ-E|/|X|")
    ax1.semilogy(it, np.maximum(result.trace_array("r2"), 1e-300), label="|J-Z|/|X|")
    ax1.set_xlabel("iteration")
    ax1.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_affinity(W, path, order=None):
    """Affinity matrix as an image; ``order`` permutes samples (e.g. by true label)."""
    W = np.asarray(W)
    if order is not None:
        W = W[np.ix_(order, order)]
    fig, ax = _figure(height_scale=1.0 / golden_mean)
    im = ax.imshow(W, cmap="gray_r", interpolation="nearest")
    fig.colorbar(im, ax=ax, fraction=0.046)
    ax.set_xticks([])
    ax.set_yticks([])
    _save(fig, path)
