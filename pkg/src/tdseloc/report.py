"""PNG summary figures of the CLI artifacts."""

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_cook(series, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    t = series.checkpoints[1:]
    ax[0].loglog(t, series.increments[1:], "o-")
    ax[0].set_xlabel("t")
    ax[0].set_ylabel("H1 increment of Omega")
    m = series.integrand_potential > 0
    ax[1].loglog(series.integrand_times[m], series.integrand_potential[m], label="potential term")
    ax[1].loglog(series.integrand_times, series.integrand_restriction, label="restriction term")
    ax[1].set_xlabel("t")
    ax[1].legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_decomposition(rep, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(1, 3, figsize=(14, 4))
    t = np.asarray(rep.times)
    for m, L in rep.layers.items():
        w = np.asarray(L["uloc_w"])
        for k in range(w.shape[1]):
            ax[0].plot(t, w[:, k], label=f"n={m}, k={k}")
        ax[1].semilogy(t, L["urem_h1dot"], label=f"n={m}")
        ax[2].semilogy(t, np.maximum(L["consistency"], 1e-18), label=f"n={m}")
    ax[0].set_title("weighted norms of u_loc")
    ax[1].set_title("Hdot1 norm of u_rem")
    ax[2].set_title("identity residual")
    for a in ax:
        a.set_xlabel("t")
        a.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def plot_trajectory(traj, path, window: float = 400.0, n_times: int = 200) -> None:
    plt = _plt()
    g = traj.grid
    m = np.abs(g.x) <= window
    idx = np.unique(np.linspace(0, len(traj) - 1, n_times).astype(int))
    img = np.abs(traj.states[idx][:, m]) ** 2
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.imshow(np.log10(img + 1e-12), aspect="auto", origin="lower", vmin=-8,
              extent=[-window, window, traj.times[idx[0]], traj.times[idx[-1]]])
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("log10 |u|^2")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def write_figures(out: Path, traj=None, series=None, rep=None) -> list:
    out = Path(out)
    written = []
    for obj, fn, name in ((traj, plot_trajectory, "trajectory.png"), (series, plot_cook, "cook.png"),
                          (rep, plot_decomposition, "decomposition.png")):
        if obj is not None:
            fn(obj, out / name)
            written.append(name)
    return written
