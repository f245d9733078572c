"""Figure rendering for the CLI report path.

Every tabular command can drop a PNG next to its delimited output.  Figures
are presentation artifacts only: the CSV/JSON files remain the
deterministic primary outputs.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _new_axes(nrows=1, ncols=1, **kw):
    with plt.rc_context(_STYLE):
        return plt.subplots(nrows, ncols, **kw)


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def save_scan_figure(result, path):
    """Max-|g|-over-theta3 map in the (theta1, theta2) plane plus a g histogram."""
    fig, (ax1, ax2) = _new_axes(1, 2, figsize=(9.2, 3.8))
    flat_idx = np.argmax(np.abs(result.g_values), axis=2)
    sheet = np.take_along_axis(result.g_values, flat_idx[:, :, None], axis=2)[:, :, 0]
    a1, a2 = result.angles[0], result.angles[1]
    im = ax1.pcolormesh(a2, a1, sheet, shading="nearest", cmap="RdBu_r",
                        vmin=-abs(result.g_values).max(), vmax=abs(result.g_values).max())
    fig.colorbar(im, ax=ax1, label="g (max |g| over theta3)")
    ax1.set_xlabel("theta2 (rad)")
    ax1.set_ylabel("theta1 (rad)")
    ax1.set_title("geometric factor over orientations")
    ax2.hist(result.g_values.ravel(), bins=80, color="steelblue")
    ax2.axvline(result.g_min, color="crimson", lw=1, label=f"min {result.g_min:.4f}")
    ax2.axvline(result.g_max, color="darkgreen", lw=1, label=f"max {result.g_max:.4f}")
    ax2.set_xlabel("g")
    ax2.set_ylabel("grid count")
    ax2.legend(fontsize=8)
    return _finish(fig, path)


def save_sidereal_figure(series, path):
    fig, ax = _new_axes()
    hours = series.times / 3600.0
    ax.plot(hours, series.phases, lw=1.0, color="steelblue")
    period_h = series.period / 3600.0
    for n in range(1, int(hours[-1] / period_h) + 1):
        ax.axvline(n * period_h, color="gray", ls="--", lw=0.8)
    ax.set_xlabel("time (h); dashed lines mark whole rotation periods")
    ax.set_ylabel("relative phase (rad)")
    ax.set_title("sidereal modulation of the interferometer phase")
    return _finish(fig, path)


def save_dispersion_figure(rows, theta, path):
    rows = np.asarray(rows)
    fig, ax = _new_axes()
    for b in range(1, 5):
        ax.plot(rows[:, 0], rows[:, b], lw=1.0,
                label="walk branches" if b == 1 else None, color="steelblue")
    ax.plot(rows[:, 0], rows[:, 5], "--", color="crimson", lw=1.0, label="+sqrt(theta^2+kappa^2)")
    ax.plot(rows[:, 0], -rows[:, 5], "--", color="crimson", lw=1.0)
    ax.set_xlabel("kappa = |k| dx")
    ax.set_ylabel("omega dt")
    ax.set_title(f"walk dispersion vs continuum limit (theta = {theta:g})")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_trajectory_figure(rows, path):
    rows = np.asarray(rows)
    fig, ax = _new_axes()
    for i, label in ((1, "x"), (2, "y"), (3, "z")):
        ax.plot(rows[:, 0], rows[:, i], lw=1.0, label=label)
    ax.set_xlabel("step")
    ax.set_ylabel("position expectation (sites)")
    ax.set_title("wave-packet drift")
    ax.legend(fontsize=8)
    return _finish(fig, path)
