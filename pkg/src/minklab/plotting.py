"""Optional figure rendering for CLI reports (written next to the data files)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_loglog_report(report, path, expected=None):
    rows = np.array([r[:3] for r in report.grid], dtype=float)
    keep = rows[:, 1] > 0
    x, y, e = rows[keep, 0], rows[keep, 1], rows[keep, 2]
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.errorbar(x, y, yerr=e, fmt="o", ms=4, capsize=2, label="estimate")
    if expected is not None and len(x):
        ref = y[-1] * (x / x[-1]) ** expected
        ax.plot(x, ref, "--", lw=1, label=f"slope {expected:g}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("delta")
    ax.set_ylabel(report.quantity)
    if report.fitted_exponent is not None:
        ax.set_title(f"fitted exponent {report.fitted_exponent:.3f}", fontsize=9)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_traces(traces, path, limit=None):
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    for tr in traces:
        ax.plot(tr.times, tr.running_ratio, lw=0.7, alpha=0.6)
    if limit is not None:
        ax.axhline(limit, color="k", ls="--", lw=1)
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("running max of Delta / log t")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
