"""Figure rendering for CLI reports.

Every sweep the CLI writes as CSV is also rendered to a PNG next to it, so a
report directory is self-contained.  The Agg backend is forced so the
renderer works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

AXIS_LABELS = {
    "r": "squeezing parameter r",
    "eta_p": "party-channel transmission",
    "eta_s": "swap-channel transmission",
    "p_dark_s": "swap detector dark-count probability",
    "p_dark_p": "party detector dark-count probability",
    "sigma_a": "displacement amplitude noise (std dev)",
    "sigma_theta": "displacement phase noise (std dev, rad)",
}


def plot_sweep(rows, axis, n_parties, path, log_x=False):
    """Render one sweep curve (bell on the left axis, P(C) on the right)."""
    values = [row[0] for row in rows]
    bells = [row[1] for row in rows]
    p_success = [row[2] for row in rows]

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(values, bells, "o-", color="tab:blue", label="Bell value")
    ax.axhline(1.0, color="gray", linestyle=":", linewidth=1, label="local bound")
    ax.set_xlabel(AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("Bell value", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    if log_x:
        ax.set_xscale("log")

    twin = ax.twinx()
    twin.plot(values, p_success, "s--", color="tab:orange", label="P(C)")
    twin.set_ylabel("heralding probability P(C)", color="tab:orange")
    twin.tick_params(axis="y", labelcolor="tab:orange")

    ax.set_title(f"{n_parties}-party sweep over {AXIS_LABELS.get(axis, axis)}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_correlators(correlators, n_parties, path):
    """Bar chart of the full correlator table, indexed by packed settings."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    indices = range(len(correlators))
    ax.bar(indices, correlators, color="tab:blue")
    ax.set_xlabel("setting index (party p on bit p)")
    ax.set_ylabel("correlator")
    ax.set_ylim(-1.05, 1.05)
    ax.set_title(f"{n_parties}-party correlators")
    ax.set_xticks(list(indices))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
