"""Figure rendering for the report path.

Renders the exact / predicted / Monte Carlo comparison produced by the
``report`` subcommand to an image file next to the CSV. Uses the Agg
backend so it works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_report_figure(rows: list[dict], path, title: str | None = None) -> None:
    """Two panels: moment curves over the x grid, and exact/predicted ratio.

    ``rows`` are the report dictionaries (keys x, exact, pred_N1, pred_N2,
    mc, mc_stderr, ratio_exact_over_pred_N2); missing values may be None.
    """

    def series(key):
        pts = [(r["x"], r[key]) for r in rows if r.get(key) is not None]
        if not pts:
            return [], []
        xs, ys = zip(*pts)
        return list(xs), list(ys)

    fig, (ax_top, ax_bot) = plt.subplots(
        2, 1, figsize=(6.4, 6.4), sharex=True, height_ratios=[2, 1]
    )

    for key, style, label in [
        ("exact", "o-", "exact"),
        ("pred_N1", "--", "one-term prediction"),
        ("pred_N2", "-.", "two-term prediction"),
    ]:
        xs, ys = series(key)
        if xs:
            ax_top.plot(xs, ys, style, label=label)
    xs, ys = series("mc")
    if xs:
        errs = [r["mc_stderr"] or 0.0 for r in rows if r.get("mc") is not None]
        ax_top.errorbar(xs, ys, yerr=errs, fmt="s", capsize=3, label="Monte Carlo")
    ax_top.set_xscale("log")
    ax_top.set_yscale("log")
    ax_top.set_ylabel(r"second moment of $\|S_f(x)\|_{HS}$")
    ax_top.legend(loc="best", fontsize=8)
    if title:
        ax_top.set_title(title)

    xs, ys = series("ratio_exact_over_pred_N2")
    if xs:
        ax_bot.plot(xs, ys, "o-", color="tab:red")
    ax_bot.axhline(1.0, color="gray", lw=0.8)
    ax_bot.set_xscale("log")
    ax_bot.set_xlabel("x")
    ax_bot.set_ylabel("exact / two-term")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
