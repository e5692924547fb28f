"""Static SVG bar charts of per-group prediction distributions."""

import io
import logging

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.bias.analysis import BiasReport  # noqa: E402
from src.exceptions import UsageError  # noqa: E402

logger = logging.getLogger(__name__)


def render_svg(report: BiasReport) -> str:
    """One panel per attribute; bars show each group's share of rows per bin."""
    attributes: dict[tuple[str, ...], list[str]] = {}
    for name, summary in report.summaries.items():
        attributes.setdefault(summary.group.columns, []).append(name)
    if not attributes:
        raise UsageError("the report has no groups to plot")

    plt.rcParams["svg.hashsalt"] = "fairgen"
    fig, axes = plt.subplots(
        len(attributes), 1, figsize=(8, 3 * len(attributes)), squeeze=False
    )
    for ax, (columns, names) in zip(axes[:, 0], sorted(attributes.items()), strict=True):
        width = 1.0 / (report.bins * (len(names) + 1))
        for i, name in enumerate(names):
            hist = report.summaries[name].histogram
            ax.bar(hist.bin_edges[:-1] + (i + 0.5) * width, hist.normalized, width, label=name)
        ax.set_title(",".join(columns) or "all rows")
        ax.set_xlabel("predicted P(positive)")
        ax.set_ylabel("share of group")
        ax.set_xticks(np.linspace(0.0, 1.0, report.bins + 1))
        ax.legend(fontsize="small")
    fig.tight_layout()

    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"Rendered {len(attributes)} histogram panel(s)")
    return buffer.getvalue()
