from typing import Any, Dict, List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .classes import FormatError  # noqa: E402
from .utils import log  # noqa: E402
from .utils.codecs import read_rows  # noqa: E402

__all__ = ["emit_plot"]

PLOT_KINDS = ("line", "scatter", "roc")


def _column(rows: List[Dict[str, str]], name: str, path: str) -> np.ndarray:
    """Column as floats; blank cells become NaN."""
    try:
        return np.array([float(r[name]) if r[name] not in ("", None) else np.nan for r in rows])
    except (KeyError, ValueError) as e:
        raise FormatError(f"Column {name!r} of {path} is missing or not numeric", "emit_plot", details=str(e))


def emit_plot(table: str, style: Dict[str, Any], output: Optional[str] = None) -> str:
    """
    Render a CSV table to a standalone SVG.

    Args:
        table (str): CSV path
        style (dict): ``kind`` (line, scatter or roc), ``x``, ``y`` (list of
            columns), optional ``group`` column, ``xlabel``, ``ylabel``,
            ``logx``, ``title``
        output (str, optional): SVG path, defaults to the table path with .svg

    Returns:
        str: Path of the written SVG

    Raises:
        FormatError: Empty or malformed table, unknown plot kind
    """
    kind = style.get("kind", "line")
    if kind not in PLOT_KINDS:
        raise FormatError(f"Unknown plot kind {kind!r}", "emit_plot", details=f"known: {PLOT_KINDS}")
    header, rows = read_rows(table)
    if not rows:
        raise FormatError(f"Table {table} is empty", "emit_plot")
    output = output or (table[:-4] if table.endswith(".csv") else table) + ".svg"

    # fixed ids and no timestamp keep the SVG bytes reproducible
    with plt.rc_context({"svg.hashsalt": "doppler-cazac", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        group = style.get("group")
        groups = sorted({r[group] for r in rows}) if group else [None]
        for g in groups:
            subset = [r for r in rows if g is None or r[group] == g]
            x = _column(subset, style["x"], table)
            for y_name in style["y"]:
                y = _column(subset, y_name, table)
                label = y_name if g is None else f"{g}"
                if kind == "scatter":
                    ax.scatter(x, y, s=8, label=label)
                else:
                    keep = np.isfinite(x) & np.isfinite(y)
                    if kind == "roc" and style.get("logx"):
                        keep &= x > 0
                    ax.plot(x[keep], y[keep], marker="." if kind == "roc" else None, label=label)
        if style.get("logx"):
            ax.set_xscale("log")
        ax.set_xlabel(style.get("xlabel", style["x"]))
        ax.set_ylabel(style.get("ylabel", ", ".join(style["y"])))
        if style.get("title"):
            ax.set_title(style["title"])
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(output, format="svg", metadata={"Date": None})
        plt.close(fig)
    log.debug(f"Plot written to {output}")
    return output
