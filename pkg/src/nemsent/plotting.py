"""SVG figures of scenario runs (matplotlib, non-interactive backend)."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

if TYPE_CHECKING:
    from .scenarios import ScenarioResult

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "nemsent",  # stable element ids between runs
}

LABELS = {
    "tangle_qr": r"$\tau$(qubit, resonator)",
    "entropy": r"$S$(qubits) [bits]",
    "mean_n": r"$\langle n \rangle$",
}


def _label(col: str) -> str:
    if col in LABELS:
        return LABELS[col]
    if col.startswith("tangle_q"):
        return rf"$\tau_{{{col[len('tangle_q'):].replace('q', '')}}}$"
    if col.startswith("itangle_q"):
        return rf"$\tau_{{{col[len('itangle_q')]}|\mathrm{{rest}}}}$"
    return col


def plot_columns(
    curves: Sequence[tuple[str, "ScenarioResult"]],
    path: str | Path,
    columns: Sequence[str] | None = None,
    title: str | None = None,
) -> Path:
    """Entanglement columns (top) and entropy or <n> (bottom) of one or more runs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.0, 4.8), sharex=True)
        for tag, res in curves:
            cols = columns or [c for c in res.columns if "tangle" in c]
            t = res.column("omega_t")
            for c in cols:
                name = _label(c) if not tag else f"{_label(c)} {tag}"
                top.plot(t, res.column(c), lw=1.0, label=name)
            lower = "entropy" if "entropy" in res.columns else "mean_n"
            bottom.plot(t, res.column(lower), lw=1.0, label=f"{_label(lower)} {tag}".strip())
        top.set_ylabel("tangle")
        top.set_ylim(bottom=0)
        top.legend(frameon=False, ncol=2)
        bottom.set_xlabel(r"$\omega t$")
        bottom.legend(frameon=False, ncol=2)
        if title:
            top.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def plot_scenario(result: "ScenarioResult", path: str | Path, title: str | None = None) -> Path:
    return plot_columns([("", result)], path, title=title)
