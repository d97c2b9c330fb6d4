"""Chart rendering for campaign CSVs.

render() extracts the plotted series first and returns them alongside
writing the image, so tests can assert on exactly what was drawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .data import EXPERIMENT_TABLES, fig1_series, fig2_series, fig3_series, load_experiment_tables

IMAGE_FORMATS = (".png", ".svg")


@dataclass(frozen=True)
class FigureSpec:
    input_csv_paths: tuple
    figure: str
    output_image_path: str

    def __post_init__(self):
        if self.figure not in EXPERIMENT_TABLES:
            raise ValueError(f"figure must be one of {tuple(EXPERIMENT_TABLES)}")
        if not any(self.output_image_path.endswith(ext) for ext in IMAGE_FORMATS):
            raise ValueError(f"output image must end in one of {IMAGE_FORMATS}")
        object.__setattr__(self, "input_csv_paths", tuple(self.input_csv_paths))


def _draw_fig1(series: dict, axes):
    ax = axes[0]
    ax.plot(series["gamma"], series["proportion"], marker="o", markersize=2.5)
    ax.set_xlabel("discount factor")
    ax.set_ylabel("proportion where the tightness condition holds")
    ax.set_ylim(-0.02, 1.02)


def _draw_fig2(series: dict, axes):
    left, right = axes
    for n_obs, values in series["blackwell"].items():
        left.hist(values, bins=20, histtype="step", label=f"|O| = {n_obs}")
    left.set_xlabel("Blackwell discount factor")
    left.set_ylabel("count")
    left.legend(fontsize=7)
    for n_obs, curve in series["mean_bias"].items():
        right.plot(series["gamma"], curve, label=f"|O| = {n_obs}")
    right.set_xlabel("discount factor")
    right.set_ylabel("mean normalized bias")
    right.legend(fontsize=7)


def _draw_fig3(series: dict, axes):
    left, right = axes
    for n_obs, values in series["kappa_ratio"].items():
        left.hist(values, bins=20, histtype="step", label=f"|O| = {n_obs}")
    left.set_xlabel("normalized value-function variation")
    left.set_ylabel("count")
    left.legend(fontsize=7)
    for n_obs, values in series["delta_ratio"].items():
        right.hist(values, bins=20, histtype="step", label=f"|O| = {n_obs}")
    right.set_xlabel("normalized action variation")
    right.set_ylabel("count")
    right.legend(fontsize=7)


def extract_series(spec: FigureSpec) -> dict:
    tables = load_experiment_tables(spec.figure, list(spec.input_csv_paths))
    if spec.figure == "fig1":
        return fig1_series(tables["fig1"])
    if spec.figure == "fig2":
        return fig2_series(tables["fig2_blackwell"], tables["fig2_bias"])
    return fig3_series(tables["fig3"])


def render(spec: FigureSpec) -> dict:
    """Write the chart for the spec and return the plotted series."""
    series = extract_series(spec)
    n_panels = 1 if spec.figure == "fig1" else 2
    fig, axes = plt.subplots(1, n_panels, figsize=(4.5 * n_panels, 3.4))
    axes = [axes] if n_panels == 1 else list(axes)
    if spec.figure == "fig1":
        _draw_fig1(series, axes)
    elif spec.figure == "fig2":
        _draw_fig2(series, axes)
    else:
        _draw_fig3(series, axes)
    fig.tight_layout()
    fig.savefig(spec.output_image_path)
    plt.close(fig)
    return series
