"""The nine figure renderers.

Every renderer consumes one experiment's summary CSV and draws exactly
the values in it: line plots carry the tabulated mean with a ci95 band,
the gap plot carries the tabulated median and quartiles, and the heatmap
cells carry the tabulated percentage. Each render returns a report of
what was drawn (panels, lines, cells, points) so callers can check
cardinalities without parsing the image.
"""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt

from .io import AXIS_COLUMNS, SchemaError, load_summary, sha256_inputs

FIGURE_IDS = tuple(AXIS_COLUMNS)


@dataclass(frozen=True)
class Style:
    """Per-figure presentation switches."""

    log_x: bool = False
    log_y: bool = False
    ci_bands: bool = True
    diagonal: bool = False
    annotate_cells: bool = False


_DEFAULT_STYLES = {
    "h-sweep": Style(),
    "decompose": Style(),
    "kf-diag": Style(),
    "counterfactual": Style(ci_bands=False, diagonal=True),
    "synthetic-gap": Style(log_x=True, log_y=True),
    "heatmap": Style(ci_bands=False, annotate_cells=True),
    "rho-sweep": Style(),
    "runtime": Style(log_y=True, ci_bands=False),
    "init-study": Style(),
}


@dataclass(frozen=True)
class FigureSpec:
    """What to render: figure id, input files, output image, style."""

    figure_id: str
    inputs: tuple
    output: Path
    style: Style

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}; choose "
                             f"from {sorted(FIGURE_IDS)}")


@dataclass
class RenderReport:
    """What a render drew, plus the input checksum embedded in the image."""

    figure_id: str
    output: Path
    panels: int = 0
    lines: int = 0
    cells: int = 0
    points: int = 0
    annotations: list = field(default_factory=list)
    input_sha: str = ""


def make_spec(figure_id, in_dir, out_file, style=None) -> FigureSpec:
    """Spec for rendering figure_id from an experiment output directory."""
    if style is None:
        style = _DEFAULT_STYLES.get(figure_id, Style())
    return FigureSpec(figure_id=figure_id,
                      inputs=(Path(in_dir) / "summary.csv",),
                      output=Path(out_file), style=style)


def _ordered_unique(values):
    return list(dict.fromkeys(values))


def _series(rows, key_col, x_col):
    """Rows grouped by key_col in file order, each sorted by x_col."""
    by = {}
    for row in rows:
        by.setdefault(row[key_col], []).append(row)
    return {k: sorted(v, key=lambda r: r[x_col]) for k, v in by.items()}


def _title(rows, text):
    return f"{text} ({rows[0]['system']})"


def _apply_scales(ax, style):
    if style.log_x:
        ax.set_xscale("log")
    if style.log_y:
        ax.set_yscale("log")


def _line_panel(ax, rows, key_col, x_col, style, report,
                y_col="mean", band=("ci95",)):
    """Mean-with-band lines, one per key; returns the keys drawn."""
    groups = _series(rows, key_col, x_col)
    for key, series in groups.items():
        xs = np.array([r[x_col] for r in series])
        ys = np.array([r[y_col] for r in series])
        ax.plot(xs, ys, marker="o", markersize=3, label=str(key))
        report.lines += 1
        report.points += len(xs)
        if style.ci_bands and band:
            half = np.array([r[band[0]] for r in series])
            ax.fill_between(xs, ys - half, ys + half, alpha=0.2)
    _apply_scales(ax, style)
    ax.grid(True, alpha=0.3)
    return list(groups)


def _draw_h_sweep(rows, style, report):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    report.panels = 1
    _line_panel(ax, rows, "controller", "H", style, report)
    ax.set_xlabel("planning horizon H")
    ax.set_ylabel("mean total cost")
    ax.set_title(_title(rows, "Total cost vs planning horizon"))
    ax.legend()
    return fig


def _draw_rho_sweep(rows, style, report):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    report.panels = 1
    _line_panel(ax, rows, "controller", "rho", style, report)
    ax.set_xlabel("spectral radius")
    ax.set_ylabel("mean total cost")
    ax.set_title(_title(rows, "Total cost vs spectral radius"))
    ax.legend()
    return fig


def _draw_runtime(rows, style, report):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    report.panels = 1
    _line_panel(ax, rows, "controller", "H", style, report)
    ax.set_xlabel("planning horizon H")
    ax.set_ylabel("mean wall clock per rollout [s]")
    ax.set_title(_title(rows, "Controller runtime vs planning horizon"))
    ax.legend()
    return fig


def _draw_init_study(rows, style, report):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    report.panels = 1
    _line_panel(ax, rows, "init", "max_iters", style, report)
    ax.set_xlabel("optimizer iteration budget")
    ax.set_ylabel("mean total cost")
    ax.set_title(_title(rows, "Cost vs optimizer budget by initialization"))
    ax.legend(title="init scheme")
    return fig


def _draw_decompose(rows, style, report):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    report.panels = 1
    components = _ordered_unique(r["component"] for r in rows)
    controllers = _ordered_unique(r["controller"] for r in rows)
    value = {(r["controller"], r["component"]): r for r in rows}
    width = 0.8 / len(controllers)
    base = np.arange(len(components), dtype=float)
    for i, ctrl in enumerate(controllers):
        offs = base + (i - (len(controllers) - 1) / 2) * width
        means = [value[ctrl, c]["mean"] for c in components]
        errs = [value[ctrl, c]["ci95"] for c in components]
        ax.bar(offs, means, width=width, label=ctrl,
               yerr=errs if style.ci_bands else None, capsize=2)
        report.lines += 1
        report.cells += len(components)
    report.points = len(rows)
    ax.set_xticks(base)
    ax.set_xticklabels(components)
    ax.set_ylabel("mean cost")
    ax.set_title(_title(rows, "Cost decomposition"))
    ax.legend()
    _apply_scales(ax, style)
    return fig


def _draw_kf_diag(rows, style, report):
    metrics = _ordered_unique(r["metric"] for r in rows)
    fig, axes = plt.subplots(len(metrics), 1, figsize=(5.6, 2.6 * len(metrics)),
                             sharex=True, constrained_layout=True)
    axes = np.atleast_1d(axes)
    report.panels = len(metrics)
    labels = {"est_err": "estimation error", "tr_sigma": "tr(covariance)"}
    for ax, metric in zip(axes, metrics):
        sub = [r for r in rows if r["metric"] == metric]
        _line_panel(ax, sub, "controller", "t", style, report)
        ax.set_ylabel(labels.get(metric, metric))
    axes[-1].set_xlabel("step t")
    axes[0].set_title(_title(rows, "Filter diagnostics"))
    axes[0].legend()
    return fig


def _draw_counterfactual(rows, style, report):
    coords = _ordered_unique(r["coord"] for r in rows)
    fig, axes = plt.subplots(1, len(coords), figsize=(2.9 * len(coords), 3.1),
                             constrained_layout=True)
    axes = np.atleast_1d(axes)
    report.panels = len(coords)
    for ax, coord in zip(axes, coords):
        sub = [r for r in rows if r["coord"] == coord]
        xs = np.array([r["u_sep_mpc"] for r in sub])
        ys = np.array([r["u_b_mpc"] for r in sub])
        ax.scatter(xs, ys, s=10, alpha=0.7)
        report.points += len(sub)
        if style.diagonal:
            lo = min(xs.min(), ys.min())
            hi = max(xs.max(), ys.max())
            pad = 0.05 * (hi - lo) if hi > lo else 1.0
            ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad],
                    linestyle="--", color="gray", linewidth=1)
            report.lines += 1
        ax.set_xlabel(f"applied input, coord {int(coord)}")
        ax.set_aspect("equal", adjustable="datalim")
        _apply_scales(ax, style)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel("re-planned input")
    fig.suptitle(_title(rows, "Applied vs re-planned inputs"))
    return fig


def _draw_synthetic_gap(rows, style, report):
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    report.panels = 1
    series = sorted(rows, key=lambda r: r["tr_sigma"])
    xs = np.array([r["tr_sigma"] for r in series])
    med = np.array([r["median"] for r in series])
    q25 = np.array([r["q25"] for r in series])
    q75 = np.array([r["q75"] for r in series])
    ax.plot(xs, med, marker="o", markersize=3, label="median gap")
    report.lines += 1
    report.points += len(xs)
    if style.ci_bands:
        ax.fill_between(xs, q25, q75, alpha=0.2, label="interquartile range")
    _apply_scales(ax, style)
    ax.set_xlabel("tr(covariance)")
    ax.set_ylabel("action gap")
    ax.set_title(_title(rows, "Action gap vs belief uncertainty"))
    ax.legend()
    ax.grid(True, alpha=0.3, which="both")
    return fig


def _draw_heatmap(rows, style, report):
    r_scales = _ordered_unique(r["r_scale"] for r in rows)
    c0s = _ordered_unique(r["c0"] for r in rows)
    grid = np.full((len(r_scales), len(c0s)), np.nan)
    for row in rows:
        grid[r_scales.index(row["r_scale"]), c0s.index(row["c0"])] = row["mean"]
    if np.isnan(grid).any():
        raise SchemaError("heatmap summary does not cover the full "
                          "r_scale x c0 grid")

    fig, ax = plt.subplots(figsize=(4.6, 4.0), constrained_layout=True)
    report.panels = 1
    image = ax.imshow(grid, cmap="viridis", aspect="auto")
    report.cells = grid.size
    span = float(grid.max() - grid.min()) or 1.0
    for i in range(len(r_scales)):
        for j in range(len(c0s)):
            text = f"{grid[i, j]:.1f}%"
            bright = (grid[i, j] - float(grid.min())) / span
            ax.text(j, i, text, ha="center", va="center",
                    color="black" if bright > 0.6 else "white", fontsize=9)
            if style.annotate_cells:
                report.annotations.append(text)
    ax.set_xticks(range(len(c0s)))
    ax.set_xticklabels([f"{c:g}" for c in c0s])
    ax.set_yticks(range(len(r_scales)))
    ax.set_yticklabels([f"{r:g}" for r in r_scales])
    ax.set_xlabel("base observation gain")
    ax.set_ylabel("input cost scale")
    ax.set_title(_title(rows, "Relative cost gain"))
    fig.colorbar(image, ax=ax, label="gain over full-horizon feedback [%]")
    return fig


_DRAWERS = {
    "h-sweep": _draw_h_sweep,
    "decompose": _draw_decompose,
    "kf-diag": _draw_kf_diag,
    "counterfactual": _draw_counterfactual,
    "synthetic-gap": _draw_synthetic_gap,
    "heatmap": _draw_heatmap,
    "rho-sweep": _draw_rho_sweep,
    "runtime": _draw_runtime,
    "init-study": _draw_init_study,
}


def render(spec: FigureSpec) -> RenderReport:
    """Validate inputs, draw the figure, and write the image file.

    Read-only over the inputs; the image embeds a SHA-256 over their
    bytes. Raises SchemaError when an input is missing or malformed.
    """
    rows = load_summary(spec.figure_id, spec.inputs[0])
    sha = sha256_inputs(spec.inputs)
    report = RenderReport(figure_id=spec.figure_id, output=spec.output,
                          input_sha=sha)
    fig = _DRAWERS[spec.figure_id](rows, spec.style, report)
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".png":
        metadata = {"harness-input-sha256": sha}
    else:
        metadata = {"Title": f"{spec.figure_id} [inputs sha256 {sha}]"}
    fig.savefig(out, dpi=150, metadata=metadata)
    plt.close(fig)
    return report
