"""Rendering each figure from golden summaries, with cardinality checks."""

from pathlib import Path

import pytest

from belief_mpc_figures import (FIGURE_IDS, FigureSpec, SchemaError, Style,
                                load_summary, make_spec, render)
from belief_mpc_figures.io import sha256_inputs, summary_schema

# What each golden summary must produce: goldens cover the full
# experiment grids (3 main controllers, 6-point horizon and radius
# grids, 4 runtime controllers, 3x3 heatmap cells, 20 gap quantiles,
# 2 init schemes x 6 budgets, 3 input coordinates) at 2 trials, T = 20.
EXPECTED = {
    "h-sweep": {"panels": 1, "lines": 3, "points": 18},
    "decompose": {"panels": 1, "lines": 3, "cells": 9, "points": 9},
    "kf-diag": {"panels": 2, "lines": 6, "points": 126},
    "counterfactual": {"panels": 3, "lines": 3, "points": 60},
    "synthetic-gap": {"panels": 1, "lines": 1, "points": 20},
    "heatmap": {"panels": 1, "cells": 9},
    "rho-sweep": {"panels": 1, "lines": 3, "points": 18},
    "runtime": {"panels": 1, "lines": 4, "points": 24},
    "init-study": {"panels": 1, "lines": 2, "points": 12},
}


def png_text_chunks(path):
    """Keyword -> value from a PNG file's tEXt chunks."""
    data = Path(path).read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n", "not a PNG file"
    chunks = {}
    i = 8
    while i < len(data):
        length = int.from_bytes(data[i:i + 4], "big")
        kind = data[i + 4:i + 8]
        if kind == b"tEXt":
            key, _, value = data[i + 8:i + 8 + length].partition(b"\x00")
            chunks[key.decode("latin-1")] = value.decode("latin-1")
        i += 12 + length
    return chunks


def test_figure_ids_cover_all_experiments():
    assert set(FIGURE_IDS) == set(EXPECTED)


@pytest.mark.parametrize("figure_id", sorted(EXPECTED))
def test_renders_with_expected_cardinalities(figure_id, golden_dir, tmp_path):
    out = tmp_path / f"{figure_id}.png"
    report = render(make_spec(figure_id, golden_dir(figure_id), out))
    assert out.is_file() and out.stat().st_size > 0
    for attr, want in EXPECTED[figure_id].items():
        assert getattr(report, attr) == want, (figure_id, attr)
    assert report.input_sha


def test_heatmap_cells_carry_percent_annotations(golden_dir, tmp_path):
    report = render(make_spec("heatmap", golden_dir("heatmap"),
                              tmp_path / "heat.png"))
    assert len(report.annotations) == 9
    assert all(a.endswith("%") for a in report.annotations)
    # Annotations are the tabulated values, formatted, not recomputed.
    rows = load_summary("heatmap", golden_dir("heatmap") / "summary.csv")
    assert report.annotations == [f"{r['mean']:.1f}%" for r in rows]


def test_image_embeds_input_checksum(golden_dir, tmp_path):
    out = tmp_path / "sweep.png"
    report = render(make_spec("h-sweep", golden_dir("h-sweep"), out))
    chunks = png_text_chunks(out)
    assert chunks.get("harness-input-sha256") == report.input_sha
    assert report.input_sha == sha256_inputs(
        [golden_dir("h-sweep") / "summary.csv"])


def test_render_is_deterministic_and_read_only(golden_dir, tmp_path):
    src = golden_dir("rho-sweep") / "summary.csv"
    before = src.read_bytes()
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(make_spec("rho-sweep", golden_dir("rho-sweep"), a))
    render(make_spec("rho-sweep", golden_dir("rho-sweep"), b))
    assert a.read_bytes() == b.read_bytes()
    assert src.read_bytes() == before


def test_schema_mismatch_names_columns(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text("experiment,system,controller,horizon,mean,stderr,ci95\n"
                    "h-sweep,random,sep,5,1.0,0.0,0.0\n")
    with pytest.raises(SchemaError) as err:
        load_summary("h-sweep", path)
    message = str(err.value)
    assert "missing columns: H" in message
    assert "unexpected columns: horizon" in message


def test_schema_checks_cross_experiment(golden_dir, tmp_path):
    # Pointing one figure at another experiment's summary must fail with
    # a diagnostic, not render garbage.
    with pytest.raises(SchemaError, match="missing columns"):
        render(make_spec("decompose", golden_dir("h-sweep"),
                         tmp_path / "x.png"))


def test_malformed_inputs_rejected(tmp_path):
    with pytest.raises(SchemaError, match="no such input file"):
        load_summary("h-sweep", tmp_path / "absent.csv")
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError, match="empty file"):
        load_summary("h-sweep", empty)
    header_only = tmp_path / "header.csv"
    header_only.write_text(",".join(summary_schema("h-sweep")) + "\n")
    with pytest.raises(SchemaError, match="no data rows"):
        load_summary("h-sweep", header_only)
    bad_cell = tmp_path / "bad.csv"
    bad_cell.write_text(",".join(summary_schema("h-sweep")) + "\n"
                        "h-sweep,random,sep,five,1.0,0.0,0.0\n")
    with pytest.raises(SchemaError, match="column 'H'"):
        load_summary("h-sweep", bad_cell)


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError, match="unknown figure id"):
        FigureSpec(figure_id="bar-chart", inputs=(), output=tmp_path / "x.png",
                   style=Style())
