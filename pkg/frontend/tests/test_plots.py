import pytest

from scqec_plots.cli import main, render_to_files
from scqec_plots.render import (
    boundary,
    gantt,
    policy_bars,
    ratio_curve,
    scaling_curves,
    window_curves,
)
from scqec_plots.schemas import SchemaError, read_rows


def test_policy_bars_renders(artifacts, tmp_path):
    written = render_to_files("policy-bars", artifacts["stats"],
                              tmp_path / "fig5.png")
    assert [p.suffix for p in written] == [".png", ".svg"]
    assert all(p.stat().st_size > 0 for p in written)

    rows = read_rows(artifacts["stats"], "stats")
    assert len(rows) == 7
    fig = policy_bars(rows)
    assert len(fig.axes[0].patches) == 7  # one bar per policy
    assert len(fig.axes) == 2  # utilization overlay


def test_window_renders(artifacts, tmp_path):
    written = render_to_files("window", artifacts["window"],
                              tmp_path / "window")
    assert all(p.exists() for p in written)
    fig = window_curves(read_rows(artifacts["window"], "window"))
    assert fig.axes[0].get_xscale() == "log"


def test_boundary_one_curve_per_family(artifacts, tmp_path):
    rows = read_rows(artifacts["boundary"], "boundary")
    assert {r["family"] for r in rows} == {"par1.5", "par8"}
    fig = boundary(rows)
    ax = fig.axes[0]
    assert len(ax.lines) == 2
    assert ax.get_xscale() == ax.get_yscale() == "log"
    written = render_to_files("boundary", artifacts["boundary"],
                              tmp_path / "fig9.svg")
    assert all(p.exists() for p in written)


def test_scaling_and_ratio_render(artifacts, tmp_path):
    rows = read_rows(artifacts["scaling"], "scaling")
    fig = scaling_curves(rows)
    ax = fig.axes[0]
    assert len(ax.lines) == 2  # one curve per encoding
    assert ax.get_xscale() == ax.get_yscale() == "log"
    fig2 = ratio_curve(rows)
    assert fig2.axes[0].get_xscale() == "log"
    for kind in ("scaling", "ratio"):
        written = render_to_files(kind, artifacts["scaling"],
                                  tmp_path / kind)
        assert all(p.exists() for p in written)


def test_gantt_renders(artifacts, tmp_path):
    rows = read_rows(artifacts["gantt"], "gantt")
    fig = gantt(rows)
    assert len(fig.axes[0].patches) == len(rows)
    written = render_to_files("gantt", artifacts["gantt"], tmp_path / "g")
    assert all(p.exists() for p in written)


def test_gantt_shared_links_never_overlap(artifacts):
    rows = read_rows(artifacts["gantt"], "gantt")
    by_link = {}
    for r in rows:
        if not r["links"]:
            continue  # zero-length braids hold no links
        for link in r["links"].split(";"):
            by_link.setdefault(link, []).append((r["open"], r["close"]))
    assert by_link, "expected at least one routed braid"
    for link, spans in by_link.items():
        spans.sort()
        # spans are half-open [open, close): back-to-back reuse is fine
        for (o1, c1), (o2, c2) in zip(spans, spans[1:]):
            assert c1 <= o2, f"braids overlap on link {link}"


def test_missing_column_is_named(artifacts, tmp_path, capsys):
    lines = artifacts["stats"].read_text().splitlines()
    header = lines[0].split(",")
    drop = header.index("utilization")
    mangled = tmp_path / "bad.csv"
    mangled.write_text("\n".join(
        ",".join(v for i, v in enumerate(line.split(",")) if i != drop)
        for line in lines
    ))
    assert main(["policy-bars", "--in", str(mangled),
                 "--out", str(tmp_path / "x.png")]) == 1
    err = capsys.readouterr().err
    assert "utilization" in err


def test_empty_input_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("W,epr_high_water,schedule_length,stall_cycles\n")
    with pytest.raises(SchemaError, match="no data rows"):
        read_rows(empty, "window")


def test_bad_value_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("op,open,close,links\n1,zero,5,\n")
    with pytest.raises(SchemaError, match="'open'"):
        read_rows(bad, "gantt")


def test_unknown_kind_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["heatmap", "--in", "x.csv", "--out", "y.png"])
    assert e.value.code == 2


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["gantt", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "g.png")]) == 1
    assert "nope.csv" in capsys.readouterr().err
