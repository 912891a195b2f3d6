"""Figure-helper smoke tests (headless backend, PNG artifacts)."""

from xctrace import figures


def test_bar_figure_writes_png(tmp_path):
    fig = figures.bar_figure(
        centers=[0.5, 1.5, 2.5], counts=[3, 1, 2],
        xlabel="hours", title="lifetimes",
        fit_curve=[3.0, 1.5, 1.0])
    target = tmp_path / "bars.png"
    figures.save_figure(fig, target)
    assert target.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_line_figure_writes_png(tmp_path):
    fig = figures.line_figure(
        x=[1, 2, 3], y=[0.2, 0.5, 0.9],
        xlabel="capacity", ylabel="hit rate", title="curve",
        ylim=(0.0, 1.0), hline=0.893, hline_label="target")
    target = tmp_path / "line.png"
    figures.save_figure(fig, target)
    assert target.stat().st_size > 500
