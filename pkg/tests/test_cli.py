import csv
import io
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from coldist.cli import main, read_ordering
from coldist.imageio import read_image, write_png
from coldist.naming import load_ground_matrix, save_naming_table

DATA = Path(__file__).parent / "data"
PALETTE = DATA / "strip_palette.csv"
LIGHT_BLUES = 10
SYN = ["--synthetic-table"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_dist(text):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["a", "b", "coldist", "tc", "ne", "ciede2000"]
    return dict(zip(rows[0][2:], map(float, rows[1][2:])))


def test_dist_black_white(capsys):
    code, out, _ = run(capsys, "dist", "000000", "#FFFFFF", *SYN)
    assert code == 0
    vals = parse_dist(out)
    assert vals["tc"] == 1.0
    assert vals["ciede2000"] == pytest.approx(100.0, abs=1e-9)
    assert out.splitlines()[1].startswith("000000,ffffff,")


def test_dist_identical(capsys):
    code, out, _ = run(capsys, "dist", "1e90ff", "1e90ff", *SYN)
    vals = parse_dist(out)
    assert vals["coldist"] == pytest.approx(0.0066928509242848554, abs=1e-12)
    assert vals["tc"] == vals["ne"] == vals["ciede2000"] == 0.0


def test_numbers_have_nine_significant_digits(capsys):
    _, out, _ = run(capsys, "dist", "123456", "abcdef", *SYN)
    for field in out.splitlines()[1].split(",")[2:]:
        digits = field.replace(".", "").replace("-", "").lstrip("0").split("e")[0]
        assert len(digits) >= 9 or float(field) in (0.0, 1.0, 100.0)


@pytest.mark.parametrize("argv", [
    ["dist", "12345", "000000"],
    ["dist", "zz0000", "000000"],
    ["dist", "000000", "ffffff", "--metric", "cie94"],
    ["dist", "000000", "ffffff", "--T", "0"],
    ["edge", "x.png", "--radius", "1"],
    ["bogus"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(argv + SYN)
        raise SystemExit(code)
    assert info.value.code == 2


def test_missing_table_is_usage_error(capsys, monkeypatch):
    monkeypatch.delenv("COLDIST_NAMING_TABLE", raising=False)
    code, _, err = run(capsys, "dist", "000000", "ffffff")
    assert code == 2
    assert "--synthetic-table" in err


def test_strip_reference_first(capsys, tmp_path):
    pal = tmp_path / "p.csv"
    pal.write_text("ff0000\n00ff00\n0000ff\n")
    out_png = tmp_path / "s.png"
    for metric in ("coldist", "tc", "ne", "ciede2000"):
        code, out, _ = run(capsys, "strip", "00ff00", pal, "--metric", metric, "--out", out_png, *SYN)
        assert code == 0
        ordering = read_ordering(out_png.with_suffix(".csv"))
        assert ordering[0][1].to_hex() == "00ff00"
        assert [r for r, _, _ in ordering] == [0, 1, 2]


def test_strip_image_layout(capsys, tmp_path):
    pal = tmp_path / "p.csv"
    pal.write_text("ffffff\n000000\n")
    out_png = tmp_path / "s.png"
    run(capsys, "strip", "808080", pal, "--out", out_png, "--metric", "ne", *SYN)
    img = read_image(out_png)
    assert img.shape == (64, 24 * 3 + 8, 3)
    assert tuple(img[0, 0]) == (128, 128, 128)


def test_two_color_strip_matches_dist(capsys, tmp_path):
    ref, x, y = "4682b4", "87ceeb", "9370db"
    pal = tmp_path / "p.csv"
    pal.write_text(f"{x}\n{y}\n")
    _, out_x, _ = run(capsys, "dist", ref, x, *SYN)
    _, out_y, _ = run(capsys, "dist", ref, y, *SYN)
    dx, dy = parse_dist(out_x), parse_dist(out_y)
    for metric in ("coldist", "tc", "ne", "ciede2000"):
        run(capsys, "strip", ref, pal, "--metric", metric, "--out", tmp_path / "s.png", *SYN)
        ordering = read_ordering(tmp_path / "s.csv")
        first = x if dx[metric] <= dy[metric] else y
        assert ordering[0][1].to_hex() == first
        assert ordering[0][2] == pytest.approx(min(dx[metric], dy[metric]), rel=1e-11)


def test_strip_stable_ties(capsys, tmp_path):
    pal = tmp_path / "p.csv"
    pal.write_text("hex\n000000\n# comment\n\n000000\nffffff\n")
    run(capsys, "strip", "000000", pal, "--metric", "tc", "--out", tmp_path / "s.png", *SYN)
    assert [c.to_hex() for _, c, _ in read_ordering(tmp_path / "s.csv")] == ["000000", "000000", "ffffff"]


def test_strip_data_errors(capsys, tmp_path):
    one = tmp_path / "one.csv"
    one.write_text("000000\n")
    assert run(capsys, "strip", "000000", one, "--out", tmp_path / "s.png", *SYN)[0] == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("000000\nnothex\n")
    code, _, err = run(capsys, "strip", "000000", bad, "--out", tmp_path / "s.png", *SYN)
    assert code == 3 and "bad.csv:2" in err
    assert run(capsys, "strip", "000000", tmp_path / "missing.csv", *SYN)[0] == 3


def mean_light_blue_rank(capsys, tmp_path, metric, table_args):
    run(capsys, "strip", "0000ff", PALETTE, "--metric", metric, "--out", tmp_path / f"{metric}.png", *table_args)
    ordering = read_ordering(tmp_path / f"{metric}.csv")
    rank = {}
    for r, c, _ in ordering:
        rank.setdefault(c.to_hex(), r)
    palette = [line.strip() for line in PALETTE.read_text().splitlines() if line and not line.startswith("#")]
    assert len(palette) == 30
    return np.mean([rank[h] for h in palette[:LIGHT_BLUES]])


def test_light_blues_rank_earlier_synthetic(capsys, tmp_path):
    assert mean_light_blue_rank(capsys, tmp_path, "coldist", SYN) < \
        mean_light_blue_rank(capsys, tmp_path, "ciede2000", SYN)


@pytest.mark.published_table
def test_light_blues_rank_earlier_published(capsys, tmp_path, published_table, published_table_csv):
    args = ["--table", published_table_csv]
    assert mean_light_blue_rank(capsys, tmp_path, "coldist", args) < \
        mean_light_blue_rank(capsys, tmp_path, "ciede2000", args)


def test_learn_d(capsys, tmp_path):
    dest = tmp_path / "D.csv"
    code, out, _ = run(capsys, "learn-d", "--t", "0.7", "--out", dest, *SYN)
    assert code == 0
    assert "min=" in out and "median=" in out and "max=" in out
    D = load_ground_matrix(dest)
    assert D.d.shape == (11, 11)
    again = tmp_path / "D2.csv"
    run(capsys, "learn-d", "--t", "0.7", "--out", again, *SYN)
    assert dest.read_bytes() == again.read_bytes()


def test_learn_d_with_table_file(capsys, tmp_path, table):
    path = tmp_path / "names.csv"
    save_naming_table(table, path)
    code, _, _ = run(capsys, "learn-d", "--table", path, "--out", tmp_path / "D.csv")
    assert code == 0
    # the ground matrix can then be passed back in
    code, out, _ = run(capsys, "dist", "000000", "0000ff", "--table", path, "--ground", tmp_path / "D.csv")
    assert code == 0


def test_learn_d_ingestion_error_verbatim(capsys, tmp_path, table):
    path = tmp_path / "names.csv"
    save_naming_table(table, path)
    lines = path.read_text().splitlines()
    lines[3] = lines[3].rsplit(",", 1)[0] + ",7.5"
    path.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "learn-d", "--table", path, "--out", tmp_path / "D.csv")
    assert code == 3
    assert "row 3" in err
    assert run(capsys, "learn-d", "--table", tmp_path / "nope.csv")[0] == 3


def step_png(path, size=40):
    img = np.zeros((size, size, 3), dtype=np.uint8)
    img[:, : size // 2] = (30, 60, 200)
    img[:, size // 2:] = (220, 120, 40)
    write_png(path, img)
    return img


def test_edge_constant_image_black(capsys, tmp_path):
    src = tmp_path / "flat.png"
    write_png(src, np.full((24, 24, 3), 90, dtype=np.uint8))
    code, out, _ = run(capsys, "edge", src, "--radius", "4", "--out", tmp_path / "e.png", *SYN)
    assert code == 0
    assert "max_strength=0" in out
    assert not read_image(tmp_path / "e.png").any()


def test_edge_step_and_metric_selector(capsys, tmp_path):
    src = tmp_path / "step.png"
    step_png(src)
    shapes = []
    for metric in ("coldist", "ne"):
        dest = tmp_path / f"{metric}.png"
        code, out, _ = run(capsys, "edge", src, "--radius", "4", "--metric", metric, "--out", dest, *SYN)
        assert code == 0 and f"metric={metric}" in out
        gray = read_image(dest)[..., 0]
        assert int(np.argmax(gray.mean(axis=0))) in (19, 20)
        shapes.append(gray.shape)
    assert shapes[0] == shapes[1] == (40, 40)


def test_edge_thin_flag(capsys, tmp_path):
    src = tmp_path / "step.png"
    step_png(src)
    code, _, _ = run(capsys, "edge", src, "--radius", "4", "--thin", "--out", tmp_path / "t.png", *SYN)
    assert code == 0
    gray = read_image(tmp_path / "t.png")[..., 0]
    assert np.count_nonzero(gray[20]) <= 3


def test_edge_ppm_input(capsys, tmp_path):
    img = np.zeros((20, 20, 3), dtype=np.uint8)
    img[:, 10:] = 255
    src = tmp_path / "in.ppm"
    src.write_bytes(b"P6\n20 20\n255\n" + img.tobytes())
    assert run(capsys, "edge", src, "--radius", "3", "--out", tmp_path / "e.png", *SYN)[0] == 0


def test_edge_data_errors(capsys, tmp_path):
    junk = tmp_path / "junk.png"
    junk.write_bytes(b"\x89PNG not really")
    assert run(capsys, "edge", junk, *SYN)[0] == 3
    assert run(capsys, "edge", tmp_path / "missing.png", *SYN)[0] == 3
    small = tmp_path / "small.png"
    write_png(small, np.zeros((10, 10, 3), dtype=np.uint8))
    assert run(capsys, "edge", small, *SYN)[0] == 3


def test_edge_byte_identical_reruns(capsys, tmp_path):
    src = tmp_path / "step.png"
    step_png(src)
    outs = []
    for k in range(2):
        dest = tmp_path / f"e{k}.png"
        _, out, _ = run(capsys, "edge", src, "--radius", "4", "--out", dest, *SYN)
        outs.append((dest.read_bytes(), out.split(" wrote")[0]))
    assert outs[0] == outs[1]


def test_module_entry_point_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "coldist", "dist", "000000", "ffffff", "--synthetic-table",
                         "--metric", "ne"], capture_output=True, text=True)
    assert ok.returncode == 0 and ok.stdout.startswith("a,b,")
    bad = subprocess.run([sys.executable, "-m", "coldist", "dist", "0000", "ffffff", "--synthetic-table"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
