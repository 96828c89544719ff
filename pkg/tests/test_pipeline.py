import json
import os

import numpy as np
import pytest

from turbotcut import PipelineConfig, parse_config, run_pipeline
from turbotcut.cli import main
from turbotcut.config import parse_config_text
from turbotcut.errors import ConfigError
from turbotcut.export import parse_cut_xml
from turbotcut.imgcore import save_gray
from turbotcut.synth import write_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    write_corpus(str(d), count=3, seed=0, adversarial=[1])
    return d


def test_config_defaults_and_precedence(tmp_path):
    assert parse_config() == PipelineConfig()
    f = tmp_path / "c.cfg"
    f.write_text("")
    assert parse_config(str(f)) == PipelineConfig()
    f.write_text("curve = parabola  # comment\nopen_radius = 15\n")
    cfg = parse_config(str(f), {"curve": "ellipse"})
    assert cfg.curve == "ellipse" and cfg.open_radius == 15
    assert PipelineConfig().method == "hull" and PipelineConfig().curve == "ellipse"


@pytest.mark.parametrize("text", ["open_radius = -3", "colour = red", "method = magic", "max_level = 1.5",
                                  "close_enabled = maybe", "open_radius = 2.5", "no equals sign"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text) and PipelineConfig(**parse_config_text(text))


def test_unknown_key_lists_valid_keys():
    with pytest.raises(ConfigError, match="open_radius"):
        parse_config_text("colour = red")


def test_blank_image_no_specimen(tmp_path):
    p = tmp_path / "blank.png"
    save_gray(p, np.full((400, 300), 240, np.uint8))
    r = run_pipeline(p)
    assert not r.ok and r.error_stage == "segment" and r.exit_code == 3


def test_convex_specimen_fails_at_critical_points(tmp_path):
    # drawn at the working height: upscaling would add staircase steps to the contour
    yy, xx = np.mgrid[0:2000, 0:2400]
    img = np.full((2000, 2400), 230, np.uint8)
    img[((xx - 1200) / 800.0) ** 2 + ((yy - 1000) / 600.0) ** 2 <= 1] = 40
    p = tmp_path / "convex.png"
    save_gray(p, img)
    for method in ("hull", "hough"):
        r = run_pipeline(p, PipelineConfig(method=method))
        assert not r.ok and r.error_stage == "critical_points" and r.exit_code == 3


def test_corpus_member_end_to_end(corpus, tmp_path):
    img = corpus / "specimen_000.png"
    r = run_pipeline(img, out_xml=tmp_path / "a.xml", out_overlay=tmp_path / "a.png",
                     debug_dir=tmp_path / "dbg")
    assert r.ok and r.exit_code == 0
    pts, meta = parse_cut_xml((tmp_path / "a.xml").read_text())
    ys = pts[:, 1]
    assert np.all(np.abs(np.diff(ys)) == 1) and meta["curve"] == "ellipse"
    assert len(pts) == len(r.curve)
    assert set(r.timings) >= {"load", "scale", "segment", "clean", "roi", "critical_points", "curve", "export"}
    rep = r.report()
    assert {"u0", "gamma", "u1"} <= set(rep["segmentation"])
    dumped = sorted(os.listdir(tmp_path / "dbg"))
    assert "10_signal.csv" in dumped and "12_overlay.png" in dumped and "02_gamma.png" in dumped

    r2 = run_pipeline(img, out_xml=tmp_path / "b.xml", out_overlay=tmp_path / "b.png")
    assert (tmp_path / "a.xml").read_bytes() == (tmp_path / "b.xml").read_bytes()
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
    assert r2.critical_points == r.critical_points


def test_missing_image_is_io_error(tmp_path):
    r = run_pipeline(tmp_path / "nope.png")
    assert r.exit_code == 4 and r.error_stage == "load"


def test_cli_cut_batch_matches_single(corpus, tmp_path, capsys):
    imgs = [str(corpus / f"specimen_{i:03d}.png") for i in (0, 2)]
    assert main(["cut", *imgs, "--out-dir", str(tmp_path / "batch"), "--jobs", "2"]) == 0
    for img in imgs:
        stem = os.path.splitext(os.path.basename(img))[0]
        assert main(["cut", img, "--out-xml", str(tmp_path / f"{stem}.xml")]) == 0
        assert (tmp_path / "batch" / f"{stem}.xml").read_bytes() == (tmp_path / f"{stem}.xml").read_bytes()


def test_cli_stdout_and_report(corpus, tmp_path, capsys):
    img = str(corpus / "specimen_000.png")
    assert main(["cut", img, "--method", "hough", "--curve", "parabola", "--mm-per-px-x", "0.5",
                 "--report", str(tmp_path / "r.json")]) == 0
    out = capsys.readouterr().out
    pts, meta = parse_cut_xml(out)
    assert meta == {"units": "mm", "method": "hough", "curve": "parabola"}
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["ok"] and rep["critical_points"]["method"] == "hough"


def test_cli_exit_codes(corpus, tmp_path, capsys):
    assert main(["cut", str(tmp_path / "missing.png")]) == 4
    with pytest.raises(SystemExit) as exc:
        main(["cut", "x.png", "--method", "foo"])
    assert exc.value.code == 2
    assert main(["cut", str(corpus / "specimen_000.png"), "--open-radius", "-3"]) == 2
    blank = tmp_path / "blank.png"
    save_gray(blank, np.full((100, 100), 240, np.uint8))
    assert main(["cut", str(blank)]) == 3


def test_cli_config_file_precedence(corpus, tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("curve = parabola\n")
    img = str(corpus / "specimen_000.png")
    assert main(["cut", img, "--config", str(cfg)]) == 0
    assert parse_cut_xml(capsys.readouterr().out)[1]["curve"] == "parabola"
    assert main(["cut", img, "--config", str(cfg), "--curve", "ellipse"]) == 0
    assert parse_cut_xml(capsys.readouterr().out)[1]["curve"] == "ellipse"


def test_cli_evaluate(corpus, tmp_path, capsys):
    assert main(["evaluate", str(corpus), "--csv", str(tmp_path / "s.csv")]) == 0
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert len(rows) == 4
    passed = {r.split(",")[0]: r.split(",")[2] for r in rows[1:]}
    # the adversarial member fails, the others pass
    assert passed == {"specimen_000": "1", "specimen_001": "0", "specimen_002": "1"}
    assert main(["evaluate", str(corpus), "--min-success", "0.9"]) == 3
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["evaluate", str(empty)]) == 0


def test_cli_gen_corpus(tmp_path):
    assert main(["gen-corpus", "--out", str(tmp_path / "g"), "--count", "2", "--seed", "3"]) == 0
    names = sorted(os.listdir(tmp_path / "g"))
    assert names == ["specimen_000.png", "specimen_000.txt", "specimen_000_mask.png",
                     "specimen_001.png", "specimen_001.txt", "specimen_001_mask.png"]
