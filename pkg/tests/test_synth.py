import csv

import numpy as np
import pytest

from thermoface.raster import read_pnm
from thermoface.synth import SynthParams, _line, make_subject, render, synth_faces


def test_corpus_size_and_layout(tmp_path):
    paths = synth_faces(tmp_path, 7, 34, (128, 128), seed=0)
    assert len(paths) == 238
    assert sorted(p.name for p in tmp_path.iterdir() if p.is_dir()) == [f"s{k:02d}" for k in range(7)]
    assert all(len(list((tmp_path / f"s{k:02d}").glob("*.pgm"))) == 34 for k in range(7))
    assert read_pnm(paths[0]).shape == (128, 128)


def test_same_seed_same_bytes(tmp_path):
    a = synth_faces(tmp_path / "a", 2, 3, (64, 48), seed=9)
    b = synth_faces(tmp_path / "b", 2, 3, (64, 48), seed=9)
    c = synth_faces(tmp_path / "c", 2, 3, (64, 48), seed=10)
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]
    assert [p.read_bytes() for p in a] != [p.read_bytes() for p in c]
    assert (tmp_path / "a/minutiae.csv").read_bytes() == (tmp_path / "b/minutiae.csv").read_bytes()
    assert read_pnm(a[0]).shape == (48, 64)


def test_bad_counts_rejected(tmp_path):
    with pytest.raises(ValueError):
        synth_faces(tmp_path, 1, 34)
    with pytest.raises(ValueError):
        synth_faces(tmp_path, 2, 0)


def test_sidecar_matches_images(tmp_path):
    synth_faces(tmp_path, 3, 4, (96, 96), seed=2)
    with open(tmp_path / "minutiae.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["image"] for r in rows} == {f"s{s:02d}/s{s:02d}_{i:03d}.pgm"
                                         for s in range(3) for i in range(4)}
    assert {r["kind"] for r in rows} <= {"termination", "bifurcation"}
    assert all(0 <= int(r["x"]) < 96 and 0 <= int(r["y"]) < 96 for r in rows)


def test_line_is_8_connected():
    for x1, y1 in [(10, 3), (-4, 7), (0, -9), (5, 5), (0, 0)]:
        pts = _line(0, 0, x1, y1)
        assert pts[0] == (0, 0) and pts[-1] == (x1, y1)
        for (a, b), (c, d) in zip(pts, pts[1:]):
            assert max(abs(a - c), abs(b - d)) == 1


def test_planted_points_lie_on_vessels():
    rng = np.random.default_rng(3)
    subject = make_subject(rng, (128, 128))
    assert subject.minutiae
    img, (dx, dy) = render(subject, (128, 128), rng, noise_sigma=0.0)
    p = SynthParams()
    for x, y, _ in subject.minutiae:
        assert img[y + dy, x + dx] == p.face + p.vessel_contrast


def test_noise_free_render_has_three_levels():
    rng = np.random.default_rng(4)
    subject = make_subject(rng, (96, 96))
    img, _ = render(subject, (96, 96), rng, noise_sigma=0.0)
    p = SynthParams()
    assert set(np.unique(img).tolist()) == {p.background, p.face, p.face + p.vessel_contrast}
