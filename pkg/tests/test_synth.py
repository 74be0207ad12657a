import hashlib

import numpy as np
import pytest

from wcescreen.features import feature_distance, hsv_histogram

from wcescreen.frameio import load_annotations, load_sequence
from wcescreen.synth import SynthSpec, annotations_for, generate, lesion_positions, write_sequence


def digest(d):
    h = hashlib.sha256()
    for p in sorted(d.iterdir()):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def test_counts_for_the_default_case():
    spec = SynthSpec(scenes=50, repeats=200, lesions=20, seed=7)
    assert spec.total_frames == 10020
    a = annotations_for(spec)
    assert a.k == 20 and a.total_frames == 10020
    pos = lesion_positions(spec)
    assert pos == sorted(pos) and len(set(pos)) == 20 and max(pos) < 10020


def test_generate_emits_every_index_in_order():
    spec = SynthSpec(scenes=3, repeats=5, lesions=4, width=48, height=40, seed=1)
    idx = [i for i, px in generate(spec)]
    assert idx == list(range(spec.total_frames))
    assert all(px.shape == (40, 48, 3) and px.dtype == np.uint8 for _, px in generate(spec))


@pytest.mark.parametrize("fmt", ["jpg", "png", "bmp"])
def test_written_set_is_byte_identical_across_runs(tmp_path, fmt):
    spec = SynthSpec(scenes=2, repeats=4, lesions=2, width=80, height=80, seed=3)
    write_sequence(spec, tmp_path / "a", fmt)
    write_sequence(spec, tmp_path / "b", fmt)
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    seq = load_sequence(tmp_path / "a")
    assert len(seq) == spec.total_frames and seq.seq_ids == tuple(range(spec.total_frames))
    assert load_annotations(tmp_path / "a" / "annotations.json") == annotations_for(spec)


def test_different_seed_differs():
    a = dict(generate(SynthSpec(scenes=1, repeats=2, lesions=0, width=40, height=40, seed=1)))
    b = dict(generate(SynthSpec(scenes=1, repeats=2, lesions=0, width=40, height=40, seed=2)))
    assert not np.array_equal(a[0], b[0])


def test_zero_noise_repeats_are_identical():
    spec = SynthSpec(scenes=2, repeats=6, lesions=0, noise=0.0, width=40, height=40)
    frames = [px for _, px in generate(spec)]
    for s in range(2):
        for px in frames[s * 6 + 1 : (s + 1) * 6]:
            assert np.array_equal(px, frames[s * 6])
    assert not np.array_equal(frames[0], frames[6])


def test_lesion_frames_are_outliers():
    spec = SynthSpec(scenes=2, repeats=20, lesions=3, width=80, height=80, seed=5)
    frames = dict(generate(spec))
    q = {i: hsv_histogram(px) for i, px in frames.items()}
    lesions = lesion_positions(spec)
    clean = [hsv_histogram(px) for _, px in generate(SynthSpec(scenes=2, repeats=20, lesions=0, width=80, height=80, seed=5))]
    repeat_gap = max(feature_distance(clean[i - 1], clean[i]) for i in range(1, 40) if i != 20)
    for p in lesions:
        nb = p - 1 if p > 0 else p + 1
        assert feature_distance(q[p], q[nb]) > 10 * repeat_gap


def test_validation():
    with pytest.raises(ValueError):
        SynthSpec(scenes=0)
    with pytest.raises(ValueError):
        SynthSpec(lesions=-1)
    with pytest.raises(ValueError):
        SynthSpec(noise=-1.0)
    with pytest.raises(ValueError):
        write_sequence(SynthSpec(scenes=1, repeats=1, lesions=0), "/tmp/unused", "gif")
