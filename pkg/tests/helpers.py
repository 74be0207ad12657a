"""Small in-memory sequences for pipeline-level tests."""

import numpy as np

from wcescreen.colorspace import gaussian_filter
from wcescreen.frameio import FrameSequence


def textured(rng, h=80, w=80, base=(170, 100, 80), amp=40.0):
    tex = gaussian_filter(rng.standard_normal((h, w)), 2.0)
    tex /= tex.std()
    return np.array(base, float) + amp * tex[..., None] * np.array([1.0, 0.8, 0.6])


def u8(img):
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def graded_sequence(seed=0, scenes=3, repeats=24, max_noise=12.0, size=80) -> FrameSequence:
    """Scenes whose repeats carry noise of random amplitude in [0, max_noise].

    Pair scores then spread over roughly 0..0.3, so every threshold in a
    typical grid changes some decisions.
    """
    rng = np.random.default_rng(seed)
    frames = []
    for s in range(scenes):
        base = textured(rng, size, size, base=(150 + 20 * s, 90 + 10 * s, 70))
        for _ in range(repeats):
            amp = rng.uniform(0, max_noise)
            frames.append(u8(base + rng.normal(0, amp, base.shape)))
    return FrameSequence.from_arrays(frames)
