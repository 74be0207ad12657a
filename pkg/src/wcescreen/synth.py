"""Seeded synthetic capsule-like sequences with injected outlier "lesion" frames.

A sequence is ``scenes x repeats`` noisy copies of smooth textured scenes, in
scene order, with ``lesions`` high-contrast outlier frames inserted at seeded
positions. Every lesion frame is its own one-frame lesion record.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .colorspace import gaussian_filter
from .frameio import AnnotationSet, Lesion, write_annotations

# Opaque category labels cycled over injected lesions.
CEST_LABELS = (
    "Protruding lesions-venous structure",
    "Protruding lesions-Nodule",
    "Protruding lesions-Mass/tumor",
    "Protruding lesions-Polyp(s)",
    "Flat lesions-Plaque (red)",
    "Flat lesions-Spot",
    "Flat lesions-Plaque (white)",
    "Excavated lesion-Erosion",
    "Excavated lesion-Ulcer",
    "Excavated lesion-Aphtha",
    "Excavated lesion-Diverticulum",
    "Mucosa-Granular",
    "Mucosa-Erythematous",
    "Mucosa-Edematous (congested)",
    "Mucosa-Pale",
    "Content-Parasites",
    "Content-Blood",
)


@dataclass(frozen=True)
class SynthSpec:
    scenes: int = 50
    repeats: int = 200
    lesions: int = 20
    noise: float = 1.0
    width: int = 240
    height: int = 240
    seed: int = 7

    def __post_init__(self):
        if self.scenes < 1 or self.repeats < 1:
            raise ValueError("scenes and repeats must be >= 1")
        if self.lesions < 0:
            raise ValueError("lesions must be >= 0")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")

    @property
    def total_frames(self) -> int:
        return self.scenes * self.repeats + self.lesions


def _scene(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Float RGB scene: mucosa-like base colour modulated by multi-scale texture."""
    base = np.array([rng.uniform(150, 215), rng.uniform(70, 130), rng.uniform(50, 100)])
    coarse = gaussian_filter(rng.standard_normal((h, w)), 12.0)
    fine = gaussian_filter(rng.standard_normal((h, w)), 3.0)
    tex = coarse / coarse.std() * 0.6 + fine / fine.std() * 0.4
    tint = np.array([rng.uniform(25, 40), rng.uniform(20, 35), rng.uniform(15, 30)])
    img = base + tex[..., None] * tint
    # circular vignette like a capsule lens
    yy, xx = np.mgrid[0:h, 0:w]
    r = np.hypot((yy - h / 2) / (h / 2), (xx - w / 2) / (w / 2))
    img *= np.clip(1.25 - 0.45 * r, 0.35, 1.0)[..., None]
    return img


def _lesion(rng: np.random.Generator, scene: np.ndarray) -> np.ndarray:
    """Paint a large saturated blob with a sharp rim onto a scene."""
    h, w = scene.shape[:2]
    cy, cx = rng.uniform(0.3, 0.7) * h, rng.uniform(0.3, 0.7) * w
    ry, rx = rng.uniform(0.22, 0.32) * h, rng.uniform(0.22, 0.32) * w
    yy, xx = np.mgrid[0:h, 0:w]
    inside = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    palette = np.array([[250, 250, 245], [30, 200, 60], [40, 60, 220], [240, 230, 20], [20, 10, 10]], float)
    out = scene.copy()
    out[inside] = palette[rng.integers(len(palette))]
    rim = inside & ~np.roll(inside, 3, axis=0)
    out[rim] = 255.0 - out[rim]
    return out


def generate(spec: SynthSpec):
    """Yield ``(frame_index, uint8 pixels)`` for every frame, in order."""
    rng = np.random.default_rng(spec.seed)
    positions = lesion_positions(spec)
    scene_rngs = rng.spawn(spec.scenes)
    noise_rng = np.random.default_rng([spec.seed, 1])
    lesion_rng = np.random.default_rng([spec.seed, 2])
    idx = 0
    pos_iter = iter(positions)
    next_lesion = next(pos_iter, None)
    for s in range(spec.scenes):
        scene = _scene(scene_rngs[s], spec.height, spec.width)
        for _ in range(spec.repeats):
            while next_lesion == idx:
                yield idx, _to_uint8(_lesion(lesion_rng, scene))
                idx += 1
                next_lesion = next(pos_iter, None)
            img = scene
            if spec.noise > 0:
                img = scene + noise_rng.normal(0.0, spec.noise, scene.shape)
            yield idx, _to_uint8(img)
            idx += 1
    while next_lesion == idx:
        yield idx, _to_uint8(_lesion(lesion_rng, scene))
        idx += 1
        next_lesion = next(pos_iter, None)


def lesion_positions(spec: SynthSpec) -> list[int]:
    """Sorted frame indices of the injected lesion frames."""
    rng = np.random.default_rng([spec.seed, 0])
    base = spec.scenes * spec.repeats
    # insertion slots among the base frames (0..base), distinct, then shifted
    slots = np.sort(rng.choice(base + 1, size=spec.lesions, replace=spec.lesions > base + 1))
    return [int(s) + i for i, s in enumerate(slots)]


def annotations_for(spec: SynthSpec) -> AnnotationSet:
    lesions = tuple(
        Lesion(f"L{i + 1:03d}", CEST_LABELS[i % len(CEST_LABELS)], frozenset({pos}))
        for i, pos in enumerate(lesion_positions(spec))
    )
    return AnnotationSet(lesions, spec.total_frames)


def _to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_sequence(spec: SynthSpec, out_dir: str | os.PathLike, fmt: str = "jpg") -> AnnotationSet:
    """Write frames as ``NNNNNN.<fmt>`` plus ``annotations.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fmt = fmt.lower()
    save_kw = {"png": {"compress_level": 1}, "bmp": {}, "jpg": {"quality": 95}}.get(fmt)
    if save_kw is None:
        raise ValueError(f"unsupported frame format {fmt!r}")
    digits = max(6, len(str(spec.total_frames)))
    for idx, pixels in generate(spec):
        Image.fromarray(pixels).save(out / f"{idx:0{digits}d}.{fmt}", **save_kw)
    ann = annotations_for(spec)
    write_annotations(ann, out / "annotations.json")
    return ann
