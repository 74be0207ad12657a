"""Frame sequences on disk, lesion annotations and keyframe manifests."""

from __future__ import annotations

import fnmatch
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")
DEFAULT_PATTERN = "*"

_NUMBER = re.compile(r"(\d+)")


class FrameIOError(Exception):
    """Raised for unreadable, malformed or inconsistent input files."""


@dataclass(frozen=True)
class Frame:
    seq_id: int
    pixels: np.ndarray  # (H, W, 3) uint8, row-major

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"frame {self.seq_id}: pixels must be (H, W, 3) uint8, got {p.shape} {p.dtype}")
        if self.seq_id < 0:
            raise ValueError(f"seq_id must be >= 0, got {self.seq_id}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def decode_image(path: str | os.PathLike) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"))
    except (OSError, ValueError) as e:
        raise FrameIOError(f"cannot decode {path}: {e}") from e


class FrameSequence(Sequence[Frame]):
    """Chronologically ordered frames of one resolution.

    Backed either by in-memory frames or by image paths that are decoded on
    access, so a whole case never has to be resident at once. Slicing returns
    a sub-sequence sharing the same backing.
    """

    def __init__(
        self,
        seq_ids: Sequence[int],
        size: tuple[int, int],
        *,
        frames: Sequence[Frame] | None = None,
        paths: Sequence[str] | None = None,
        source_path: str = "",
    ):
        self.seq_ids = tuple(int(s) for s in seq_ids)
        self.width, self.height = size
        self.source_path = source_path
        self._frames = None if frames is None else tuple(frames)
        self._paths = None if paths is None else tuple(paths)
        if (self._frames is None) == (self._paths is None):
            raise ValueError("exactly one of frames or paths must be given")
        if any(b <= a for a, b in zip(self.seq_ids, self.seq_ids[1:])):
            raise ValueError("seq_ids must be strictly increasing")

    @classmethod
    def from_frames(cls, frames: Sequence[Frame], source_path: str = "") -> "FrameSequence":
        frames = list(frames)
        size = (frames[0].width, frames[0].height) if frames else (0, 0)
        for f in frames:
            if (f.width, f.height) != size:
                raise ValueError(f"frame {f.seq_id} is {f.width}x{f.height}, expected {size[0]}x{size[1]}")
        return cls([f.seq_id for f in frames], size, frames=frames, source_path=source_path)

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], start: int = 0) -> "FrameSequence":
        return cls.from_frames([Frame(start + i, np.ascontiguousarray(a, dtype=np.uint8)) for i, a in enumerate(arrays)])

    def __len__(self) -> int:
        return len(self.seq_ids)

    def __getitem__(self, i):
        if isinstance(i, slice):
            kw = {"frames": self._frames[i]} if self._frames is not None else {"paths": self._paths[i]}
            return FrameSequence(self.seq_ids[i], (self.width, self.height), source_path=self.source_path, **kw)
        if self._frames is not None:
            return self._frames[i]
        pixels = decode_image(self._paths[i])
        if pixels.shape[:2] != (self.height, self.width):
            raise FrameIOError(f"{self._paths[i]} changed resolution since it was indexed")
        return Frame(self.seq_ids[i], pixels)

    def __iter__(self) -> Iterator[Frame]:
        for i in range(len(self)):
            yield self[i]

    def pixels(self) -> list[np.ndarray]:
        return [f.pixels for f in self]


def _frame_number(name: str) -> int | None:
    nums = _NUMBER.findall(Path(name).stem)
    return int(nums[-1]) if nums else None


def load_sequence(dir_path: str | os.PathLike, pattern: str = DEFAULT_PATTERN) -> FrameSequence:
    """Index the images in ``dir_path`` whose names match ``pattern``.

    The last run of digits in each file stem is the frame's seq_id. Headers are
    read to check that every image decodes and shares one resolution; pixel
    data is decoded lazily.
    """
    root = Path(dir_path)
    if not root.is_dir():
        raise FrameIOError(f"no such directory: {root}")
    numbered: dict[int, str] = {}
    for entry in os.scandir(root):
        name = entry.name
        if not entry.is_file() or not fnmatch.fnmatch(name, pattern):
            continue
        if Path(name).suffix.lower() not in IMAGE_SUFFIXES:
            continue
        num = _frame_number(name)
        if num is None:
            raise FrameIOError(f"{name}: filename carries no frame number")
        if num in numbered:
            raise FrameIOError(f"{name}: frame number {num} duplicates {Path(numbered[num]).name}")
        numbered[num] = entry.path
    if not numbered:
        raise FrameIOError(f"no frames matched {pattern!r} in {root}")

    seq_ids = sorted(numbered)
    paths = [numbered[s] for s in seq_ids]
    size = None
    for path in paths:
        try:
            with Image.open(path) as im:
                this = im.size
        except (OSError, ValueError) as e:
            raise FrameIOError(f"cannot decode {path}: {e}") from e
        if size is None:
            size = this
        elif this != size:
            raise FrameIOError(f"{Path(path).name} is {this[0]}x{this[1]}, expected {size[0]}x{size[1]}")
    return FrameSequence(seq_ids, size, paths=paths, source_path=str(root))


# -- annotations ----------------------------------------------------------


@dataclass(frozen=True)
class Lesion:
    lesion_id: str
    cest_category: str
    frame_ids: frozenset[int]


@dataclass(frozen=True)
class AnnotationSet:
    lesions: tuple[Lesion, ...]
    total_frames: int

    def __post_init__(self):
        for les in self.lesions:
            if not les.frame_ids:
                raise ValueError(f"lesion {les.lesion_id!r} has no frames")
            bad = [f for f in les.frame_ids if not 0 <= f < self.total_frames]
            if bad:
                raise ValueError(
                    f"lesion {les.lesion_id!r}: frame id {min(bad)} outside [0, {self.total_frames})"
                )

    @property
    def k(self) -> int:
        return len(self.lesions)

    def to_dict(self) -> dict:
        return {
            "total_frames": self.total_frames,
            "lesions": [
                {"lesion_id": les.lesion_id, "cest_category": les.cest_category, "frame_ids": sorted(les.frame_ids)}
                for les in self.lesions
            ],
        }


def annotations_from_dict(doc: dict) -> AnnotationSet:
    try:
        total = doc["total_frames"]
        records = doc["lesions"]
        if not isinstance(total, int) or isinstance(total, bool) or total < 0:
            raise FrameIOError(f"total_frames must be a non-negative integer, got {total!r}")
        lesions = tuple(
            Lesion(str(r["lesion_id"]), str(r["cest_category"]), frozenset(int(f) for f in r["frame_ids"]))
            for r in records
        )
    except (KeyError, TypeError) as e:
        raise FrameIOError(f"malformed annotation document: {e!r}") from e
    try:
        return AnnotationSet(lesions, total)
    except ValueError as e:
        raise FrameIOError(str(e)) from e


def load_annotations(path: str | os.PathLike) -> AnnotationSet:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise FrameIOError(f"{path}: malformed JSON: {e}") from e
    except OSError as e:
        raise FrameIOError(f"cannot read {path}: {e}") from e
    return annotations_from_dict(doc)


def write_annotations(annotations: AnnotationSet, path: str | os.PathLike) -> None:
    _atomic_write_text(path, json.dumps(annotations.to_dict(), indent=1) + "\n")


# -- manifests ------------------------------------------------------------


@dataclass(frozen=True)
class ScreeningResult:
    keyframe_ids: tuple[int, ...]
    total_frames: int
    t1: float
    t_ssim: float
    window_n: int

    def __post_init__(self):
        ids = list(self.keyframe_ids)
        if ids != sorted(set(ids)):
            raise ValueError("keyframe_ids must be sorted and unique")
        if ids and ids[0] < 0:
            raise ValueError("keyframe ids must be non-negative")
        if len(ids) > self.total_frames:
            raise ValueError(f"{len(ids)} keyframes exceed total_frames={self.total_frames}")
        if self.total_frames > 0 and not ids:
            raise ValueError("a non-empty sequence must retain at least one keyframe")

    @property
    def n_key(self) -> int:
        return len(self.keyframe_ids)

    def to_dict(self) -> dict:
        return {
            "total_frames": self.total_frames,
            "params": {"t1": self.t1, "t_ssim": self.t_ssim, "window_n": self.window_n},
            "keyframe_ids": list(self.keyframe_ids),
        }


def result_from_dict(doc: dict) -> ScreeningResult:
    try:
        params = doc["params"]
        return ScreeningResult(
            keyframe_ids=tuple(int(x) for x in doc["keyframe_ids"]),
            total_frames=int(doc["total_frames"]),
            t1=float(params["t1"]),
            t_ssim=float(params["t_ssim"]),
            window_n=int(params["window_n"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FrameIOError(f"malformed manifest: {e}") from e


def _atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as e:
        tmp.unlink(missing_ok=True)
        raise FrameIOError(f"cannot write {path}: {e}") from e


def write_manifest(result: ScreeningResult, path: str | os.PathLike) -> None:
    """Write the manifest JSON; the target is replaced atomically or not at all."""
    _atomic_write_text(path, json.dumps(result.to_dict()) + "\n")


def read_manifest(path: str | os.PathLike) -> ScreeningResult:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise FrameIOError(f"{path}: malformed JSON: {e}") from e
    except OSError as e:
        raise FrameIOError(f"cannot read {path}: {e}") from e
    return result_from_dict(doc)
