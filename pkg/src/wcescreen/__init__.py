"""Redundant-frame screening for long capsule-endoscopy image sequences."""

from .config import ScreenParams
from .frameio import AnnotationSet, Frame, FrameSequence, ScreeningResult, load_annotations, load_sequence
from .pipeline import screen_sequence

__all__ = [
    "AnnotationSet",
    "Frame",
    "FrameSequence",
    "ScreenParams",
    "ScreeningResult",
    "load_annotations",
    "load_sequence",
    "screen_sequence",
]
