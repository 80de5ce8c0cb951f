"""Mapping between screen-space gaze and editor line/column cells.

The editor viewport is a grid of fixed-width character cells anchored at
``(origin_x_px, origin_y_px)``. Cells are half-open in both axes, so every
in-viewport pixel belongs to exactly one cell. Tabs are assumed to be
pre-expanded by the editor (a tab occupies its expanded cells), so column
arithmetic never needs the underlying text.

Pixel coordinates are quantized to 1e-6 px before cell assignment; the
normalize/denormalize round trip can be off by ~1e-13 px, which would
otherwise flip cells at exact boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from .gazeio import GazeSample

if TYPE_CHECKING:
    from .fixations import Fixation

TAB_CELLS = 4  # display width the editor is expected to expand tabs to


@dataclass(frozen=True)
class EditorGeometry:
    """Placement of the rendered code viewport on screen."""

    file_path: str
    origin_x_px: float
    origin_y_px: float
    char_width_px: float
    line_height_px: float
    first_visible_line: int = 1
    visible_line_count: int = 40
    screen_width_px: int = 1920
    screen_height_px: int = 1080

    def __post_init__(self) -> None:
        if self.char_width_px <= 0 or self.line_height_px <= 0:
            raise ValueError("char_width_px and line_height_px must be positive")
        if self.first_visible_line < 1:
            raise ValueError("first_visible_line must be >= 1")
        if self.visible_line_count < 1:
            raise ValueError("visible_line_count must be >= 1")
        if self.screen_width_px <= 0 or self.screen_height_px <= 0:
            raise ValueError("screen dimensions must be positive")

    def to_dict(self) -> dict:
        return {
            "file_path": self.file_path,
            "origin_x_px": self.origin_x_px,
            "origin_y_px": self.origin_y_px,
            "char_width_px": self.char_width_px,
            "line_height_px": self.line_height_px,
            "first_visible_line": self.first_visible_line,
            "visible_line_count": self.visible_line_count,
            "screen_width_px": self.screen_width_px,
            "screen_height_px": self.screen_height_px,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EditorGeometry":
        return cls(
            file_path=str(obj["file_path"]),
            origin_x_px=float(obj["origin_x_px"]),
            origin_y_px=float(obj["origin_y_px"]),
            char_width_px=float(obj["char_width_px"]),
            line_height_px=float(obj["line_height_px"]),
            first_visible_line=int(obj.get("first_visible_line", 1)),
            visible_line_count=int(obj.get("visible_line_count", 40)),
            screen_width_px=int(obj.get("screen_width_px", 1920)),
            screen_height_px=int(obj.get("screen_height_px", 1080)),
        )


@dataclass(frozen=True)
class CodeLocation:
    """1-based line/column position in a source file."""

    file_path: str
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")


@dataclass(frozen=True)
class LineGazeSummary:
    """Aggregated fixation attention for one source line."""

    line: int
    fixation_count: int
    total_fixation_ms: float

    def to_dict(self) -> dict:
        return {
            "line": self.line,
            "fixation_count": self.fixation_count,
            "total_fixation_ms": self.total_fixation_ms,
        }


def _quantize(v: float) -> float:
    return round(v, 6)


def map_point(x_norm: float, y_norm: float, geometry: EditorGeometry) -> CodeLocation | None:
    """Map a normalized screen point to a code cell, or None if outside.

    Off-viewport gaze (margins, gutters, other panes) is an expected
    value, not an error.
    """
    px = _quantize(x_norm * geometry.screen_width_px)
    py = _quantize(y_norm * geometry.screen_height_px)
    if px < geometry.origin_x_px or px >= geometry.screen_width_px:
        return None
    bottom = geometry.origin_y_px + geometry.visible_line_count * geometry.line_height_px
    if py < geometry.origin_y_px or py >= bottom:
        return None
    row = math.floor((py - geometry.origin_y_px) / geometry.line_height_px)
    col = math.floor((px - geometry.origin_x_px) / geometry.char_width_px)
    # float division can land exactly on the next cell boundary; clamp back
    row = min(row, geometry.visible_line_count - 1)
    return CodeLocation(
        file_path=geometry.file_path,
        line=geometry.first_visible_line + row,
        column=1 + col,
    )


def map_gaze(sample: GazeSample, geometry: EditorGeometry) -> CodeLocation | None:
    """Map one gaze sample to the code cell under it."""
    return map_point(sample.gaze_x, sample.gaze_y, geometry)


def line_summaries(
    fixations: Iterable["Fixation"], geometry: EditorGeometry
) -> list[LineGazeSummary]:
    """Attribute fixations to lines by centroid and aggregate per line.

    Fixations whose centroid falls outside the viewport are dropped.
    Result is sorted by line number.
    """
    counts: dict[int, int] = {}
    totals: dict[int, float] = {}
    for f in fixations:
        loc = map_point(f.centroid_x, f.centroid_y, geometry)
        if loc is None:
            continue
        counts[loc.line] = counts.get(loc.line, 0) + 1
        totals[loc.line] = totals.get(loc.line, 0.0) + f.duration_ms
    return [
        LineGazeSummary(line=line, fixation_count=counts[line], total_fixation_ms=totals[line])
        for line in sorted(counts)
    ]
