"""Synthetic word-image generator.

Stands in for the unavailable handwritten corpus: 14 fixed archetypes built
from stroke primitives (line segments and ellipse arcs), rendered dark on a
white canvas under seeded jitter (rotation, scale, translation, stroke
thickness, salt noise).  Archetypes are abstract word shapes, not glyph
renderings; the recognizer is script-agnostic, so these exercise the whole
pipeline without dragging in a text-shaping engine.

Every sample is a pure function of (seed, class id, sample index), so a
generation run is byte-reproducible.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import imaging
from .dataset import Manifest, write_manifest

N_CLASSES = 14

ROTATION_DEG = 5.0
SCALE_RANGE = (0.9, 1.1)
TRANSLATE_PX = 4.0
THICKNESS_RANGE = (2.0, 5.0)
MAX_SALT = 0.005

_INK_MAX = 60.0
_PATH_STEP = 0.35  # px between consecutive samples along a stroke


@dataclass(frozen=True)
class SynthSpec:
    per_class: int
    seed: int
    canvas: tuple[int, int] = (64, 192)  # (height, width), pre-resize
    salt: float = 0.002

    def __post_init__(self) -> None:
        if self.per_class < 1:
            raise ValueError(f"per_class must be >= 1, got {self.per_class}")
        if self.canvas[0] < 16 or self.canvas[1] < 16:
            raise ValueError(f"canvas too small: {self.canvas}")
        if not 0.0 <= self.salt <= MAX_SALT:
            raise ValueError(f"salt probability must lie in [0, {MAX_SALT}], got {self.salt}")


# Strokes in unit coordinates (x right, y down).  ("line", x0, y0, x1, y1) or
# ("arc", cx, cy, rx, ry, deg0, deg1); a full 360-degree arc is a loop.
ARCHETYPES: dict[int, list[tuple]] = {
    1: [  # descending staircase
        ("line", 0.0, 0.0, 0.33, 0.0),
        ("line", 0.33, 0.0, 0.33, 0.5),
        ("line", 0.33, 0.5, 0.67, 0.5),
        ("line", 0.67, 0.5, 0.67, 1.0),
        ("line", 0.67, 1.0, 1.0, 1.0),
    ],
    2: [  # loop with a long tail rising at the end
        ("arc", 0.2, 0.5, 0.18, 0.42, 0.0, 360.0),
        ("line", 0.38, 0.5, 1.0, 0.5),
        ("line", 1.0, 0.5, 1.0, 0.05),
    ],
    3: [  # zigzag spanning the full width
        ("line", 0.0, 0.0, 0.2, 1.0),
        ("line", 0.2, 1.0, 0.4, 0.0),
        ("line", 0.4, 0.0, 0.6, 1.0),
        ("line", 0.6, 1.0, 0.8, 0.0),
        ("line", 0.8, 0.0, 1.0, 1.0),
    ],
    4: [  # two loops joined at the waist
        ("arc", 0.25, 0.5, 0.2, 0.42, 0.0, 360.0),
        ("arc", 0.75, 0.5, 0.2, 0.42, 0.0, 360.0),
        ("line", 0.45, 0.5, 0.55, 0.5),
    ],
    5: [  # crossed diagonals with a mid bar
        ("line", 0.0, 0.0, 1.0, 1.0),
        ("line", 0.0, 1.0, 1.0, 0.0),
        ("line", 0.2, 0.5, 0.8, 0.5),
    ],
    6: [  # three arches on a left spine
        ("line", 0.02, 0.1, 0.02, 1.0),
        ("arc", 0.19, 0.75, 0.15, 0.55, 180.0, 360.0),
        ("arc", 0.52, 0.75, 0.15, 0.55, 180.0, 360.0),
        ("arc", 0.85, 0.75, 0.15, 0.55, 180.0, 360.0),
    ],
    7: [  # four posts on a baseline
        ("line", 0.0, 0.0, 0.0, 1.0),
        ("line", 0.33, 0.0, 0.33, 1.0),
        ("line", 0.67, 0.0, 0.67, 1.0),
        ("line", 1.0, 0.0, 1.0, 1.0),
        ("line", 0.0, 1.0, 1.0, 1.0),
    ],
    8: [  # wide dome, right drop, small loop bottom-left
        ("arc", 0.5, 0.55, 0.48, 0.45, 180.0, 360.0),
        ("line", 0.98, 0.55, 0.98, 1.0),
        ("arc", 0.15, 0.85, 0.12, 0.13, 0.0, 360.0),
    ],
    9: [  # two-period wave
        ("arc", 0.125, 0.5, 0.125, 0.45, 180.0, 360.0),
        ("arc", 0.375, 0.5, 0.125, 0.45, 0.0, 180.0),
        ("arc", 0.625, 0.5, 0.125, 0.45, 180.0, 360.0),
        ("arc", 0.875, 0.5, 0.125, 0.45, 0.0, 180.0),
    ],
    10: [  # box with a center tick
        ("line", 0.0, 0.0, 1.0, 0.0),
        ("line", 1.0, 0.0, 1.0, 1.0),
        ("line", 1.0, 1.0, 0.0, 1.0),
        ("line", 0.0, 1.0, 0.0, 0.0),
        ("line", 0.5, 0.25, 0.5, 0.75),
    ],
    11: [  # small loop top-left, diagonal to a baseline
        ("arc", 0.18, 0.22, 0.16, 0.2, 0.0, 360.0),
        ("line", 0.3, 0.38, 1.0, 1.0),
        ("line", 0.0, 1.0, 1.0, 1.0),
    ],
    12: [  # left spine with two right-opening bowls
        ("line", 0.0, 0.0, 0.0, 1.0),
        ("arc", 0.45, 0.26, 0.42, 0.24, 270.0, 450.0),
        ("arc", 0.45, 0.78, 0.42, 0.2, 270.0, 450.0),
    ],
    13: [  # triangle with a center stem
        ("line", 0.5, 0.0, 1.0, 1.0),
        ("line", 1.0, 1.0, 0.0, 1.0),
        ("line", 0.0, 1.0, 0.5, 0.0),
        ("line", 0.5, 0.45, 0.5, 1.0),
    ],
    14: [  # nested loops with a rising tail
        ("arc", 0.4, 0.5, 0.35, 0.46, 0.0, 360.0),
        ("arc", 0.4, 0.5, 0.17, 0.22, 0.0, 360.0),
        ("line", 0.75, 0.5, 1.0, 0.15),
    ],
}


def _stroke_points(prim: tuple, unit_to_px: np.ndarray, offset: np.ndarray) -> np.ndarray:
    """Sample one primitive densely, returning (n, 2) pixel (x, y) points."""
    if prim[0] == "line":
        _, x0, y0, x1, y1 = prim
        p0 = unit_to_px * (x0, y0) + offset
        p1 = unit_to_px * (x1, y1) + offset
        n = max(2, int(math.ceil(np.hypot(*(p1 - p0)) / _PATH_STEP)) + 1)
        t = np.linspace(0.0, 1.0, n)[:, None]
        return p0 + t * (p1 - p0)
    _, cx, cy, rx, ry, a0, a1 = prim
    r_px = max(rx * unit_to_px[0], ry * unit_to_px[1])
    sweep = math.radians(abs(a1 - a0))
    n = max(4, int(math.ceil(sweep * r_px / _PATH_STEP)) + 1)
    theta = np.radians(np.linspace(a0, a1, n))
    xs = (cx + rx * np.cos(theta)) * unit_to_px[0] + offset[0]
    ys = (cy + ry * np.sin(theta)) * unit_to_px[1] + offset[1]
    return np.column_stack([xs, ys])


def _render_mask(
    class_id: int,
    canvas: tuple[int, int],
    thickness: float,
    rotation_deg: float,
    scale: float,
    shift: tuple[float, float],
) -> np.ndarray:
    """Boolean ink mask for one archetype under the given affine jitter."""
    if class_id not in ARCHETYPES:
        raise ValueError(f"class id {class_id} out of range [1, {N_CLASSES}]")
    h, w = canvas
    margin_x, margin_y = 0.07 * w, 0.14 * h
    unit_to_px = np.array([w - 2 * margin_x, h - 2 * margin_y])
    offset = np.array([margin_x, margin_y])
    pts = np.vstack([_stroke_points(p, unit_to_px, offset) for p in ARCHETYPES[class_id]])

    center = np.array([w / 2.0, h / 2.0])
    theta = math.radians(rotation_deg)
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    pts = (pts - center) @ (scale * rot).T + center + np.asarray(shift)

    mask = np.zeros((h, w), dtype=bool)
    r = thickness / 2.0
    reach = int(math.floor(r))
    px = np.rint(pts[:, 0]).astype(int)
    py = np.rint(pts[:, 1]).astype(int)
    for dy in range(-reach, reach + 1):
        for dx in range(-reach, reach + 1):
            if dx * dx + dy * dy > r * r:
                continue
            ys = np.clip(py + dy, 0, h - 1)
            xs = np.clip(px + dx, 0, w - 1)
            mask[ys, xs] = True
    return mask


def render_word(class_id: int, spec: SynthSpec, index: int) -> np.ndarray:
    """One jittered sample; deterministic in (spec.seed, class_id, index)."""
    gen = np.random.default_rng([spec.seed, class_id, index])
    rotation = gen.uniform(-ROTATION_DEG, ROTATION_DEG)
    scale = gen.uniform(*SCALE_RANGE)
    shift = tuple(gen.uniform(-TRANSLATE_PX, TRANSLATE_PX, size=2))
    thickness = gen.uniform(*THICKNESS_RANGE)
    ink_value = int(round(gen.uniform(0.0, _INK_MAX)))
    mask = _render_mask(class_id, spec.canvas, thickness, rotation, scale, shift)
    image = np.full(spec.canvas, 255, dtype=np.uint8)
    image[mask] = ink_value
    if spec.salt > 0.0:
        image[gen.random(spec.canvas) < spec.salt] = 255
    return image


def archetype_mask(class_id: int, canvas: tuple[int, int] = (64, 192)) -> np.ndarray:
    """The un-jittered archetype, for distinctness checks and debugging."""
    return _render_mask(class_id, canvas, thickness=3.0, rotation_deg=0.0,
                        scale=1.0, shift=(0.0, 0.0))


def synth_generate(spec: SynthSpec, out_dir: str | os.PathLike) -> Manifest:
    """Render per_class samples of each class and write images + manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for class_id in range(1, N_CLASSES + 1):
        for index in range(spec.per_class):
            name = f"c{class_id:02d}_s{index:03d}.pgm"
            imaging.write_pgm(out / name, render_word(class_id, spec, index))
            records.append((name, class_id))
    manifest = Manifest(records=records, root=out)
    write_manifest(manifest, out / "manifest.csv")
    return manifest
