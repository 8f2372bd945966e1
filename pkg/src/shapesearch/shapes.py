"""Constructors for the standard basic-shape palette.

Curved shapes are polylines with enough vertices (>= 64) that the Fourier
pipeline treats them as smooth. All constructors center the contour at the
origin via the BasicShape invariant.
"""

from __future__ import annotations

import numpy as np

from .geometry import BasicShape, Contour

CURVE_VERTICES = 128


def circle(radius: float = 1.0, vertices: int = CURVE_VERTICES) -> Contour:
    t = np.arange(vertices) / vertices * 2.0 * np.pi
    return Contour(np.column_stack([radius * np.cos(t), radius * np.sin(t)]))


def ellipse(rx: float = 1.5, ry: float = 1.0, vertices: int = CURVE_VERTICES) -> Contour:
    t = np.arange(vertices) / vertices * 2.0 * np.pi
    return Contour(np.column_stack([rx * np.cos(t), ry * np.sin(t)]))


def rectangle(width: float = 2.0, height: float = 1.0) -> Contour:
    w, h = width / 2.0, height / 2.0
    return Contour([(-w, -h), (w, -h), (w, h), (-w, h)])


def square(side: float = 1.0) -> Contour:
    return rectangle(side, side)


def triangle(side: float = 1.0) -> Contour:
    h = side * np.sqrt(3.0) / 2.0
    return Contour([(-side / 2.0, -h / 3.0), (side / 2.0, -h / 3.0), (0.0, 2.0 * h / 3.0)])


def right_triangle(base: float = 1.0, height: float = 1.5) -> Contour:
    return Contour([(0.0, 0.0), (base, 0.0), (0.0, height)])


def regular_polygon(sides: int, radius: float = 1.0) -> Contour:
    t = np.arange(sides) / sides * 2.0 * np.pi
    return Contour(np.column_stack([radius * np.cos(t), radius * np.sin(t)]))


def star(points: int = 5, outer: float = 1.0, inner: float = 0.45) -> Contour:
    t = np.arange(2 * points) / (2 * points) * 2.0 * np.pi
    r = np.where(np.arange(2 * points) % 2 == 0, outer, inner)
    return Contour(np.column_stack([r * np.cos(t), r * np.sin(t)]))


def lshape(long_arm: float = 4.0, short_arm: float = 3.0, thickness: float = 1.0) -> Contour:
    """L-shaped polygon; its orientation is unique (no rotational symmetry)."""
    return Contour(
        [
            (0.0, 0.0),
            (short_arm, 0.0),
            (short_arm, thickness),
            (thickness, thickness),
            (thickness, long_arm),
            (0.0, long_arm),
        ]
    )


def blob(seed: int = 7, vertices: int = CURVE_VERTICES) -> Contour:
    """Asymmetric star-shaped contour, useful where orientation must be unique."""
    rng = np.random.default_rng(seed)
    t = np.arange(vertices) / vertices * 2.0 * np.pi
    r = np.ones(vertices)
    for harmonic, base in enumerate((0.45, 0.12, 0.30, 0.08), start=1):
        amp = base * rng.uniform(0.85, 1.15)
        r += amp * np.cos(harmonic * t + rng.uniform(0.0, 2.0 * np.pi))
    r = np.maximum(r, 0.12)
    return Contour(np.column_stack([r * np.cos(t), r * np.sin(t)]))


def standard_shapes() -> dict[str, BasicShape]:
    """The eight-shape palette seeded into fresh stores."""
    contours = {
        "circle": circle(),
        "ellipse": ellipse(),
        "square": square(),
        "rectangle": rectangle(),
        "triangle": triangle(),
        "pentagon": regular_polygon(5),
        "hexagon": regular_polygon(6),
        "star": star(),
    }
    return {name: BasicShape(name, contour) for name, contour in contours.items()}
