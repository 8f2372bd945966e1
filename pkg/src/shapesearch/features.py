"""Region feature extraction and similarity primitives.

Shape features are truncated Fourier descriptors of the complex boundary
signal z(t) = x(t) + j*y(t), computed with a two-pass pipeline: a first FFT
band-limits the boundary, the smooth curve is resampled uniformly by arc
length, and a second FFT yields the stored coefficients. On top of the
descriptors sit the pose-invariant shape similarity, the rotation-phase
cross-correlation, quantized mean color, Gabor texture vectors, and the
smoothing function that maps feature distances to similarities.
"""

from __future__ import annotations

import colorsys
import warnings
from typing import Optional, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import FeatureError, GeometryError
from .geometry import (
    TEXTURE_DIM,
    ColorRGB,
    Contour,
    Region,
    TextureVec,
    Vec2,
    centroid,
    resample_closed,
    size,
)

# Descriptor defaults: power-of-two sample counts, 2*NC+1 = 33 coefficients.
NB_DEFAULT = 128
NC_DEFAULT = 16
DENSE_FACTOR = 4

# Orientation cross-correlation defaults (see config.SensitivityConfig).
SYMMETRY_MAXIMA_THRESHOLD = 0.10
CIRCULAR_SYMMETRY_THRESHOLD = 0.99
ORIENTATION_GRID = 512


def resample_uniform(c: Contour, nb: int) -> Contour:
    """Resample to nb points equally spaced by arc length."""
    if nb < 8:
        raise GeometryError(f"need at least 8 resample points, got {nb}")
    return Contour(resample_closed(c.array, nb))


class FourierDescriptor:
    """Complex boundary spectrum truncated to indices -nc..nc."""

    __slots__ = ("coeffs", "nc", "_inv_mags")

    def __init__(self, coeffs: np.ndarray, nc: int):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (2 * nc + 1,):
            raise FeatureError(
                f"descriptor needs {2 * nc + 1} coefficients, got {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        self.coeffs = coeffs
        self.nc = nc
        self._inv_mags: Optional[np.ndarray] = None

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.nc:
            raise FeatureError(f"coefficient index {k} out of range +-{self.nc}")
        return complex(self.coeffs[k + self.nc])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs)

    def invariant_magnitudes(self) -> np.ndarray:
        """Pose-invariant magnitude vector.

        Drops the DC term (translation), divides by |Z(1)| (scale) and keeps
        magnitudes only (rotation / starting point). Length 2*nc.
        """
        if self._inv_mags is None:
            mags = self.magnitudes()
            non_dc = np.concatenate([mags[: self.nc], mags[self.nc + 1 :]])
            ref = mags[self.nc + 1]  # |Z(1)|
            if ref <= 0.0 or not np.any(non_dc > 0.0):
                raise FeatureError("zero-energy descriptor")
            self._inv_mags = non_dc / ref
        return self._inv_mags

    def to_pairs(self) -> list[list[float]]:
        """Debug dump as [re, im] pairs, ordered k = -nc..nc."""
        return [[float(z.real), float(z.imag)] for z in self.coeffs]

    @staticmethod
    def from_pairs(pairs: Sequence[Sequence[float]]) -> "FourierDescriptor":
        coeffs = np.array([complex(re, im) for re, im in pairs])
        return FourierDescriptor(coeffs, nc=(len(coeffs) - 1) // 2)


def _spectrum_window(z: np.ndarray, nc: int) -> np.ndarray:
    """FFT of z normalized by its length, windowed to k = -nc..nc."""
    n = len(z)
    full = np.fft.fft(z) / n
    return np.concatenate([full[n - nc :], full[: nc + 1]])


def fourier_descriptor(
    c: Contour,
    nc: int = NC_DEFAULT,
    nb: int = NB_DEFAULT,
    n_dense: Optional[int] = None,
) -> FourierDescriptor:
    """Two-pass truncated Fourier descriptor of the boundary signal."""
    if nb < 2 * nc + 2:
        raise FeatureError(f"need nb >= {2 * nc + 2} boundary points, got {nb}")
    if n_dense is None:
        n_dense = DENSE_FACTOR * nb

    pts = resample_closed(c.array, nb)
    z = pts[:, 0] + 1j * pts[:, 1]
    first = _spectrum_window(z, nc)

    # Synthesize the band-limited curve on a dense parameter grid.
    padded = np.zeros(n_dense, dtype=complex)
    padded[: nc + 1] = first[nc:]
    padded[n_dense - nc :] = first[:nc]
    dense = np.fft.ifft(padded) * n_dense

    # Second pass over the smooth curve, uniformly sampled by arc length.
    dense_pts = np.column_stack([dense.real, dense.imag])
    unif = resample_closed(dense_pts, n_dense)
    z_unif = unif[:, 0] + 1j * unif[:, 1]
    return FourierDescriptor(_spectrum_window(z_unif, nc), nc)


def shape_similarity(a: FourierDescriptor, b: FourierDescriptor) -> float:
    """Cosine similarity of invariant magnitude vectors, in [0, 1].

    Invariant under translation, rotation and uniform scaling of either
    contour; 1 for identical shapes.
    """
    if a.nc != b.nc:
        raise FeatureError(f"descriptor orders differ: {a.nc} vs {b.nc}")
    u = a.invariant_magnitudes()
    v = b.invariant_magnitudes()
    if np.array_equal(u, v):
        return 1.0
    cos = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return min(1.0, max(0.0, cos))


class OrientationInfo:
    """Rotation phases aligning one contour onto another."""

    __slots__ = ("phases", "is_circularly_symmetric")

    def __init__(self, phases: Sequence[float], is_circularly_symmetric: bool):
        self.phases = tuple(float(p) for p in phases)
        self.is_circularly_symmetric = bool(is_circularly_symmetric)

    def __repr__(self):
        degs = [round(np.degrees(p), 2) for p in self.phases]
        return f"OrientationInfo(phases_deg={degs}, circular={self.is_circularly_symmetric})"


# Coefficient products below this fraction of the strongest one carry noise
# phases and are excluded from the orientation correlation.
_CORRELATION_FLOOR = 1e-3


def _correlation_terms(
    r_desc: FourierDescriptor, b_desc: FourierDescriptor
) -> np.ndarray:
    """Unit-magnitude spectrum products (phase-only correlation terms).

    Normalizing away the magnitudes keeps the dominant boundary harmonic
    from flattening the profile of near-round polygons; only a true circle,
    with a single significant harmonic, yields a flat correlation.
    """
    nc = r_desc.nc
    prod = r_desc.coeffs * np.conj(b_desc.coeffs)
    mags = np.abs(prod)
    mags[nc] = 0.0  # DC excluded
    floor = _CORRELATION_FLOOR * mags.max()
    terms = np.zeros_like(prod)
    if floor > 0.0:
        keep = mags > floor
        terms[keep] = prod[keep] / mags[keep]
    terms[nc] = 0.0
    return terms


def _cross_correlation(
    r_desc: FourierDescriptor, b_desc: FourierDescriptor, grid: int
) -> np.ndarray:
    """Phase-only correlation over cyclic boundary shifts."""
    nc = r_desc.nc
    terms = _correlation_terms(r_desc, b_desc)
    padded = np.zeros(grid, dtype=complex)
    for k in range(-nc, nc + 1):
        if k == 0:
            continue
        padded[k % grid] = terms[k + nc]
    return np.fft.ifft(padded) * grid


def orientation_info(
    r_desc: FourierDescriptor,
    b_desc: FourierDescriptor,
    symmetry_maxima_threshold: float = SYMMETRY_MAXIMA_THRESHOLD,
    circular_symmetry_threshold: float = CIRCULAR_SYMMETRY_THRESHOLD,
    grid: int = ORIENTATION_GRID,
) -> OrientationInfo:
    """Rotation phases at which the boundary cross-correlation peaks.

    A flat correlation profile (max/min ratio above the circular-symmetry
    threshold) means the shape carries no orientation information. Otherwise
    every local maximum within the symmetry-maxima band of the global maximum
    contributes one phase, e.g. four phases for a square against itself.
    """
    if r_desc.nc != b_desc.nc:
        raise FeatureError(f"descriptor orders differ: {r_desc.nc} vs {b_desc.nc}")
    corr = _cross_correlation(r_desc, b_desc, grid)
    profile = np.abs(corr)
    peak = float(profile.max())
    if peak <= 0.0:
        return OrientationInfo([], True)
    if float(profile.min()) / peak >= circular_symmetry_threshold:
        return OrientationInfo([], True)

    nc = r_desc.nc
    ks = np.arange(-nc, nc + 1)
    weights = _correlation_terms(r_desc, b_desc)

    def eval_corr(t: float) -> complex:
        return complex(np.sum(weights * np.exp(2j * np.pi * ks * t / grid)))

    floor = (1.0 - symmetry_maxima_threshold) * peak
    left = np.roll(profile, 1)
    right = np.roll(profile, -1)
    peak_idx = np.nonzero((profile > left) & (profile >= right) & (profile >= floor))[0]

    phases = []
    for i in peak_idx:
        # Parabolic refinement of the peak location, then direct evaluation.
        y0, y1, y2 = profile[(i - 1) % grid], profile[i], profile[(i + 1) % grid]
        denom = y0 - 2.0 * y1 + y2
        delta = 0.5 * (y0 - y2) / denom if abs(denom) > 1e-30 else 0.0
        delta = float(np.clip(delta, -0.5, 0.5))
        phase = float(np.angle(eval_corr(i + delta))) % (2.0 * np.pi)
        if 2.0 * np.pi - phase < 1e-9:
            phase = 0.0
        phases.append(phase)
    phases.sort()
    return OrientationInfo(phases, False)


def _build_palette() -> np.ndarray:
    """Fixed 112-entry RGB palette: 7 hues x 4 saturations x 4 values."""
    hues = np.arange(7) / 7.0
    levels = np.array([0.25, 0.5, 0.75, 1.0])
    entries = []
    for h in hues:
        for s in levels:
            for v in levels:
                entries.append(colorsys.hsv_to_rgb(h, s, v))
    return np.array(entries) * 255.0


COLOR_PALETTE = _build_palette()


def quantize_colors(pixels: np.ndarray) -> np.ndarray:
    """Index of the nearest palette entry for each (N, 3) RGB pixel."""
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 3)
    d2 = (
        np.sum(pixels**2, axis=1)[:, None]
        - 2.0 * pixels @ COLOR_PALETTE.T
        + np.sum(COLOR_PALETTE**2, axis=1)[None, :]
    )
    return np.argmin(d2, axis=1)


def snap_color(color: Sequence[float]) -> ColorRGB:
    """Nearest palette entry for a single color."""
    idx = quantize_colors(np.asarray(color, dtype=float).reshape(1, 3))[0]
    return ColorRGB.of(COLOR_PALETTE[idx])


def mean_color(pixels) -> ColorRGB:
    """Per-channel mean after snapping each pixel to the 112-entry palette."""
    arr = np.asarray(
        [tuple(p) for p in pixels] if not isinstance(pixels, np.ndarray) else pixels,
        dtype=float,
    ).reshape(-1, 3)
    if len(arr) == 0:
        raise FeatureError("empty region: no pixels for mean color")
    snapped = COLOR_PALETTE[quantize_colors(arr)]
    return ColorRGB.of(np.mean(snapped, axis=0))


# Gabor bank: 4 scales (wavelengths geometric from 4 to 32 px) x 6 orientations.
GABOR_WAVELENGTHS = (4.0, 8.0, 16.0, 32.0)
GABOR_ORIENTATIONS = tuple(np.deg2rad(np.arange(6) * 30.0))
GABOR_SIGMA_FACTOR = 0.56


def _gabor_kernel(wavelength: float, theta: float) -> np.ndarray:
    sigma = GABOR_SIGMA_FACTOR * wavelength
    radius = int(np.ceil(2.5 * sigma))
    ax = np.arange(-radius, radius + 1)
    x, y = np.meshgrid(ax, ax)
    u = np.cos(theta) / wavelength
    v = np.sin(theta) / wavelength
    envelope = np.exp(-(x**2 + y**2) / (2.0 * sigma**2)) / (2.0 * np.pi * sigma**2)
    return envelope * np.exp(2j * np.pi * (u * x + v * y))


_GABOR_BANK = None


def _gabor_bank() -> list[np.ndarray]:
    global _GABOR_BANK
    if _GABOR_BANK is None:
        _GABOR_BANK = [
            _gabor_kernel(lam, theta)
            for lam in GABOR_WAVELENGTHS
            for theta in GABOR_ORIENTATIONS
        ]
    return _GABOR_BANK


def gabor_texture(gray: np.ndarray, mask: np.ndarray) -> TextureVec:
    """Mean Gabor magnitude responses over the masked pixels, 24 values.

    Ordered scale-major: for each wavelength (ascending) the six orientations.
    The patch is zero-meaned over the mask first, so flat regions map to the
    zero vector. Regions smaller than the smallest filter yield a zero vector
    with a warning.
    """
    gray = np.asarray(gray, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if gray.shape != mask.shape:
        raise FeatureError("gray patch and mask shapes differ")
    area = int(mask.sum())
    if area == 0:
        raise FeatureError("empty region: no pixels for texture")
    bank = _gabor_bank()
    min_support = min(k.size for k in bank)
    if area < min_support:
        warnings.warn(
            f"region area {area} below smallest Gabor support {min_support}; "
            "texture set to zero",
            stacklevel=2,
        )
        return TextureVec.zeros()
    centered = np.where(mask, gray - gray[mask].mean(), 0.0)
    values = []
    for kernel in bank:
        response = fftconvolve(centered, kernel, mode="same")
        values.append(float(np.abs(response[mask]).mean()))
    return TextureVec(values)


def distance_to_similarity(x: float, fx: float, fy: float) -> float:
    """Map a distance (0 = perfect match) to a similarity in (fy/2, 1].

    Cosine branch on [0, fx) falling from 1 to fy, then an arctangent tail
    decaying towards fy/2. fx sets the sensitive range, fy the value at fx.
    """
    if not (fx > 0.0) or not (0.0 < fy < 1.0) or x < 0.0 or not np.isfinite(x):
        raise ValueError(f"bad smoothing arguments: x={x}, fx={fx}, fy={fy}")
    if x < fx:
        return fy + (1.0 - fy) * float(np.cos(np.pi * x / (2.0 * fx)))
    return fy * (1.0 - float(np.arctan(x * (x - fx) * (1.0 - fy) / (fx * fy))) / np.pi)


def build_region(
    contour: Contour,
    color: ColorRGB,
    texture: Optional[TextureVec] = None,
) -> Region:
    """Region with its feature cache populated (write-once)."""
    if texture is None:
        texture = TextureVec.zeros()
    return Region(
        contour=contour,
        color=color,
        texture=texture,
        centroid=centroid(contour),
        size=size(contour),
        descriptor=fourier_descriptor(contour),
    )
