"""Thin-lens defocus camera model.

Defocus by a lens displacement z spreads each scene point over a uniform
disc (pillbox) whose radius grows linearly with |z|. This module builds the
discretized pillbox, convolves scenes with it, derives the 1-D line-spread
and step-edge response, and evaluates the closed-form resolution-vs-z curve.
``capture`` chains the pieces with sensor noise into a virtual camera.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import fftconvolve

from .image import Image, NoiseSpec, add_noise

__all__ = [
    "OpticalConfig",
    "LensState",
    "PsfKernel",
    "EdgeResponse",
    "BlurRadius",
    "DEFAULT_SUPERSAMPLE",
    "blur_radius",
    "make_pillbox_psf",
    "convolve",
    "line_spread",
    "edge_response",
    "theoretical_resolution",
    "capture",
]

DEFAULT_SUPERSAMPLE = 8

_KERNEL_SUM_TOL = 1e-9


@dataclass(frozen=True)
class OpticalConfig:
    """Fixed physical parameters of the lens/sensor pair.

    a_mm: distance from lens to the object plane.
    f_mm: focal length.
    g: light-gathering (relative aperture) parameter; an opaque positive
       scalar in the blur-radius formula.
    pixel_pitch_mm: sensor pixel size.
    d_max: ceiling on the per-mm resolution value near perfect focus, set by
       the capture device itself; supplied, not derived.
    """

    a_mm: float
    f_mm: float
    g: float
    pixel_pitch_mm: float
    d_max: float

    def __post_init__(self) -> None:
        if not self.a_mm > self.f_mm > 0:
            raise ValueError(
                f"need a_mm > f_mm > 0, got a_mm={self.a_mm}, f_mm={self.f_mm}"
            )
        if self.g <= 0:
            raise ValueError(f"g must be positive, got {self.g}")
        if self.pixel_pitch_mm <= 0:
            raise ValueError(f"pixel_pitch_mm must be positive, got {self.pixel_pitch_mm}")
        if self.d_max <= 0:
            raise ValueError(f"d_max must be positive, got {self.d_max}")


@dataclass(frozen=True)
class LensState:
    """Signed lens displacement from the perfectly focused position, in mm."""

    z_mm: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.z_mm):
            raise ValueError(f"lens displacement must be finite, got {self.z_mm}")


class BlurRadius(NamedTuple):
    mm: float
    px: float


def blur_radius(cfg: OpticalConfig, lens: LensState) -> BlurRadius:
    """Defocus disc radius for a lens displacement, in mm and in pixels.

    R_mm = (A - F) / (2 A G) * |z|; even in z because displacing the lens to
    either side of focus blurs identically in this thin-lens model.
    """
    r_mm = (cfg.a_mm - cfg.f_mm) / (2.0 * cfg.a_mm * cfg.g) * abs(lens.z_mm)
    return BlurRadius(mm=r_mm, px=r_mm / cfg.pixel_pitch_mm)


@dataclass(frozen=True)
class PsfKernel:
    """Discretized pillbox point-spread function.

    ``weights`` is a read-only (size, size) array of nonnegative pixel-area
    fractions normalized to unit sum; ``radius_px`` is the disc radius it
    discretizes. Kernels are 4-fold rotationally symmetric by construction.
    """

    size: int
    weights: np.ndarray
    radius_px: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError(f"kernel size must be odd and >= 1, got {self.size}")
        if w.shape != (self.size, self.size):
            raise ValueError(f"weights shape {w.shape} does not match size {self.size}")
        if np.any(w < 0):
            raise ValueError("kernel weights must be nonnegative")
        total = float(w.sum())
        if abs(total - 1.0) > _KERNEL_SUM_TOL:
            raise ValueError(f"kernel weights must sum to 1, got {total!r}")
        if not np.array_equal(w, np.rot90(w)):
            raise ValueError("kernel must be 4-fold rotationally symmetric")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def make_pillbox_psf(radius_px: float, supersample: int = DEFAULT_SUPERSAMPLE) -> PsfKernel:
    """Discretize a uniform disc of the given pixel radius onto a pixel grid.

    Each weight is the fraction of that pixel's area inside the disc,
    estimated with supersample^2 subsamples per pixel, then the kernel is
    renormalized to unit sum. Radii below half a pixel collapse to the 1x1
    identity kernel.
    """
    if radius_px < 0:
        raise ValueError(f"radius must be >= 0, got {radius_px}")
    if supersample < 1:
        raise ValueError(f"supersample must be >= 1, got {supersample}")
    if radius_px < 0.5:
        return PsfKernel(size=1, weights=np.array([[1.0]]), radius_px=radius_px)

    half = math.ceil(radius_px)
    size = 2 * half + 1
    centers = np.arange(size, dtype=np.float64) - half
    offsets = (np.arange(supersample, dtype=np.float64) + 0.5) / supersample - 0.5
    r_sq = radius_px * radius_px

    # One pass per subsample offset pair keeps memory at O(size^2).
    counts = np.zeros((size, size), dtype=np.int64)
    for dy in offsets:
        y_sq = (centers + dy) ** 2
        for dx in offsets:
            x_sq = (centers + dx) ** 2
            counts += y_sq[:, None] + x_sq[None, :] < r_sq
    weights = counts / float(counts.sum())
    return PsfKernel(size=size, weights=weights, radius_px=radius_px)


def convolve(scene: Image, psf: PsfKernel) -> Image:
    """Blur a scene with a PSF kernel, replicating edge pixels at the border.

    Accumulates in float, rounds to nearest, clamps to [0, 255]. Constant
    images map to themselves exactly and the 1x1 identity kernel is a no-op.
    """
    if psf.size > scene.width or psf.size > scene.height:
        raise ValueError(
            f"{psf.size}x{psf.size} kernel exceeds {scene.width}x{scene.height} image"
        )
    if psf.size == 1:
        return scene
    half = psf.size // 2
    padded = np.pad(scene.pixels.astype(np.float64), half, mode="edge")
    blurred = fftconvolve(padded, psf.weights, mode="valid")
    return Image(np.clip(np.rint(blurred), 0, 255).astype(np.uint8))


def line_spread(psf: PsfKernel) -> np.ndarray:
    """1-D line-spread profile: each kernel column summed over rows.

    The profile sums to 1 and inherits the kernel's mirror symmetry; its
    center value bounds the slope of any blurred edge.
    """
    return psf.weights.sum(axis=0)


@dataclass(frozen=True)
class EdgeResponse:
    """Normalized luminance profile across an ideal unit step edge.

    ``positions`` are integer pixel offsets relative to the edge and
    ``values`` the corresponding luminance in [0, 1], nondecreasing.
    """

    positions: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if pos.shape != val.shape or pos.ndim != 1 or pos.size < 2:
            raise ValueError("positions and values must be matching 1-D arrays")
        if np.any(np.diff(val) < 0):
            raise ValueError("edge response must be nondecreasing")
        pos.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "values", val)

    def peak_derivative(self) -> tuple[int, float]:
        """(offset, slope) of the steepest discrete rise, ties broken toward 0.

        The derivative at offset k is values[k] - values[k-1].
        """
        rises = np.diff(self.values)
        at = self.positions[1:]
        top = float(rises.max())
        # Exact-symmetry ties can differ by a final ulp after summation.
        tied = np.flatnonzero(rises >= top - 1e-12 * max(1.0, abs(top)))
        best = min(tied, key=lambda i: (abs(int(at[i])), int(at[i])))
        return int(at[best]), float(rises[best])


def edge_response(
    cfg: OpticalConfig,
    lens: LensState,
    half_span_px: int,
    supersample: int = DEFAULT_SUPERSAMPLE,
) -> EdgeResponse:
    """Simulated luminance profile across a unit step for this lens state.

    Cumulative sum of the pillbox line-spread applied to a unit step,
    normalized so the profile ends exactly at 1. The span must cover at
    least three blur radii on each side of the edge.
    """
    radius = blur_radius(cfg, lens)
    if half_span_px < 1 or half_span_px < 3.0 * radius.px:
        raise ValueError(
            f"half span {half_span_px}px too small: need >= 3x blur radius "
            f"({radius.px:.2f}px) and >= 1"
        )
    psf = make_pillbox_psf(radius.px, supersample)
    profile = line_spread(psf)
    half = psf.size // 2

    span = int(half_span_px)
    full = np.zeros(2 * span + 1, dtype=np.float64)
    full[span - half : span + half + 1] = profile
    values = np.cumsum(full)
    values /= values[-1]
    positions = np.arange(-span, span + 1)
    return EdgeResponse(positions=positions, values=values)


def theoretical_resolution(cfg: OpticalConfig, lens: LensState) -> float:
    """Closed-form detail-content value D(z), clamped to the device ceiling.

    D(z) = min(d_max, 4 A G / (pi (A - F) |z|)); exactly d_max at z = 0.
    """
    if lens.z_mm == 0:
        return cfg.d_max
    unclamped = 4.0 * cfg.a_mm * cfg.g / (math.pi * (cfg.a_mm - cfg.f_mm) * abs(lens.z_mm))
    return min(cfg.d_max, unclamped)


def capture(
    scene: Image,
    cfg: OpticalConfig,
    lens: LensState,
    noise: NoiseSpec,
    supersample: int = DEFAULT_SUPERSAMPLE,
) -> Image:
    """Virtual camera: defocus blur for the lens state, then sensor noise.

    Deterministic given all arguments; z = 0 with sigma = 0 returns the scene
    unchanged.
    """
    psf = make_pillbox_psf(blur_radius(cfg, lens).px, supersample)
    return add_noise(convolve(scene, psf), noise)
