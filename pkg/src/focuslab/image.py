"""8-bit grayscale rasters: container type, PGM I/O, synthetic scenes, sensor noise.

Images are immutable after construction and every function in this module is
a pure function of its arguments (all randomness is behind explicit seeds),
so concurrent use needs no locking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Image",
    "WindowSpec",
    "NoiseSpec",
    "PgmFormatError",
    "load_pgm",
    "save_pgm",
    "make_step_edge",
    "make_texture",
    "add_noise",
]

_WHITESPACE = b" \t\n\r\x0b\x0c"


class PgmFormatError(ValueError):
    """A PGM file violates the binary-P5, maxval-255 contract."""


@dataclass(frozen=True, eq=False)
class Image:
    """Rectangular 8-bit grayscale raster.

    ``pixels`` is a read-only (height, width) uint8 array, row-major with the
    top row first; x grows rightward, y grows downward.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D raster, got shape {px.shape}")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.number):
                raise ValueError(f"samples must be numeric, got dtype {px.dtype}")
            if np.any(px < 0) or np.any(px > 255):
                raise ValueError("samples must lie in [0, 255]")
            px = px.astype(np.uint8)
        else:
            px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> np.ndarray:
        """Flat row-major view of the pixel data."""
        return self.pixels.reshape(-1)

    def region(self, window: WindowSpec) -> np.ndarray:
        """Read-only view of the window's n x n pixel block.

        Raises ValueError if the window does not lie entirely inside the image.
        """
        x0, y0 = window.origin()
        if x0 < 0 or y0 < 0 or x0 + window.n > self.width or y0 + window.n > self.height:
            raise ValueError(
                f"{window.n}x{window.n} window centered at "
                f"({window.center_x}, {window.center_y}) does not fit a "
                f"{self.width}x{self.height} image"
            )
        return self.pixels[y0 : y0 + window.n, x0 : x0 + window.n]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class WindowSpec:
    """Square n x n measurement window addressed by its center pixel.

    For even n the nominal center is the pixel just above-left of the
    geometric middle, so the window spans
    [center - (n-1)//2, center + n//2] on each axis for either parity.
    """

    center_x: int
    center_y: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"window dimension must be >= 2, got {self.n}")

    def origin(self) -> tuple[int, int]:
        """Top-left pixel (x0, y0) of the window."""
        half = (self.n - 1) // 2
        return self.center_x - half, self.center_y - half


@dataclass(frozen=True)
class NoiseSpec:
    """Additive zero-mean Gaussian sensor noise, fully determined by ``seed``.

    ``sigma`` is in gray levels; ``sigma == 0`` makes the transform the
    identity regardless of the seed.
    """

    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"noise sigma must be >= 0, got {self.sigma}")
        if self.seed < 0:
            raise ValueError(f"noise seed must be a nonnegative integer, got {self.seed}")

    def derived(self, *path: int) -> NoiseSpec:
        """Child spec whose seed is a deterministic function of (seed, *path).

        Sweeps and searches use this to give every (probe, trial) pair its own
        independent, reproducible noise stream.
        """
        seq = np.random.SeedSequence([self.seed, *path])
        return NoiseSpec(self.sigma, int(seq.generate_state(1, np.uint64)[0]))


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next header token, skipping PNM whitespace and '#' comments."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == ord("#"):
            nl = data.find(b"\n", pos)
            pos = n if nl < 0 else nl + 1
        else:
            break
    if pos >= n:
        raise PgmFormatError("malformed PGM header: unexpected end of file")
    start = pos
    while pos < n and data[pos] not in _WHITESPACE:
        pos += 1
    return data[start:pos], pos


def load_pgm(path) -> Image:
    """Read a binary (P5) PGM file with maxval 255.

    Raises FileNotFoundError for a missing file and PgmFormatError for
    anything else that breaks the contract, with a distinct message per
    failure mode (wrong variant, malformed header, wrong maxval, truncated
    raster).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2:
        raise PgmFormatError("malformed PGM header: file too short")
    magic = data[:2]
    if magic != b"P5":
        if magic in (b"P1", b"P2", b"P3", b"P4", b"P6", b"P7"):
            raise PgmFormatError(
                f"unsupported PGM variant {magic.decode('ascii', 'replace')!r} "
                "(binary P5 required)"
            )
        raise PgmFormatError("malformed PGM header: missing P5 magic number")

    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        try:
            token, pos = _next_token(data, pos)
        except PgmFormatError:
            raise PgmFormatError(f"malformed PGM header: missing {name}") from None
        if not token.isdigit():
            raise PgmFormatError(f"malformed PGM header: non-numeric {name} {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PgmFormatError(f"malformed PGM header: bad dimensions {width}x{height}")
    if maxval != 255:
        raise PgmFormatError(f"unsupported maxval {maxval} (must be 255)")

    # Exactly one whitespace byte separates the maxval from the raster.
    raster = data[pos + 1 : pos + 1 + width * height]
    if len(raster) < width * height:
        raise PgmFormatError(
            f"truncated pixel data: expected {width * height} bytes, found {len(raster)}"
        )
    return Image(np.frombuffer(raster, dtype=np.uint8).reshape(height, width))


def save_pgm(image: Image, path) -> None:
    """Write ``image`` as binary PGM (P5, maxval 255); round-trips bit-exactly."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.pixels.tobytes())


def make_step_edge(width: int, height: int, edge_x: int, low: int, high: int) -> Image:
    """Vertical step scene: columns with x >= edge_x read ``high``, the rest ``low``."""
    if width < 1 or height < 1:
        raise ValueError(f"dimensions must be >= 1, got {width}x{height}")
    if not 0 <= edge_x <= width:
        raise ValueError(f"edge_x must lie in [0, {width}], got {edge_x}")
    for name, value in (("low", low), ("high", high)):
        if not 0 <= value <= 255:
            raise ValueError(f"{name} must lie in [0, 255], got {value}")
    row = np.full(width, low, dtype=np.uint8)
    row[edge_x:] = high
    return Image(np.tile(row, (height, 1)))


# Texture recipe: a 1/f-amplitude random-phase field (classic natural-image
# statistics, which is what makes blurred-detail energy fall off like a real
# scene's) plus per-pixel grain for fine detail, contrast-stretched over the
# full 8-bit range. The spectral amplitudes are deterministic and only the
# phases are drawn, so the coarse structure carries the same energy for every
# seed; percentile clipping keeps a handful of outliers from eating contrast.
_TEXTURE_SPECTRAL_EXPONENT = 1.0
_TEXTURE_GRAIN_WEIGHT = 0.8
_TEXTURE_CLIP_PCT = 2.0


def make_texture(width: int, height: int, seed: int) -> Image:
    """Deterministic high-contrast test scene; same arguments, same image."""
    if width < 1 or height < 1:
        raise ValueError(f"dimensions must be >= 1, got {width}x{height}")
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, (height, width))
    signs = np.where(rng.random((height, width)) < 0.5, -1.0, 1.0)
    grain = rng.standard_normal((height, width))

    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    freq = np.hypot(fy, fx)
    amp = np.zeros_like(freq)
    nonzero = freq > 0
    amp[nonzero] = freq[nonzero] ** -_TEXTURE_SPECTRAL_EXPONENT

    # Hermitian spectrum -> real field: keep one representative per conjugate
    # frequency pair, mirror the other, and pin self-conjugate bins to +-amp.
    jj, ii = np.indices((height, width))
    mj, mi = (height - jj) % height, (width - ii) % width
    canonical = (jj < mj) | ((jj == mj) & (ii <= mi))
    spectrum = amp * np.exp(1j * phases)
    spectrum = np.where(canonical, spectrum, np.conj(spectrum[mj, mi]))
    self_conjugate = (jj == mj) & (ii == mi)
    spectrum[self_conjugate] = amp[self_conjugate] * signs[self_conjugate]

    base = np.fft.ifft2(spectrum).real
    scale = float(base.std())
    if scale > 0:
        base /= scale
    field = base + _TEXTURE_GRAIN_WEIGHT * grain

    lo, hi = np.percentile(field, [_TEXTURE_CLIP_PCT, 100.0 - _TEXTURE_CLIP_PCT])
    if hi <= lo:
        return Image(np.full((height, width), 128, dtype=np.uint8))
    levels = np.rint(np.clip((field - lo) * (255.0 / (hi - lo)), 0.0, 255.0))
    return Image(levels.astype(np.uint8))


def add_noise(image: Image, noise: NoiseSpec) -> Image:
    """Perturb every sample by an independent Gaussian draw, round, clamp.

    ``sigma == 0`` returns the input image unchanged. The output is fully
    determined by (image, sigma, seed).
    """
    if noise.sigma == 0:
        return image
    rng = np.random.default_rng(noise.seed)
    noisy = image.pixels.astype(np.float64) + rng.normal(0.0, noise.sigma, image.pixels.shape)
    return Image(np.clip(np.rint(noisy), 0, 255).astype(np.uint8))
