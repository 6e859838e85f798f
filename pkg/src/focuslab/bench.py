"""Measurement-stability study and squared-vs-absolute metric benchmark.

The stability study repeats noisy captures and reports how far individual
metric readings scatter around their mean for each window size: larger
windows average the noise away, so the per-measurement deviation shrinks as
the window grows. The benchmark times both metric kinds and records where
each one peaks over a shared noiseless sweep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._csvio import fmt_num, write_rows
from .image import Image, NoiseSpec, WindowSpec, add_noise
from .metric import MetricKind, resolution, sweep
from .optics import DEFAULT_SUPERSAMPLE, LensState, OpticalConfig, blur_radius, convolve, make_pillbox_psf

__all__ = [
    "StabilityRow",
    "StabilityReport",
    "MetricTimingRow",
    "MetricBenchReport",
    "stability_study",
    "compare_metrics",
]

STABILITY_CSV_HEADER = "n,measurement_index,d,mean,deviation_pct"
BENCH_CSV_HEADER = "kind,n,mean_ns_per_eval,argmax_z_mm"


@dataclass(frozen=True)
class StabilityRow:
    """Repeated metric readings for one window size.

    ``deviations_pct`` holds the signed percent deviation of each reading
    from the row mean, 100 * (d - mean) / mean.
    """

    n: int
    measurements: tuple[int, ...]
    mean: float
    deviations_pct: tuple[float, ...]
    max_abs_deviation_pct: float

    @classmethod
    def from_measurements(cls, n: int, measurements: Sequence[int]) -> StabilityRow:
        values = tuple(int(d) for d in measurements)
        if not values:
            raise ValueError("a stability row needs at least one measurement")
        mean = float(np.mean(values))
        if mean == 0.0:
            deviations = tuple(0.0 for _ in values)
        else:
            deviations = tuple(100.0 * (d - mean) / mean for d in values)
        return cls(
            n=n,
            measurements=values,
            mean=mean,
            deviations_pct=deviations,
            max_abs_deviation_pct=max(abs(p) for p in deviations),
        )


@dataclass(frozen=True)
class StabilityReport:
    """One StabilityRow per requested window size, in request order."""

    rows: tuple[StabilityRow, ...]

    def write_csv(self, dest) -> None:
        """CSV export: ``n,measurement_index,d,mean,deviation_pct`` per reading."""
        out = []
        for row in self.rows:
            for i, (d, pct) in enumerate(zip(row.measurements, row.deviations_pct)):
                out.append((str(row.n), str(i), str(d), fmt_num(row.mean), fmt_num(pct)))
        write_rows(dest, STABILITY_CSV_HEADER, out)


def stability_study(
    scene: Image,
    cfg: OpticalConfig,
    lens: LensState,
    center: tuple[int, int],
    sizes: Sequence[int],
    noise: NoiseSpec,
    repeats: int,
    supersample: int = DEFAULT_SUPERSAMPLE,
) -> StabilityReport:
    """Repeat noisy captures and measure metric scatter per window size.

    The scene is captured ``repeats`` times with distinct derived noise seeds
    and every window size is evaluated on the same set of captures (as a real
    rig would: acquire frames once, then read windows of different sizes out
    of them). The squared-difference metric is used throughout. With
    sigma = 0 the captures are identical and every deviation is exactly zero.
    """
    if repeats < 3:
        raise ValueError(f"repeats must be >= 3, got {repeats}")
    if not sizes:
        raise ValueError("sizes must be nonempty")
    cx, cy = center
    windows = [WindowSpec(cx, cy, int(n)) for n in sizes]
    for w in windows:
        scene.region(w)  # reject window overflow before any heavy work

    psf = make_pillbox_psf(blur_radius(cfg, lens).px, supersample)
    blurred = convolve(scene, psf)
    frames = [add_noise(blurred, noise.derived(r)) for r in range(repeats)]

    rows = []
    for window in windows:
        values = [resolution(frame, window, MetricKind.SQUARED) for frame in frames]
        rows.append(StabilityRow.from_measurements(window.n, values))
    return StabilityReport(tuple(rows))


@dataclass(frozen=True)
class MetricTimingRow:
    """Mean wall time per metric evaluation for one (kind, window size)."""

    kind: MetricKind
    n: int
    mean_ns_per_eval: float


@dataclass(frozen=True)
class MetricBenchReport:
    """Timing rows plus each kind's peak displacement over a shared sweep."""

    timings: tuple[MetricTimingRow, ...]
    argmax_z_mm: dict[MetricKind, float]

    def write_csv(self, dest) -> None:
        """CSV export: ``kind,n,mean_ns_per_eval,argmax_z_mm`` per timing row."""
        rows = [
            (
                row.kind.value,
                str(row.n),
                fmt_num(row.mean_ns_per_eval),
                fmt_num(self.argmax_z_mm[row.kind]),
            )
            for row in self.timings
        ]
        write_rows(dest, BENCH_CSV_HEADER, rows)


def compare_metrics(
    scene: Image,
    cfg: OpticalConfig,
    window: WindowSpec,
    z_values: Sequence[float],
    repeats_for_timing: int,
    sizes: Sequence[int] = (5, 9, 17, 31),
) -> MetricBenchReport:
    """Time both metric kinds and locate each one's sweep argmax.

    Timing runs sequentially (one kind and window size at a time) to avoid
    contention skew; wall times are reported, never asserted, since they are
    host-dependent. The argmax entries come from a shared noiseless sweep
    through ``window``.
    """
    if repeats_for_timing < 10:
        raise ValueError(f"repeats_for_timing must be >= 10, got {repeats_for_timing}")
    timing_windows = [WindowSpec(window.center_x, window.center_y, int(n)) for n in sizes]
    for w in timing_windows:
        scene.region(w)

    argmax = {}
    for kind in (MetricKind.SQUARED, MetricKind.ABSOLUTE):
        curve = sweep(scene, cfg, window, kind, z_values, NoiseSpec(0.0), trials=1)
        argmax[kind] = curve.argmax_z()

    timings = []
    for kind in (MetricKind.SQUARED, MetricKind.ABSOLUTE):
        for w in timing_windows:
            resolution(scene, w, kind)  # warm caches before timing
            start = time.perf_counter_ns()
            for _ in range(repeats_for_timing):
                resolution(scene, w, kind)
            elapsed = time.perf_counter_ns() - start
            timings.append(
                MetricTimingRow(kind=kind, n=w.n, mean_ns_per_eval=elapsed / repeats_for_timing)
            )
    return MetricBenchReport(tuple(timings), argmax)
