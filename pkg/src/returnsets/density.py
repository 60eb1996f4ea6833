"""Density profiles of finite-horizon sets.

All six density notions (lower/upper natural, lower/upper Banach, lower/upper
logarithmic) are estimated from one :class:`DensityProfile`.  Counting is
exact integer arithmetic; only the harmonic sums are floating point, and
those go through :func:`math.fsum`.

Conventions: ``c(n) = #(A & [0, n))`` for ``n = 1..H``, window counts use
half-open windows ``[k, k + n)`` lying inside ``[0, H)``, and
``h(N) = sum of 1/j over j in A, 1 <= j < N``.  With these, ``c(n)`` is itself
a window count, so ``W-(n) <= c(n) <= W+(n)`` holds exactly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .natset import NatSet

__all__ = [
    "DensityProfile",
    "Estimate",
    "DensityEstimates",
    "profile",
    "density_estimates",
    "default_window_lengths",
    "default_log_points",
    "window_counts",
]


def default_window_lengths(H: int) -> list[int]:
    """Powers of two up to ``H // 4``, plus ``H // 4`` itself."""
    top = max(1, H // 4)
    out = [1 << i for i in range(top.bit_length()) if (1 << i) <= top]
    if out[-1] != top:
        out.append(top)
    return out


def default_log_points(H: int) -> list[int]:
    """Powers of ten up to ``H``."""
    out, v = [], 10
    while v <= H:
        out.append(v)
        v *= 10
    return out


def window_counts(prefix: np.ndarray, n: int) -> np.ndarray:
    """``#(A & [k, k+n))`` for every ``k`` with the window inside the horizon."""
    return prefix[n:] - prefix[:-n]


@dataclass(frozen=True)
class DensityProfile:
    horizon: int
    prefix_counts: np.ndarray  # prefix_counts[n] = c(n), n = 0..H
    window_lengths: tuple[int, ...]
    window_max: np.ndarray
    window_min: np.ndarray
    window_argmax: np.ndarray  # start k of a window attaining W+(n)
    log_points: tuple[int, ...]
    harmonic_sums: np.ndarray

    def c(self, n: int) -> int:
        return int(self.prefix_counts[n])

    def rows(self, grid: Sequence[int] | None = None) -> list[tuple]:
        """``(n, c(n)/n, W+(n)/n, W-(n)/n)`` on ``grid`` (default: window lengths).

        Window columns are ``None`` where ``n`` is not a computed window length.
        """
        grid = self.window_lengths if grid is None else grid
        pos = {n: i for i, n in enumerate(self.window_lengths)}
        out = []
        for n in grid:
            if not 1 <= n <= self.horizon:
                raise ValueError(f"grid point {n} outside [1, {self.horizon}]")
            i = pos.get(n)
            wmax = None if i is None else int(self.window_max[i]) / n
            wmin = None if i is None else int(self.window_min[i]) / n
            out.append((n, self.c(n) / n, wmax, wmin))
        return out

    def to_csv(self, grid: Sequence[int] | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "prefix_density", "window_max_density", "window_min_density"])
        for n, c, hi, lo in self.rows(grid):
            w.writerow([n, repr(c), "" if hi is None else repr(hi), "" if lo is None else repr(lo)])
        return buf.getvalue()


def _harmonic_sums(A: NatSet, points: Sequence[int]) -> np.ndarray:
    e = A.elements
    e = e[e >= 1]
    out = np.empty(len(points))
    total, prev = 0.0, 0
    # fsum per segment, then fsum of the segment totals
    parts: list[float] = []
    for i, N in enumerate(points):
        lo, hi = np.searchsorted(e, [prev, N])
        parts.append(math.fsum(1.0 / e[lo:hi].astype(np.float64)))
        total = math.fsum(parts)
        out[i] = total
        prev = N
    return out


def profile(
    A: NatSet,
    window_lengths: Sequence[int] | None = None,
    log_points: Sequence[int] | None = None,
) -> DensityProfile:
    """Exact prefix counts, sliding-window extremes and harmonic sums of ``A``.

    Bilateral sets are profiled on their non-negative half.
    """
    H = A.horizon
    mask = A.mask[A.offset:]
    if window_lengths is None:
        window_lengths = default_window_lengths(H)
    if log_points is None:
        log_points = default_log_points(H)
    window_lengths = tuple(sorted({int(n) for n in window_lengths}))
    log_points = tuple(sorted({int(n) for n in log_points}))
    if not window_lengths:
        raise ValueError("window_lengths must not be empty")
    if window_lengths[0] < 1 or window_lengths[-1] > H:
        raise ValueError(f"window lengths must lie in [1, {H}]")
    if log_points and (log_points[0] < 2 or log_points[-1] > H):
        raise ValueError(f"log points must lie in [2, {H}]")

    prefix = np.zeros(H + 1, dtype=np.int64)
    np.cumsum(mask, out=prefix[1:])
    wmax = np.empty(len(window_lengths), dtype=np.int64)
    wmin = np.empty(len(window_lengths), dtype=np.int64)
    warg = np.empty(len(window_lengths), dtype=np.int64)
    for i, n in enumerate(window_lengths):
        counts = window_counts(prefix, n)
        j = int(np.argmax(counts))
        warg[i] = j
        wmax[i] = counts[j]
        wmin[i] = counts.min()
    for arr in (prefix, wmax, wmin, warg):
        arr.setflags(write=False)
    h = _harmonic_sums(A, log_points)
    h.setflags(write=False)
    return DensityProfile(H, prefix, window_lengths, wmax, wmin, warg, log_points, h)


@dataclass(frozen=True)
class Estimate:
    value: float
    at: int  # n (or N, or a pair's upper point) where the extreme was attained


@dataclass(frozen=True)
class DensityEstimates:
    lower_density: Estimate
    upper_density: Estimate
    banach_lower: Estimate
    banach_upper: Estimate
    log_lower: Estimate
    log_upper: Estimate
    log_ratio_lower: Estimate  # plain h(N)/ln N, for reference
    log_ratio_upper: Estimate

    CHAIN = ("banach_lower", "lower_density", "log_lower", "log_upper", "upper_density", "banach_upper")

    def chain_values(self) -> list[float]:
        return [getattr(self, k).value for k in self.CHAIN]

    def chain_violation(self) -> float:
        """Largest amount by which a link of the density chain is broken (0 if none)."""
        v = self.chain_values()
        return max(0.0, *(a - b for a, b in zip(v, v[1:])))

    def to_json(self) -> dict:
        return {k: {"value": getattr(self, k).value, "at": getattr(self, k).at}
                for k in self.__dataclass_fields__}


def _extreme(values: np.ndarray, points: Sequence[int], fn) -> Estimate:
    i = int(fn(values))
    return Estimate(float(values[i]), int(points[i]))


def density_estimates(p: DensityProfile, tail_fraction: float = 0.5) -> DensityEstimates:
    """Finite-horizon stand-ins for the liminf/limsup densities.

    * natural densities: extremes of ``c(n)/n`` over ``n >= (1 - f) H``;
    * Banach densities: extremes of ``W+-(n)/n`` over window lengths
      ``n >= (1 - f) * max(window_lengths)``;
    * logarithmic densities: extremes of the increment ratios
      ``(h(N2) - h(N1)) / (ln N2 - ln N1)`` over consecutive log points with
      ``ln N >= (1 - f) ln N_max``.  By Stolz-Cesaro these bracket the
      liminf/limsup of ``h(N)/ln N`` and converge at rate ``O(1/N)`` rather
      than ``O(1/ln N)``.  The plain ratios are reported as ``log_ratio_*``.
    """
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must lie in (0, 1)")
    H = p.horizon
    n0 = max(1, math.ceil((1 - tail_fraction) * H))
    ns = np.arange(n0, H + 1)
    ratio = p.prefix_counts[n0:] / ns
    lower = _extreme(ratio, ns, np.argmin)
    upper = _extreme(ratio, ns, np.argmax)

    wl = np.asarray(p.window_lengths)
    sel = wl >= (1 - tail_fraction) * wl[-1]
    if not sel.any():
        raise ValueError("no window length in the tail region")
    wsel = wl[sel]
    b_up = _extreme(p.window_max[sel] / wsel, wsel, np.argmax)
    b_lo = _extreme(p.window_min[sel] / wsel, wsel, np.argmin)

    lp = np.asarray(p.log_points, dtype=np.float64)
    if lp.size < 2:
        raise ValueError("need at least two log points")
    logs = np.log(lp)
    lsel = np.flatnonzero(logs >= (1 - tail_fraction) * logs[-1])
    if lsel.size < 2:
        raise ValueError("need at least two log points in the tail region")
    i1 = np.arange(int(lsel[0]), len(lp) - 1)
    i2 = i1 + 1
    slopes = (p.harmonic_sums[i2] - p.harmonic_sums[i1]) / (logs[i2] - logs[i1])
    upper_pts = [p.log_points[i] for i in i2]
    log_lo = _extreme(slopes, upper_pts, np.argmin)
    log_hi = _extreme(slopes, upper_pts, np.argmax)
    rat = p.harmonic_sums[lsel] / logs[lsel]
    rpts = [p.log_points[i] for i in lsel]
    return DensityEstimates(
        lower, upper, b_lo, b_up, log_lo, log_hi,
        _extreme(rat, rpts, np.argmin), _extreme(rat, rpts, np.argmax),
    )
