"""Block-family certificates.

``S`` is in the block family of ``F`` when every finite ``R`` inside ``F`` has a
translate ``R + n`` inside ``S``.  Any finite ``R`` lies in some prefix of
``F`` and translates are inherited by subsets, so checking the first ``L``
prefixes certifies every finite subset of ``P_L``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import profile
from .families import BlockWitness, PiecewiseSyndetic, union_thickness
from .natset import NatSet

__all__ = [
    "BlockCheckFailed",
    "block_certificate_check",
    "compose_block_witness",
    "restrict_witness",
    "shift_witness",
    "DensityVerdict",
    "block_density_window_bound",
    "block_syndetic_to_ps",
    "dense_window_witness",
    "DEFAULT_DEPTH",
]

DEFAULT_DEPTH = 32


class BlockCheckFailed(LookupError):
    """No translate exists for prefix ``prefix``; ``searched`` is the range of ``n`` tried."""

    def __init__(self, prefix: int, searched: tuple[int, int], reason: str = ""):
        msg = f"no translate for prefix m={prefix} with n in [{searched[0]}, {searched[1]})"
        super().__init__(msg + (f": {reason}" if reason else ""))
        self.prefix = prefix
        self.searched = searched


def _unilateral(*sets: NatSet):
    for s in sets:
        if s.bilateral:
            raise ValueError("block families are defined on subsets of N; got a bilateral set")


def block_certificate_check(S: NatSet, F: NatSet, depth: int = DEFAULT_DEPTH) -> BlockWitness:
    """Smallest translate ``n_m >= 0`` with ``P_m + n_m`` inside ``S``, for ``m = 1..depth``.

    The admissible translates of ``P_{m+1}`` are those of ``P_m`` that also
    send the new element into ``S``, so the search is one boolean AND per
    prefix.  Raises :class:`BlockCheckFailed` at the first prefix without one.
    """
    _unilateral(S, F)
    fe = F.elements
    if depth < 1 or depth > len(fe):
        raise ValueError(f"depth must lie in [1, |F|={len(fe)}]")
    H = S.horizon
    smask = S.mask
    admissible = np.ones(H, dtype=bool)  # admissible[n]: n works for the current prefix
    translates = {}
    for m in range(1, depth + 1):
        f = int(fe[m - 1])
        if f >= H:
            raise BlockCheckFailed(m, (0, 0), f"prefix element {f} beyond horizon {H}")
        admissible[: H - f] &= smask[f:]
        admissible[H - f:] = False
        hits = np.flatnonzero(admissible)
        if hits.size == 0:
            raise BlockCheckFailed(m, (0, H - f))
        translates[m] = int(hits[0])
    return BlockWitness(F, translates)


def compose_block_witness(outer: BlockWitness, inner: BlockWitness, depth: int | None = None) -> BlockWitness:
    """Chain ``(S, F_b)`` and ``(F_b, F)`` witnesses into one for ``(S, F)``.

    ``P_m(F) + n_m`` sits inside ``F_b``, hence inside the smallest prefix of
    ``F_b`` reaching its maximum; the outer translate ``n'`` of that prefix
    gives ``P_m(F) + n_m + n'`` inside ``S``.
    """
    depth = inner.depth if depth is None else depth
    if depth > inner.depth:
        raise ValueError(f"inner witness only reaches depth {inner.depth}")
    fb = outer.F.elements
    translates = {}
    for m in range(1, depth + 1):
        n = inner.translates[m]
        top = int(inner.prefix(m).max()) + n
        k = int(np.searchsorted(fb, top)) + 1
        if k > len(fb) or fb[k - 1] != top:
            raise ValueError(f"inner translate of prefix {m} is not inside F_b")
        if k not in outer.translates:
            raise ValueError(
                f"inner translate of prefix {m} reaches F_b prefix {k}, outside the outer "
                f"witness depth {outer.depth}"
            )
        translates[m] = n + outer.translates[k]
    return BlockWitness(inner.F, translates)


def restrict_witness(w: BlockWitness, sub: NatSet) -> BlockWitness:
    """Witness for a subset of ``w.F`` reusing the translates of containing prefixes."""
    fe = w.F.elements
    se = sub.elements
    translates = {}
    for m in range(1, len(se) + 1):
        top = int(se[m - 1])
        k = int(np.searchsorted(fe, top)) + 1
        if k > len(fe) or fe[k - 1] != top:
            raise ValueError(f"{top} is not a member of F")
        if k not in w.translates:
            break
        translates[m] = w.translates[k]
    return BlockWitness(sub, translates)


def shift_witness(w: BlockWitness, k: int) -> BlockWitness:
    """Witness for ``S + k`` from one for ``S``."""
    return BlockWitness(w.F, {m: n + k for m, n in w.translates.items() if n + k >= 0})


@dataclass(frozen=True)
class DensityVerdict:
    prefix_end: int  # n_k: R_k = F & [0, n_k]
    prefix_size: int  # |R_k|
    translate: int  # n with R_k + n inside S
    window_count: int  # #(S & [n, n + n_k])
    ratio: float  # window_count / n_k
    delta: float


def block_density_window_bound(
    S: NatSet, w: BlockWitness, delta: float, tail_fraction: float = 0.5
) -> DensityVerdict:
    """Transfer a dense prefix of ``F`` to a dense window of ``S``.

    Looks for ``n_k`` in the witnessed part of ``F`` with
    ``#(F & [0, n_k]) / n_k > delta``; only ``n_k`` in the last ``tail_fraction``
    of the witnessed range count, standing in for ``n_k`` tending to infinity.
    Then ``#(S & [n, n + n_k]) / n_k > delta`` is verified by counting in ``S``.
    """
    fe = w.F.elements
    depth = w.depth
    if depth == 0:
        raise ValueError("empty witness")
    top = int(fe[depth - 1])
    prefix = np.zeros(top + 2, np.int64)
    np.cumsum(w.F.mask[: top + 1], out=prefix[1:])
    lo = max(1, int(np.ceil((1 - tail_fraction) * top)))
    best = None
    for nk in range(lo, top + 1):
        size = int(prefix[nk + 1])  # #(F & [0, n_k])
        if size == 0 or size > depth or size / nk <= delta:
            continue
        if best is None or size / nk > best[1] / best[0]:
            best = (nk, size)
    if best is None:
        raise ValueError(f"no prefix of F with density > {delta} among n_k in [{lo}, {top}]")
    nk, size = best
    n = w.translates[size]
    a, b = n, min(n + nk + 1, S.horizon)
    count = int(S.mask[a:b].sum())
    ratio = count / nk
    if not ratio > delta:
        raise AssertionError(f"window density {ratio} does not exceed {delta}; witness is unsound")
    return DensityVerdict(nk, size, n, count, ratio, delta)


def block_syndetic_to_ps(S: NatSet, w: BlockWitness, b: int) -> PiecewiseSyndetic:
    """Runs with gaps ``<= b`` in ``S`` from a witness whose ``F`` has gap bound ``b``.

    ``P_m + n_m`` gives ``m`` members of ``S`` with gaps at most ``b``; members
    of ``S`` in between only shrink gaps.
    """
    fe = w.F.elements
    depth = w.depth
    if depth < 2:
        raise ValueError("need a witness of depth >= 2")
    worst = int(np.diff(fe[:depth]).max())
    if worst > b:
        raise ValueError(f"F is not syndetic with bound {b} over the witnessed range (gap {worst})")
    se = S.elements
    runs = []
    for m in range(1, depth + 1):
        n = w.translates[m]
        first, last = int(fe[0]) + n, int(fe[m - 1]) + n
        i, j = np.searchsorted(se, [first, last + 1])
        runs.append((first, int(j - i)))
    cert = PiecewiseSyndetic(b, tuple(runs))
    if not cert.check(S):
        raise AssertionError("derived piecewise-syndetic runs do not re-check")
    if union_thickness(S, b) < depth and int(fe[depth - 1]) + w.translates[depth] + b < S.horizon:
        raise AssertionError("union of shifts of S is not thick up to the witnessed depth")
    return cert


def dense_window_witness(S: NatSet, window: int, depth: int = DEFAULT_DEPTH) -> tuple[NatSet, BlockWitness]:
    """Best-effort search for a dense ``F`` whose finite pieces translate into ``S``.

    NOT a decision procedure: it seeds ``F`` with the members of the densest
    window of the given length (moved to 0) and keeps the prefixes that have
    translates.  The witness is trivially sound; density of ``F`` is whatever
    the window had.
    """
    prof = profile(S, [window], [])
    k = int(prof.window_argmax[0])
    members = S.elements[(S.elements >= k) & (S.elements < k + window)] - k
    F = NatSet.from_elements(members, S.horizon)
    d = min(depth, len(F))
    if d == 0:
        return F, BlockWitness(F, {})
    return F, block_certificate_check(S, F, d)
