"""Finite-horizon membership tests for Thick, Syn, PSyn, AP_b and IAP.

Every positive answer comes with a certificate that :func:`recheck` can
verify against the set in time linear in the certificate size.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import ClassVar, Sequence

import numpy as np

from .natset import NatSet, SetSpec, boolean, materialize, run_lengths, translate

__all__ = [
    "Thick",
    "Syndetic",
    "PiecewiseSyndetic",
    "BoundedStepAP",
    "DensityWitness",
    "BlockWitness",
    "CoreExtraction",
    "DepthUnachievable",
    "is_thick",
    "longest_interval",
    "syndetic_gap_bound",
    "syndetic_union_cover",
    "piecewise_syndetic_witness",
    "union_thickness",
    "longest_bounded_step_ap",
    "infinite_ap_witness",
    "syndetic_core_extraction",
    "classify",
    "ClassifyParams",
    "recheck",
    "certificate_from_json",
]


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Thick:
    variant: ClassVar[str] = "Thick"
    intervals: tuple[tuple[int, int], ...]  # half-open [a, b)

    def check(self, A: NatSet) -> bool:
        for a, b in self.intervals:
            if not (A.lo <= a < b <= A.hi):
                return False
            if not A.mask[a + A.offset:b + A.offset].all():
                return False
        return True


@dataclass(frozen=True)
class Syndetic:
    variant: ClassVar[str] = "Syndetic"
    bound: int
    start: int  # verified range [start, stop)
    stop: int

    def check(self, A: NatSet) -> bool:
        e = A.elements
        e = e[(e >= self.start) & (e < self.stop)]
        if len(e) < 2 or e[0] != self.start:
            return False
        return int(np.diff(e).max()) <= self.bound and self.stop - int(e[-1]) <= self.bound


@dataclass(frozen=True)
class PiecewiseSyndetic:
    variant: ClassVar[str] = "PiecewiseSyndetic"
    bound: int
    runs: tuple[tuple[int, int], ...]  # (first element, number of elements)

    def check(self, A: NatSet) -> bool:
        e = A.elements
        for start, count in self.runs:
            i = int(np.searchsorted(e, start))
            if i + count > len(e) or e[i] != start or count < 1:
                return False
            if count > 1 and int(np.diff(e[i:i + count]).max()) > self.bound:
                return False
        return True


@dataclass(frozen=True)
class BoundedStepAP:
    variant: ClassVar[str] = "BoundedStepAP"
    start: int
    step: int
    length: int

    def check(self, A: NatSet) -> bool:
        return self.length >= 1 and self.step >= 1 and all(
            self.start + t * self.step in A for t in range(self.length)
        )


@dataclass(frozen=True)
class DensityWitness:
    """``#(A & [start, start + length)) >= delta * length``."""

    variant: ClassVar[str] = "DensityWitness"
    delta: float
    start: int
    length: int

    def check(self, A: NatSet) -> bool:
        if self.length < 1:
            return False
        a, b = self.start + A.offset, self.start + self.length + A.offset
        if a < 0 or b > A.width:
            return False
        # delta is stored as a float ratio; allow for its rounding
        return int(A.mask[a:b].sum()) >= self.delta * self.length * (1 - 1e-12)


@dataclass(frozen=True)
class BlockWitness:
    """For each prefix ``P_m`` (first ``m`` members of ``F``), ``P_m + n_m`` lies in ``S``."""

    variant: ClassVar[str] = "BlockWitness"
    F: NatSet
    translates: dict[int, int] = field(default_factory=dict)  # m -> n_m

    @property
    def depth(self) -> int:
        return max(self.translates, default=0)

    def prefix(self, m: int) -> np.ndarray:
        return self.F.elements[:m]

    def check(self, S: NatSet) -> bool:
        fe = self.F.elements
        for m, n in self.translates.items():
            if m < 1 or m > len(fe) or n < 0:
                return False
            if not all((int(f) + n) in S for f in fe[:m]):
                return False
        return True


_VARIANTS = {c.variant: c for c in (Thick, Syndetic, PiecewiseSyndetic, BoundedStepAP, DensityWitness, BlockWitness)}


def recheck(cert, A: NatSet) -> bool:
    """Independent re-validation of any certificate against the set it certifies."""
    return cert.check(A)


def certificate_to_json(cert) -> dict:
    if isinstance(cert, BlockWitness):
        spec = SetSpec("explicit", cert.F.horizon, {"elements": cert.F.to_list()}, cert.F.bilateral)
        return {
            "variant": cert.variant,
            "F_spec": spec.to_json(),
            "depth": cert.depth,
            "translates": [[m, n] for m, n in sorted(cert.translates.items())],
        }
    d = {"variant": cert.variant, **asdict(cert)}
    for k, v in d.items():
        if isinstance(v, tuple):
            d[k] = [list(x) if isinstance(x, tuple) else x for x in v]
    return d


def certificate_from_json(d: dict):
    d = dict(d)
    cls = _VARIANTS.get(d.pop("variant", None))
    if cls is None:
        raise ValueError("unknown certificate variant")
    if cls is BlockWitness:
        F = materialize(SetSpec.from_json(d["F_spec"]))
        return BlockWitness(F, {int(m): int(n) for m, n in d["translates"]})
    for k, v in d.items():
        if isinstance(v, list):
            d[k] = tuple(tuple(x) if isinstance(x, list) else x for x in v)
    return cls(**d)


for _c in _VARIANTS.values():
    _c.to_json = certificate_to_json


# ---------------------------------------------------------------------------
# Thick


def longest_interval(A: NatSet) -> tuple[int, int]:
    """``(start, length)`` of the first longest interval inside ``A``."""
    rl = run_lengths(A.mask)
    if rl.size == 0 or rl.max() == 0:
        return (A.lo, 0)
    end = int(np.argmax(rl))
    L = int(rl[end])
    return (end - L + 1 - A.offset, L)


def is_thick(A: NatSet, L: int) -> Thick | None:
    """First interval ``[a, a + L)`` contained in ``A``, if any ("thick up to L")."""
    if L < 1:
        raise ValueError("L must be >= 1")
    rl = run_lengths(A.mask)
    hits = np.flatnonzero(rl >= L)
    if hits.size == 0:
        return None
    a = int(hits[0]) - L + 1 - A.offset
    return Thick(((a, a + L),))


# ---------------------------------------------------------------------------
# Syndetic


def syndetic_gap_bound(A: NatSet, max_bound: int | None = None) -> Syndetic | None:
    """Gap bound of ``A`` over ``[min A, H)``, the tail gap ``H - max A`` included.

    Returns ``None`` when the bound exceeds ``max_bound``.
    """
    e = A.elements
    if len(e) < 2:
        raise ValueError("syndetic_gap_bound needs at least 2 elements")
    b = max(int(np.diff(e).max()), A.hi - int(e[-1]))
    if max_bound is not None and b > max_bound:
        return None
    return Syndetic(b, int(e[0]), A.hi)


def syndetic_union_cover(A: NatSet, b: int) -> bool:
    """Whether ``U_{j in [0, b)} (A - j)`` covers ``[min A, max A]``.

    Cross-check of the union form of syndeticity with the translating set
    taken inside ``[0, b)``; equivalent to all gaps being at most ``b``.
    """
    if len(A) == 0:
        return False
    cov = np.zeros(A.width, bool)
    for j in range(b):
        cov |= translate(A, -j).set.mask
    lo, hi = A.min() + A.offset, A.max() + A.offset
    return bool(cov[lo:hi + 1].all())


# ---------------------------------------------------------------------------
# Piecewise syndetic


def _bounded_gap_runs(e: np.ndarray, b: int) -> tuple[np.ndarray, np.ndarray]:
    """Maximal runs of consecutive members with gaps ``<= b``: (start index, count)."""
    if len(e) == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    breaks = np.flatnonzero(np.diff(e) > b) + 1
    starts = np.concatenate(([0], breaks))
    ends = np.concatenate((breaks, [len(e)]))
    return starts, ends - starts


def union_thickness(A: NatSet, b: int) -> int:
    """Length of the longest interval in ``U_{j in [0, b]} (A + j)``."""
    u = np.zeros(A.width, bool)
    for j in range(b + 1):
        u |= translate(A, j).set.mask
    rl = run_lengths(u)
    return int(rl.max()) if rl.size else 0


def piecewise_syndetic_witness(A: NatSet, b: int, L: int) -> PiecewiseSyndetic | None:
    """First run of at least ``L`` consecutive members with gaps ``<= b``.

    The certificate records the whole maximal run containing it.
    """
    if b < 1 or L < 1:
        raise ValueError("b and L must be >= 1")
    e = A.elements
    starts, counts = _bounded_gap_runs(e, b)
    hit = np.flatnonzero(counts >= L)
    if hit.size == 0:
        return None
    i = int(hit[0])
    cert = PiecewiseSyndetic(b, ((int(e[starts[i]]), int(counts[i])),))
    # a run of L members with gaps <= b spans an interval of length >= L in U_{j<=b} (A + j),
    # unless the horizon cuts it off
    last = int(e[starts[i] + counts[i] - 1])
    if last + b < A.hi and union_thickness(A, b) < L:
        raise AssertionError("run found but union form is not thick; inconsistent set")
    return cert


# ---------------------------------------------------------------------------
# arithmetic progressions


def _ap_lengths(mask: np.ndarray, step: int) -> np.ndarray:
    """``len(a) = 1 + len(a - step)`` if ``a - step`` in A else 1 (0 off A)."""
    out = np.zeros(mask.shape[0], dtype=np.int64)
    for r in range(step):
        out[r::step] = run_lengths(mask[r::step])
    return out


def longest_bounded_step_ap(A: NatSet, b: int) -> BoundedStepAP:
    """Longest AP inside ``A`` with step in ``[1, b]``, by DP over (element, step).

    Ties go to the smallest step, then the smallest start.  The empty set
    yields length 0.
    """
    if b < 1:
        raise ValueError("step bound must be >= 1")
    if len(A) == 0:
        return BoundedStepAP(A.lo, 1, 0)
    best = BoundedStepAP(A.min(), 1, 1)
    for s in range(1, b + 1):
        lens = _ap_lengths(A.mask, s)
        L = int(lens.max())
        if L > best.length:
            # first end index attaining L gives the smallest start
            end = int(np.argmax(lens == L))
            best = BoundedStepAP(end - (L - 1) * s - A.offset, s, L)
    return best


def infinite_ap_witness(A: NatSet, rho: float = 0.5, max_step: int = 64) -> BoundedStepAP | None:
    """Surrogate for containing an infinite AP: an AP in ``A`` spanning ``>= rho * H``."""
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    need = rho * A.horizon
    best = None
    for s in range(1, max_step + 1):
        lens = _ap_lengths(A.mask, s)
        L = int(lens.max()) if lens.size else 0
        if L >= 1 and (L - 1) * s >= need:
            end = int(np.argmax(lens == L))
            cand = BoundedStepAP(end - (L - 1) * s - A.offset, s, L)
            if best is None or (cand.length - 1) * cand.step > (best.length - 1) * best.step:
                best = cand
    return best


# ---------------------------------------------------------------------------
# pigeonhole extraction: PSyn -> bSyn


class DepthUnachievable(ValueError):
    def __init__(self, requested: int, achievable: int):
        super().__init__(f"depth {requested} unachievable; max achievable depth is {achievable}")
        self.requested = requested
        self.achievable = achievable


@dataclass(frozen=True)
class CoreExtraction:
    steps: tuple[int, ...]  # f_1..f_m, each in [1, b]
    anchors: tuple[int, ...]  # n_1..n_m

    def core(self) -> list[int]:
        """``F = {f_1 + ... + f_k : 1 <= k <= m}``."""
        return np.cumsum(self.steps).tolist()

    def check(self, A: NatSet) -> bool:
        sums = np.cumsum(self.steps)
        return all(
            int(n + sums[k]) in A
            for j, n in enumerate(self.anchors, 1)
            for k in range(j)
        )


def syndetic_core_extraction(A: NatSet, b: int, depth: int) -> CoreExtraction:
    """Common step pattern ``f_1..f_m`` shared by bounded-gap chains of ``A``.

    A chain is an anchor ``n`` in ``A`` followed by the next members
    ``n + a_1, n + a_1 + a_2, ...`` with every ``a_k`` in ``[1, b]``.  Only chains
    of length ``>= depth`` take part (the finite stand-in for passing to the
    tail of the sequence).  At stage ``i`` the most frequent ``a_i`` among the
    surviving chains is fixed as ``f_i`` (ties to the smaller value) and the
    rest are discarded.  ``n_j`` is the smallest anchor surviving stage ``j``,
    so ``n_j + f_1 + ... + f_k`` is in ``A`` for all ``k <= j``.
    """
    if b < 1 or depth < 1:
        raise ValueError("b and depth must be >= 1")
    e = A.elements
    starts, counts = _bounded_gap_runs(e, b)
    # anchors with at least `depth` further members in their run
    chains = []
    longest = 0
    for s, c in zip(starts, counts):
        longest = max(longest, int(c) - 1)
        for i in range(s, s + c - depth):
            chains.append(i)
    if not chains:
        raise DepthUnachievable(depth, longest)
    gaps = np.diff(e)
    alive = np.asarray(chains)
    steps, anchors = [], []
    for i in range(depth):
        vals = gaps[alive + i]
        tally = Counter(vals.tolist())
        f = min(tally, key=lambda v: (-tally[v], v))
        alive = alive[vals == f]
        steps.append(int(f))
        anchors.append(int(e[alive.min()]))
    return CoreExtraction(tuple(steps), tuple(anchors))


# ---------------------------------------------------------------------------
# classify


@dataclass
class ClassifyParams:
    ps_bounds: Sequence[int] = (1, 2, 4, 8)
    ap_bounds: Sequence[int] = (1, 2, 4, 8)
    iap_rho: float = 0.5
    iap_max_step: int = 64
    tail_fraction: float = 0.5
    window_lengths: Sequence[int] | None = None
    log_points: Sequence[int] | None = None


def classify(A: NatSet, params: ClassifyParams | None = None) -> dict:
    """Run every predicate and collect certificates plus density estimates."""
    from .density import density_estimates, profile

    params = params or ClassifyParams()
    certs = []
    summary: dict = {"horizon": A.horizon, "size": len(A)}

    start, L = longest_interval(A)
    summary["longest_interval"] = L
    if L:
        certs.append(Thick(((start, start + L),)))

    if len(A) >= 2:
        syn = syndetic_gap_bound(A)
        summary["syndetic_bound"] = syn.bound
        certs.append(syn)
    else:
        summary["syndetic_bound"] = None

    ps = {}
    for b in params.ps_bounds:
        starts, counts = _bounded_gap_runs(A.elements, b)
        if len(counts):
            i = int(np.argmax(counts))
            ps[str(b)] = int(counts[i])
            certs.append(PiecewiseSyndetic(b, ((int(A.elements[starts[i]]), int(counts[i])),)))
        else:
            ps[str(b)] = 0
    summary["longest_bounded_gap_run"] = ps

    aps = {}
    for b in params.ap_bounds:
        ap = longest_bounded_step_ap(A, b)
        aps[str(b)] = ap.length
        if ap.length:
            certs.append(ap)
    summary["longest_bounded_step_ap"] = aps

    iap = infinite_ap_witness(A, params.iap_rho, params.iap_max_step)
    summary["infinite_ap_surrogate"] = iap is not None
    if iap is not None:
        certs.append(iap)

    try:
        prof = profile(A, params.window_lengths, params.log_points)
        est = density_estimates(prof, params.tail_fraction)
    except ValueError as exc:
        summary["densities"] = None
        summary["densities_error"] = str(exc)
    else:
        summary["densities"] = est.to_json()
        n = est.banach_upper.at
        i = prof.window_lengths.index(n)
        certs.append(DensityWitness(int(prof.window_max[i]) / n, int(prof.window_argmax[i]), n))

    return {"summary": summary, "certificates": [c.to_json() for c in certs]}
