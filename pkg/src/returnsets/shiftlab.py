"""Backward shifts on weighted sequence spaces, simulated exactly on sparse vectors.

The space has basis ``e_n`` with ``||e_n|| = v_n`` (weighted l1 and sup) or
``v_n ** (1/p)`` (weighted lp), and ``B e_n = e_{n-1}``.  Unilateral spaces are
indexed ``0..H-1`` and ``B e_0 = 0``; bilateral ones use the window ``[-H, H)``.
Both norms are 1-unconditional, so the unconditional basis constant is 1.

Everything about convergence is a statement about the horizon: partial sums
are Cauchy *up to* ``H``, never beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .natset import NatSet, gap_list

__all__ = [
    "Weights",
    "ShiftSpace",
    "SparseVector",
    "SupportOverflow",
    "PreconditionError",
    "shift_apply",
    "norm",
    "exact_norm",
    "orbit_distances",
    "ReturnTimeSet",
    "return_time_set",
    "ConditionA",
    "condition_a_check",
    "ConditionB",
    "condition_b_check",
    "thin_certificate",
    "PFReport",
    "build_pf_vector",
    "transfer_block",
    "ChaoticVerdict",
    "chaotic_partial_sum_check",
    "product_return_set",
    "reverse_direction_probe",
]


class SupportOverflow(ValueError):
    """A vector's support left the index window of the space."""


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class Weights:
    """Closed-form or tabulated positive weights.

    ``geometric``: ``v_n = r**n`` for ``n >= 0`` and ``r_neg**(-n)`` for ``n < 0``
    (``r_neg`` defaults to ``r``); ``polynomial``: ``v_n = (1 + |n|)**exponent``;
    ``constant``: ``v_n = c``; ``tabulated``: ``values`` listed from the lowest
    index of the space upward.  Ratios may be given as strings like ``"1/2"``
    to keep the exact mode exact.
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def geometric(cls, r, r_neg=None) -> "Weights":
        return cls("geometric", {"r": r} if r_neg is None else {"r": r, "r_neg": r_neg})

    @classmethod
    def constant(cls, c=1) -> "Weights":
        return cls("constant", {"c": c})

    def exact(self, n: int, lo: int = 0) -> Fraction:
        p = self.params
        if self.kind == "geometric":
            r = Fraction(p["r"])
            if n >= 0:
                return r**n
            return Fraction(p.get("r_neg", p["r"])) ** (-n)
        if self.kind == "constant":
            return Fraction(p.get("c", 1))
        if self.kind == "tabulated":
            return Fraction(p["values"][n - lo])
        if self.kind == "polynomial":
            e = Fraction(p["exponent"])
            if e.denominator != 1:
                raise ValueError("polynomial weights with fractional exponent have no exact form")
            return Fraction(1 + abs(n)) ** int(e)
        raise ValueError(f"unknown weight kind {self.kind!r}")

    def values(self, lo: int, hi: int) -> np.ndarray:
        n = np.arange(lo, hi)
        p = self.params
        if self.kind == "geometric":
            r = float(Fraction(p["r"]))
            rn = float(Fraction(p.get("r_neg", p["r"])))
            pos = np.maximum(n, 0).astype(float)
            neg = np.maximum(-n, 0).astype(float)
            v = np.where(n >= 0, r**pos, rn**neg)
        elif self.kind == "constant":
            v = np.full(n.shape, float(Fraction(p.get("c", 1))))
        elif self.kind == "polynomial":
            v = (1.0 + np.abs(n)) ** float(Fraction(p["exponent"]))
        elif self.kind == "tabulated":
            v = np.array([float(Fraction(x)) for x in p["values"]])
            if v.shape != n.shape:
                raise ValueError(f"tabulated weights need {hi - lo} values, got {v.shape[0]}")
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not np.all(v > 0) or not np.all(np.isfinite(v)):
            raise ValueError(
                "weights must be finite and strictly positive; "
                "closed-form weights may under/overflow double precision at this horizon"
            )
        return v

    def to_json(self) -> dict:
        return {"kind": self.kind, **{k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.params.items()}}

    @classmethod
    def from_json(cls, d: Mapping) -> "Weights":
        d = dict(d)
        return cls(d.pop("kind"), d)


@dataclass(frozen=True)
class ShiftSpace:
    horizon: int
    weights: Weights
    norm: str = "lp"  # "lp" or "sup"
    p: float = 1.0
    bilateral: bool = False

    def __post_init__(self):
        if self.norm not in ("lp", "sup"):
            raise ValueError(f"norm must be 'lp' or 'sup', got {self.norm!r}")
        if self.norm == "lp" and self.p < 1:
            raise ValueError("lp norms need p >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @property
    def lo(self) -> int:
        return -self.horizon if self.bilateral else 0

    @property
    def hi(self) -> int:
        return self.horizon

    @cached_property
    def v(self) -> np.ndarray:
        """Weights over ``[lo, hi)``."""
        w = self.weights.values(self.lo, self.hi)
        w.setflags(write=False)
        return w

    def weight(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        if idx.size and (idx.min() < self.lo or idx.max() >= self.hi):
            raise SupportOverflow(f"index outside [{self.lo}, {self.hi})")
        return self.v[idx - self.lo]

    def basis_norm(self, n) -> np.ndarray:
        w = self.weight(n)
        return w if self.norm == "sup" else w ** (1.0 / self.p)

    @cached_property
    def shift_bound(self) -> float:
        """``max ||B e_n|| / ||e_n||`` over the window; equals ``||B||`` on these spaces."""
        if self.hi - self.lo < 2:
            return 0.0
        e = self.v if self.norm == "sup" else self.v ** (1.0 / self.p)
        return float(np.max(e[:-1] / e[1:]))

    def beta(self, p: int) -> float:
        """A radius ``beta`` with ``||x|| < beta`` forcing ``|x_j| < 1/2`` and
        ``||B^j x|| < 1/2`` for all ``|j| <= 2p`` in the window."""
        j = np.arange(max(self.lo, -2 * p), min(self.hi, 2 * p + 1))
        coord = float(self.basis_norm(j).min())
        return 0.5 * min(coord, 1.0 / max(1.0, self.shift_bound) ** (2 * p))

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "weights": self.weights.to_json(),
            "norm": self.norm,
            "p": self.p,
            "laterality": "bilateral" if self.bilateral else "unilateral",
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "ShiftSpace":
        lat = d.get("laterality", "unilateral")
        if lat not in ("unilateral", "bilateral"):
            raise ValueError(f"laterality must be unilateral or bilateral, got {lat!r}")
        return cls(
            int(d["horizon"]),
            Weights.from_json(d["weights"]),
            d.get("norm", "lp"),
            float(d.get("p", 1.0)),
            lat == "bilateral",
        )


# ---------------------------------------------------------------------------
# sparse vectors


@dataclass(frozen=True, eq=False)
class SparseVector:
    indices: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        c = np.asarray(self.coeffs)
        if idx.shape != c.shape:
            raise ValueError("indices and coefficients differ in length")
        if c.dtype.kind not in "fc":
            c = c.astype(float)
        order = np.argsort(idx, kind="stable")
        idx, c = idx[order], c[order]
        if idx.size and np.any(np.diff(idx) == 0):
            raise ValueError("duplicate indices")
        keep = c != 0
        idx, c = idx[keep], c[keep]
        idx.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, d: Mapping[int, complex]) -> "SparseVector":
        items = sorted((int(k), v) for k, v in d.items())
        return cls(np.array([k for k, _ in items], np.int64), np.array([v for _, v in items]))

    @classmethod
    def basis(cls, n: int, c: float = 1.0) -> "SparseVector":
        return cls(np.array([n]), np.array([c], dtype=float))

    @classmethod
    def zero(cls) -> "SparseVector":
        return cls(np.empty(0, np.int64), np.empty(0))

    @classmethod
    def indicator(cls, support: Iterable[int]) -> "SparseVector":
        idx = np.fromiter(support, dtype=np.int64)
        return cls(idx, np.ones(idx.shape[0]))

    def to_dict(self) -> dict[int, complex]:
        return {int(i): c.item() for i, c in zip(self.indices, self.coeffs)}

    def coef(self, n: int):
        i = int(np.searchsorted(self.indices, n))
        if i < len(self.indices) and self.indices[i] == n:
            return self.coeffs[i].item()
        return 0.0

    def __len__(self) -> int:
        return len(self.indices)

    def _combine(self, other: "SparseVector", sign: float) -> "SparseVector":
        idx = np.concatenate((self.indices, other.indices))
        c = np.concatenate((self.coeffs, sign * other.coeffs))
        u, inv = np.unique(idx, return_inverse=True)
        out = np.zeros(u.shape[0], dtype=np.result_type(c, float))
        np.add.at(out, inv, c)
        return SparseVector(u, out)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, a):
        return SparseVector(self.indices, self.coeffs * a)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self) -> str:
        head = ", ".join(f"{i}: {c:g}" for i, c in zip(self.indices[:6], self.coeffs[:6]))
        return f"SparseVector({{{head}{', ...' if len(self) > 6 else ''}}})"

    def shifted(self, k: int) -> "SparseVector":
        """Raw index shift ``e_n -> e_{n+k}`` with no kill rule."""
        return SparseVector(self.indices + int(k), self.coeffs)


def shift_apply(space: ShiftSpace, x: SparseVector, m: int) -> SparseVector:
    """``B^m x``: ``(B^m x)_k = x_{k+m}``; unilateral indices below 0 vanish."""
    if m < 0:
        raise ValueError("power must be >= 0")
    idx = x.indices - int(m)
    if space.bilateral:
        return SparseVector(idx, x.coeffs)
    keep = idx >= 0
    return SparseVector(idx[keep], x.coeffs[keep])


def _norm_terms(space: ShiftSpace, idx: np.ndarray, coeffs: np.ndarray) -> float:
    if idx.size == 0:
        return 0.0
    w = space.weight(idx)
    a = np.abs(coeffs)
    if space.norm == "sup":
        return float(np.max(a * w))
    if space.p == 1:
        return math.fsum(a * w)
    return math.fsum(a**space.p * w) ** (1.0 / space.p)


def norm(space: ShiftSpace, x: SparseVector) -> float:
    """Weighted lp norm ``(sum |x_n|^p v_n)^(1/p)`` or weighted sup ``max |x_n| v_n``."""
    return _norm_terms(space, x.indices, x.coeffs)


def exact_norm(space: ShiftSpace, x: SparseVector | Mapping[int, Fraction]) -> Fraction:
    """Rational norm for l1 and sup spaces with exact weights (e.g. ``r = "1/2"``)."""
    if space.norm == "lp" and space.p != 1:
        raise ValueError("exact mode supports l1 and sup norms only")
    items = x.to_dict().items() if isinstance(x, SparseVector) else x.items()
    terms = []
    for n, c in items:
        if not space.lo <= n < space.hi:
            raise SupportOverflow(f"index {n} outside [{space.lo}, {space.hi})")
        c = Fraction(c) if not isinstance(c, complex) else None
        if c is None:
            raise ValueError("exact mode needs real coefficients")
        terms.append(abs(c) * space.weights.exact(n, space.lo))
    if not terms:
        return Fraction(0)
    return max(terms) if space.norm == "sup" else sum(terms, Fraction(0))


# ---------------------------------------------------------------------------
# orbits and return times


def _check_orbit_window(space: ShiftSpace, x: SparseVector, T: int) -> None:
    if len(x) and x.indices.max() >= space.hi:
        raise SupportOverflow(f"x has support beyond the horizon {space.hi}")
    if space.bilateral and len(x) and x.indices.min() - T < space.lo:
        raise SupportOverflow(
            f"bilateral orbit drifts to index {int(x.indices.min()) - T}, below the window {space.lo}"
        )


def orbit_distance(space: ShiftSpace, x: SparseVector, y: SparseVector, n: int) -> float:
    return norm(space, shift_apply(space, x, n) - y)


def orbit_distances(space: ShiftSpace, x: SparseVector, y: SparseVector, times) -> np.ndarray:
    """``||B^n x - y||`` for each ``n`` in ``times`` (an int ``T`` means ``0..T``)."""
    times = np.arange(times + 1) if np.isscalar(times) else np.asarray(times, dtype=np.int64)
    if times.size:
        _check_orbit_window(space, x, int(times.max()))
    return np.array([orbit_distance(space, x, y, int(n)) for n in times], dtype=float)


@dataclass(frozen=True, eq=False)
class ReturnTimeSet:
    """``{n <= T : ||B^n x - y|| < eps}``."""

    base: NatSet
    y: SparseVector
    eps: float
    T: int
    x: SparseVector
    space: ShiftSpace
    distances: np.ndarray = field(repr=False)

    def recheck(self, times: Iterable[int] | None = None) -> bool:
        """Recompute membership from scratch for ``times`` (default: all ``0..T``)."""
        times = range(self.T + 1) if times is None else times
        for n in times:
            inside = orbit_distance(self.space, self.x, self.y, int(n)) < self.eps
            if inside != (int(n) in self.base):
                return False
        return True


def return_time_set(space: ShiftSpace, x: SparseVector, y: SparseVector, eps: float, T: int) -> ReturnTimeSet:
    if eps <= 0:
        raise ValueError("eps must be > 0")
    d = orbit_distances(space, x, y, T)
    base = NatSet.from_mask(d < eps)
    d.setflags(write=False)
    return ReturnTimeSet(base, y, eps, T, x, space, d)


def product_return_set(parts: Sequence[ReturnTimeSet]) -> NatSet:
    """Return-time set of the product operator on the product of the balls."""
    if not parts:
        raise ValueError("need at least one part")
    T = parts[0].T
    if any(p.T != T for p in parts):
        raise ValueError("return-time sets have different horizons")
    out = parts[0].base
    for p in parts[1:]:
        out = out & p.base
    return out


# ---------------------------------------------------------------------------
# conditions (a) and (b)


def _compensated_suffix_sums(a: np.ndarray) -> np.ndarray:
    """``out[i] = sum(a[i:])`` with Neumaier compensation."""
    out = np.empty(a.shape[0] + 1)
    s = c = 0.0
    out[-1] = 0.0
    for i in range(a.shape[0] - 1, -1, -1):
        v = float(a[i])
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


@dataclass(frozen=True)
class ConditionA:
    converges: bool
    tail: float  # ||S_end - S_N|| at the start of the final half (the largest Cauchy increment there)
    tail_tol: float
    increments: np.ndarray = field(repr=False)  # ||e_{n+p}|| per member n
    tail_norms: np.ndarray = field(repr=False)  # ||sum_{n in A, n >= a_i} e_{n+p}||
    total: float = 0.0
    clipped: int = 0

    def to_json(self) -> dict:
        return {"converges": self.converges, "tail": self.tail, "tail_tol": self.tail_tol,
                "total": self.total, "clipped": self.clipped, "terms": int(self.increments.size)}


def _members(A: NatSet) -> np.ndarray:
    return A.elements


def condition_a_check(space: ShiftSpace, A: NatSet, p: int, tail_tol: float) -> ConditionA:
    """Cauchy-at-horizon test for ``sum_{n in A} e_{n+p}``.

    Members with ``n + p`` outside the window are clipped and counted.  The
    series is declared convergent when the norm of the tail starting at the
    midpoint of ``A`` is below ``tail_tol``; for 1-unconditional norms that
    tail dominates every increment ``||S_N' - S_N||`` within the final half.
    """
    e = _members(A) + p
    ok = (e >= space.lo) & (e < space.hi)
    clipped = int((~ok).sum())
    e = e[ok]
    w = space.weight(e)
    inc = space.basis_norm(e) if e.size else np.empty(0)
    if space.norm == "sup":
        tails = np.maximum.accumulate(w[::-1])[::-1] if e.size else np.empty(0)
        tails = np.append(tails, 0.0)
    else:
        tails = _compensated_suffix_sums(w) ** (1.0 / space.p)
    mid = e.size // 2
    tail = float(tails[mid]) if e.size else 0.0
    return ConditionA(tail < tail_tol, tail, tail_tol, inc, tails, float(tails[0]) if e.size else 0.0, clipped)


@dataclass(frozen=True)
class ConditionB:
    passed: bool
    worst: float
    worst_m: int | None
    worst_j: int | None
    eps: float
    clipped: int = 0
    per_j: dict = field(default_factory=dict)  # j -> max norm over m

    def to_json(self) -> dict:
        return {"passed": self.passed, "worst": self.worst, "worst_m": self.worst_m,
                "worst_j": self.worst_j, "eps": self.eps, "clipped": self.clipped,
                "per_j": {str(k): v for k, v in self.per_j.items()}}


def condition_b_check(space: ShiftSpace, A: NatSet, p: int, eps: float, js: Sequence[int] | None = None) -> ConditionB:
    """Max over ``m`` in ``A`` and admissible ``j`` of ``||sum e_{n-m+j}||``.

    Unilateral: ``n > m`` and ``0 <= j <= p``.  Bilateral: ``n != m`` and
    ``|j| <= p``.  Terms whose index leaves the window are clipped and counted.
    """
    if p < 0:
        raise ValueError("p must be >= 0")
    if js is None:
        js = range(-p, p + 1) if space.bilateral else range(0, p + 1)
    e = _members(A)
    worst, wm, wj, clipped = 0.0, None, None, 0
    per_j = {int(j): 0.0 for j in js}
    for i, m in enumerate(e):
        others = np.delete(e, i) if space.bilateral else e[i + 1:]
        d = others - m
        for j in js:
            idx = d + j
            ok = (idx >= space.lo) & (idx < space.hi)
            clipped += int((~ok).sum())
            idx = idx[ok]
            val = _norm_terms(space, idx, np.ones(idx.shape[0]))
            if val > per_j[int(j)]:
                per_j[int(j)] = val
            if wm is None or val > worst:
                worst, wm, wj = val, int(m), int(j)
    return ConditionB(worst < eps, worst, wm, wj, eps, clipped, per_j)


def thin_certificate(A: NatSet, p: int) -> NatSet:
    """Greedy left-to-right subset of ``A`` with consecutive differences ``> p``."""
    keep = []
    last = None
    for a in A.elements:
        if last is None or a - last > p:
            keep.append(int(a))
            last = a
    return NatSet.from_elements(keep, A.horizon, A.bilateral)


# ---------------------------------------------------------------------------
# the constructive direction


@dataclass(frozen=True)
class PFReport:
    p: int
    eps: float
    bound: float  # eps * sum |y_j|
    max_distance: float  # max over m in A of ||B^m x - y||
    argmax_m: int | None
    bound_holds: bool
    safe_T: int  # orbit times up to here are fully represented
    condition_a: ConditionA
    condition_b: ConditionB
    distances: dict = field(default_factory=dict, repr=False)  # m -> ||B^m x - y||
    exact_max_distance: Fraction | None = None

    def to_json(self) -> dict:
        out = {
            "p": self.p, "eps": self.eps, "bound": self.bound, "max_distance": self.max_distance,
            "argmax_m": self.argmax_m, "bound_holds": self.bound_holds, "safe_T": self.safe_T,
            "condition_a": self.condition_a.to_json(), "condition_b": self.condition_b.to_json(),
        }
        if self.exact_max_distance is not None:
            out["exact_max_distance"] = str(self.exact_max_distance)
        return out


def build_pf_vector(
    space: ShiftSpace,
    y: SparseVector,
    A: NatSet,
    eps: float,
    p: int | None = None,
    tail_tol: float | None = None,
    exact: bool = False,
) -> tuple[SparseVector, PFReport]:
    """Superpose copies of ``y`` at the members of ``A``: ``x = sum_n sum_j y_j e_{n+j}``.

    ``y`` must be supported in ``[1, p]`` (unilateral) or ``[-p, p]``
    (bilateral), ``A`` must have gaps ``> p`` (``> 2p`` bilateral), and
    conditions (a) and (b) must pass for ``(A, p, eps)``.  The report holds
    ``max_m ||B^m x - y||`` over ``m`` in ``A``, to be compared with
    ``eps * sum |y_j|``.
    """
    if len(y) == 0:
        p = p or 0
    elif p is None:
        p = int(np.abs(y.indices).max())
    lo_ok = -p if space.bilateral else 1
    if len(y) and (y.indices.min() < lo_ok or y.indices.max() > p):
        raise PreconditionError(f"y must be supported in [{lo_ok}, {p}]")
    need = 2 * p if space.bilateral else p
    if len(A) >= 2 and int(gap_list(A).min()) <= need:
        raise PreconditionError(f"A has a gap <= {need}; thin it first (thin_certificate)")
    tail_tol = eps if tail_tol is None else tail_tol
    ca = condition_a_check(space, A, p, tail_tol)
    cb = condition_b_check(space, A, p, eps)
    if not ca.converges:
        raise PreconditionError(f"condition (a) fails: tail {ca.tail:.3g} >= {tail_tol:.3g}")
    if not cb.passed:
        raise PreconditionError(f"condition (b) fails: {cb.worst:.3g} >= {eps:.3g} at m={cb.worst_m}, j={cb.worst_j}")

    e = A.elements
    if len(y) and len(e):
        idx = (e[:, None] + y.indices[None, :]).ravel()
        coeffs = np.broadcast_to(y.coeffs, (len(e), len(y))).ravel()
        if idx.max() >= space.hi or idx.min() < space.lo:
            raise SupportOverflow("x = sum of translated copies of y leaves the window")
        x = SparseVector(idx, coeffs)
    else:
        x = SparseVector.zero()
    total_y = float(np.abs(y.coeffs).sum()) if len(y) else 0.0
    bound = eps * total_y
    dists = {int(m): orbit_distance(space, x, y, int(m)) for m in e} if len(x) or len(y) else {}
    if len(e) and space.bilateral:
        _check_orbit_window(space, x, int(e.max()))
    if dists:
        argmax = max(dists, key=lambda m: (dists[m], -m))
        mx = dists[argmax]
    else:
        argmax, mx = None, 0.0
    exact_mx = None
    if exact and dists:
        exact_mx = max(
            exact_norm(space, {k: Fraction(v) for k, v in (shift_apply(space, x, m) - y).to_dict().items()})
            for m in dists
        )
    holds = mx < bound if total_y else mx == 0.0
    safe_T = int(e.max()) if len(e) else 0
    report = PFReport(p, eps, bound, mx, argmax, holds, safe_T, ca, cb, dists, exact_mx)
    return x, report


def transfer_block(
    space: ShiftSpace,
    x_probe: SparseVector,
    y_witness: SparseVector,
    U: tuple[SparseVector, float],
    R: NatSet | Iterable[int],
    T: int,
) -> int | None:
    """First ``n <= T`` with ``R + n`` inside ``N(x_probe, U)``.

    ``R`` must already lie in ``N(y_witness, U)``; ``None`` means the finite
    probe did not visit ``U`` along the whole block, which is allowed.
    """
    center, eps = U
    r = np.asarray(R.elements if isinstance(R, NatSet) else sorted(R), dtype=np.int64)
    if r.size == 0:
        return 0
    wd = orbit_distances(space, y_witness, center, r)
    if not np.all(wd < eps):
        bad = int(r[np.argmax(wd >= eps)])
        raise PreconditionError(f"{bad} is not a return time of the witness vector")
    top = T + int(r.max())
    inside = orbit_distances(space, x_probe, center, top) < eps
    ok = np.ones(T + 1, dtype=bool)
    for k in r:
        ok &= inside[k:k + T + 1]
    hits = np.flatnonzero(ok)
    return int(hits[0]) if hits.size else None


@dataclass(frozen=True)
class ChaoticVerdict:
    converges: bool
    tail: float
    domination_checked: int = 0  # truncations checked
    domination_ok: bool | None = None
    worst_ratio: float | None = None  # max ||lhs|| / ||rhs|| over truncations

    def to_json(self) -> dict:
        return dict(self.__dict__)


def chaotic_partial_sum_check(
    space: ShiftSpace, tol: float, A: NatSet | None = None, b: int | None = None
) -> ChaoticVerdict:
    """Cauchy-at-horizon test for ``sum_n e_n``, plus the syndetic domination check.

    Given ``A`` with gap bound ``b``, verifies at every truncation ``N`` in ``A``
    that ``sum_{n <= N} e_n`` is coordinatewise dominated by
    ``sum_{j <= b} B^j (sum_{n in A, n <= N} e_n)`` and hence (constant 1) in norm.
    """
    natural = NatSet.full(space.hi)
    ca = condition_a_check(space, natural, 0, tol)
    if A is None:
        return ChaoticVerdict(ca.converges, ca.tail)
    if b is None:
        raise ValueError("b is required with A")
    e = A.elements[A.elements < space.hi]
    ok = True
    worst = 0.0
    for t, N in enumerate(e):
        members = e[: t + 1]
        cover = np.zeros(N + 1, dtype=np.int64)
        for j in range(b + 1):
            k = members - j
            k = k[k >= 0]
            np.add.at(cover, k, 1)
        if not np.all(cover >= 1):
            ok = False
        lhs = norm(space, SparseVector(np.arange(N + 1), np.ones(N + 1)))
        nz = np.flatnonzero(cover)
        rhs = norm(space, SparseVector(nz, cover[nz].astype(float)))
        if rhs == 0:
            ok = False
            continue
        worst = max(worst, lhs / rhs)
        if lhs > rhs * (1 + 1e-12):
            ok = False
    return ChaoticVerdict(ca.converges, ca.tail, len(e), ok, worst)


def reverse_direction_probe(
    space: ShiftSpace, x: SparseVector, p: int, delta: float, T: int
) -> tuple[NatSet, ConditionB]:
    """Extract ``A = N(x, ball(y, delta))`` with ``y = sum_{j=1..p} j e_j`` and run condition (b) on it."""
    y = SparseVector(np.arange(1, p + 1), np.arange(1, p + 1, dtype=float))
    A = return_time_set(space, x, y, delta, T).base
    return A, condition_b_check(space, A, p, float("inf"))
