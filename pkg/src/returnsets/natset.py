"""Finite-horizon integer sets.

A :class:`NatSet` is a bit-packed subset of ``[0, H)`` (unilateral) or of the
window ``[-H, H)`` (bilateral, stored with offset ``H``).  Every "infinite"
set is represented by its restriction to the horizon, and the operations that
can push elements across the horizon report how many were lost.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

__all__ = [
    "NatSet",
    "SetSpec",
    "Clipped",
    "materialize",
    "translate",
    "boolean",
    "gap_list",
    "cusp_transform",
    "read_set_file",
    "write_set_file",
    "run_lengths",
]


@dataclass(frozen=True, eq=False)
class NatSet:
    horizon: int
    bits: np.ndarray = field(repr=False)
    bilateral: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.shape != ((self.width + 7) // 8,):
            raise ValueError("packed bit array has the wrong length")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    # construction

    @classmethod
    def from_mask(cls, mask, bilateral: bool = False) -> "NatSet":
        """Build from a boolean membership array over the stored index range."""
        mask = np.asarray(mask, dtype=bool)
        width = mask.shape[0]
        if bilateral:
            if width % 2:
                raise ValueError("bilateral mask must have even length 2H")
            horizon = width // 2
        else:
            horizon = width
        return cls(horizon, np.packbits(mask), bilateral)

    @classmethod
    def from_elements(
        cls,
        elements: Iterable[int],
        horizon: int,
        bilateral: bool = False,
        clip: bool = False,
    ) -> "NatSet":
        """Build from explicit members.

        Out-of-range members raise unless ``clip`` is set, in which case they
        are silently dropped (use :func:`translate` when the drop count matters).
        """
        offset = horizon if bilateral else 0
        width = 2 * horizon if bilateral else horizon
        idx = np.fromiter((int(e) for e in elements), dtype=np.int64) + offset
        bad = (idx < 0) | (idx >= width)
        if bad.any():
            if not clip:
                first = int(idx[bad][0] - offset)
                raise ValueError(f"element {first} outside the index range of horizon {horizon}")
            idx = idx[~bad]
        mask = np.zeros(width, dtype=bool)
        mask[idx] = True
        return cls.from_mask(mask, bilateral)

    @classmethod
    def empty(cls, horizon: int, bilateral: bool = False) -> "NatSet":
        return cls.from_mask(np.zeros(2 * horizon if bilateral else horizon, bool), bilateral)

    @classmethod
    def full(cls, horizon: int, bilateral: bool = False) -> "NatSet":
        return cls.from_mask(np.ones(2 * horizon if bilateral else horizon, bool), bilateral)

    # basic geometry

    @property
    def offset(self) -> int:
        return self.horizon if self.bilateral else 0

    @property
    def width(self) -> int:
        return 2 * self.horizon if self.bilateral else self.horizon

    @property
    def lo(self) -> int:
        """Smallest representable value."""
        return -self.horizon if self.bilateral else 0

    @property
    def hi(self) -> int:
        """One past the largest representable value."""
        return self.horizon

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.unpackbits(self.bits, count=self.width).astype(bool)
        m.setflags(write=False)
        return m

    @cached_property
    def elements(self) -> np.ndarray:
        """Members in increasing order, as values (not stored indices)."""
        e = np.flatnonzero(self.mask).astype(np.int64) - self.offset
        e.setflags(write=False)
        return e

    def __len__(self) -> int:
        return int(np.unpackbits(self.bits).sum())

    def __iter__(self) -> Iterator[int]:
        return (int(e) for e in self.elements)

    def __contains__(self, value) -> bool:
        i = int(value) + self.offset
        return 0 <= i < self.width and bool(self.mask[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, NatSet):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.bilateral == other.bilateral
            and np.array_equal(self.bits, other.bits)
        )

    def __hash__(self) -> int:
        return hash((self.horizon, self.bilateral, self.bits.tobytes()))

    def __repr__(self) -> str:
        n = len(self)
        head = ", ".join(str(e) for e in self.elements[:8])
        more = ", ..." if n > 8 else ""
        kind = "bilateral" if self.bilateral else "unilateral"
        return f"NatSet({{{head}{more}}}, |A|={n}, H={self.horizon}, {kind})"

    def min(self) -> int:
        if len(self.elements) == 0:
            raise ValueError("empty set has no minimum")
        return int(self.elements[0])

    def max(self) -> int:
        if len(self.elements) == 0:
            raise ValueError("empty set has no maximum")
        return int(self.elements[-1])

    def to_list(self) -> list[int]:
        return [int(e) for e in self.elements]

    def restrict(self, start: int, stop: int) -> "NatSet":
        """Members in ``[start, stop)``, same horizon."""
        m = self.mask.copy()
        idx = np.arange(self.width) - self.offset
        m[(idx < start) | (idx >= stop)] = False
        return NatSet.from_mask(m, self.bilateral)

    def with_horizon(self, horizon: int) -> "NatSet":
        """Re-embed in a different horizon, dropping members that no longer fit."""
        return NatSet.from_elements(self.elements, horizon, self.bilateral, clip=True)

    # operator sugar
    def __or__(self, other):
        return boolean(self, other, "union")

    def __and__(self, other):
        return boolean(self, other, "intersection")

    def __sub__(self, other):
        return boolean(self, other, "difference")

    def __invert__(self):
        return boolean(self, self, "complement")


class Clipped(NamedTuple):
    """A set plus the number of elements pushed out of the index range."""

    set: NatSet
    dropped: int


def translate(A: NatSet, k: int) -> Clipped:
    """Return ``A + k`` restricted to the index range of ``A``."""
    e = A.elements + int(k)
    keep = (e >= A.lo) & (e < A.hi)
    out = NatSet.from_elements(e[keep], A.horizon, A.bilateral)
    return Clipped(out, int((~keep).sum()))


_BOOLEAN_KINDS = ("union", "intersection", "difference", "complement")


def boolean(A: NatSet, B: NatSet, kind: str) -> NatSet:
    """Exact set algebra over a shared horizon.

    ``kind="complement"`` ignores ``B`` apart from the horizon check.
    """
    if kind not in _BOOLEAN_KINDS:
        raise ValueError(f"unknown boolean kind {kind!r}")
    if A.horizon != B.horizon or A.bilateral != B.bilateral:
        raise ValueError(
            f"horizon mismatch: ({A.horizon}, bilateral={A.bilateral}) vs "
            f"({B.horizon}, bilateral={B.bilateral})"
        )
    a, b = A.bits, B.bits
    if kind == "union":
        out = a | b
    elif kind == "intersection":
        out = a & b
    elif kind == "difference":
        out = a & ~b
    else:
        out = ~a
    # padding bits past the width must stay clear
    tail = (-A.width) % 8
    if tail:
        out = out.copy()
        out[-1] &= np.uint8((0xFF << tail) & 0xFF)
    return NatSet(A.horizon, out, A.bilateral)


def gap_list(A: NatSet) -> np.ndarray:
    """Successive differences of the sorted members."""
    if len(A.elements) < 2:
        raise ValueError("gap_list needs at least 2 elements")
    return np.diff(A.elements)


def run_lengths(mask: np.ndarray) -> np.ndarray:
    """For each index, the length of the run of True values ending there."""
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    idx = np.arange(1, n + 1)
    # position of the most recent False at or before i (0 if none)
    last_false = np.maximum.accumulate(np.where(mask, 0, idx))
    return np.where(mask, idx - last_false, 0)


def cusp_transform(A: NatSet, cover: Sequence[NatSet], shifts: Sequence[int]) -> Clipped:
    """Cut ``A`` along a finite cover and shift the pieces: ``U_j (n_j + A & I_j)``.

    The cover must cover the whole index range; shifts are non-negative.
    ``dropped`` counts shifted elements that fell past the horizon (an element
    lying in several cover parts is counted once per part).
    """
    if len(cover) == 0 or len(cover) != len(shifts):
        raise ValueError("need q >= 1 cover parts and one shift per part")
    if any(int(s) < 0 for s in shifts):
        raise ValueError("shifts must be non-negative")
    covered = np.zeros(A.width, dtype=bool)
    for part in cover:
        if part.horizon != A.horizon or part.bilateral != A.bilateral:
            raise ValueError("cover part horizon mismatch")
        covered |= part.mask
    if not covered.all():
        hole = int(np.flatnonzero(~covered)[0]) - A.offset
        raise ValueError(f"cover leaves a hole at {hole}")
    out = np.zeros(A.width, dtype=bool)
    dropped = 0
    for part, s in zip(cover, shifts):
        piece, d = translate(A & part, int(s))
        out |= piece.mask
        dropped += d
    return Clipped(NatSet.from_mask(out, A.bilateral), dropped)


# ---------------------------------------------------------------------------
# set specifications

_SPEC_KINDS = ("explicit", "periodic", "intervals", "ap", "runs", "bernoulli", "file")


@dataclass(frozen=True)
class SetSpec:
    """Declarative description of a generated set.

    ``params`` by kind:

    * ``explicit``: ``elements``
    * ``periodic``: ``d``, ``offset`` (default 0)
    * ``intervals``: ``intervals`` as ``[[a, b], ...]`` half-open
    * ``ap``: ``start``, ``step``, ``length``
    * ``runs``: ``positions``, ``lengths`` (element counts), ``step`` (default 1)
    * ``bernoulli``: ``p``, ``seed``
    * ``file``: ``path``
    """

    kind: str
    horizon: int
    params: dict = field(default_factory=dict)
    bilateral: bool = False

    def __post_init__(self):
        if self.kind not in _SPEC_KINDS:
            raise ValueError(f"unknown set kind {self.kind!r}")

    def to_json(self) -> dict:
        d = {"kind": self.kind, "horizon": self.horizon, **self.params}
        if self.bilateral:
            d["bilateral"] = True
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SetSpec":
        d = dict(d)
        try:
            kind = d.pop("kind")
            horizon = int(d.pop("horizon"))
        except KeyError as exc:
            raise ValueError(f"set spec missing field {exc}") from None
        bilateral = bool(d.pop("bilateral", False))
        return cls(kind, horizon, d, bilateral)

    # convenience constructors used throughout tests and scripts

    @classmethod
    def periodic(cls, d: int, horizon: int, offset: int = 0) -> "SetSpec":
        return cls("periodic", horizon, {"d": d, "offset": offset})

    @classmethod
    def dyadic_runs(cls, horizon: int, step: int = 1, kmax: int | None = None) -> "SetSpec":
        """Runs of ``k`` elements (spacing ``step``) starting at ``2**k``, ``k >= 1``.

        Thick for ``step == 1`` yet of zero upper density; with ``step == 2``
        it is piecewise syndetic but not syndetic.
        """
        positions, lengths = [], []
        k = 1
        while 2**k + step * (k - 1) < horizon and (kmax is None or k <= kmax):
            positions.append(2**k)
            lengths.append(k)
            k += 1
        return cls("runs", horizon, {"positions": positions, "lengths": lengths, "step": step})


def materialize(spec: SetSpec) -> NatSet:
    """Build the set a spec describes, clipped to its horizon."""
    H = spec.horizon
    if H < 1:
        raise ValueError("horizon must be >= 1")
    p = spec.params
    lo = -H if spec.bilateral else 0
    values = np.arange(lo, H, dtype=np.int64)
    kind = spec.kind
    if kind == "explicit":
        return NatSet.from_elements(p["elements"], H, spec.bilateral, clip=True)
    if kind == "periodic":
        d = int(p["d"])
        if d < 1:
            raise ValueError("period must be >= 1")
        mask = (values - int(p.get("offset", 0))) % d == 0
        return NatSet.from_mask(mask, spec.bilateral)
    if kind == "intervals":
        mask = np.zeros(values.shape[0], bool)
        for a, b in p["intervals"]:
            mask |= (values >= a) & (values < b)
        return NatSet.from_mask(mask, spec.bilateral)
    if kind == "ap":
        step = int(p["step"])
        if step == 0:
            raise ValueError("arithmetic progression step must be nonzero")
        length = int(p["length"])
        elems = int(p["start"]) + step * np.arange(length, dtype=np.int64)
        return NatSet.from_elements(elems, H, spec.bilateral, clip=True)
    if kind == "runs":
        step = int(p.get("step", 1))
        if step < 1:
            raise ValueError("run step must be >= 1")
        if len(p["positions"]) != len(p["lengths"]):
            raise ValueError("runs need one length per position")
        parts = [a + step * np.arange(n, dtype=np.int64) for a, n in zip(p["positions"], p["lengths"])]
        elems = np.concatenate(parts) if parts else np.empty(0, np.int64)
        return NatSet.from_elements(elems, H, spec.bilateral, clip=True)
    if kind == "bernoulli":
        prob = float(p["p"])
        if not 0.0 <= prob <= 1.0:
            raise ValueError(f"bernoulli p must lie in [0, 1], got {prob}")
        if p.get("seed") is None:
            raise ValueError("bernoulli spec needs an explicit seed")
        rng = np.random.default_rng(int(p["seed"]))
        return NatSet.from_mask(rng.random(values.shape[0]) < prob, spec.bilateral)
    if kind == "file":
        elems = read_set_file(p["path"], bilateral=spec.bilateral)
        return NatSet.from_elements(elems, H, spec.bilateral, clip=True)
    raise AssertionError(kind)


def read_set_file(path, bilateral: bool = False) -> list[int]:
    """Parse the one-integer-per-line set format (``#`` starts a comment)."""
    out: list[int] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = int(line)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: not an integer: {line!r}") from None
        if v < 0 and not bilateral:
            raise ValueError(f"{path}:{lineno}: negative value in a unilateral set file")
        if out and v <= out[-1]:
            raise ValueError(f"{path}:{lineno}: values must be strictly ascending")
        out.append(v)
    return out


def write_set_file(A: NatSet, path, comment: str | None = None) -> None:
    lines = [f"# {c}" for c in (comment or "").splitlines()]
    lines += [str(e) for e in A]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def spec_from_json_text(text: str) -> SetSpec:
    return SetSpec.from_json(json.loads(text))
