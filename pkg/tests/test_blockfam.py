import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from returnsets.blockfam import (
    BlockCheckFailed,
    block_certificate_check,
    block_density_window_bound,
    block_syndetic_to_ps,
    compose_block_witness,
    dense_window_witness,
    restrict_witness,
    shift_witness,
)
from returnsets.families import BlockWitness, recheck
from returnsets.natset import NatSet, SetSpec, materialize


def translate_bits(S: NatSet) -> list[int]:
    """Bit ``n`` of entry ``f`` is set when ``f + n`` is in ``S``."""
    members = set(S)
    return [sum(1 << n for n in range(S.horizon) if f + n in members) for f in range(S.horizon)]


def exhaustive_prefix_ok(S: NatSet, F: NatSet, L: int) -> list[bool]:
    """ok[m-1]: every subset of the first m members of F has a translate into S.

    Subset DP over bitmasks: the admissible translates of R are those of
    R minus its top element, intersected with those of the top element.
    """
    fe = F.to_list()[:L]
    tb = translate_bits(S)
    full = (1 << S.horizon) - 1
    adm = [full]  # adm[mask] for masks over the first m elements
    ok, all_good = [], True
    for m, f in enumerate(fe, 1):
        new = [a & tb[f] for a in adm]
        all_good = all_good and all(new)
        ok.append(all_good)
        adm = adm + new
    return ok


def has_translate(S: NatSet, R) -> bool:
    R = np.asarray(R)
    span = int(R.max())
    ns = np.arange(S.horizon - span)
    return bool(np.all(S.mask[ns[:, None] + R[None, :]], axis=1).any())


def prefix_ok(S, F, L):
    try:
        w = block_certificate_check(S, F, L)
    except BlockCheckFailed as exc:
        return [m < exc.prefix for m in range(1, L + 1)]
    assert recheck(w, S)
    return [True] * L


@st.composite
def universes(draw):
    H = draw(st.integers(8, 64))
    dense = draw(st.floats(0.5, 0.95))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    S = NatSet.from_mask(rng.random(H) < dense)
    fe = np.flatnonzero(rng.random(H // 2) < 0.5)
    if fe.size == 0:
        fe = np.array([0])
    return S, NatSet.from_elements(fe, H)


@settings(max_examples=60, deadline=None)
@given(universes())
def test_prefix_check_equals_exhaustive_small(case):
    S, F = case
    L = min(len(F), 12)
    assert prefix_ok(S, F, L) == exhaustive_prefix_ok(S, F, L)


def test_examples():
    evens = materialize(SetSpec.periodic(2, 1000))
    with pytest.raises(BlockCheckFailed) as info:
        block_certificate_check(evens, NatSet.from_elements([0, 1], 1000), 2)
    assert info.value.prefix == 2

    starts = [4**k for k in range(1, 7)]
    thick = NatSet.from_elements([s + i for k, s in enumerate(starts, 1) for i in range(2**k)], 5000)
    w = block_certificate_check(thick, NatSet.from_elements(range(64), 5000), 64)
    for m, n in w.translates.items():
        first_long = next(s for k, s in enumerate(starts, 1) if 2**k >= m)
        assert n == first_long

    S = materialize(SetSpec("bernoulli", 300, {"p": 0.3, "seed": 4}))
    w = block_certificate_check(S, S, len(S))
    assert set(w.translates.values()) == {0}


def test_bilateral_rejected():
    A = NatSet.full(10, bilateral=True)
    with pytest.raises(ValueError):
        block_certificate_check(A, A, 1)


@settings(max_examples=40, deadline=None)
@given(universes(), st.data())
def test_monotone_in_f(case, data):
    S, F = case
    try:
        w = block_certificate_check(S, F, len(F))
    except BlockCheckFailed:
        return
    keep = data.draw(st.lists(st.booleans(), min_size=len(F), max_size=len(F)))
    sub = NatSet.from_elements(F.elements[np.array(keep, bool)], F.horizon)
    assert restrict_witness(w, sub).check(S)


def test_shift_witness():
    S = materialize(SetSpec("bernoulli", 200, {"p": 0.8, "seed": 1}))
    F = NatSet.from_elements([0, 1, 3], 200)
    w = block_certificate_check(S, F, 3)
    S5 = NatSet.from_elements(S.elements + 5, 205)
    assert shift_witness(w, 5).check(S5)


def chained():
    # F: an interval; F_b: runs of k at 2^k (thick at a small scale); S: long runs
    F = NatSet.from_elements(range(8), 4096)
    Fb = materialize(SetSpec.dyadic_runs(4096, kmax=10))
    S = materialize(SetSpec("runs", 4096, {"positions": [1000, 3000], "lengths": [100, 600]}))
    inner = block_certificate_check(Fb, F, 8)
    depth_needed = int(np.searchsorted(Fb.elements, 2**8 + 7)) + 1
    outer = block_certificate_check(S, Fb, depth_needed)
    return S, F, Fb, inner, outer


def test_composition_rechecks():
    S, F, Fb, inner, outer = chained()
    comp = compose_block_witness(outer, inner)
    assert comp.depth == 8 and comp.check(S)
    assert comp.check(S) == recheck(comp, S)


def test_composition_identity_inner():
    S, F, Fb, inner, outer = chained()
    ident = BlockWitness(Fb, {m: 0 for m in range(1, 11)})
    comp = compose_block_witness(outer, ident)
    assert comp.translates == {m: outer.translates[m] for m in range(1, 11)}


def test_composition_truncated_outer_errors():
    S, F, Fb, inner, outer = chained()
    short = BlockWitness(Fb, {m: n for m, n in outer.translates.items() if m <= 20})
    with pytest.raises(ValueError, match="outside the outer"):
        compose_block_witness(short, inner)


def test_density_transfer_evens():
    F = materialize(SetSpec.periodic(2, 400))
    depth = 100
    # S is a union of disjoint translated prefixes of F
    translates = {m: 1000 * m for m in range(1, depth + 1)}
    parts = [F.elements[:m] + n for m, n in translates.items()]
    S = NatSet.from_elements(np.concatenate(parts), 10**5 + 400)
    w = BlockWitness(F, translates)
    assert w.check(S)
    v = block_density_window_bound(S, w, 0.49)
    recount = int(S.mask[v.translate:v.translate + v.prefix_end + 1].sum())
    assert recount == v.window_count and recount / v.prefix_end >= 0.5


def test_density_transfer_trivial_and_failing():
    F = NatSet.from_elements([2**k for k in range(1, 12)], 5000)
    w = block_certificate_check(F, F, len(F))
    with pytest.raises(ValueError, match="no prefix"):
        block_density_window_bound(F, w, 0.1)
    assert block_density_window_bound(F, w, 0.0).ratio > 0


def test_syndetic_to_ps():
    F = materialize(SetSpec.periodic(3, 300))
    translates = {m: 1000 * m for m in range(1, 21)}
    S = NatSet.from_elements(np.concatenate([F.elements[:m] + n for m, n in translates.items()]), 25000)
    cert = block_syndetic_to_ps(S, BlockWitness(F, translates), 3)
    assert recheck(cert, S)
    assert sorted(c for _, c in cert.runs) == list(range(1, 21))

    interval = NatSet.from_elements(range(30), 3000)
    S2 = materialize(SetSpec.dyadic_runs(3000))
    w = block_certificate_check(S2, interval, 8)
    assert block_syndetic_to_ps(S2, w, 1).check(S2)

    powers = NatSet.from_elements([2**k for k in range(1, 11)], 3000)
    with pytest.raises(ValueError):
        block_syndetic_to_ps(powers, block_certificate_check(powers, powers, 10), 3)


def test_dense_window_witness_is_sound():
    S = materialize(SetSpec("bernoulli", 2000, {"p": 0.5, "seed": 9}))
    F, w = dense_window_witness(S, 32, 10)
    assert w.check(S) and F.max() < 32
