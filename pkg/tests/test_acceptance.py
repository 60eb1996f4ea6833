"""Acceptance gate: ten pass/fail criteria with pinned tolerances.

Run ``pytest tests/test_acceptance.py`` (each criterion prints one PASS/FAIL
line) or ``python tests/test_acceptance.py`` for the bare report.
"""

import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from numpy.lib.stride_tricks import sliding_window_view

from returnsets.blockfam import BlockCheckFailed, block_certificate_check, compose_block_witness
from returnsets.density import default_window_lengths, density_estimates, profile
from returnsets.families import longest_bounded_step_ap, syndetic_core_extraction, syndetic_gap_bound
from returnsets.natset import NatSet, SetSpec, materialize
from returnsets.shiftlab import (
    ShiftSpace,
    SparseVector,
    Weights,
    build_pf_vector,
    chaotic_partial_sum_check,
    condition_a_check,
    condition_b_check,
    return_time_set,
    transfer_block,
)

ROOT = Path(__file__).resolve().parent.parent


# ---------------------------------------------------------------------------
# 1. density chain


def criterion_1():
    worst, slowest = 0.0, 0.0
    for d in (2, 3, 5, 10):
        t0 = time.perf_counter()
        est = density_estimates(profile(materialize(SetSpec.periodic(d, 10**6))))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, max(abs(v - 1 / d) for v in est.chain_values()))
    runs = SetSpec("runs", 10**6, {"positions": [2**k for k in range(1, 17)], "lengths": list(range(1, 17))})
    t0 = time.perf_counter()
    # at a finite horizon Banach density 1 shows only at window lengths the runs can fill
    est = density_estimates(profile(materialize(runs), window_lengths=range(1, 17)))
    slowest = max(slowest, time.perf_counter() - t0)
    ok = worst <= 1e-3 and est.banach_upper.value >= 0.999 and est.upper_density.value <= 0.01 and slowest < 5
    detail = (f"max |est - 1/d| = {worst:.2e}; runs: banach_upper = {est.banach_upper.value}, "
              f"upper = {est.upper_density.value:.2e}; slowest {slowest:.2f}s")
    return ok, detail


# ---------------------------------------------------------------------------
# 2. exact chain W-(n) <= c(n) <= W+(n)


def criterion_2():
    H = 10**5
    rng = np.random.default_rng(2)
    violations, checked = 0, 0
    for seed in range(1000):
        p = float(rng.uniform(0.01, 0.99))
        A = materialize(SetSpec("bernoulli", H, {"p": p, "seed": seed}))
        grid = sorted(set(default_window_lengths(H)) | set(rng.integers(1, H + 1, 8).tolist()))
        prof = profile(A, grid, [10])
        for i, n in enumerate(prof.window_lengths):
            checked += 1
            if not prof.window_min[i] <= prof.c(n) <= prof.window_max[i]:
                violations += 1
    return violations == 0, f"{violations} violations over {checked} (set, n) pairs"


# ---------------------------------------------------------------------------
# 3. sliding-window engine vs naive recount


def criterion_3():
    H = 10**4
    rng = np.random.default_rng(3)
    mismatches, checked = 0, 0
    for seed in range(100):
        A = materialize(SetSpec("bernoulli", H, {"p": float(rng.uniform(0.05, 0.95)), "seed": 10_000 + seed}))
        grid = sorted({1, 2, 3, *rng.integers(4, H + 1, 5).tolist()})
        prof = profile(A, grid, [10])
        for i, n in enumerate(prof.window_lengths):
            counts = sliding_window_view(A.mask.astype(np.int64), n).sum(axis=1)  # O(H * n)
            checked += 1
            if (counts.max(), counts.min()) != (prof.window_max[i], prof.window_min[i]):
                mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches over {checked} (set, n) pairs"


# ---------------------------------------------------------------------------
# 4. AP search vs brute force


def brute_ap(mask: np.ndarray, b: int) -> int:
    """Try every (start, step <= b): extend all starts one term at a time."""
    best = 1 if mask.any() else 0
    H = mask.shape[0]
    for s in range(1, b + 1):
        alive = mask.copy()  # alive[a]: a, a+s, ..., a+(L-1)s all in A
        L = 1
        while True:
            nxt = alive[: H - L * s] & mask[L * s:]
            if not nxt.any():
                break
            alive, L = nxt, L + 1
        best = max(best, L)
    return best


def criterion_4():
    H = 10**4
    rng = np.random.default_rng(4)
    mismatches = 0
    for seed in range(200):
        A = materialize(SetSpec("bernoulli", H, {"p": float(rng.uniform(0.2, 0.9)), "seed": 20_000 + seed}))
        b = 1 + seed % 8
        if longest_bounded_step_ap(A, b).length != brute_ap(A.mask, b):
            mismatches += 1
    small = longest_bounded_step_ap(NatSet.from_elements([1, 3, 5, 7, 10, 13, 16], 100), 3).length
    return mismatches == 0 and small == 4, f"{mismatches}/200 mismatches; small instance length {small}"


# ---------------------------------------------------------------------------
# 5. pigeonhole extraction on runs of evens


def criterion_5():
    A = materialize(SetSpec.dyadic_runs(10**6, step=2))
    ex = syndetic_core_extraction(A, 2, 8)
    sums = np.cumsum(ex.steps)
    members = [int(n + sums[k]) in A for j, n in enumerate(ex.anchors, 1) for k in range(j)]
    F = ex.core()
    gap = int(np.diff([0, *F]).max())
    ok = all(members) and len(members) == 36 and gap <= 2
    return ok, f"steps {ex.steps}, {sum(members)}/{len(members)} memberships re-check, F gap bound {gap}"


# ---------------------------------------------------------------------------
# 6. block certificates vs exhaustive subsets


def exhaustive_ok(S: NatSet, fe: list[int]) -> list[bool]:
    """ok[m-1]: every subset of the first m members of F translates into S (subset DP on bitmasks)."""
    members = set(S)
    tb = [sum(1 << n for n in range(S.horizon) if f + n in members) for f in range(S.horizon)]
    adm, ok = [(1 << S.horizon) - 1], []
    for f in fe:
        new = [a & tb[f] for a in adm]
        if not all(new):
            return ok + [False] * (len(fe) - len(ok))
        ok.append(True)
        adm += new
    return ok


def prefix_ok(S: NatSet, F: NatSet, L: int) -> list[bool]:
    try:
        w = block_certificate_check(S, F, L)
    except BlockCheckFailed as exc:
        return [m < exc.prefix for m in range(1, L + 1)]
    assert w.check(S)
    return [True] * L


def has_translate(S: NatSet, R: np.ndarray) -> bool:
    ns = np.arange(S.horizon - int(R.max()))
    return bool(S.mask[ns[:, None] + R[None, :]].all(axis=1).any())


def criterion_6():
    disagreements, exhaustive_cases, deepest = 0, 0, 0
    rng = np.random.default_rng(6)
    for case in range(40):
        H = int(rng.integers(24, 65))
        S = NatSet.from_mask(rng.random(H) < rng.uniform(0.6, 0.97))
        F = NatSet.from_mask(np.concatenate([rng.random(22) < 0.92, np.zeros(H - 22, bool)]))
        L = min(len(F), 20)
        if L == 0:
            continue
        a, b = prefix_ok(S, F, L), exhaustive_ok(S, F.to_list()[:L])
        disagreements += a != b
        exhaustive_cases += 1
        deepest = max(deepest, sum(b))
    sampled = 0
    for case in range(50):
        H = 10**4
        S = materialize(SetSpec("bernoulli", H, {"p": float(rng.uniform(0.7, 0.95)), "seed": 60_000 + case}))
        fe = np.flatnonzero(rng.random(60) < 0.5)
        F = NatSet.from_elements(fe, H)
        L = min(len(F), 20)
        ok = prefix_ok(S, F, L)
        for m in range(1, L + 1):
            P = F.elements[:m]
            for _ in range(10):
                R = P[rng.random(m) < 0.5]
                if R.size == 0:
                    continue
                sampled += 1
                # a subset of a translatable prefix must translate
                if ok[m - 1] and not has_translate(S, R):
                    disagreements += 1
            # a failing prefix really has no translate, its predecessor has one
            if not ok[m - 1] and (m == 1 or ok[m - 2]):
                disagreements += has_translate(S, P) or (m > 1 and not has_translate(S, P[:-1]))
    F = NatSet.from_elements(range(8), 4096)
    Fb = materialize(SetSpec.dyadic_runs(4096, kmax=10))
    S = materialize(SetSpec("runs", 4096, {"positions": [1000, 3000], "lengths": [100, 600]}))
    inner = block_certificate_check(Fb, F, 8)
    outer = block_certificate_check(S, Fb, int(np.searchsorted(Fb.elements, 2**8 + 7)) + 1)
    composed = compose_block_witness(outer, inner).check(S)
    detail = (f"{disagreements} disagreements ({exhaustive_cases} exhaustive universes, deepest all-subsets "
              f"prefix {deepest}; {sampled} sampled subsets at H=1e4); composition re-checks: {composed}")
    return disagreements == 0 and composed, detail


# ---------------------------------------------------------------------------
# 7. constructive soundness on geometric l1


def criterion_7():
    t0 = time.perf_counter()
    geo = Weights.geometric("1/2")
    space = ShiftSpace(1000, geo)
    A = materialize(SetSpec.periodic(10, 1000))
    ca = condition_a_check(space, A, 1, 1e-6)
    cb = condition_b_check(space, A, 1, 0.01)
    oracle = 2.0**-10 / (1 - 2.0**-10)
    # orbit times up to T = 1000 touch indices up to 1000 + p; a slightly wider window
    # keeps every needed coordinate (2^-n stays representable down to n = 1074)
    wide = ShiftSpace(1070, geo)
    y = SparseVector.basis(1)
    x, rep = build_pf_vector(wide, y, materialize(SetSpec.periodic(10, 1060)), 0.01, 1, 1e-6)
    rts = return_time_set(wide, x, y, 0.01, 1000)
    syn = syndetic_gap_bound(rts.base)
    elapsed = time.perf_counter() - t0
    ok = (ca.tail < 1e-6 and abs(cb.worst - oracle) <= 1e-9 and rep.max_distance < 0.01
          and syn.bound == 10 and syn.stop == 1001 and elapsed < 2)
    detail = (f"tail {ca.tail:.1e}; (b) max {cb.worst!r} vs oracle {oracle!r}; "
              f"max orbit distance {rep.max_distance:.4e}; return-set gap bound {syn.bound}; {elapsed:.2f}s")
    return ok, detail


# ---------------------------------------------------------------------------
# 8. chaotic corollary shadow


def criterion_8():
    geo = chaotic_partial_sum_check(ShiftSpace(1000, Weights.geometric("1/2")), 1e-6,
                                    materialize(SetSpec.periodic(3, 1000)), 3)
    flat = ShiftSpace(1000, Weights.constant(1), norm="sup")
    inc = condition_a_check(flat, NatSet.full(1000), 0, 1e-6).increments
    ok = geo.tail < 1e-6 and bool(np.all(inc == 1.0)) and geo.domination_ok and geo.domination_checked == 334
    detail = (f"geometric tail {geo.tail:.1e}; sup increments all 1: {bool(np.all(inc == 1.0))}; "
              f"domination held at {geo.domination_checked} truncations: {geo.domination_ok}")
    return ok, detail


# ---------------------------------------------------------------------------
# 9. block transfer


def criterion_9():
    space = ShiftSpace(1070, Weights.geometric("1/2"))
    y = SparseVector.basis(1)
    x, rep = build_pf_vector(space, y, materialize(SetSpec.periodic(10, 1000)), 0.01, 1, 1e-6)
    R = materialize(SetSpec.periodic(10, 1000)).restrict(0, 50)
    found = {s: transfer_block(space, x.shifted(s), x, (y, rep.bound), R, 500) for s in (0, 7, 23)}
    return all(n == s for s, n in found.items()), f"delay -> found n: {found}"


# ---------------------------------------------------------------------------
# 10. CLI determinism


def criterion_10():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "suite"
        cmd = [sys.executable, "-m", "returnsets.cli", "suite", "--config", str(ROOT / "scripts/configs/suite.json"),
               "--seed", "7", "--out", str(out)]
        snapshots = []
        for _ in range(2):
            subprocess.run(cmd, check=False, capture_output=True, env={**os.environ, "RT_THREADS": "4"})
            reports = sorted(out.rglob("report.json"))
            snapshots.append({
                str(p.relative_to(out)): "\n".join(
                    line for line in p.read_text().splitlines() if not line.lstrip().startswith('"timestamp"'))
                for p in reports
            })
        same = bool(snapshots[0]) and snapshots[0] == snapshots[1]
        stamped = all('"timestamp"' in p.read_text() for p in out.rglob("report.json"))
    return same and stamped, f"{len(snapshots[0])} report.json files identical modulo timestamp: {same}"


CRITERIA = {
    1: ("density chain on periodic and runs sets", criterion_1),
    2: ("exact chain W- <= c <= W+ on 1000 Bernoulli sets", criterion_2),
    3: ("sliding-window engine equals naive recount", criterion_3),
    4: ("AP DP equals brute force", criterion_4),
    5: ("pigeonhole extraction on runs of evens", criterion_5),
    6: ("prefix block check equals exhaustive subsets", criterion_6),
    7: ("constructive soundness on geometric l1", criterion_7),
    8: ("chaotic partial sums and domination", criterion_8),
    9: ("block transfer recovers the delay", criterion_9),
    10: ("CLI suite determinism", criterion_10),
}


def report_line(k: int) -> tuple[bool, str]:
    name, fn = CRITERIA[k]
    ok, detail = fn()
    return ok, f"[{'PASS' if ok else 'FAIL'}] criterion {k:2d}: {name} | {detail}"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    ok, line = report_line(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report_line(k) for k in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
