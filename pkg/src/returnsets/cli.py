"""Batch front end: ``returnsets {classify,density,block-check,shift-run,suite}``.

Each run writes ``report.json``, ``summary.txt`` and (for csv/both formats)
``traces/*.csv`` into its output directory.  Exit status: 0 success, 1 input
error, 2 computed-but-negative verdict.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import blockfam, density, families, shiftlab
from .natset import NatSet, SetSpec, materialize, read_set_file

log = logging.getLogger("returnsets")

EXIT_OK, EXIT_INPUT, EXIT_VERDICT = 0, 1, 2
COMMANDS = ("classify", "density", "block-check", "shift-run", "suite")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    out: str = "out"
    horizon: int | None = None
    tol: float | None = None
    seed: int | None = None
    format: str = "json"
    name: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv", "both"):
            raise InputError(f"unknown format {self.format!r}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        extra = set(d) - set(known)
        if extra:
            raise InputError(f"unknown RunConfig fields: {sorted(extra)}")
        return cls(**known)


# ---------------------------------------------------------------------------
# input resolution


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None


def resolve_set(item, cfg: RunConfig, base: Path) -> NatSet:
    """A set input is a SetSpec object, a ``.json`` spec path, or a set-file path."""
    if isinstance(item, str):
        path = (base / item) if not Path(item).is_absolute() else Path(item)
        if path.suffix == ".json":
            item = _load_json(path)
        else:
            try:
                elems = read_set_file(path)
            except OSError as exc:
                raise InputError(f"cannot read {path}: {exc.strerror}") from None
            except ValueError as exc:
                raise InputError(str(exc)) from None
            H = cfg.horizon or ((elems[-1] + 1) if elems else 1)
            item = {"kind": "file", "horizon": H, "path": str(path)}
    if not isinstance(item, dict):
        raise InputError(f"bad set input: {item!r}")
    item = dict(item)
    if cfg.horizon is not None:
        item["horizon"] = cfg.horizon
    if item.get("kind") == "bernoulli" and item.get("seed") is None:
        if cfg.seed is None:
            raise InputError("bernoulli set needs a seed (spec field or --seed)")
        item["seed"] = cfg.seed
    if item.get("kind") == "file" and not Path(item["path"]).is_absolute():
        item["path"] = str(base / item["path"])
    try:
        return materialize(SetSpec.from_json(item))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed set spec {item!r}: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _vector(d) -> shiftlab.SparseVector:
    if not isinstance(d, dict):
        raise InputError("vectors are given as {index: coefficient}")
    return shiftlab.SparseVector.from_dict({int(k): float(v) for k, v in d.items()})


# ---------------------------------------------------------------------------
# commands; each returns (exit status, result dict, traces {name: csv text}, summary lines)


def cmd_classify(cfg, base):
    A = resolve_set(cfg.inputs.get("set"), cfg, base)
    params = families.ClassifyParams(**cfg.inputs.get("params", {}))
    report = families.classify(A, params)
    s = report["summary"]
    lines = [
        f"|A| = {s['size']} over H = {s['horizon']}",
        f"longest interval: {s['longest_interval']}",
        f"syndetic gap bound: {s['syndetic_bound']}",
    ]
    if s.get("densities"):
        for k in density.DensityEstimates.CHAIN:
            lines.append(f"{k}: {s['densities'][k]['value']:.6g}")
    return EXIT_OK, report, {}, lines


def cmd_density(cfg, base):
    A = resolve_set(cfg.inputs.get("set"), cfg, base)
    try:
        prof = density.profile(A, cfg.inputs.get("window_lengths"), cfg.inputs.get("log_points"))
        est = density.density_estimates(prof, cfg.inputs.get("tail_fraction", 0.5))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    grid = cfg.inputs.get("grid", "windows")
    if grid == "windows":
        grid = None
    elif grid == "log":
        grid = list(prof.log_points)
    result = {
        "horizon": A.horizon,
        "estimates": est.to_json(),
        "chain_violation": est.chain_violation(),
        "window_lengths": list(prof.window_lengths),
        "window_max": prof.window_max.tolist(),
        "window_min": prof.window_min.tolist(),
        "log_points": list(prof.log_points),
        "harmonic_sums": prof.harmonic_sums.tolist(),
    }
    lines = [f"{k}: {getattr(est, k).value:.6g} (at {getattr(est, k).at})" for k in est.CHAIN]
    return EXIT_OK, result, {"density": prof.to_csv(grid)}, lines


def cmd_block_check(cfg, base):
    S = resolve_set(cfg.inputs.get("S"), cfg, base)
    F = resolve_set(cfg.inputs.get("F"), cfg, base)
    depth = min(int(cfg.inputs.get("depth", blockfam.DEFAULT_DEPTH)), len(F))
    if depth < 1:
        raise InputError("F is empty")
    try:
        w = blockfam.block_certificate_check(S, F, depth)
    except blockfam.BlockCheckFailed as exc:
        result = {"verdict": False, "failing_prefix": exc.prefix, "searched": list(exc.searched), "message": str(exc)}
        return EXIT_VERDICT, result, {}, [f"FAILED: {exc}"]
    result = {"verdict": True, "certificates": [w.to_json()]}
    return EXIT_OK, result, {}, [f"all {depth} prefixes of F translate into S"]


def cmd_shift_run(cfg, base):
    inp = cfg.inputs
    try:
        space = shiftlab.ShiftSpace.from_json(inp["space"])
        y = _vector(inp["y"])
        p = int(inp.get("p", max((abs(i) for i in y.indices), default=0)))
        eps = float(inp["eps"])
        T = int(inp["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed shift-run config: {exc!r}") from None
    tail_tol = cfg.tol if cfg.tol is not None else float(inp.get("tail_tol", eps))
    A = resolve_set(inp["A"], cfg, base)
    if inp.get("thin", False):
        A = shiftlab.thin_certificate(A, 2 * p if space.bilateral else p)
    ca = shiftlab.condition_a_check(space, A, p, tail_tol)
    cb = shiftlab.condition_b_check(space, A, p, eps)
    result = {"space": space.to_json(), "condition_a": ca.to_json(), "condition_b": cb.to_json(),
              "beta_p": space.beta(p), "shift_bound": space.shift_bound}
    lines = [
        f"condition (a): {'converges' if ca.converges else 'divergent-at-horizon'} (tail {ca.tail:.3e})",
        f"condition (b): {'pass' if cb.passed else 'FAIL'} (max {cb.worst:.6e} at m={cb.worst_m}, j={cb.worst_j})",
    ]
    if not (ca.converges and cb.passed):
        return EXIT_VERDICT, result, {}, lines
    try:
        x, rep = shiftlab.build_pf_vector(space, y, A, eps, p, tail_tol)
        rts = shiftlab.return_time_set(space, x, y, rep.bound if rep.bound > 0 else eps, T)
    except (shiftlab.PreconditionError, shiftlab.SupportOverflow) as exc:
        result["error"] = str(exc)
        return EXIT_VERDICT, result, {}, lines + [f"FAILED: {exc}"]
    result["build"] = rep.to_json()
    result["return_set"] = {"T": T, "radius": rts.eps, "size": len(rts.base), "elements": rts.base.to_list()}
    certs = []
    if len(rts.base) >= 2:
        syn = families.syndetic_gap_bound(rts.base)
        result["return_set"]["syndetic_bound"] = syn.bound
        certs.append(syn.to_json())
    result["certificates"] = certs
    lines.append(f"max orbit distance over A: {rep.max_distance:.6e} (bound {rep.bound:.3e})")
    lines.append(f"return set: {len(rts.base)} times up to T={T}, gap bound {result['return_set'].get('syndetic_bound')}")
    trace = "n,distance\n" + "".join(f"{n},{float(d)!r}\n" for n, d in enumerate(rts.distances))
    status = EXIT_OK if rep.bound_holds else EXIT_VERDICT
    return status, result, {"orbit": trace}, lines


def cmd_suite(cfg, base):
    runs = cfg.inputs.get("runs")
    if not isinstance(runs, list) or not runs:
        raise InputError("suite needs a non-empty 'runs' list")
    children = []
    for i, r in enumerate(runs):
        r = dict(r)
        name = r.get("name") or f"{i:02d}-{r.get('command')}"
        r["name"] = name
        r["out"] = str(Path(cfg.out) / name)
        for k in ("horizon", "tol", "seed"):
            if r.get(k) is None and getattr(cfg, k) is not None:
                r[k] = getattr(cfg, k)
        r.setdefault("format", cfg.format)
        children.append(RunConfig.from_json(r))
    threads = max(1, int(os.environ.get("RT_THREADS", "1")))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        codes = list(pool.map(lambda c: run(c, base), children))
    result = {"runs": [{"name": c.name, "exit_status": code} for c, code in zip(children, codes)]}
    lines = [f"{c.name}: exit {code}" for c, code in zip(children, codes)]
    worst = EXIT_INPUT if EXIT_INPUT in codes else max(codes)
    return worst, result, {}, lines


_HANDLERS = {
    "classify": cmd_classify,
    "density": cmd_density,
    "block-check": cmd_block_check,
    "shift-run": cmd_shift_run,
    "suite": cmd_suite,
}


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def run(cfg: RunConfig, base: Path | str = ".") -> int:
    """Execute one run and write its artifacts; returns the exit status."""
    base = Path(base)
    out = Path(cfg.out)
    try:
        status, result, traces, lines = _HANDLERS[cfg.command](cfg, base)
    except InputError as exc:
        status, result, traces, lines = EXIT_INPUT, {"error": str(exc)}, {}, [f"input error: {exc}"]
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "command": cfg.command,
        "config": cfg.to_json(),
        "exit_status": status,
        "result": result,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if cfg.format in ("json", "both") or cfg.command == "suite" or not traces:
        (out / "report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8"
        )
    if cfg.format in ("csv", "both") and traces:
        (out / "traces").mkdir(exist_ok=True)
        for name, text in traces.items():
            (out / "traces" / f"{name}.csv").write_text(text, encoding="utf-8")
    (out / "summary.txt").write_text("\n".join([f"{cfg.command}: exit {status}", *lines]) + "\n", encoding="utf-8")
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="returnsets", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="RunConfig JSON (command-specific inputs under 'inputs', or inline)")
    ap.add_argument("--set", dest="set_input", help="set spec JSON or set file (classify, density)")
    ap.add_argument("--S", dest="S", help="target set (block-check)")
    ap.add_argument("--F", dest="F", help="pattern set (block-check)")
    ap.add_argument("--depth", type=int)
    ap.add_argument("--horizon", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=("json", "csv", "both"), default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(args) -> tuple[RunConfig, Path]:
    base = Path(".")
    d: dict = {"command": args.command, "inputs": {}}
    if args.config:
        raw = _load_json(args.config)
        base = Path(args.config).parent
        if "inputs" in raw or "command" in raw:
            d.update({k: v for k, v in raw.items() if k != "command"})
            if raw.get("command", args.command) != args.command:
                raise InputError(f"config is for {raw['command']!r}, not {args.command!r}")
        else:
            d["inputs"] = raw
    inputs = dict(d.get("inputs", {}))
    if args.set_input:
        inputs["set"] = args.set_input
    if args.S:
        inputs["S"] = args.S
    if args.F:
        inputs["F"] = args.F
    if args.depth is not None:
        inputs["depth"] = args.depth
    d["inputs"] = inputs
    for k in ("horizon", "tol", "seed", "out", "format"):
        v = getattr(args, k)
        if v is not None:
            d[k] = v
    return RunConfig.from_json(d), base


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg, base = config_from_args(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    status = run(cfg, base)
    print((Path(cfg.out) / "summary.txt").read_text(encoding="utf-8"), end="")
    return status


if __name__ == "__main__":
    sys.exit(main())
