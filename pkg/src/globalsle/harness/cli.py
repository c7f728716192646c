"""Command line entry point.

Exit codes: 0 success, 1 a checked assertion failed, 2 usage or bounds error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..combinatorics import LinkPattern
from ..conformal import make_parameters
from ..errors import BoundsError
from ..loewner import read_curve, sample_chordal_sle, write_curve, write_driver
from ..partition import check_total_bound, collapse_products
from .config import ExperimentConfig, load_config
from .experiments import estimate_connectivity, replica_seed
from .stats import ResultTable, driver_qv_slope

log = logging.getLogger("globalsle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="globalsle", description="Multiple SLE and lattice interface experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat key = value configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("sample-sle", help="sample chordal SLE curves and their drivers")
    common(sp)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--T", type=float)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--n", type=int, default=None, help="number of curves")

    for name, help_ in (("ising", "critical Ising connectivity table"), ("fk", "critical FK connectivity table"),
                        ("connectivity", "connectivity table for the configured model")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--ell", type=float)
        sp.add_argument("--marks", help="comma separated perimeter fractions")
        sp.add_argument("--replicas", type=int)
        sp.add_argument("--sweeps", type=int)
        sp.add_argument("--workers", type=int)
        if name != "ising":
            sp.add_argument("--q", type=float)
            sp.add_argument("--method", choices=("heat-bath", "edwards-sokal"))

    sp = sub.add_parser("resample", help="run the resampling chain from semicircular curves")
    common(sp)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--marks", help="comma separated real points")
    sp.add_argument("--pattern", help="link pattern, e.g. '2;1-4,2-3'")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--stride", type=int)

    sp = sub.add_parser("verify-partition", help="check the partition-function inequalities")
    common(sp)
    sp.add_argument("--N", type=int, dest="n")
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--trials", type=int)

    sp = sub.add_parser("qv", help="driver quadratic-variation slope")
    common(sp)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--n", type=int, default=None, help="number of curves to sample")
    sp.add_argument("--T", type=float)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--curves", help="directory of curve files to analyse instead of sampling")
    sp.add_argument("--expect", type=float, help="expected slope")
    sp.add_argument("--tol", type=float, default=0.05, help="relative tolerance for --expect")
    return p


_KIND = {"sample-sle": "sle-sample", "ising": "ising-connectivity", "fk": "fk-connectivity",
         "resample": "resample-chain", "verify-partition": "verify-partition", "qv": "driver-qv"}


def _config(args) -> ExperimentConfig:
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file {path} not found")
        cfg = load_config(path)
    else:
        cfg = ExperimentConfig()
    kind = _KIND.get(args.command, cfg.kind)
    if args.command == "connectivity" and kind not in ("ising-connectivity", "fk-connectivity"):
        raise UsageError("connectivity needs kind = ising-connectivity or fk-connectivity in the config")
    over = {k: v for k, v in vars(args).items()
            if k not in ("command", "config", "out", "curves", "expect", "tol") and v is not None}
    if isinstance(over.get("marks"), str):
        over["marks"] = tuple(float(v) for v in over["marks"].split(",") if v)
    if args.out:
        over["output"] = args.out
    return cfg.updated(kind=kind, **over)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _cmd_sample_sle(cfg: ExperimentConfig, args) -> int:
    params = make_parameters(cfg.kappa if cfg.kappa is not None else 2.0)
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    n = args.n or cfg.replicas
    summary = []
    for r in range(n):
        seed = replica_seed(cfg.seed, r)
        curve, driver = sample_chordal_sle(params, cfg.T, cfg.dt, seed, return_driver=True)
        write_curve(out / f"curve_{r:04d}.txt", curve)
        write_driver(out / f"driver_{r:04d}.txt", driver, {"kappa": params.kappa, "seed": seed})
        summary.append({"replica": r, "seed": seed, "points": len(curve), "tip": [curve.end.real, curve.end.imag]})
    _write_json(out / "sample-sle.json", {"kappa": params.kappa, "T": cfg.T, "dt": cfg.dt, "curves": summary})
    return 0


def _cmd_connectivity(cfg: ExperimentConfig, args) -> int:
    if not cfg.marks:
        raise UsageError("marks are required")
    table = estimate_connectivity(cfg)
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    table.write(out / f"{cfg.kind}.json")
    for row in table.sorted_rows():
        print(f"{row['params']['pattern']}: {row['estimate']:.4f} +- {row['stderr']:.4f} (n={row['count']})")
    return 0


def _cmd_resample(cfg: ExperimentConfig, args) -> int:
    from ..multisle import run_resampling_chain, save_trajectory, signed_area_statistic, straight_state

    params = make_parameters(cfg.kappa if cfg.kappa is not None else 3.0)
    if params.kappa > 4:
        raise BoundsError("the resampling chain needs kappa <= 4")
    marks = cfg.marks or (0.0, 1.0, 2.0, 3.0)
    pattern = LinkPattern.parse(cfg.pattern) if cfg.pattern else LinkPattern(((1, 4), (2, 3)))
    state = straight_state(params, pattern, marks)
    traj = run_resampling_chain(state, cfg.steps, cfg.seed, stride=cfg.stride)
    out = cfg.output_dir()
    save_trajectory(traj, out / "trajectory", cfg.seed, cfg.stride)
    table = ResultTable()
    stats = np.array([signed_area_statistic(s) for s in traj])
    table.add("resample-chain", {"kappa": params.kappa, "pattern": pattern.encode(), "marks": list(marks),
                                 "steps": cfg.steps, "seed": cfg.seed},
              float(stats.mean()), float(stats.std(ddof=1) / math.sqrt(len(stats))) if len(stats) > 1 else 0.0,
              len(stats))
    table.write(out / "resample-chain.json")
    return 0


def _cmd_verify_partition(cfg: ExperimentConfig, args) -> int:
    params = make_parameters(cfg.kappa if cfg.kappa is not None else 3.0)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    n2 = 2 * cfg.n
    for _ in range(cfg.trials):
        while True:
            x = np.sort(rng.uniform(0.0, 10.0, n2))
            if np.all(np.diff(x) > 1e-6):
                break
        rep = check_total_bound(tuple(x), params.h, params.kappa)
        row = rep.row()
        row.update(seed=cfg.seed, samples=cfg.trials)
        rows.append(row)
        for k in range(1, n2):
            v = collapse_products(tuple(x), params.h, k)
            rows.append({"op": "collapse_products", "N": cfg.n, "kappa": params.kappa, "lhs": v, "rhs": 1.0,
                         "pass": bool(v <= 1.0 + 1e-12), "seed": cfg.seed, "samples": cfg.trials, "stderr": None,
                         "k": k})
    ok = all(r["pass"] for r in rows)
    _write_json(cfg.output_dir() / "verify-partition.json", {"all_pass": ok, "rows": rows})
    print(f"verify-partition N={cfg.n} kappa={params.kappa}: {len(rows)} rows, "
          f"{'all pass' if ok else 'FAILURES'}")
    return 0 if ok else 1


def _cmd_qv(cfg: ExperimentConfig, args) -> int:
    if args.curves:
        files = sorted(Path(args.curves).glob("curve_*.txt"))
        curves = [read_curve(f) for f in files]
    else:
        params = make_parameters(cfg.kappa if cfg.kappa is not None else 3.0)
        n = args.n or cfg.replicas
        curves = [sample_chordal_sle(params, cfg.T, cfg.dt, replica_seed(cfg.seed, r)) for r in range(n)]
    est = driver_qv_slope(curves)
    table = ResultTable()
    table.add("driver-qv", {"kappa": cfg.kappa, "T": cfg.T, "dt": cfg.dt, "seed": cfg.seed,
                            "source": args.curves or "sampled"}, est.value, est.stderr, est.n_curves,
              failed=est.n_failed)
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    table.write(out / "driver-qv.json")
    print(f"QV slope {est.value:.4f} +- {est.stderr:.4f} over {est.n_curves} curves")
    if args.expect is not None and abs(est.value - args.expect) > args.tol * abs(args.expect):
        return 1
    return 0


_COMMANDS = {"sample-sle": _cmd_sample_sle, "ising": _cmd_connectivity, "fk": _cmd_connectivity,
             "connectivity": _cmd_connectivity, "resample": _cmd_resample,
             "verify-partition": _cmd_verify_partition, "qv": _cmd_qv}


def cli_main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _parser().parse_args(argv)
        cfg = _config(args)
        return _COMMANDS[args.command](cfg, args)
    except (UsageError, BoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
