"""Command-line experiment harness.

Subcommands ``gen``, ``solve``, ``filter``, ``phase``, ``cluster`` and
``bench`` write their results as CSV (plus PGM heatmaps for ``phase``)
under ``--out``.  A ``--config`` file of ``key=value`` lines supplies
defaults for any option; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import admm, experiments, filtering, io, synth
from .basis import ColumnLocalBasis, make_basis
from .matcore import InputError
from .metrics import support

log = logging.getLogger("robustmc")

BASIS_KINDS = ("identity", "dct", "random", "random_per_column")

RESULT_COLS = ["n", "trial", "dist", "hamming", "seconds", "iters", "converged"]
FILTER_COLS = ["n", "r", "p0", "a", "seed", "rank", "seed_columns", "filter_seconds",
               "filter_dist", "filter_hamming", "admm_seconds", "admm_dist", "admm_hamming",
               "speedup"]


def _floats(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in str(text).split(",") if t.strip()]


def _rank(text: str):
    return text if text == "auto" else int(text)


def _add_problem(p: argparse.ArgumentParser, n: int = 100) -> None:
    p.add_argument("--input", type=Path, help="fixture directory written by 'gen'")
    p.add_argument("--m", type=int, help="rows (default: n)")
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--r", type=int, help="rank (default: round(0.05 n))")
    p.add_argument("--a", type=float, default=0.1, help="outlier column probability")
    p.add_argument("--p0", type=float, default=0.8, help="coefficient observation probability")
    p.add_argument("--noise-variance", type=float, default=1.0)
    p.add_argument("--basis", choices=BASIS_KINDS, default="identity")


def _add_admm(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lam", type=float, help="l2,1 weight (default: 1/sqrt(ln n))")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=1000)


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags without defaults of their own, so a
    # value given before the subcommand is not reset by the subparser
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=d(0))
    common.add_argument("--config", type=Path, default=d(None), help="key=value defaults file")
    common.add_argument("--out", type=Path, default=d(Path("out")))
    common.add_argument("--threads", type=int, default=d(1))
    common.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustmc", parents=[_global_flags(False)],
                                     description="Robust matrix completion experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_flags(True)

    g = sub.add_parser("gen", parents=[common], help="write a synthetic fixture")
    g.add_argument("--preset", choices=("random", "standard", "rowspike", "union"),
                   default="random")
    _add_problem(g)
    g.add_argument("--spike", type=float, help="spike height for rowspike (default n)")
    g.add_argument("--dims", default="4,4,4", help="subspace dimensions for union")
    g.add_argument("--points", type=int, default=60, help="columns per subspace for union")

    s = sub.add_parser("solve", parents=[common], help="full ADMM solve")
    _add_problem(s)
    _add_admm(s)
    s.add_argument("--trials", type=int, default=1)

    f = sub.add_parser("filter", parents=[common], help="l2,1 filtering")
    _add_problem(f, n=1000)
    _add_admm(f)
    f.add_argument("--rank", type=_rank, default="auto", help="integer or 'auto'")
    f.add_argument("--oversample", type=float, default=0.12)
    f.add_argument("--outlier-tol", type=float, default=1e-6)
    f.add_argument("--no-compare", action="store_true", help="skip the full ADMM solve")

    ph = sub.add_parser("phase", parents=[common], help="phase-transition sweep")
    ph.add_argument("--n", type=int, default=150)
    ph.add_argument("--p0", type=_floats, default="1.0,0.5")
    ph.add_argument("--grid", type=int, default=8)
    ph.add_argument("--rank-range", type=_floats, default="0.02,0.4")
    ph.add_argument("--outlier-range", type=_floats, default="0.02,0.4")
    ph.add_argument("--trials", type=int, default=5)
    _add_admm(ph)

    c = sub.add_parser("cluster", parents=[common], help="subspace clustering pipeline")
    c.add_argument("--m", type=int, default=60)
    c.add_argument("--dims", type=_ints, default="4,4,4")
    c.add_argument("--points", type=int, default=60)
    c.add_argument("--a", type=float, default=0.05)
    c.add_argument("--p0", type=float, default=0.95)
    c.add_argument("--trials", type=int, default=1)
    c.add_argument("--use-filter", action="store_true")
    c.add_argument("--rank", type=_rank, default="auto", help="filter rank, integer or 'auto'")
    _add_admm(c)

    b = sub.add_parser("bench", parents=[common], help="filtering runtime scaling")
    b.add_argument("--ns", type=_ints, default="500,1000,2000")
    b.add_argument("--m", type=int, default=200)
    b.add_argument("--r", type=int, default=5)
    b.add_argument("--p0", type=float, default=0.95)
    b.add_argument("--a", type=float, default=0.1)
    b.add_argument("--oversample", type=float, default=0.12)
    b.add_argument("--compare", action="store_true", help="also time the full ADMM solve")
    return parser


def _subparsers(parser):
    return parser._subparsers._group_actions[0].choices


def _explicit(argv) -> set[str]:
    """Destinations given on the command line, found by parsing without defaults."""
    parser = build_parser()
    for p in [parser, *_subparsers(parser).values()]:
        for action in p._actions:
            action.default = argparse.SUPPRESS
    return set(vars(parser.parse_args(argv)))


def _convert(action: argparse.Action, text: str):
    if isinstance(action, argparse._StoreTrueAction):
        return text.strip().lower() in ("1", "true", "yes", "on")
    value = action.type(text) if action.type else text
    if action.choices is not None and value not in action.choices:
        raise InputError(f"{action.dest}: {value!r} not in {sorted(action.choices)}")
    return value


def parse_args(argv=None) -> argparse.Namespace:
    """Parse flags; values from ``--config`` fill in whatever was not given."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    values = io.read_config(args.config)
    actions = {a.dest: a for a in _subparsers(parser)[args.command]._actions}
    unknown = sorted(set(values) - set(actions) - {"help"})
    if unknown:
        raise InputError(f"{args.config}: unknown keys {', '.join(unknown)}")
    given = _explicit(argv)
    for key, text in values.items():
        if key not in given and key != "config":
            try:
                setattr(args, key, _convert(actions[key], text))
            except ValueError as exc:
                raise InputError(f"{args.config}: bad value for {key}: {exc}") from exc
    return args


def admm_config(args) -> admm.AdmmConfig:
    return admm.AdmmConfig(lam=args.lam, tol=args.tol, max_iter=args.max_iter)


def problem_spec(args, seed: int) -> synth.SyntheticSpec:
    r = args.r if args.r is not None else max(1, round(0.05 * args.n))
    return synth.SyntheticSpec(m=args.m or args.n, n=args.n, r=r, a=args.a, p0=args.p0,
                               noise_variance=args.noise_variance, basis=args.basis, seed=seed)


# fixtures -----------------------------------------------------------------

def write_fixture(out: Path, problem: synth.SyntheticProblem, extra: dict | None = None) -> None:
    m, n = problem.shape
    cfg = {"m": m, "n": n, "basis": problem.basis.kind}
    if problem.spec is not None:
        cfg.update(r=problem.spec.r, a=problem.spec.a, p0=problem.spec.p0,
                   noise_variance=problem.spec.noise_variance, seed=problem.spec.seed,
                   basis=problem.spec.basis)
    if problem.basis_seed is not None:
        cfg["basis_seed"] = problem.basis_seed
    if problem.basis.kind == "shared":
        cfg["basis_file"] = "basis.txt"
        io.write_matrix(out / "basis.txt", problem.basis.transform)
    cfg.update(extra or {})
    io.write_matrix(out / "L0.txt", problem.L0)
    io.write_matrix(out / "S0.txt", problem.S0)
    io.write_mask(out / "mask.txt", problem.observed.mask)
    io.write_observed(out / "observed.txt", problem.observed)
    io.write_indices(out / "support.txt", problem.outlier_support)
    if problem.labels is not None:
        io.write_indices(out / "labels.txt", problem.labels)
    io.write_config(out / "problem.cfg", cfg)


def read_fixture(path: Path) -> synth.SyntheticProblem:
    """Load a fixture; ground-truth files are optional."""
    path = Path(path)
    cfg = io.read_config(path / "problem.cfg")
    m, n = int(cfg["m"]), int(cfg["n"])
    kind = cfg.get("basis", "identity")
    if "basis_file" in cfg:
        basis = ColumnLocalBasis.shared(io.read_matrix(path / cfg["basis_file"]), n)
    elif kind == "identity":
        basis = ColumnLocalBasis.identity(m, n)
    else:
        if "basis_seed" not in cfg:
            raise InputError(f"{path}: basis '{kind}' needs basis_seed or basis_file")
        basis = make_basis(kind, m, n, seed=int(cfg["basis_seed"]))
    observed = io.read_observed(path / "observed.txt", (m, n))
    L0 = io.read_matrix(path / "L0.txt") if (path / "L0.txt").exists() else None
    S0 = io.read_matrix(path / "S0.txt") if (path / "S0.txt").exists() else np.zeros((m, n))
    sup = io.read_indices(path / "support.txt") if (path / "support.txt").exists() \
        else np.zeros(0, dtype=int)
    spec = None
    if "r" in cfg:
        spec = synth.SyntheticSpec(m=m, n=n, r=int(cfg["r"]), a=float(cfg["a"]),
                                   p0=float(cfg["p0"]),
                                   noise_variance=float(cfg.get("noise_variance", 1.0)),
                                   basis=kind if kind in BASIS_KINDS else "identity",
                                   seed=int(cfg.get("seed", 0)))
    return synth.SyntheticProblem(L0 if L0 is not None else np.full((m, n), np.nan), S0, sup,
                                  observed, basis, spec)


def _has_truth(problem) -> bool:
    return not np.isnan(problem.L0).any()


def load_problem(args, seed: int) -> synth.SyntheticProblem:
    if args.input is not None:
        return read_fixture(args.input)
    return synth.generate(problem_spec(args, seed))


# subcommands --------------------------------------------------------------

def cmd_gen(args) -> None:
    if args.preset == "rowspike":
        n = args.n
        r = args.r if args.r is not None else max(1, round(0.1 * n))
        problem = synth.gen_adversarial_row_spike(n, r, 10.0 / n, spike=args.spike,
                                                  seed=args.seed)
    elif args.preset == "union":
        dims = _ints(args.dims)
        problem, _ = synth.gen_union_of_subspaces(args.m or 60, dims, args.points, a=args.a,
                                                  p0=args.p0, seed=args.seed,
                                                  noise_variance=args.noise_variance,
                                                  basis=args.basis)
    elif args.preset == "standard":
        problem = synth.generate(synth.SyntheticSpec.standard(args.n, seed=args.seed,
                                                            basis=args.basis))
    else:
        problem = synth.generate(problem_spec(args, args.seed))
    write_fixture(args.out, problem, {"preset": args.preset})
    print(f"wrote fixture {args.out} ({problem.shape[0]}x{problem.shape[1]}, "
          f"{problem.observed.count} observed, {problem.outlier_support.size} outliers)")


def cmd_solve(args) -> None:
    config = admm_config(args)
    if args.input is not None or args.trials == 1:
        problem = load_problem(args, args.seed)
        if _has_truth(problem):
            row, res = experiments.solve_problem(problem, config)
        else:
            res = admm.solve(problem.observed, problem.basis, config)
            row = {"n": problem.shape[1], "trial": 0, "dist": "", "hamming": "",
                   "seconds": "", "iters": res.iterations, "converged": int(res.converged)}
        rows = [row]
        io.write_matrix(args.out / "L_star.txt", res.L_star)
        io.write_matrix(args.out / "S_star.txt", res.S_star)
        io.write_indices(args.out / "support_star.txt", support(res.S_star))
        io.write_csv(args.out / "telemetry.csv", ["iter", "residual", "objective"],
                     res.telemetry_rows())
    else:
        rows = experiments.solve_trials(problem_spec(args, args.seed), args.trials, config,
                                        args.threads)
    io.write_csv(args.out / "results.csv", RESULT_COLS, [[r[k] for k in RESULT_COLS] for r in rows])
    for r in rows:
        print(",".join(str(r[k]) for k in RESULT_COLS))


def cmd_filter(args) -> None:
    problem = load_problem(args, args.seed)
    if not _has_truth(problem):
        raise InputError("filter needs a fixture with ground truth (L0.txt)")
    cfg = filtering.FilterConfig(rank_estimate=args.rank, oversample_const=args.oversample,
                                 outlier_rel_tol=args.outlier_tol, seed=args.seed,
                                 admm=replace(admm_config(args), lam=None))
    fr = filtering.run(problem.observed, problem.basis, cfg)
    dist, ham = experiments.recovery(problem, fr.U_basis, fr.support)
    row = {"n": problem.shape[1], "r": problem.spec.r if problem.spec else "",
           "p0": problem.spec.p0 if problem.spec else "", "a": problem.spec.a if problem.spec else "",
           "seed": args.seed, "rank": fr.rank, "seed_columns": fr.seed_columns.size,
           "filter_seconds": fr.elapsed, "filter_dist": dist, "filter_hamming": ham,
           "admm_seconds": "", "admm_dist": "", "admm_hamming": "", "speedup": ""}
    if not args.no_compare:
        arow, _ = experiments.solve_problem(problem, admm_config(args))
        row.update(admm_seconds=arow["seconds"], admm_dist=arow["dist"],
                   admm_hamming=arow["hamming"], speedup=arow["seconds"] / max(fr.elapsed, 1e-12))
    io.write_csv(args.out / "columns.csv", ["index", "residual", "flag"], fr.column_rows())
    io.write_matrix(args.out / "U_basis.txt", fr.U_basis)
    io.write_csv(args.out / "filter.csv", FILTER_COLS, [[row[k] for k in FILTER_COLS]])
    print(",".join(FILTER_COLS))
    print(",".join(str(row[k]) for k in FILTER_COLS))


def cmd_phase(args) -> None:
    config = admm_config(args)
    rank_fracs = np.linspace(*args.rank_range, args.grid)
    outlier_fracs = np.linspace(*args.outlier_range, args.grid)
    results = {}
    for p0 in args.p0:
        grid = experiments.phase_grid(args.n, rank_fracs, outlier_fracs, p0, args.trials,
                                      seed=args.seed, config=config, threads=args.threads)
        results[p0] = grid
    header = ["rank_frac"] + [f"{a:.4g}" for a in outlier_fracs]
    for p0, grid in results.items():
        tag = f"{p0:g}"
        rows = [[f"{rf:.4g}", *map(int, grid[i])] for i, rf in enumerate(rank_fracs)]
        io.write_csv(args.out / f"phase_p0_{tag}.csv", header, rows)
        io.write_pgm(args.out / f"phase_p0_{tag}.pgm", experiments.grid_to_pgm(grid, args.trials))
        viol = experiments.monotonicity_violations(grid)
        print(f"p0={tag}: successes per cell (rows = rank fraction)")
        print(grid)
        print(f"monotonicity inversions: {len(viol)}")


def cmd_cluster(args) -> None:
    config = admm_config(args)
    fcfg = filtering.FilterConfig(rank_estimate=args.rank, seed=args.seed,
                                  admm=replace(config, lam=None)) if args.use_filter else None
    rows, last = [], None
    for t in range(args.trials):
        res = experiments.cluster_trial(args.m, args.dims, args.points, args.a, args.p0,
                                        args.seed + t, config, fcfg)
        rows.append([res["seed"], res["accuracy"], res["hamming"], res["seconds"]])
        last = res
        print(f"seed={res['seed']} accuracy={res['accuracy']:.4f} hamming={res['hamming']}")
    io.write_csv(args.out / "cluster.csv", ["seed", "accuracy", "hamming", "seconds"], rows)
    io.write_csv(args.out / "labels.csv", ["column_index", "label"],
                 list(enumerate(last["labels"].tolist())))


def cmd_bench(args) -> None:
    cfg = filtering.FilterConfig(rank_estimate=args.r, oversample_const=args.oversample,
                                 seed=args.seed)
    rows = experiments.bench_scaling(args.ns, args.m, args.r, args.p0, args.a, seed=args.seed,
                                     config=cfg, compare=args.compare)
    for row in rows:
        row.setdefault("admm_seconds", "")
        row.setdefault("admm_dist", "")
        row.setdefault("admm_hamming", "")
        row.setdefault("speedup", "")
    io.write_csv(args.out / "bench.csv", FILTER_COLS, [[r[k] for k in FILTER_COLS] for r in rows])
    for r in rows:
        print(f"n={r['n']} filter={r['filter_seconds']:.3f}s hamming={r['filter_hamming']}")


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "filter": cmd_filter, "phase": cmd_phase,
            "cluster": cmd_cluster, "bench": cmd_bench}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        COMMANDS[args.command](args)
    except (InputError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
