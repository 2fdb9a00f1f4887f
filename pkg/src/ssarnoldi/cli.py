"""Command-line experiment driver; every subcommand writes one CSV.

The first line of each CSV is ``# config: <json>``, the canonical form of
the effective configuration, so any output can be regenerated with
``--config`` pointing at that JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import analysis
from .arnoldi import METHOD_ALIASES, SKETCHED_METHODS, ArnoldiConfig, arnoldi_run
from .matrix_io import RHS_KINDS, MatrixMarketError, ProblemSpec, parse_generator
from .selection import STRATEGIES, select, select_bruteforce
from .sketching import KINDS, make_rng, make_sketch
from .solvers import gmres, sgmres

@dataclass
class ExperimentConfig:
    command: str = ""
    matrix: list = field(default_factory=list)
    generate: list = field(default_factory=list)
    rhs: str = "gaussian"
    seed: int = 0
    m: int = 100
    k: int = 2
    s: int = 0
    sketch: str = "srht"
    methods: list = field(default_factory=list)
    strategy: list = field(default_factory=list)
    cond_threshold: float = 1e12
    cond_check_stride: int = 5
    ignore_cond: bool = False
    tol: float = 1e-8
    true_resid_stride: int = 10
    quasi_factor: float = 0.0
    trials: int = 100
    ncols: int = 6
    nrows: int = 40
    steps: int = 200
    jobs: int = 1
    out: str = "-"

    def canonical(self) -> str:
        data = asdict(self)
        data.pop("out")
        data.pop("jobs")
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @property
    def sketch_size(self) -> int:
        return self.s or 2 * (self.m + 1)

    def method_names(self) -> list:
        names = list(self.methods) + [f"ssa-{s}" for s in self.strategy]
        return names or ["truncated", "ssa-pinv"]

    def problems(self) -> list:
        specs = [ProblemSpec(mtx_path=p, rhs=self.rhs, seed=self.seed) for p in self.matrix]
        for text in self.generate:
            name, params = parse_generator(text)
            specs.append(ProblemSpec(generator=name, params=params, rhs=self.rhs, seed=self.seed))
        return specs


def _csv_list(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssarnoldi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    common.add_argument("--matrix", action="append", help="Matrix Market file (repeatable)")
    common.add_argument("--generate", action="append", help="generator spec, e.g. conv_diff_2d:grid=64,peclet=100")
    common.add_argument("--rhs", choices=RHS_KINDS)
    common.add_argument("--seed", type=int)
    common.add_argument("--m", type=int, help="maximum basis dimension")
    common.add_argument("--k", type=int, help="truncation / selection parameter")
    common.add_argument("--s", type=int, help="sketch dimension (default 2(m+1))")
    common.add_argument("--sketch", choices=KINDS)
    common.add_argument("--methods", type=_csv_list, help=f"comma list from {sorted(METHOD_ALIASES)}")
    common.add_argument("--strategy", type=_csv_list, help="comma list of selection strategies (ssa-<name>)")
    common.add_argument("--cond-threshold", type=float)
    common.add_argument("--cond-check-stride", type=int)
    common.add_argument("--ignore-cond", action="store_true", default=None)
    common.add_argument("--jobs", type=int, help="worker processes for independent runs")
    common.add_argument("--out", help="output CSV path ('-' for stdout)")
    sub.add_parser("build-basis", parents=[common], help="condition number growth per method")
    p = sub.add_parser("sgmres", parents=[common], help="paired GMRES / sGMRES residual histories")
    p.add_argument("--tol", type=float)
    p.add_argument("--true-resid-stride", type=int)
    p.add_argument("--quasi-factor", type=float, help="report j where sGMRES exceeds this multiple of GMRES")
    sub.add_parser("perf-profile", parents=[common], help="performance profile of basis dimension reached")
    p = sub.add_parser("bounds-demo", parents=[common], help="random bound trials and the worst-case recurrence")
    p.add_argument("--trials", type=int)
    p.add_argument("--ncols", type=int)
    p.add_argument("--nrows", type=int)
    p.add_argument("--steps", type=int)
    sub.add_parser("select-demo", parents=[common], help="fixed 4x3 subset-selection examples")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = ExperimentConfig.from_json(fh.read())
    cfg.command = args.command
    for f in fields(ExperimentConfig):
        if f.name == "command":
            continue
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    return cfg


def _validate(cfg: ExperimentConfig, parser: argparse.ArgumentParser):
    for name in cfg.method_names():
        if name not in METHOD_ALIASES:
            parser.error(f"invalid method {name!r}; choose from {sorted(METHOD_ALIASES)}")
    for name in cfg.strategy:
        if name not in STRATEGIES:
            parser.error(f"invalid strategy {name!r}; choose from {sorted(STRATEGIES)}")
    if cfg.command in ("build-basis", "sgmres", "perf-profile") and not (cfg.matrix or cfg.generate):
        parser.error("give a problem with --matrix or --generate")
    if cfg.command in ("build-basis", "sgmres") and len(cfg.matrix) + len(cfg.generate) != 1:
        parser.error(f"{cfg.command} runs on exactly one problem")


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def _sketch_for(cfg: ExperimentConfig, n: int):
    if cfg.sketch == "identity":
        return make_sketch("identity", n, n, cfg.seed)
    return make_sketch(cfg.sketch, n, cfg.sketch_size, cfg.seed + 1)


def _arnoldi_cfg(cfg: ExperimentConfig, name: str, s: int) -> ArnoldiConfig:
    return ArnoldiConfig.from_name(name, m_max=cfg.m, k=cfg.k, s=s, cond_threshold=cfg.cond_threshold,
                                   cond_check_stride=cfg.cond_check_stride)


def _basis_job(job):
    cfg, spec, name = job
    a, b = spec.resolve()
    sketch = None
    if METHOD_ALIASES[name][0] in SKETCHED_METHODS:
        sketch = _sketch_for(cfg, a.nrows)
    acfg = _arnoldi_cfg(cfg, name, sketch.s if sketch else 0)
    state, reason = arnoldi_run(a, b, acfg, sketch, stop_on_cond=not cfg.ignore_cond)
    return state.history, state.dim_reached, reason.value


def _map(cfg: ExperimentConfig, fn, jobs):
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_build_basis(cfg: ExperimentConfig):
    spec = cfg.problems()[0]
    names = cfg.method_names()
    results = _map(cfg, _basis_job, [(cfg, spec, n) for n in names])
    rows = []
    for name, (history, _, reason) in zip(names, results):
        rows += [(name, rec.dim, rec.cond, rec.sigma_min, rec.sigma_max, reason) for rec in history]
    return ["method", "j", "cond", "sigma_min", "sigma_max", "stopped_reason"], rows


def cmd_sgmres(cfg: ExperimentConfig):
    spec = cfg.problems()[0]
    a, b = spec.resolve()
    sketch = _sketch_for(cfg, a.nrows)
    ref = gmres(a, b, cfg.m, cfg.tol, true_resid_stride=cfg.true_resid_stride,
                cond_stride=cfg.cond_check_stride)
    reports = [ref]
    for name in cfg.method_names():
        acfg = _arnoldi_cfg(cfg, name, sketch.s)
        reports.append(sgmres(a, b, acfg, sketch, cfg.tol, cfg.true_resid_stride,
                              ignore_cond=cfg.ignore_cond, method_name=f"sgmres-{name}"))
    rows = [(r.method, j, res, tr, c) for r in reports for j, res, tr, c in r.rows()]
    if cfg.quasi_factor > 0:
        base = dict(zip(ref.dims, ref.true_resid))
        for r in reports[1:]:
            bad = [j for j, _, tr, _ in r.rows() if not math.isnan(tr) and j in base
                   and not math.isnan(base[j]) and tr > cfg.quasi_factor * base[j]]
            print(f"{r.method}: {len(bad)} checkpoint(s) above {cfg.quasi_factor} x GMRES", file=sys.stderr)
    return ["method", "j", "sketched_resid", "true_resid", "cond"], rows


def cmd_perf_profile(cfg: ExperimentConfig):
    specs = cfg.problems()
    names = cfg.method_names()
    jobs = [(cfg, spec, name) for spec in specs for name in names]
    results = _map(cfg, _basis_job, jobs)
    table = np.array([r[1] for r in results], dtype=float).reshape(len(specs), len(names)).T
    prof = analysis.performance_profile(table, names, [s.name for s in specs])
    return ["method", "theta", "y"], list(prof.csv_rows())


def cmd_bounds_demo(cfg: ExperimentConfig):
    rng = make_rng(cfg.seed)
    header = ["record", "index", "sigma_min_v", "sigma_max_v", "alpha", "eta", "lower_bound_sigma_min_sq",
              "measured_sigma_min_sq", "upper_bound_cond_sq", "attainable_lower_cond_sq", "measured_cond_sq",
              "x", "envelope"]
    rows = []
    trial = 0
    while trial < cfg.trials:
        v = rng.standard_normal((cfg.nrows, cfg.ncols))
        v /= np.linalg.norm(v, axis=0)
        w = rng.standard_normal(cfg.nrows)
        w /= np.linalg.norm(w)
        try:
            rep = analysis.bound_report(v, w)
        except analysis.BoundDomainError:
            # shrink the coupling until the bounds apply
            w = w - 0.9 * v @ np.linalg.lstsq(v, w, rcond=None)[0]
            w /= np.linalg.norm(w)
            try:
                rep = analysis.bound_report(v, w)
            except analysis.BoundDomainError:
                continue
        rows.append(("trial", trial, rep.sigma_min_v, rep.sigma_max_v, rep.alpha, rep.eta,
                     rep.lower_bound_sigma_min_sq, rep.measured_sigma_min_sq, rep.upper_bound_cond_sq,
                     rep.attainable_lower_cond_sq, rep.measured_cond_sq, math.nan, math.nan))
        trial += 1
    x0 = 1 / math.sqrt(2)
    xs = analysis.decay_recurrence(x0, 0, cfg.steps)
    env = analysis.geometric_envelope(x0, cfg.steps)
    blank = (math.nan,) * 9
    rows += [("recurrence", i, *blank, float(x), float(e)) for i, (x, e) in enumerate(zip(xs, env))]
    return header, rows


FIXTURE_V = np.array([[1, 0, 0], [2, 2, 0], [0, 1, 1], [0, 0, 2]]) / np.sqrt(5)
FIXTURES = {"w=8,8,9,7": np.array([8.0, 8, 9, 7]), "w=9,9,10,10": np.array([9.0, 9, 10, 10])}


def cmd_select_demo(cfg: ExperimentConfig):
    rows = []
    for label, w in FIXTURES.items():
        for name in STRATEGIES:
            res = select(name, FIXTURE_V, w, 1)
            rows.append((label, f"select-{name}", int(res.indices[0]) + 1, float(res.coeffs[0])))
        best = select_bruteforce(FIXTURE_V, w, 1, objective="cond")
        rows.append((label, "bruteforce-cond", int(best.indices[0]) + 1, math.nan))
        for i in range(3):
            c_raw, c_norm = analysis.cond_after_projection(FIXTURE_V, w, i)
            rows.append((label, "cond", i + 1, c_raw))
            rows.append((label, "cond_normalized", i + 1, c_norm))
            what = analysis.project_single(FIXTURE_V, w, i)
            for key, val in analysis.orthogonality_metrics(FIXTURE_V, what).items():
                rows.append((label, key, i + 1, val))
    return ["fixture", "quantity", "index", "value"], rows


COMMANDS = {
    "build-basis": cmd_build_basis,
    "sgmres": cmd_sgmres,
    "perf-profile": cmd_perf_profile,
    "bounds-demo": cmd_bounds_demo,
    "select-demo": cmd_select_demo,
}


def render_csv(cfg: ExperimentConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {cfg.canonical()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[_fmt(x) for x in row] for row in rows])
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _validate(cfg, parser)
    try:
        header, rows = COMMANDS[cfg.command](cfg)
        text = render_csv(cfg, header, rows)
        if cfg.out == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except (OSError, ValueError, MatrixMarketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
