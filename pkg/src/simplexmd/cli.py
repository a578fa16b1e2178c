"""Experiment harness: config-driven runs, trace files, and matrix checks.

Configs are INI-style text (key = value under sections). A minimal central
run:

    [experiment]
    mode = central
    geometry = entropy
    iters = 20000
    monitor = false
    trace = central_entropy.csv
    init_seed = 1

    [schedule]
    kind = harmonic
    a = 0.2

    [problem]
    rows = 100
    dim = 10
    seed = 3

Distributed mode additionally needs a [graph] section (nodes/edges/seed or
file = <edge list>). An optional [reference] section selects how f_gap is
anchored: mode = grid (dense reference for dim <= 4), mode = fixed with
f_star = <value>, or mode = none (default). Relative trace paths are placed
under $SIMPLEXMD_TRACE_DIR when that variable is set.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import central, distributed, geometry, network, problems, schedules

TRACE_DIR_ENV = "SIMPLEXMD_TRACE_DIR"


class ConfigError(ValueError):
    """A config file is malformed or semantically invalid."""


@dataclass
class ExperimentConfig:
    mode: str = "central"
    geometry: str = "entropy"
    iters: int = 1000
    monitor: bool = False
    trace: str = "trace.csv"
    decimation: int = 0  # 0 = automatic stride
    init_seed: int = 0
    init_mode: str = "shared"  # shared | distinct (distributed only)
    schedule_kind: str = "harmonic"
    schedule_a: float = 0.2
    schedule_values: tuple = ()
    problem_rows: int = 0
    problem_dim: int = 0
    problem_seed: int = 0
    problem_file: str = ""
    graph_nodes: int = 0
    graph_edges: int = 0
    graph_seed: int = 0
    graph_file: str = ""
    agents: int = 0  # 0 = one data row per agent
    dmd_subgradients: str = "local"  # local | global
    ref_mode: str = "none"  # none | grid | fixed
    ref_grid_step: float = 1e-2
    ref_f_star: float = math.nan


_MODES = ("central", "distributed")
_GEOMETRIES = ("euclidean", "entropy")
_REF_MODES = ("none", "grid", "fixed")


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; raises ConfigError naming the offending field."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    cfg = ExperimentConfig()

    def get(section, key, cast, default=None):
        if not parser.has_option(section, key):
            if default is None:
                raise ConfigError(f"missing required key [{section}] {key}")
            return default
        raw = parser.get(section, key)
        try:
            if cast is bool:
                return parser.getboolean(section, key)
            return cast(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc

    if not parser.has_section("experiment"):
        raise ConfigError("missing required section [experiment]")
    cfg.mode = get("experiment", "mode", str)
    if cfg.mode not in _MODES:
        raise ConfigError(f"[experiment] mode must be one of {_MODES}, got {cfg.mode!r}")
    cfg.geometry = get("experiment", "geometry", str)
    if cfg.geometry not in _GEOMETRIES:
        raise ConfigError(
            f"[experiment] geometry must be one of {_GEOMETRIES}, got {cfg.geometry!r}"
        )
    cfg.iters = get("experiment", "iters", int)
    if cfg.iters < 1:
        raise ConfigError(f"[experiment] iters must be >= 1, got {cfg.iters}")
    cfg.monitor = get("experiment", "monitor", bool, default=False)
    cfg.trace = get("experiment", "trace", str)
    cfg.decimation = get("experiment", "decimation", int, default=0)
    cfg.init_seed = get("experiment", "init_seed", int, default=0)
    cfg.init_mode = get("experiment", "init_mode", str, default="shared")
    if cfg.init_mode not in ("shared", "distinct"):
        raise ConfigError(f"[experiment] init_mode must be shared|distinct, got {cfg.init_mode!r}")

    if not parser.has_section("schedule"):
        raise ConfigError("missing required section [schedule]")
    cfg.schedule_kind = get("schedule", "kind", str)
    if cfg.schedule_kind not in (schedules.HARMONIC, schedules.SQRT_DECAY, schedules.CUSTOM):
        raise ConfigError(f"[schedule] kind unknown: {cfg.schedule_kind!r}")
    if cfg.schedule_kind == schedules.CUSTOM:
        raw = get("schedule", "values", str)
        try:
            cfg.schedule_values = tuple(float(t) for t in raw.split())
        except ValueError as exc:
            raise ConfigError(f"bad value for [schedule] values: {raw!r}") from exc
    else:
        cfg.schedule_a = get("schedule", "a", float)

    if not parser.has_section("problem"):
        raise ConfigError("missing required section [problem]")
    if parser.has_option("problem", "file"):
        cfg.problem_file = get("problem", "file", str)
    else:
        cfg.problem_rows = get("problem", "rows", int)
        cfg.problem_dim = get("problem", "dim", int)
        cfg.problem_seed = get("problem", "seed", int)

    if cfg.mode == "distributed":
        if not parser.has_section("graph"):
            raise ConfigError("distributed mode needs a [graph] section")
        if parser.has_option("graph", "file"):
            cfg.graph_file = get("graph", "file", str)
        else:
            cfg.graph_nodes = get("graph", "nodes", int)
            cfg.graph_edges = get("graph", "edges", int)
            cfg.graph_seed = get("graph", "seed", int)
        cfg.agents = get("graph", "agents", int, default=0)
        cfg.dmd_subgradients = get("graph", "subgradients", str, default="local")
        if cfg.dmd_subgradients not in ("local", "global"):
            raise ConfigError(
                f"[graph] subgradients must be local|global, got {cfg.dmd_subgradients!r}"
            )

    if parser.has_section("reference"):
        cfg.ref_mode = get("reference", "mode", str)
        if cfg.ref_mode not in _REF_MODES:
            raise ConfigError(f"[reference] mode must be one of {_REF_MODES}")
        if cfg.ref_mode == "grid":
            cfg.ref_grid_step = get("reference", "grid_step", float, default=1e-2)
        if cfg.ref_mode == "fixed":
            cfg.ref_f_star = get("reference", "f_star", float)
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    """Config text that reparses to an equal ExperimentConfig."""
    lines = [
        "[experiment]",
        f"mode = {cfg.mode}",
        f"geometry = {cfg.geometry}",
        f"iters = {cfg.iters}",
        f"monitor = {str(cfg.monitor).lower()}",
        f"trace = {cfg.trace}",
        f"decimation = {cfg.decimation}",
        f"init_seed = {cfg.init_seed}",
        f"init_mode = {cfg.init_mode}",
        "",
        "[schedule]",
        f"kind = {cfg.schedule_kind}",
    ]
    if cfg.schedule_kind == schedules.CUSTOM:
        lines.append("values = " + " ".join(f"{v:.17g}" for v in cfg.schedule_values))
    else:
        lines.append(f"a = {cfg.schedule_a:.17g}")
    lines += ["", "[problem]"]
    if cfg.problem_file:
        lines.append(f"file = {cfg.problem_file}")
    else:
        lines += [
            f"rows = {cfg.problem_rows}",
            f"dim = {cfg.problem_dim}",
            f"seed = {cfg.problem_seed}",
        ]
    if cfg.mode == "distributed":
        lines += ["", "[graph]"]
        if cfg.graph_file:
            lines.append(f"file = {cfg.graph_file}")
        else:
            lines += [
                f"nodes = {cfg.graph_nodes}",
                f"edges = {cfg.graph_edges}",
                f"seed = {cfg.graph_seed}",
            ]
        if cfg.agents:
            lines.append(f"agents = {cfg.agents}")
        if cfg.dmd_subgradients != "local":
            lines.append(f"subgradients = {cfg.dmd_subgradients}")
    if cfg.ref_mode != "none":
        lines += ["", "[reference]", f"mode = {cfg.ref_mode}"]
        if cfg.ref_mode == "grid":
            lines.append(f"grid_step = {cfg.ref_grid_step:.17g}")
        if cfg.ref_mode == "fixed":
            lines.append(f"f_star = {cfg.ref_f_star:.17g}")
    return "\n".join(lines) + "\n"


@dataclass
class ExitReport:
    """Summary of one experiment run; ``code`` is the process exit status."""

    code: int
    trace_path: str
    final_f: float
    final_f_gap: float
    final_consensus_error: float
    monitor_violations: int
    summary_lines: list = field(default_factory=list)


def _mirror_map(name: str) -> geometry.MirrorMap:
    return geometry.euclidean() if name == "euclidean" else geometry.negative_entropy()


def _schedule(cfg: ExperimentConfig) -> schedules.StepSchedule:
    if cfg.schedule_kind == schedules.HARMONIC:
        return schedules.StepSchedule.harmonic(cfg.schedule_a)
    if cfg.schedule_kind == schedules.SQRT_DECAY:
        return schedules.StepSchedule.sqrt_decay(cfg.schedule_a)
    return schedules.StepSchedule.custom(cfg.schedule_values)


def _problem(cfg: ExperimentConfig) -> problems.ProblemInstance:
    if cfg.problem_file:
        return problems.load_instance(cfg.problem_file)
    return problems.generate_instance(cfg.problem_rows, cfg.problem_dim, cfg.problem_seed)


def _reference(cfg: ExperimentConfig, p) -> problems.ReferenceOptimum | None:
    if cfg.ref_mode == "grid":
        return problems.reference_optimum(p, cfg.ref_grid_step)
    if cfg.ref_mode == "fixed":
        return problems.ReferenceOptimum(x_star=None, f_star=cfg.ref_f_star)
    return None


def resolve_trace_path(trace: str) -> Path:
    base = os.environ.get(TRACE_DIR_ENV)
    path = Path(trace)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _contiguous_blocks(n_rows: int, n_agents: int) -> list:
    if not 1 <= n_agents <= n_rows:
        raise ConfigError(f"agents must be in [1, {n_rows}], got {n_agents}")
    bounds = np.linspace(0, n_rows, n_agents + 1).astype(int)
    return [list(range(bounds[i], bounds[i + 1])) for i in range(n_agents)]


def run_experiment(cfg: ExperimentConfig, out=None) -> ExitReport:
    """Build the configured problem/graph, run the solver, write the trace.

    Exit code is nonzero iff monitors recorded violations or the mixing
    matrix failed its assumption checks.
    """
    if out is None:
        out = sys.stdout
    p = _problem(cfg)
    ref = _reference(cfg, p)
    sched = _schedule(cfg)
    mmap = _mirror_map(cfg.geometry)
    decim = cfg.decimation if cfg.decimation > 0 else None
    trace_path = resolve_trace_path(cfg.trace)
    rng = np.random.default_rng(cfg.init_seed)
    lines = []

    if cfg.mode == "central":
        x0 = geometry.sample_simplex(p.dim, rng)
        trace = central.run_md(
            p, mmap, sched, x0, cfg.iters, ref=ref, monitor=cfg.monitor, decimation=decim
        )
        trace.to_csv(trace_path)
        final_f = problems.objective(p, trace.final_x)
        gap = final_f - ref.f_star if ref is not None else math.nan
        violations = trace.monitor_violations
        lines.append(f"mode: central  geometry: {cfg.geometry}  iters: {cfg.iters}")
        lines.append(f"final f: {final_f:.17g}")
        lines.append(f"final f_gap: {gap:.17g}")
        lines.append(f"monitor violations: {violations}")
        cons = math.nan
    else:
        g = network.load_graph(cfg.graph_file) if cfg.graph_file else network.generate_graph(
            cfg.graph_nodes, cfg.graph_edges, cfg.graph_seed
        )
        mixing = network.metropolis_weights(g)
        report = network.verify_assumptions(mixing)
        lines.append(f"mixing matrix checks (n={mixing.n}, edges={g.m}):")
        lines.append(str(report))
        if not report.all_ok:
            for ln in lines:
                print(ln, file=out)
            return ExitReport(
                code=2,
                trace_path=str(trace_path),
                final_f=math.nan,
                final_f_gap=math.nan,
                final_consensus_error=math.nan,
                monitor_violations=0,
                summary_lines=lines,
            )
        blocks = _contiguous_blocks(p.n_rows, cfg.agents) if cfg.agents else None
        n_agents = mixing.n
        if cfg.init_mode == "shared":
            x0 = np.tile(geometry.sample_simplex(p.dim, rng), (n_agents, 1))
        else:
            x0 = geometry.sample_simplex(p.dim, rng, size=n_agents)
        trace = distributed.run_dmd(
            p,
            mmap,
            sched,
            mixing,
            x0,
            cfg.iters,
            ref=ref,
            monitor=cfg.monitor,
            decimation=decim,
            blocks=blocks,
            subgradients=cfg.dmd_subgradients,
        )
        trace.to_csv(trace_path)
        final_f = trace.final_f_centroid
        gap = trace.final_f_gap
        cons = trace.final_consensus_error
        violations = trace.contraction_violations + trace.step_bound_violations
        lines.append(
            f"mode: distributed  geometry: {cfg.geometry}  rounds: {cfg.iters}  "
            f"agents: {n_agents}"
        )
        lines.append(f"final f at centroid: {final_f:.17g}")
        lines.append(f"final f_gap: {gap:.17g}")
        lines.append(f"final consensus error: {cons:.17g}")
        lines.append(f"final max pairwise distance: {trace.final_max_pairwise:.17g}")
        lines.append(
            f"monitor violations: {violations} (contraction "
            f"{trace.contraction_violations}, step bound {trace.step_bound_violations})"
        )
    lines.append(f"trace written to {trace_path}")
    for ln in lines:
        print(ln, file=out)
    return ExitReport(
        code=1 if violations else 0,
        trace_path=str(trace_path),
        final_f=final_f,
        final_f_gap=gap,
        final_consensus_error=cons,
        monitor_violations=violations,
        summary_lines=lines,
    )


def read_trace(path) -> dict:
    """Read a trace CSV into a dict of named float columns."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty trace file")
        names = header.split(",")
        data = [[] for _ in names]
        for ln_no, ln in enumerate(fh, start=2):
            if not ln.strip():
                continue
            parts = ln.strip().split(",")
            if len(parts) != len(names):
                raise ValueError(f"{path}:{ln_no}: expected {len(names)} columns")
            for col, tok in zip(data, parts):
                col.append(float(tok))
    return {name: np.array(col) for name, col in zip(names, data)}


def first_index_at_gap(trace: dict, gap_level: float) -> int:
    """First recorded iteration whose f_gap is <= gap_level, or -1 if never."""
    if "f_gap" not in trace:
        raise ValueError("trace has no f_gap column")
    hits = np.nonzero(trace["f_gap"] <= gap_level)[0]
    return int(trace["k"][hits[0]]) if hits.size else -1


def compare_runs(trace_a, trace_b, gap_level: float) -> tuple:
    """First iteration index at which each trace reaches the gap level.

    Traces must come from runs sharing the schedule and problem (the files
    carry no metadata, so this is the caller's responsibility). Returns -1
    for a trace that never reaches the level.
    """
    ta = read_trace(trace_a)
    tb = read_trace(trace_b)
    return first_index_at_gap(ta, gap_level), first_index_at_gap(tb, gap_level)


def _cmd_run(args) -> int:
    path = Path(args.config)
    if not path.exists():
        print(f"config file not found: {path}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(path.read_text())
    except ConfigError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return 2
    try:
        return run_experiment(cfg).code
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


def _cmd_gen_problem(args) -> int:
    p = problems.generate_instance(args.rows, args.dim, args.seed)
    problems.save_instance(p, args.out)
    print(f"instance {p.n_rows}x{p.dim} (L = {p.L:.17g}) written to {args.out}")
    return 0


def _cmd_gen_graph(args) -> int:
    g = network.generate_graph(args.nodes, args.edges, args.seed)
    network.save_graph(g, args.out)
    print(f"connected graph n={g.n} m={g.m} written to {args.out}")
    if args.matrix_out:
        mixing = network.metropolis_weights(g)
        network.save_matrix(mixing, args.matrix_out)
        print(f"metropolis matrix (sigma2 = {mixing.sigma2:.17g}) written to {args.matrix_out}")
    return 0


def _cmd_check_matrix(args) -> int:
    try:
        mixing = network.load_matrix(args.matrix)
    except (ValueError, OSError) as exc:
        print(f"cannot load matrix: {exc}", file=sys.stderr)
        return 2
    report = network.verify_assumptions(mixing)
    print(report)
    return 0 if report.all_ok else 1


def _cmd_compare(args) -> int:
    try:
        ia, ib = compare_runs(args.trace_a, args.trace_b, args.gap)
    except (ValueError, OSError) as exc:
        print(f"cannot compare traces: {exc}", file=sys.stderr)
        return 2
    print(f"{args.trace_a}: first index at f_gap <= {args.gap:.17g}: {ia}")
    print(f"{args.trace_b}: first index at f_gap <= {args.gap:.17g}: {ib}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simplexmd",
        description="Mirror-descent experiments over the unit simplex.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="run an experiment from a config file")
    sp.add_argument("config")
    sp.set_defaults(func=_cmd_run)

    sp = sub.add_parser("gen-problem", help="generate and save a problem instance")
    sp.add_argument("--rows", type=int, required=True)
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_gen_problem)

    sp = sub.add_parser("gen-graph", help="generate and save a connected graph")
    sp.add_argument("--nodes", type=int, required=True)
    sp.add_argument("--edges", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--matrix-out", default="")
    sp.set_defaults(func=_cmd_gen_graph)

    sp = sub.add_parser("check-matrix", help="verify mixing-matrix assumptions")
    sp.add_argument("matrix")
    sp.set_defaults(func=_cmd_check_matrix)

    sp = sub.add_parser("compare", help="first iteration reaching a gap level, per trace")
    sp.add_argument("trace_a")
    sp.add_argument("trace_b")
    sp.add_argument("gap", type=float)
    sp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
