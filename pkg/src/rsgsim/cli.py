"""Command-line entry point: config parsing, experiment subcommands, CSV output.

Config schema (YAML)::

    topology:  {kind: single_hop, L: 4}        # or {kind: switch, N: 3}
                                               # or {kind: conflict_graph, L: 3, edges: [[0, 1], [1, 2]]}
                                               # or {kind: explicit, schedules: [[1, 0, 1], [0, 1, 0]]}
    channel:   {kind: constant, c: 1}          # on_off {c, q}; discrete {values, probs}
    arrivals:  {kind: bernoulli, rate: 0.225}  # constant {a}; bursty {K, scale}; discrete {values, probs}
    policy:    {kind: rsg, alpha: 1, beta: 1, gamma: 2, tie_rule: lowest_index}
    run:       {horizon: 1000000, warmup: 10000, seed: 0, replications: 8}

Scalar distribution parameters apply to every link; a list gives one value
per link. ``channel``/``arrivals`` may instead hold ``links:`` with one
table per link, each with its own ``kind``.

Exit codes: 0 success, 1 I/O error, 2 config/validation error, 3 rates
outside the capacity region.
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from rsgsim import engine
from rsgsim.model import (
    ArrivalModel, ChannelModel, ConfigError, PolicyKind, PolicySpec, SimConfig, Topology,
    TopologyKind, bernoulli, bursty, constant, general, on_off, validate_config,
)

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_OUTSIDE = 0, 1, 2, 3

RUN_COLUMNS = [
    "link", "mean_q", "std_q", "mean_t", "e_i", "e_i2", "norm_i2", "var_i", "p_service",
    "mean_unused", "mean_departed", "regularity_metric", "weighted_norm_i2", "sum_alpha_meanq",
    "lemma1_residual_max", "lemma2_r1", "lemma2_r2",
]
SWEEP_COLUMNS = [
    "gamma", "total_mean_q", "total_mean_q_se", "regularity_metric", "regularity_metric_se",
    "lower_bound", "upper_bound_measuredH", "upper_bound_conservative",
]
COMPARE_METRICS = ["mean_unused", "norm_i2", "var_i", "mean_q", "std_q"]
COMPARE_COLUMNS = ["link"] + [f"{m}_{suffix}" for m in COMPARE_METRICS for suffix in ("a", "b", "delta", "delta_se")]


class ParseError(ConfigError):
    pass


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _need(table: dict, key: str, where: str):
    if not isinstance(table, dict) or key not in table:
        raise ParseError(f"{where}: missing field '{key}'")
    return table[key]


def _per_link(value, L: int, where: str) -> list:
    if isinstance(value, list):
        if len(value) != L:
            raise ParseError(f"{where}: expected {L} per-link values, got {len(value)}")
        return value
    return [value] * L


_CHANNEL_KINDS = {
    "constant": (("c",), lambda c: constant(int(c))),
    "on_off": (("c", "q"), lambda c, q: on_off(int(c), float(q))),
}
_ARRIVAL_KINDS = {
    "bernoulli": (("rate",), lambda rate, size=1: bernoulli(float(rate), int(size))),
    "constant": (("a",), lambda a: constant(int(a))),
    "bursty": (("K",), lambda K, scale=1: bursty(int(K), int(scale))),
}
_OPTIONAL = {"bernoulli": ("size",), "bursty": ("scale",)}


def _dists(table: dict, L: int, kinds: dict, where: str) -> tuple:
    if not isinstance(table, dict):
        raise ParseError(f"{where}: expected a mapping")
    if "links" in table:
        links = table["links"]
        if not isinstance(links, list) or len(links) != L:
            raise ParseError(f"{where}.links: expected a list of {L} per-link tables")
        return tuple(_dists(sub, 1, kinds, f"{where}.links[{i}]")[0] for i, sub in enumerate(links))
    kind = _need(table, "kind", where)
    if kind == "discrete":
        values = _need(table, "values", where)
        probs = _need(table, "probs", where)
        if values and not isinstance(values[0], list):
            values, probs = [values] * L, [probs] * L
        if len(values) != L or len(probs) != L:
            raise ParseError(f"{where}: discrete values/probs need one row per link")
        return tuple(general(v, p) for v, p in zip(values, probs))
    if kind not in kinds:
        raise ParseError(f"{where}.kind: unknown kind {kind!r} (expected one of {sorted(kinds) + ['discrete']})")
    required, build = kinds[kind]
    params = {k: _per_link(_need(table, k, where), L, f"{where}.{k}") for k in required}
    for k in _OPTIONAL.get(kind, ()):
        if k in table:
            params[k] = _per_link(table[k], L, f"{where}.{k}")
    try:
        return tuple(build(**{k: v[l] for k, v in params.items()}) for l in range(L))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _topology(table: dict) -> Topology:
    kind = _need(table, "kind", "topology")
    try:
        if kind == TopologyKind.SINGLE_HOP.value:
            return Topology.single_hop(int(_need(table, "L", "topology")))
        if kind == TopologyKind.SWITCH.value:
            return Topology.switch(int(_need(table, "N", "topology")))
        if kind == TopologyKind.CONFLICT_GRAPH.value:
            return Topology.conflict_graph(int(_need(table, "L", "topology")), table.get("edges") or [])
        if kind == TopologyKind.EXPLICIT.value:
            return Topology.from_schedules(_need(table, "schedules", "topology"))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"topology: {exc}") from exc
    raise ParseError(f"topology.kind: unknown kind {kind!r}")


def config_from_dict(doc: dict) -> SimConfig:
    if not isinstance(doc, dict):
        raise ParseError("config root must be a mapping")
    topo = _topology(_need(doc, "topology", "config"))
    L = topo.L
    channel = ChannelModel(_dists(_need(doc, "channel", "config"), L, _CHANNEL_KINDS, "channel"))
    arrivals = ArrivalModel(_dists(_need(doc, "arrivals", "config"), L, _ARRIVAL_KINDS, "arrivals"))
    pol = _need(doc, "policy", "config")
    try:
        policy = PolicySpec.make(
            _need(pol, "kind", "policy"), L,
            alpha=pol.get("alpha", 1.0), beta=pol.get("beta", 1.0),
            gamma=pol.get("gamma", 0.0), tie_rule=pol.get("tie_rule", "lowest_index"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ParseError(f"policy: {exc}") from exc
    run = doc.get("run") or {}
    unknown = set(run) - {"horizon", "warmup", "seed", "replications"}
    if unknown:
        raise ParseError(f"run: unknown field(s) {sorted(unknown)}")
    cfg = SimConfig(
        topo, channel, arrivals, policy,
        horizon=int(run.get("horizon", 1_000_000)),
        warmup=int(run.get("warmup", 10_000)),
        seed=int(run.get("seed", 0)),
        replications=int(run.get("replications", 8)),
    )
    return validate_config(cfg)


def parse_config(path) -> SimConfig:
    """Read and validate a YAML config file.

    Raises OSError for unreadable files and ConfigError (with the offending
    line or field path) for malformed or invalid contents.
    """
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ParseError(f"{path}: YAML error at {where}: {exc.problem}") from exc
    try:
        return config_from_dict(doc)
    except ConfigError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _write_csv(path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row.get(c, "") if isinstance(row.get(c), str) else fmt(row.get(c)) for c in columns])


def run_rows(agg: engine.AggregateStats) -> list[dict]:
    m = agg.mean
    rows = []
    for l in range(len(m["mean_q"])):
        row = {k: m[k][l] for k in ("mean_q", "std_q", "mean_t", "e_i", "e_i2", "norm_i2", "var_i",
                                   "p_service", "mean_unused", "mean_departed")}
        row["link"] = l
        rows.append(row)
    rows.append({
        "link": "all",
        "mean_q": m["total_mean_q"],
        "mean_t": m["total_mean_t"],
        "p_service": float(np.sum(m["p_service"])),
        "mean_unused": float(np.sum(m["mean_unused"])),
        "mean_departed": float(np.sum(m["mean_departed"])),
        "regularity_metric": m["regularity_metric"],
        "weighted_norm_i2": m["weighted_norm_i2"],
        "sum_alpha_meanq": m["sum_alpha_meanq"],
        "lemma1_residual_max": m["lemma1_max"],
        "lemma2_r1": m["lemma2_r1"],
        "lemma2_r2": m["lemma2_r2"],
    })
    return rows


def sweep_rows(rows: list[engine.SweepRow]) -> list[dict]:
    return [{
        "gamma": r.gamma,
        "total_mean_q": r.stats.mean["total_mean_q"],
        "total_mean_q_se": r.stats.se("total_mean_q"),
        "regularity_metric": r.stats.mean["regularity_metric"],
        "regularity_metric_se": r.stats.se("regularity_metric"),
        "lower_bound": r.lower_bound,
        "upper_bound_measuredH": r.upper_bound_measured,
        "upper_bound_conservative": r.upper_bound_conservative,
    } for r in rows]


def compare_rows(cmp: engine.Comparison) -> list[dict]:
    L = len(cmp.a.mean["mean_q"])
    rows = []
    for l in range(L):
        row = {"link": l}
        for m in COMPARE_METRICS:
            row[f"{m}_a"] = cmp.a.mean[m][l]
            row[f"{m}_b"] = cmp.b.mean[m][l]
            row[f"{m}_delta"] = cmp.delta_mean[m][l]
            row[f"{m}_delta_se"] = cmp.delta_se[m][l] if cmp.delta_se else None
        rows.append(row)
    total = {"link": "total"}
    for m, key in (("mean_unused", None), ("mean_q", "total_mean_q")):
        if key is None:
            a = np.array([r.mean_unused.sum() for r in cmp.a.runs])
            b = np.array([r.mean_unused.sum() for r in cmp.b.runs])
        else:
            a = np.array([getattr(r, key) for r in cmp.a.runs])
            b = np.array([getattr(r, key) for r in cmp.b.runs])
        total[f"{m}_a"], total[f"{m}_b"], total[f"{m}_delta"] = a.mean(), b.mean(), (b - a).mean()
        total[f"{m}_delta_se"] = (b - a).std(ddof=1) / np.sqrt(len(a)) if len(a) > 1 else None
    rows.append(total)
    return rows


def parse_gammas(spec: str) -> list[float]:
    """``pow2:a..b`` for 2**a .. 2**b, or a comma-separated list."""
    spec = spec.strip()
    m = re.fullmatch(r"pow2:\s*(-?\d+)\s*\.\.\s*(-?\d+)", spec)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return [2.0**k for k in range(lo, hi + 1)]
    if not spec:
        return []
    try:
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"bad gamma list {spec!r}") from exc


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    changes = {}
    for flag, field in (("seed", "seed"), ("horizon", "horizon"), ("warmup", "warmup"), ("reps", "replications")):
        v = getattr(args, flag, None)
        if v is not None:
            changes[field] = v
    return validate_config(replace(cfg, **changes)) if changes else cfg


def _check_output(path) -> None:
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory {parent} does not exist")


def cmd_run(config_path, output_path, args=None) -> int:
    cfg = _apply_overrides(parse_config(config_path), args)
    _check_output(output_path)
    agg = engine.run_experiment(cfg, jobs=getattr(args, "jobs", 1) or 1)
    _write_csv(output_path, RUN_COLUMNS, run_rows(agg))
    return EXIT_OK


def cmd_sweep(config_path, gamma_spec: str, output_path, args=None) -> int:
    gammas = parse_gammas(gamma_spec)
    if not gammas:
        raise ParseError("empty gamma list")
    cfg = _apply_overrides(parse_config(config_path), args)
    _check_output(output_path)
    rows = engine.sweep_gamma(cfg, sorted(gammas), jobs=getattr(args, "jobs", 1) or 1)
    _write_csv(output_path, SWEEP_COLUMNS, sweep_rows(rows))
    return EXIT_OK


def cmd_compare(config_a, config_b, output_path, args=None) -> int:
    a = _apply_overrides(parse_config(config_a), args)
    b = _apply_overrides(parse_config(config_b), args)
    engine.check_same_system(a, b)
    _check_output(output_path)
    cmp = engine.compare(a, b, jobs=getattr(args, "jobs", 1) or 1)
    _write_csv(output_path, COMPARE_COLUMNS, compare_rows(cmp))
    return EXIT_OK


def cmd_bounds(config_path, args=None, out=None) -> int:
    out = out or sys.stdout
    cfg = parse_config(config_path)
    b = engine.bounds_for(cfg)
    lam = cfg.arrivals.rates
    lines = [
        ("additive_eps", b["additive_eps"]),
        ("multiplicative_eps", b["multiplicative_eps"]),
        ("B", b["B"]),
        ("queue_bound", b["queue_bound"]),
        ("regularity_lower_bound", b["lower_bound"]),
        ("regularity_upper_bound_conservative", b["upper_bound_conservative"]),
    ]
    if np.allclose(lam, lam[0]):
        from rsgsim.bounds import symmetric_threshold

        lines.append(("symmetric_threshold", symmetric_threshold(cfg.schedules, cfg.channel)))
    for k, v in lines:
        print(f"{k}: {fmt(v) or 'undefined'}", file=out)
    return EXIT_OK if b["additive_eps"] > 0 else EXIT_OUTSIDE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--horizon", type=int, help="override run.horizon (slots)")
    common.add_argument("--warmup", type=int, help="override run.warmup (slots)")
    common.add_argument("--reps", type=int, help="override run.replications")
    common.add_argument("--jobs", type=int, default=1, help="max concurrent replications (default 1)")

    p = argparse.ArgumentParser(
        prog="rsgsim",
        description="Slotted-time link scheduling simulator (MWS, RSG, RSG variant, round-robin). "
                    "Max-weight ties default to the lowest-index schedule; set "
                    "policy.tie_rule: seeded_uniform for randomized ties.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="simulate one config, write per-link CSV")
    r.add_argument("config")
    r.add_argument("-o", "--output", required=True)
    s = sub.add_parser("sweep", parents=[common], help="sweep gamma, write tradeoff CSV")
    s.add_argument("config")
    s.add_argument("--gammas", default="pow2:-7..7", help="'pow2:a..b' or comma list (default pow2:-7..7)")
    s.add_argument("-o", "--output", required=True)
    c = sub.add_parser("compare", parents=[common], help="paired policy comparison on common random numbers")
    c.add_argument("config_a")
    c.add_argument("config_b")
    c.add_argument("-o", "--output", required=True)
    b = sub.add_parser("bounds", parents=[common], help="print capacity margins and analytic bounds")
    b.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.output, args)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.gammas, args.output, args)
        if args.command == "compare":
            return cmd_compare(args.config_a, args.config_b, args.output, args)
        return cmd_bounds(args.config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
