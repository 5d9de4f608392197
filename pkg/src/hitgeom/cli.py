"""Command-line interface: ``hitgeom {analyze,sweep,simulate,greedy,sst}``.

Exit codes: 0 all checks pass, 1 a checked inequality failed, 2 the chain
file could not be parsed, 3 the input was rejected by validation, 4 a
numerical diagnostic was raised.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any

import numpy as np

from . import bounds, dist as D, generators, greedy_dual as GD, hitting, sim, sst
from .chain_core import MarkovChain, is_reversible, validate_chain
from .errors import NumericDiagnostic, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3, 4


class ParseError(Exception):
    pass


# ---------------------------------------------------------------- input


def load_chain_file(path: str, as_csv: bool = False) -> MarkovChain:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return parse_chain_text(text, as_csv, source=path)


def parse_chain_text(text: str, as_csv: bool = False, source: str = "<input>") -> MarkovChain:
    """Parse ``{"states": [...], "P": [[...]]}`` JSON, or a bare CSV matrix."""
    if as_csv:
        rows = []
        for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ParseError(f"{source}:{lineno}: {exc}") from exc
        return validate_chain(rows)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be an object with 'states' and 'P'")
    for key in ("states", "P"):
        if key not in doc:
            raise ParseError(f"{source}: missing field {key!r}")
    states, P = doc["states"], doc["P"]
    if not isinstance(states, list) or not all(isinstance(s, (str, int)) for s in states):
        raise ParseError(f"{source}: field 'states' must be a list of labels")
    if not isinstance(P, list) or not all(isinstance(r, list) for r in P):
        raise ParseError(f"{source}: field 'P' must be a list of rows")
    for i, row in enumerate(P):
        for k, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f"{source}: P[{i}][{k}] is not a number")
        if len(row) != len(P):
            raise ValidationError(f"row {i} of P has {len(row)} entries, expected {len(P)}")
    return validate_chain(P, [str(s) for s in states])


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad number list {text!r}") from exc


def chain_from_args(args) -> MarkovChain:
    if args.chain:
        return load_chain_file(args.chain, args.csv)
    name = args.builtin
    if name == "two-state":
        return generators.two_state(args.delta)
    if name == "iid":
        if not args.pi:
            raise ValidationError("--builtin iid needs --pi p1,...,pk")
        return generators.iid(_floats(args.pi))
    if name == "birth-death":
        return generators.birth_death(args.size)
    raise ValidationError("give --chain PATH or --builtin NAME")


def two_state_delta(chain: MarkovChain) -> float | None:
    """delta if the chain is [[1/2, 1/2], [1/2 - delta, 1/2 + delta]]."""
    P = np.asarray(chain.P)
    if chain.n == 2 and np.allclose(P[0], 0.5, atol=1e-15):
        return float(P[1, 1] - 0.5)
    return None


# ---------------------------------------------------------------- output


def _clean(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def _flatten(doc: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(doc, dict):
        out = []
        for k, v in doc.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else k)
        return out
    if isinstance(doc, list) and doc and any(isinstance(v, (dict, list)) for v in doc):
        out = []
        for i, v in enumerate(doc):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, doc)]


def render(doc: dict, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    doc = _clean(doc)
    if fmt == "json":
        stream.write(json.dumps(doc, indent=2) + "\n")
        return
    rows = _flatten(doc)
    width = max(len(k) for k, _ in rows)
    bold = stream.isatty() and "NO_COLOR" not in os.environ
    for k, v in rows:
        text = json.dumps(v) if isinstance(v, (list, str, bool)) or v is None else repr(v)
        key = f"\033[1m{k:<{width}}\033[0m" if bold else f"{k:<{width}}"
        stream.write(f"{key}  {text}\n")


def _dual_doc(chain: MarkovChain, gd: GD.GreedyDual) -> dict:
    cls = GD.classify_greedy_case(chain, gd.j, gd)
    label = lambda A: [chain.states[i] for i in sorted(A)]  # noqa: E731
    return {
        "c": list(gd.c),
        "A": [label(A) for A in gd.A],
        "dual_row": [{"set": label(A), "prob": p} for A, p in gd.dual_row.items()],
        "p_absorb": gd.p_absorb,
        "p_stay": gd.p_stay,
        "p_other": gd.p_other,
        "mean": GD.dual_sst_mean(gd),
        "regime": cls.regime.value,
        "alpha": cls.alpha,
        "beta": cls.beta,
        "gamma": cls.gamma,
        "intertwining_row_residual": GD.intertwining_residual(chain, gd).row_residual,
    }


def analyze_state(chain: MarkovChain, j: int, args) -> dict:
    eps = args.tail_eps
    hit = hitting.hitting_time_dist(chain, j, eps)
    fastest = sst.fastest_sst_from_restricted(chain, j, eps)
    gd = GD.greedy_dual_row(chain, j)
    greedy = GD.dual_sst_dist(gd, eps)
    thetas = tuple(args.theta) if args.theta else bounds.THETA_GRID
    rep_f = bounds.tv_report(chain, j, fastest, eps, thetas, hit)
    rep_g = bounds.tv_report(chain, j, greedy, eps, thetas, hit)
    lemma = sst.check_lemma_condition(chain, j, args.horizon, args.tol)
    nohit = sst.check_no_hit_before_sst(chain, j, lemma.horizon, args.tol, fastest)
    valid = D.check_stochastic_dominance(greedy.dist, fastest.dist, args.tol)
    doc = {
        "state": chain.states[j],
        "pi_j": float(chain.pi[j]),
        "mean_W": {"direct": hit.mean_direct, "kac": hit.mean_kac},
        "lemma_condition": {
            "holds": lemma.holds,
            "horizon": lemma.horizon,
            "horizon_capped": lemma.horizon_capped,
            "first_violation": None
            if lemma.first_violation is None
            else {"t": lemma.first_violation[0], "y": chain.states[lemma.first_violation[1]]},
            "worst_excess": lemma.worst_excess,
        },
        "no_hit_before_sst": nohit._asdict(),
        "greedy": _dual_doc(chain, gd),
        "greedy_dominates_fastest": valid._asdict(),
        "reports": {"fastest": rep_f.to_dict(), "greedy": rep_g.to_dict()},
    }
    delta = two_state_delta(chain)
    if delta is not None and chain.states[j] == chain.states[1]:
        doc["comparison"] = {
            "delta": delta,
            "daly_bound": bounds.daly_two_state_bound(delta),
            "tv_bound": rep_f.tv_bound,
        }
    doc["all_pass"] = rep_f.all_pass and rep_g.all_pass and valid.holds
    return doc


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> tuple[dict, int]:
    chain = chain_from_args(args)
    j = chain.index(args.state)
    doc = {
        "chain": {"states": list(chain.states), "P": chain.P, "pi": chain.pi},
        **analyze_state(chain, j, args),
    }
    return doc, EXIT_OK if doc["all_pass"] else EXIT_FAIL


def cmd_sweep(args) -> tuple[dict, int]:
    if args.count < 1:
        raise ValidationError("--count must be at least 1")
    if not (2 <= args.size <= 50):
        raise ValidationError("--size must lie in 2..50")
    rng = np.random.default_rng(args.seed)
    kinds = ("fastest", "greedy") if args.sst == "both" else (args.sst,)
    failures = {k: {} for k in kinds}
    margins = {k: {"tv_bound_minus_exact": math.inf, "dominance_gap": -math.inf} for k in kinds}
    reports = 0
    prop_applicable = 0
    reversible = 0
    greedy_invalid = 0
    examples = []
    for c in range(args.count):
        chain = generators.random_ergodic(args.size, rng)
        if is_reversible(chain):
            reversible += 1
        if bounds.check_worst_state_proposition(chain, horizon=args.horizon or 200).applicable:
            prop_applicable += 1
        for j in range(chain.n):
            hit = hitting.hitting_time_dist(chain, j, args.tail_eps)
            fastest = sst.fastest_sst_from_restricted(chain, j, args.tail_eps)
            laws = {"fastest": fastest}
            if "greedy" in kinds:
                laws["greedy"] = GD.dual_sst_dist(GD.greedy_dual_row(chain, j), args.tail_eps)
                if not D.check_stochastic_dominance(laws["greedy"].dist, fastest.dist).holds:
                    greedy_invalid += 1
            for kind in kinds:
                rep = bounds.tv_report(chain, j, laws[kind], args.tail_eps, hitting=hit)
                reports += 1
                m = margins[kind]
                m["tv_bound_minus_exact"] = min(m["tv_bound_minus_exact"], rep.tv_bound - rep.tv_exact)
                m["dominance_gap"] = max(m["dominance_gap"], rep.dominance.worst_gap)
                for name, ok in rep.checks.items():
                    failures[kind][name] = failures[kind].get(name, 0) + (not ok)
                    if not ok:
                        if len(examples) < 5:
                            examples.append({"chain": c, "state": j, "sst": kind, "check": name, "P": chain.P})
    total_failures = sum(sum(f.values()) for f in failures.values())
    doc = {
        "count": args.count,
        "size": args.size,
        "seed": args.seed,
        "reports": reports,
        "failures": failures,
        "total_failures": total_failures,
        "worst_margins": margins,
        "greedy_not_dominating_fastest": greedy_invalid if "greedy" in kinds else None,
        "reversible_chains": reversible,
        "proposition_applicable_chains": prop_applicable,
        "failure_examples": examples,
    }
    return doc, EXIT_OK if total_failures == 0 else EXIT_FAIL


def cmd_simulate(args) -> tuple[dict, int]:
    chain = chain_from_args(args)
    j = chain.index(args.state)
    if args.samples < 1:
        raise ValidationError("--samples must be at least 1")
    replicas = max(1, args.replicas)
    per = -(-args.samples // replicas)
    cfg = sim.SimConfig(args.seed, replicas, per)
    hit = hitting.hitting_time_dist(chain, j, args.tail_eps)
    gd = GD.greedy_dual_row(chain, j)
    dual = GD.dual_sst_dist(gd, args.tail_eps)
    w = sim.run(cfg, lambda n, g: sim.sample_hitting_times(chain, j, chain.pi, n, g))
    t = sim.run(cfg, lambda n, g: sim.sample_dual_ssts(gd, n, g))
    out = {}
    for name, samples, exact in (("W", w, hit.dist), ("dual_sst", t, dual.dist)):
        tv = sim.empirical_tv(samples, exact)
        support = int(np.count_nonzero(exact.pmf > 1.0 / cfg.total)) + 1
        thr = sim.tv_threshold(support, cfg.total)
        out[name] = {
            "samples": int(samples.size),
            "empirical_mean": float(samples.mean()),
            "exact_mean": D.mean(exact),
            "tv": tv,
            "threshold": thr,
            "pass": tv <= thr,
        }
    doc = {
        "state": chain.states[j],
        "seed": args.seed,
        "replicas": replicas,
        "samples_per_replica": per,
        "rng": "numpy PCG64, SeedSequence(seed).spawn(replicas)",
        **out,
    }
    ok = out["W"]["pass"] and out["dual_sst"]["pass"]
    return doc, EXIT_OK if ok else EXIT_FAIL


def cmd_greedy(args) -> tuple[dict, int]:
    chain = chain_from_args(args)
    j = chain.index(args.state)
    gd = GD.greedy_dual_row(chain, j)
    dual = GD.dual_sst_dist(gd, args.tail_eps)
    return {
        "state": chain.states[j],
        **_dual_doc(chain, gd),
        "pmf": dual.dist.pmf,
        "tail_bound": dual.dist.tail_bound,
    }, EXIT_OK


def cmd_sst(args) -> tuple[dict, int]:
    chain = chain_from_args(args)
    j = chain.index(args.state)
    eps = args.tail_eps
    fastest = sst.fastest_sst_from_restricted(chain, j, eps)
    ret = sst.sst_from_return_probs(chain, j, eps, force=True)
    dual = GD.dual_sst_dist(GD.greedy_dual_row(chain, j), eps)
    doc = {"state": chain.states[j]}
    for name, res in (("fastest", fastest), ("return_probability", ret), ("greedy", dual)):
        entry = {"provenance": res.provenance.value, "init": res.init_desc, "issues": list(res.issues)}
        if res.dist is not None:
            entry.update(
                pmf=res.dist.pmf,
                survival=res.dist.survival_array(),
                tail_bound=res.dist.tail_bound,
                mean=D.mean(res.dist),
            )
        else:
            entry["raw_survival"] = res.survival
        doc[name] = entry
    doc["worst_case"] = bounds.worst_case_sst(chain, eps)._asdict()
    return doc, EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "greedy": cmd_greedy,
    "sst": cmd_sst,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--tail-eps", type=float, default=D.DEFAULT_TAIL_EPS)
    common.add_argument("--horizon", type=int, default=None)
    common.add_argument("--tol", type=float, default=sst.CONDITION_TOL)
    common.add_argument("--theta", type=float, action="append")

    source = argparse.ArgumentParser(add_help=False)
    g = source.add_mutually_exclusive_group(required=True)
    g.add_argument("--chain", metavar="PATH")
    g.add_argument("--builtin", choices=("two-state", "iid", "birth-death"))
    source.add_argument("--csv", action="store_true", help="chain file is a bare CSV matrix")
    source.add_argument("--delta", type=float, default=0.25)
    source.add_argument("--pi", help="comma-separated row for --builtin iid")
    source.add_argument("--size", type=int, default=3)
    source.add_argument("--state", required=True)

    p = argparse.ArgumentParser(prog="hitgeom", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common, source], help="bounds report for one state")
    sub.add_parser("greedy", parents=[common, source], help="greedy dual trace")
    sub.add_parser("sst", parents=[common, source], help="SST distributions")
    s = sub.add_parser("simulate", parents=[common, source], help="Monte Carlo vs exact")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--replicas", type=int, default=4)
    w = sub.add_parser("sweep", parents=[common], help="random-chain property sweep")
    w.add_argument("--count", type=int, default=100)
    w.add_argument("--size", type=int, default=4)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--sst", choices=("both", "fastest", "greedy"), default="both")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, code = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericDiagnostic as exc:
        print(f"numeric diagnostic: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        render(doc, args.format)
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    if code == EXIT_FAIL:
        print("CHECK FAILED: at least one checked inequality does not hold (see report)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
