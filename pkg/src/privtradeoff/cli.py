"""Command-line entry point: ``privtradeoff <subcommand> ...``.

Exit status is 0 on success, 1 when a proven inequality is observed to fail,
and 2 on bad input.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import axioms, common_info, symmetric_pair
from ._validation import check_joint, parse_grid
from .measures import AdjacencyRelation, DistortionMeasure, PrivacyMeasure, PRIVACY_KINDS, distortion, leakage
from .probability import LN2, Alphabet, channel_to_dict
from .solver import Scenario, SolverOptions, brute_force_oracle, tradeoff_curve

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def fmt(v: float) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0:
        return "0"
    return f"{v:.12g}"


def _json_default(o):
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(obj):
    if isinstance(obj, float):
        return fmt(obj) if not math.isfinite(obj) else obj + 0.0
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, default=_json_default)


def _load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _joint(path):
    try:
        return check_joint(_load_json(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _distortion(spec: str, y_alph: Alphabet | None = None) -> DistortionMeasure:
    if spec in ("prob-error", "cond-entropy"):
        return DistortionMeasure(spec)
    if spec.startswith("expected:"):
        d = _load_json(spec.split(":", 1)[1])
        try:
            if y_alph is not None and list(d["y_labels"]) != list(y_alph.labels):
                raise InputError("distortion matrix y_labels do not match the data alphabet")
            return DistortionMeasure.expected(d["d"])
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad distortion matrix: {exc}") from None
    raise InputError(f"unknown distortion {spec!r}; use prob-error, cond-entropy or expected:<file>")


def _privacy(name: str, adjacency_path=None, x_alph: Alphabet | None = None) -> PrivacyMeasure:
    if name not in PRIVACY_KINDS:
        raise InputError(f"unknown privacy measure {name!r}; choose from {', '.join(PRIVACY_KINDS)}")
    adj = None
    if name == "dp" and adjacency_path is not None:
        pairs = _load_json(adjacency_path)
        try:
            adj = AdjacencyRelation(x_alph, pairs)
        except ValueError as exc:
            raise InputError(f"bad adjacency: {exc}") from None
    return PrivacyMeasure(name, adj)


def _units(unit: str) -> list[str]:
    return ["nats", "bits"] if unit == "both" else [unit]


def _in_unit(v: float, unit: str) -> float:
    return v / LN2 if unit == "bits" else v


# --------------------------------------------------------------------------
# Subcommands

def cmd_measure(args, out) -> int:
    """CSV rows name,value_nats,value_bits,value; unitless distortions fill only ``value``."""
    joint = _joint(args.joint)
    out.write("name,value_nats,value_bits,value\n")
    for name in args.privacy or []:
        val = leakage(_privacy(name, args.adjacency, joint.axes[0]), joint)
        out.write(f"{name},{fmt(val)},{fmt(val / LN2)},\n")
    for spec in args.distortion or []:
        dist = _distortion(spec, joint.axes[0])
        val = distortion(dist, joint)
        if dist.kind == "cond-entropy":
            out.write(f"{spec},{fmt(val)},{fmt(val / LN2)},\n")
        else:
            out.write(f"{spec},,,{fmt(val)}\n")
    return EXIT_OK


def cmd_tradeoff(args, out) -> int:
    joint = _joint(args.data)
    privacy = _privacy(args.privacy)
    dist = _distortion(args.distortion, joint.axes[1])
    deltas = parse_grid(args.deltas)
    scenario = Scenario.build(joint, args.scenario, args.z_size)
    if args.oracle:
        points = [brute_force_oracle(scenario, privacy, dist, d, args.resolution) for d in deltas]
    else:
        if privacy.kind != "mi" or not dist.linear:
            raise InputError("the convex solver needs --privacy mi and a linear distortion; add --oracle")
        opts = SolverOptions(args.max_iters, args.gap_tol, args.restarts, args.seed)
        points = tradeoff_curve(scenario, privacy, dist, deltas, opts)
    out.write("delta,pi_nats,pi_bits,status,gap\n")
    for pt in points:
        out.write(f"{fmt(pt.delta)},{fmt(pt.pi)},{fmt(pt.pi / LN2)},{pt.status},{fmt(pt.gap)}\n")
    if args.emit_mechanism:
        dumps = []
        for pt in points:
            d = channel_to_dict(pt.mechanism) if pt.mechanism is not None else {"rows": None}
            d["delta"] = pt.delta
            dumps.append(d)
        with open(args.emit_mechanism, "w") as fh:
            fh.write(_dumps(dumps[0] if len(dumps) == 1 else dumps) + "\n")
    return EXIT_OK


def cmd_common_info(args, out) -> int:
    joint = _joint(args.joint)
    if common_info.near_threshold_mass(joint):
        print("warning: some probabilities lie just above the support threshold; "
              "the component structure is fragile", file=sys.stderr)
    s = common_info.summary(joint)
    report = {
        "components": s["components"],
        "p_u": s["p_u"],
        "u_of_x": s["u_of_x"],
        "u_of_y": s["u_of_y"],
        "ci_equals_mi": s["ci_equals_mi"],
        "witness": s["witness"],
    }
    for u in _units(args.unit):
        report[f"C_{u}"] = _in_unit(s["C"], u)
        report[f"I_{u}"] = _in_unit(s["I"], u)
    out.write(_dumps(report) + "\n")
    return EXIT_OK


def _axiom_trials(measure: PrivacyMeasure, inequality: str, trials: int, seed: int, sizes):
    """Yield (trial, triple, expected_violation)."""
    check_linkage = inequality == "linkage"
    for i in range(trials):
        if measure.kind == "dp":
            if check_linkage:
                if i == 0:
                    q, r, s = 0.1, 0.3, 0.6
                else:
                    q, r, s = sorted(np.random.default_rng([seed, i]).uniform(0.01, 0.99, 3))
                yield i, axioms.dp_counterexample_triple(q, r, s), True
            else:
                yield i, axioms.random_dp_triple([seed, i]), False
        elif measure.kind == "max-leakage" and check_linkage and i == 0:
            yield i, axioms.indicator_chain_counterexample(), True
        else:
            yield i, axioms.random_markov_triple([seed, i], sizes), False


def cmd_check_axioms(args, out) -> int:
    measure = _privacy(args.measure)
    sizes = tuple(int(v) for v in args.sizes.split(","))
    if len(sizes) != 3 or min(sizes) < 1:
        raise InputError("--sizes needs three positive integers")
    check = axioms.check_linkage if args.inequality == "linkage" else axioms.check_post_processing
    status = EXIT_OK
    for i, triple, expected in _axiom_trials(measure, args.inequality, args.trials, args.seed, sizes):
        rep = check(measure, triple)
        verdict = rep.verdict(expected_violation=expected and not rep.holds)
        if verdict == "violation":
            status = EXIT_VIOLATION
        line = {"trial": i, "verdict": verdict, **rep.to_dict()}
        if args.unit == "bits" and measure.kind != "dp":
            line.update(lhs=_in_unit(rep.lhs, "bits"), rhs=_in_unit(rep.rhs, "bits"),
                        margin=_in_unit(rep.margin, "bits"), unit="bits")
        else:
            line["unit"] = "nats"
        out.write(_dumps(line) + "\n")
    return status


SP_SCENARIOS = ("fd", "op", "inf")


def cmd_sp(args, out) -> int:
    if args.fig2:
        m = 10 if args.m is None else args.m
        p = 0.4 if args.p is None else args.p
        deltas, kinds = parse_grid("0:0.95:0.01"), SP_SCENARIOS
    else:
        if args.m is None or args.p is None or args.deltas is None:
            raise InputError("sp needs --m, --p and --deltas (or --fig2)")
        m, p, deltas = args.m, args.p, parse_grid(args.deltas)
        kinds = SP_SCENARIOS if args.scenario == "all" else (args.scenario,)
    try:
        params = symmetric_pair.SPParams(m, p)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out.write("delta,scenario,pi_nats,pi_bits,branch,status\n")
    for kind in kinds:
        for d in deltas:
            res = symmetric_pair.closed_form(kind, params, d)
            status = "infeasible" if math.isinf(res.value) else "optimal"
            out.write(f"{fmt(d)},{kind},{fmt(res.value)},{fmt(res.value / LN2)},{res.branch},{status}\n")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--unit", choices=["nats", "bits", "both"], default="both",
                        help="units for JSON reports; CSV always carries both")

    parser = argparse.ArgumentParser(prog="privtradeoff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="evaluate leakage/distortion of a joint")
    p.add_argument("--joint", required=True)
    p.add_argument("--privacy", action="append", help=f"one of {', '.join(PRIVACY_KINDS)}; repeatable")
    p.add_argument("--distortion", action="append", help="prob-error, cond-entropy or expected:<file>")
    p.add_argument("--adjacency", help="JSON list of adjacent label pairs for dp")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("tradeoff", parents=[common], help="tradeoff curve for a data model")
    p.add_argument("--data", required=True)
    p.add_argument("--scenario", choices=["fd", "op", "inf"], default="op")
    p.add_argument("--privacy", default="mi")
    p.add_argument("--distortion", default="prob-error")
    p.add_argument("--deltas", required=True, help="a:b:step or comma list")
    p.add_argument("--z-size", type=int, default=None,
                   help="release alphabet size (default |Y|; no optimality guarantee is known for other sizes)")
    p.add_argument("--oracle", action="store_true", help="exhaustive grid search instead of the convex solver")
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--gap-tol", type=float, default=1e-6)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--emit-mechanism", default=None)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("common-info", parents=[common], help="Gacs-Korner common part analysis")
    p.add_argument("joint")
    p.set_defaults(func=cmd_common_info)

    p = sub.add_parser("check-axioms", parents=[common], help="post-processing / linkage checks")
    p.add_argument("--measure", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--inequality", choices=["linkage", "post-processing"], default="linkage")
    p.add_argument("--sizes", default="3,3,3", help="alphabet sizes of the random chains")
    p.set_defaults(func=cmd_check_axioms)

    p = sub.add_parser("sp", parents=[common], help="closed-form symmetric-pair tradeoffs")
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--deltas")
    p.add_argument("--scenario", choices=["fd", "op", "inf", "all"], default="all")
    p.add_argument("--fig2", action="store_true", help="all scenarios on delta in [0, 0.95] step 0.01 (m=10, p=0.4 unless given)")
    p.set_defaults(func=cmd_sp)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
