"""Acceptance suite. Each criterion prints one PASS/FAIL line with its runtime.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import csv
import io
import math
import sys
import time
import warnings
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from privtradeoff.axioms import (  # noqa: E402
    check_linkage,
    check_post_processing,
    dp_counterexample_triple,
    indicator_chain_counterexample,
    random_dp_triple,
    random_markov_triple,
)
from privtradeoff.cli import run  # noqa: E402
from privtradeoff.common_info import MatchedReleaseParams, matched_release_pair  # noqa: E402
from privtradeoff.measures import (  # noqa: E402
    DistortionMeasure,
    PrivacyMeasure,
    information_privacy,
    information_privacy_sets,
)
from privtradeoff.probability import LN2, Channel, JointPmf, marginal, mutual_information, push_mechanism  # noqa: E402
from privtradeoff.solver import Scenario, evaluate, project_fd_to_op, solve_point, tradeoff_curve  # noqa: E402
from privtradeoff.symmetric_pair import (  # noqa: E402
    SPParams,
    closed_form,
    error_relation_check,
    fd_optimal_mechanism,
    inf_optimal_mechanism,
    markov_error_relation,
    op_optimal_mechanism,
    r_m,
    scenario,
    sp_joint,
)

MI, PE = PrivacyMeasure("mi"), DistortionMeasure("prob-error")


def _line(n, title, ok, detail, elapsed, limit):
    fast = elapsed < limit
    verdict = "PASS" if ok and fast else "FAIL"
    return verdict == "PASS", f"{verdict} criterion {n:>2} {title}: {detail} [{elapsed:.2f}s, limit {limit:g}s]"


def _emit(capsys, n, title, limit, body):
    t0 = time.perf_counter()
    ok, detail = body()
    passed, text = _line(n, title, ok, detail, time.perf_counter() - t0, limit)
    if capsys is None:
        print(text)
    else:
        with capsys.disabled():
            print("\n" + text)
    return passed, text


# --------------------------------------------------------------------------
# criterion bodies: each returns (ok, detail)

def c1_closed_form_consistency():
    worst = 0.0
    for m in (2, 3, 5, 10):
        for p in np.round(np.linspace(0, 1, 11), 10):
            worst = max(worst, abs(r_m(m, p) - mutual_information(sp_joint(SPParams(m, p)))))
    return worst <= 1e-12, f"max |r_m - I| = {worst:.2e} nats"


def c2_achievability():
    cases = [
        ("fd", fd_optimal_mechanism, [(10, 0.4), (3, 0.2), (2, 0.1)]),        # p <= 1 - 1/m
        ("fd", fd_optimal_mechanism, [(2, 0.9), (3, 0.95), (5, 1.0)]),       # p > 1 - 1/m
        ("op", op_optimal_mechanism, [(10, 0.4), (2, 0.25), (5, 0.9)]),
        ("inf", inf_optimal_mechanism, [(10, 0.1), (10, 0.4), (2, 0.25), (2, 0.9), (3, 0.05)]),
    ]
    deltas = np.linspace(0, 0.95, 20)
    worst_pi, worst_d, n = 0.0, -math.inf, 0
    for kind, mech_fn, grid in cases:
        for m, p in grid:
            params = SPParams(m, p)
            sc = scenario(params, kind)
            for d in deltas:
                want = closed_form(kind, params, d).value
                if math.isinf(want):
                    continue
                j, dist = evaluate(sc, mech_fn(params, d), MI, PE)
                worst_pi = max(worst_pi, abs(j - want))
                worst_d = max(worst_d, dist - d)
                n += 1
    ok = worst_pi <= 1e-10 and worst_d <= 1e-12
    return ok, f"{n} points, max |J - pi| = {worst_pi:.2e} nats, max D - delta = {worst_d:.2e}"


def c3_solver_vs_closed_form():
    worst, n, mismatch = 0.0, 0, 0
    for p in (0.1, 0.25, 0.4):
        params = SPParams(2, p)
        for kind in ("op", "inf", "fd"):
            sc = scenario(params, kind)
            for d in np.round(np.arange(0.05, 0.46, 0.05), 10):
                want = closed_form(kind, params, d).value
                got = solve_point(sc, MI, PE, d).pi
                n += 1
                if math.isinf(want) or math.isinf(got):
                    mismatch += want != got
                    continue
                worst = max(worst, abs(got - want) / LN2)
    ok = worst <= 1e-3 and mismatch == 0
    return ok, f"{n} points, max error {worst:.2e} bits, infeasibility mismatches {mismatch}"


def c4_preset_curves():
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run(["sp", "--m", "10", "--p", "0.4", "--fig2"])
    table = {}
    for row in csv.DictReader(io.StringIO(buf.getvalue())):
        table.setdefault(float(row["delta"]), {})[row["scenario"]] = float(row["pi_nats"])
    worst, bad_order, bad_inf, bad_zero = 0.0, 0, 0, 0
    formulas = {"fd": oracles.pi_fd, "op": oracles.pi_op, "inf": oracles.pi_inf}
    for d, vals in table.items():
        for k, f in formulas.items():
            want = f(10, 0.4, d)
            if math.isinf(want) or math.isinf(vals[k]):
                worst = worst if want == vals[k] else math.inf
            else:
                worst = max(worst, abs(vals[k] - want))
        bad_order += not (vals["fd"] <= vals["op"] <= vals["inf"])
        bad_inf += (d < 0.4) != math.isinf(vals["inf"])
        bad_zero += d >= 0.9 and any(v != 0 for v in vals.values())
    ok = code == 0 and len(table) == 96 and worst <= 1e-10 and not (bad_order or bad_inf or bad_zero)
    return ok, (f"{len(table)} deltas, max formula error {worst:.2e} nats, order/inf/zero failures "
                f"{bad_order}/{bad_inf}/{bad_zero}")


def c5_hierarchy():
    rng = np.random.default_rng(2024)
    slack = 2e-3 * LN2
    deltas = [0.05, 0.15, 0.25, 0.35, 0.45]
    bad, n, approx = 0, 0, 0
    for _ in range(50):
        j = JointPmf.from_array(rng.dirichlet(np.ones(9)).reshape(3, 3))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            curves = {k: tradeoff_curve(Scenario.build(j, k), MI, PE, deltas) for k in ("fd", "op", "inf")}
        for fd, op, inf in zip(curves["fd"], curves["op"], curves["inf"]):
            n += 1
            approx += sum(pt.status == "approximate" for pt in (fd, op, inf))
            if not (fd.pi <= op.pi + slack and op.pi <= inf.pi + slack):
                bad += 1
    return bad == 0, f"{n} (joint, delta) pairs, {bad} violations, {approx} uncertified solver points"


def c6_counterexamples():
    imax = PrivacyMeasure("max-leakage")
    rep = check_linkage(imax, indicator_chain_counterexample())
    e1 = max(abs(rep.rhs / LN2 - 1.0), abs(rep.lhs / LN2 - 1.5))
    v1 = rep.verdict(expected_violation=not rep.holds)
    dp = check_linkage(PrivacyMeasure("dp"), dp_counterexample_triple(0.1, 0.3, 0.6))
    e2 = max(abs(dp.rhs - oracles.LN3), abs(dp.lhs - oracles.LN6))
    v2 = dp.verdict(expected_violation=not dp.holds)
    ok = e1 <= 1e-12 and e2 <= 1e-12 and v1 == v2 == "expected-violation"
    return ok, f"I* error {e1:.1e} bits ({v1}), DP error {e2:.1e} nats ({v2})"


def c7_axiom_properties():
    worst = {}
    triples = [random_markov_triple(seed) for seed in range(1000)]
    for kind in ("mi", "ip", "sibson"):
        m = PrivacyMeasure(kind)
        worst[kind] = min(min(check_post_processing(m, t).margin, check_linkage(m, t).margin) for t in triples)
    worst["max-leakage/pp"] = min(check_post_processing(PrivacyMeasure("max-leakage"), t).margin for t in triples)
    dp = PrivacyMeasure("dp")
    dp_fail = sum(not check_post_processing(dp, random_dp_triple(seed)).holds for seed in range(200))
    ok = all(v >= -1e-9 for v in worst.values()) and dp_fail == 0
    detail = ", ".join(f"{k} min margin {v:.1e}" for k, v in worst.items())
    return ok, f"{detail}, dp post-processing failures {dp_fail}/200"


def c8_singleton_ip():
    rng = np.random.default_rng(8)
    worst, n_inf, bad = 0.0, 0, 0
    for i in range(200):
        nx, nz = rng.integers(1, 5, size=2)
        p = rng.dirichlet(np.ones(nx * nz)).reshape(nx, nz)
        if i % 4 == 0:
            p[rng.random(p.shape) < 0.2] = 0.0
            if p.sum() == 0:
                p[0, 0] = 1.0
            p /= p.sum()
        a, b = information_privacy(p), information_privacy_sets(p)
        if math.isinf(a) or math.isinf(b):
            n_inf += 1
            bad += a != b
        else:
            worst = max(worst, abs(a - b))
    return worst <= 1e-10 and bad == 0, f"200 joints ({n_inf} unbounded), max difference {worst:.2e} nats"


def c9_common_part_gap():
    p = np.zeros((4, 2))
    for x in range(4):
        p[x, x // 2] = 0.25
    halves = JointPmf.from_array(p)
    fd = Scenario.build(halves, "fd")
    op = Scenario.build(halves, "op")
    rng = np.random.default_rng(9)
    worse = 0
    for _ in range(1000):
        mech = Channel(fd.w_alphabet, fd.z_alphabet, rng.dirichlet(np.ones(2) * rng.uniform(0.2, 2), 8))
        a, _ = evaluate(fd, mech, MI, PE)
        b, _ = evaluate(op, project_fd_to_op(halves, mech), MI, PE)
        worse += b > a + 1e-12

    data = sp_joint(SPParams(2, 0.25))
    mech_fd, mech_op = matched_release_pair(data, MatchedReleaseParams.default(data))
    pz_fd = push_mechanism(data, Scenario.build(data, "fd").obs, mech_fd)
    pz_op = push_mechanism(data, Scenario.build(data, "op").obs, mech_op)
    i_fd = mutual_information(marginal(pz_fd, (0, 2)))
    i_op = mutual_information(marginal(pz_op, (0, 2)))
    yz = marginal(pz_fd, (1, 2)).probs
    same = np.abs(yz - marginal(pz_op, (1, 2)).probs).max()
    # with the witness distortion at delta = 1 the only admissible output channel is P_{Z|Y} = P_{Y,Z} / P_Y
    witness = DistortionMeasure.witness(yz)
    forced = Channel(data.axes[1], mech_op.output_alphabet, yz / yz.sum(axis=1, keepdims=True))
    pi_op = evaluate(Scenario.build(data, "op"), forced, MI, witness)[0]
    d_fd = evaluate(Scenario.build(data, "fd"), mech_fd, MI, witness)[1]
    ok = worse == 0 and i_fd <= 1e-9 and i_op >= 1e-6 and same <= 1e-15 and d_fd <= 1 and pi_op > 0
    return ok, (f"projection increased leakage {worse}/1000 times; construction I(X;Z)={i_fd:.1e}, "
                f"I(X;Z')={i_op:.3e} nats, (Y,Z) mismatch {same:.1e}")


def c10_error_identities():
    rng = np.random.default_rng(10)
    worst = 0.0
    for m, p in [(2, 0.25), (3, 0.3), (5, 0.1), (10, 0.4)]:
        params = SPParams(m, p)
        fd_in = scenario(params, "fd").w_alphabet
        alph = sp_joint(params).axes[0]
        for _ in range(1000):
            lhs, rhs = error_relation_check(params, Channel(fd_in, alph, rng.dirichlet(np.ones(m), m * m)))
            got, predicted = markov_error_relation(params, Channel(alph, alph, rng.dirichlet(np.ones(m), m)))
            worst = max(worst, abs(lhs - rhs), abs(got - predicted))
    return worst <= 1e-12, f"4 (m, p) pairs x 1000 mechanisms, max residual {worst:.2e}"


CRITERIA = [
    (1, "closed-form consistency", 1, c1_closed_form_consistency),
    (2, "achievability of optimal mechanisms", 10, c2_achievability),
    (3, "solver vs closed form", 120, c3_solver_vs_closed_form),
    (4, "m=10, p=0.4 curves via CLI", 1, c4_preset_curves),
    (5, "scenario hierarchy on random joints", 300, c5_hierarchy),
    (6, "counterexamples", 1, c6_counterexamples),
    (7, "axiom properties on random chains", 120, c7_axiom_properties),
    (8, "singleton vs event-level IP", 30, c8_singleton_ip),
    (9, "common part decides the OP/FD gap", 60, c9_common_part_gap),
    (10, "error-probability identities", 30, c10_error_identities),
]


@pytest.mark.parametrize("n,title,limit,body", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(n, title, limit, body, capsys):
    passed, text = _emit(capsys, n, title, limit, body)
    assert passed, text


if __name__ == "__main__":
    results = [_emit(None, *c)[0] for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
