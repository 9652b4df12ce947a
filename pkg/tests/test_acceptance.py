"""Acceptance criteria, one test per criterion.

Each test records a verdict in RESULTS before asserting, and the terminal
summary (see conftest) prints one ``criterion N: PASS/FAIL`` line each.
Run as a script for the same lines without pytest's reporting.
"""
import random
from fractions import Fraction
from math import comb

import pytest

from optransport.algebra import COMMUTATOR, FFTC, XY, OmegaConstraint, make_divided_power
from optransport.classify import (
    check_extension_chain,
    default_grid,
    find_counterexample,
    sweep,
    verify_positive,
)
from optransport.hurwitz import FiniteSupportSeries, coextend, coextend_closed_form, delta_series
from optransport.laws import (
    check_coextension_rb,
    check_comonad_laws,
    check_lemma_eps,
    check_lemma_eta,
    check_monad_laws,
    naive_defect,
    search_triples,
)
from optransport.omega_syntax import parse_omega
from optransport.shuffle import ShuffleAlgebra, msh_mul

from .test_algebra import product_oracle

RESULTS = {}
WEIGHTS = (0, 1, -1, 2)


def record(number, ok, detail=""):
    RESULTS[number] = (bool(ok), detail)
    return ok


@pytest.fixture(scope="module")
def sweep_rows():
    return sweep(default_grid(), [0, 1], N=6, trials=20)


def test_criterion_1_divided_power_arithmetic():
    bad = []
    for lam in WEIGHTS:
        scalars = make_divided_power(1, lam)[0]
        ctx = ShuffleAlgebra(scalars, lam, 9)
        for m in range(9):
            for n in range(9 - m):
                got = msh_mul(ctx.word(*([0] * (m + 1))), ctx.word(*([0] * (n + 1)))).terms
                want = {(0,) * (k + 1): c for k, c in product_oracle(m, n, lam).items()}
                if lam == 0:
                    want_binomial = {(0,) * (m + n + 1): comb(m + n, n)}
                    if got != want_binomial:
                        bad.append((lam, m, n))
                if got != want:
                    bad.append((lam, m, n))
    record(1, not bad, f"{len(bad)} mismatching products over m+n <= 8")
    assert not bad


def test_criterion_2_closed_form_coextensions():
    rng = random.Random(2)
    bad = 0
    checked = 0
    for lam in WEIGHTS:
        for m in range(1, 6):
            alg, P, _ = make_divided_power(m, lam)
            entries = {i: [rng.randint(-2, 2) for _ in range(m)] for i in range(12) if rng.random() < 0.7}
            f = FiniteSupportSeries(alg, lam, entries)
            fftc, comm, xy = coextend(P, FFTC, f), coextend(P, COMMUTATOR, f), coextend(P, XY, f)
            bad += fftc[0] != P(f[0])
            for n in range(11):
                checked += 3
                if n >= 1:
                    bad += fftc[n] != f[n - 1]
                    bad += not xy[n].is_zero()
                else:
                    bad += xy[0] != P(f[0])
                bad += comm[n] != P(f[n])
    record(2, bad == 0, f"{checked} components, {bad} mismatches")
    assert bad == 0


def positive_cases():
    for omega in (XY, FFTC, COMMUTATOR):
        for lam in WEIGHTS:
            yield omega, lam
    for c in (-1, 0, 1, 2):
        yield OmegaConstraint((c,)), 0
        yield OmegaConstraint((), (c, 1)), 0


def test_criterion_3_positive_classification():
    failures = []
    checked = 0
    for omega, lam in positive_cases():
        report = verify_positive(omega, lam, N=6, trials=20)
        checked += report.checked
        if not report.passed:
            failures.append((str(omega), lam, report.witness))
    record(3, not failures, f"{checked} components checked, {len(failures)} failures")
    assert not failures


def a(om, i):
    return Fraction(om.a(i))


def b(om, j):
    return Fraction(om.b(j))


def lr_iv(om):
    r = om.r
    return a(om, r) ** 2 * sum(b(om, 1) ** k for k in range(r))


# (case, variant, constraint, weight, basis index, formula)
GOLDEN = [
    ("P-l", "", "x*y - x", 0, 0, lambda om: a(om, om.r) ** 2),
    ("P-l", "", "x*y - 2*x^2", 0, 0, lambda om: a(om, om.r) ** 2),
    ("P-r-s0", "", "x*y - y", 0, 2, lambda om: 2 * b(om, 0)),
    ("P-r-s0", "", "x*y - 2*y", 0, 2, lambda om: 2 * b(om, 0)),
    ("P-r-sge2", "", "x*y - y*x^2", 0, 2, lambda om: b(om, om.s) ** (om.s + 1)),
    ("P-r-sge2", "", "x*y - 2*y*x^2", 0, 2, lambda om: b(om, om.s) ** (om.s + 1)),
    ("P-r-s1", "", "x*y - 2*y*x", 0, 2, lambda om: b(om, 1) * (b(om, 1) - 1)),
    ("P-r-s1", "", "x*y + y*x", 0, 2, lambda om: b(om, 1) * (b(om, 1) - 1)),
    ("LR-i", "", "x*y - (x^3 + y*x^2)", 0, 0, lambda om: a(om, om.r) ** 2 * b(om, om.s) ** (om.r - 1)),
    ("LR-i", "", "x*y - (2*x^3 + 2*y*x^2)", 0, 0, lambda om: a(om, om.r) ** 2 * b(om, om.s) ** (om.r - 1)),
    ("LR-ii", "", "x*y - (x^2 + y*x^2)", 0, 1, lambda om: a(om, om.r) ** 2 * b(om, om.s) ** (om.s - 1)),
    ("LR-ii", "", "x*y - (2*x^2 - y*x^2)", 0, 1, lambda om: a(om, om.r) ** 2 * b(om, om.s) ** (om.s - 1)),
    ("LR-iii", "", "x*y - (x + y*x^2)", 0, 2, lambda om: b(om, om.s) ** (om.s + 1)),
    ("LR-iii", "", "x*y - (1 + 2*y*x^3)", 0, 2, lambda om: b(om, om.s) ** (om.s + 1)),
    ("LR-iv", "", "x*y - (x^2 + y*x)", 0, 0, lr_iv),
    ("LR-iv", "", "x*y - (2*x^3 + 2*y*x)", 0, 0, lr_iv),
    ("LR-iv", "zero-sum", "x*y - (x^2 - y*x)", 0, 0, lambda om: -om.r * a(om, om.r) ** 2 * b(om, 1) ** (om.r - 1)),
    ("LR-iv", "zero-sum", "x*y - (2*x^2 - y*x)", 0, 0, lambda om: -om.r * a(om, om.r) ** 2 * b(om, 1) ** (om.r - 1)),
    ("LR-v", "", "x*y - (x + y*x)", 0, 0, lambda om: a(om, 1) ** 2),
    ("LR-v", "", "x*y - (2*x + 2*y*x)", 0, 0, lambda om: a(om, 1) ** 2),
    ("LR-vi", "", "x*y - (1 + 2*y*x)", 0, 2, lambda om: b(om, 1) * (b(om, 1) - 1)),
    ("LR-vi", "", "x*y - (2 - y*x)", 0, 2, lambda om: b(om, 1) * (b(om, 1) - 1)),
    ("LR-vi", "b1=1", "x*y - (1 + y*x)", 0, 1, lambda om: 2 * a(om, 0)),
    ("LR-vi", "b1=1", "x*y - (2 + y + y*x)", 0, 1, lambda om: 2 * a(om, 0)),
    ("LR-vii", "", "x*y - (x + y)", 0, 0, lambda om: a(om, om.r) ** 2),
    ("LR-vii", "", "x*y - (2*x^2 - y)", 0, 0, lambda om: a(om, om.r) ** 2),
    ("LR-viii", "", "x*y - (1 + y)", 0, 2, lambda om: -2 * b(om, 0)),
    ("LR-viii", "", "x*y - (2 - y)", 0, 2, lambda om: -2 * b(om, 0)),
    ("W-const", "", "x*y - 2", 1, 0, lambda om, lam=1: lam * a(om, 0) * (a(om, 0) - 1)),
    ("W-const", "", "x*y + 1", 2, 0, lambda om, lam=2: lam * a(om, 0) * (a(om, 0) - 1)),
    ("W-linear", "", "x*y - (2*y + y*x)", 1, 1, lambda om, lam=1: lam ** 2 * b(om, 0)),
    ("W-linear", "", "x*y - (-y + y*x)", 2, 1, lambda om, lam=2: lam ** 2 * b(om, 0)),
]


def test_criterion_4_golden_counterexamples():
    bad = []
    branches = set()
    for case_id, variant, text, lam, index, formula in GOLDEN:
        omega = parse_omega(text)
        wit = find_counterexample(omega, lam)
        want = formula(omega) * wit.defect.algebra.basis(index)
        got = wit.orientation_sign * wit.defect
        branches.add((case_id, variant))
        if (wit.case_id, wit.variant) != (case_id, variant) or got != want or want.is_zero():
            bad.append((text, lam, wit.case_id, str(got), str(want)))
    per_branch = {br: sum((c, v) == br for c, v, *_ in GOLDEN) for br in branches}
    ok = not bad and min(per_branch.values()) >= 2 and len(branches) == 16
    record(4, ok, f"{len(GOLDEN)} instantiations over {len(branches)} branches, {len(bad)} mismatches")
    assert not bad
    assert ok


def test_criterion_5_sweep_consistency(sweep_rows):
    disagree = [r for r in sweep_rows if not r.agree]
    weight_specific = [r for r in sweep_rows if r.holds_at_weight and not r.symbolic]
    uncertified = [r for r in sweep_rows if not r.experimental and (r.defect is None or r.defect.is_zero())]
    ok = not disagree and not uncertified and len(sweep_rows) == 2 * len(default_grid())
    record(5, ok, f"{len(sweep_rows)} rows, {len(disagree)} disagreements, "
                  f"{len(weight_specific)} rows hold only at their own weight (refuted at weight 0)")
    assert not disagree
    assert ok


def test_criterion_6_lemma_suite():
    alg = make_divided_power(3, 0)[0]
    found, n_diff = search_triples(alg, FFTC)
    comonad = check_comonad_laws(N=4)
    monad = check_monad_laws(2, 2)
    lemmas = bool(found) and all(
        check_lemma_eta(d, P, FFTC, 0, N=6) and check_lemma_eps(d, P, FFTC, 0, L=3) for d, P in found
    )
    ok = lemmas and bool(comonad) and bool(monad)
    detail = (f"FFTC triples found: {len(found)} (over {n_diff} derivations); "
              f"comonad laws {'pass' if comonad else 'fail'}, monad laws {'pass' if monad else 'fail'}")
    if not found:
        detail += "; no triple exists since d(1) = 0 forbids d∘P = id"
    record(6, ok, detail)
    assert comonad and monad
    assert found, "no weight-0 triple (R, d, P) with d∘P = id exists on this fixture"
    assert lemmas


def test_criterion_7_uniqueness_cross_checks():
    alg, P, _ = make_divided_power(3, 0)
    generic = alg.element([1, 2, -1])
    seeds = [delta_series(alg, 0, k, generic) for k in range(3)]
    mismatch = 0
    comparisons = 0
    for omega in default_grid(max_deg=2):
        for f in seeds:
            image = coextend(P, omega, f)
            for n in range(6):
                comparisons += 1
                mismatch += image[n] != coextend_closed_form(P, omega, f, n)
    reeval = 0
    failures = 0
    for lam in (0, 1):
        alg_l, P_l, _ = make_divided_power(3, lam)
        series = [delta_series(alg_l, lam, k, alg_l.element([1, 2, -1])) for k in range(4)]
        pairs = [(f, g) for i, f in enumerate(series) for g in series[i:]]
        for omega in default_grid(max_deg=2):
            report = check_coextension_rb(P_l, omega, lam, pairs, N=3)
            if not report.passed:
                failures += 1
                w = report.witness
                reeval += naive_defect(P_l, omega, lam, w["f"], w["g"], w["n"]) != report.defect
    ok = mismatch == 0 and reeval == 0 and failures > 0
    record(7, ok, f"{comparisons} recurrence components, {mismatch} mismatches; "
                  f"{failures} failing checks re-evaluated, {reeval} differ")
    assert ok


def test_criterion_8_cross_direction(sweep_rows):
    verdicts = {r.omega: r.experimental for r in sweep_rows if r.lam == 0}
    mismatches = [om for om, coext in verdicts.items() if check_extension_chain(om, L=4).passed != coext]
    ok = not mismatches and len(verdicts) == len(default_grid())
    record(8, ok, f"{len(verdicts)} constraints, {len(mismatches)} direction mismatches")
    assert ok


if __name__ == "__main__":
    import sys

    rows = sweep(default_grid(), [0, 1], N=6, trials=20)
    tests = [
        test_criterion_1_divided_power_arithmetic,
        test_criterion_2_closed_form_coextensions,
        test_criterion_3_positive_classification,
        test_criterion_4_golden_counterexamples,
        lambda: test_criterion_5_sweep_consistency(rows),
        test_criterion_6_lemma_suite,
        test_criterion_7_uniqueness_cross_checks,
        lambda: test_criterion_8_cross_direction(rows),
    ]
    for number, test in enumerate(tests, 1):
        try:
            test()
        except AssertionError:
            pass
        ok, detail = RESULTS.get(number, (False, "did not run"))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
