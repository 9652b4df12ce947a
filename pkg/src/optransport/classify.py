"""Which constraints transport Rota-Baxter operators to Hurwitz series, with certificates.

At weight zero the admissible constraints are ``xy - a0`` and
``xy - (b0*y + y*x)``; at arbitrary weight only ``xy``, ``xy - 1`` and
``xy - y*x`` survive.  For everything else :func:`find_counterexample`
builds an explicit Rota-Baxter algebra and a pair of series on which the
coextension breaks the Rota-Baxter identity at component 1, and certifies the
defect twice: through :func:`laws.check_coextension_rb` and through the
independent closed-form evaluator.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple

from .algebra import (
    AlgElem,
    LinearOperator,
    OmegaConstraint,
    Scalar,
    make_divided_power,
    make_truncated_polynomial,
    polynomial_derivation,
    scalar,
)
from .hurwitz import FiniteSupportSeries, delta_series
from .laws import CheckReport, check_coextension_rb, check_extension_diff, naive_defect, witness_pairs


DEFAULT_FIXTURES = (1, 2, 3, 4, 5)


class WeightMode(enum.Enum):
    ZERO = "zero-weight"
    ALL = "all-weights"


class NotApplicable(ValueError):
    """The constraint is admissible, so there is no counterexample to find."""


class InternalMismatch(AssertionError):
    """A computed defect disagrees with its closed-form value or with the independent evaluator."""


class NoCounterexampleAtWeight(LookupError):
    """The bounded search found no defect for ω at this particular nonzero weight.

    This is not a bug: membership in 𝒯_k is a statement about all weights at
    once, and some constraints outside it (``xy + y/λ``, ``xy + λx``) do hold
    at one specific weight λ.
    """


@dataclass(frozen=True)
class OmegaClass:
    kind: str  # "InTk", "InT0Only" or "Outside"
    tag: Optional[str] = None  # XY / FFTC / Commutator, or ConstantPhi / LinearPsi
    parameter: Optional[Scalar] = None

    def approved(self, mode: WeightMode) -> bool:
        if mode is WeightMode.ZERO:
            return self.kind != "Outside"
        return self.kind == "InTk"

    def __str__(self) -> str:
        if self.kind == "Outside":
            return "Outside"
        if self.parameter is None:
            return f"{self.kind}({self.tag})"
        return f"{self.kind}({self.tag}({self.parameter}))"


def classify_omega(omega: OmegaConstraint, mode: WeightMode = WeightMode.ZERO) -> OmegaClass:
    """Pure pattern match on the coefficients.

    The class records set membership; whether it is admissible depends on
    the weight mode (see :meth:`OmegaClass.approved`).
    """
    phi, psi = omega.phi, omega.psi
    if not psi and len(phi) <= 1:
        a0 = phi[0] if phi else 0
        if a0 == 0:
            return OmegaClass("InTk", "XY")
        if a0 == 1:
            return OmegaClass("InTk", "FFTC")
        return OmegaClass("InT0Only", "ConstantPhi", a0)
    if not phi and len(psi) == 2 and psi[1] == 1:
        if psi[0] == 0:
            return OmegaClass("InTk", "Commutator")
        return OmegaClass("InT0Only", "LinearPsi", psi[0])
    return OmegaClass("Outside")


def mode_for(lam) -> WeightMode:
    return WeightMode.ZERO if scalar(lam) == 0 else WeightMode.ALL


@dataclass
class CounterexampleWitness:
    case_id: str
    fixture_m: int
    lam: Scalar
    f: FiniteSupportSeries
    g: FiniteSupportSeries
    n: int
    defect: AlgElem
    closed_form: str
    variant: str = ""
    expected: Optional[AlgElem] = None  # closed-form value in (operator side) − (product side) orientation
    orientation_sign: int = 1  # +1 when the quoted formula uses the same orientation, −1 otherwise
    certified: bool = False
    search: bool = False

    @property
    def closed_form_value(self) -> Optional[AlgElem]:
        """The closed-form value in the orientation used by the quoted formula."""
        return None if self.expected is None else self.orientation_sign * self.expected


# ---------------------------------------------------------------------------
# Case table
# ---------------------------------------------------------------------------


@dataclass
class _Plan:
    case_id: str
    m: int
    f_index: int
    f_basis: int
    g_index: int  # the g series is δ_{·,g_index}·z0
    formula: str
    expected: Optional[Tuple[int, Scalar]]  # (basis index, coefficient) in op − prod orientation
    sign: int = 1
    variant: str = ""


def _plan_weight_zero(omega: OmegaConstraint) -> _Plan:
    phi, psi = omega.phi, omega.psi
    r, s = omega.r, omega.s
    a = omega.a
    b = omega.b
    if not psi:
        ar = a(r)
        return _Plan("P-l", 2, 2 * r - 1, 0, 0, "a_r^2 z0", (0, ar * ar))
    if not phi:
        if s == 0:
            return _Plan("P-r-s0", 3, 0, 0, 0, "2 b_0 z2", (2, -2 * b(0)), sign=-1)
        if s >= 2:
            return _Plan("P-r-sge2", 3, s * s, 0, 0, "b_s^(s+1) z2", (2, b(s) ** (s + 1)))
        b1 = b(1)
        return _Plan("P-r-s1", 3, 1, 0, 0, "b_1(b_1-1) z2", (2, b1 * (b1 - 1)))
    ar, bs = a(r), b(s)
    if s > 1:
        if r > s:
            return _Plan("LR-i", 1, r + (r - 1) * s, 0, 0, "a_r^2 b_s^(r-1) z0", (0, ar * ar * bs ** (r - 1)))
        if r == s:
            return _Plan("LR-ii", 2, s * s, 1, 0, "a_r^2 b_s^(s-1) z1", (1, ar * ar * bs ** (s - 1)))
        return _Plan("LR-iii", 3, s * s, 0, 0, "b_s^(s+1) z2", (2, bs ** (s + 1)))
    if s == 1:
        b1 = bs
        if r > 1:
            total = sum(b1**k for k in range(r))
            if total != 0:
                return _Plan("LR-iv", 1, 2 * r - 1, 0, 0, "a_r^2 (sum_{k<r} b_1^k) z0", (0, ar * ar * total))
            return _Plan("LR-iv", 1, 2 * (r - 1), 0, 1, "-r a_r^2 b_1^(r-1) z0",
                         (0, -r * ar * ar * b1 ** (r - 1)), variant="zero-sum")
        if r == 1:
            return _Plan("LR-v", 1, 1, 0, 0, "a_1^2 z0", (0, ar * ar))
        if b1 != 1:
            return _Plan("LR-vi", 3, 1, 0, 0, "b_1(b_1-1) z2", (2, b1 * (b1 - 1)))
        return _Plan("LR-vi", 3, 0, 0, 0, "2 a_0 z1", (1, 2 * a(0)), variant="b1=1")
    if r > 0:
        return _Plan("LR-vii", 1, 2 * r - 1, 0, 0, "a_r^2 z0", (0, ar * ar))
    return _Plan("LR-viii", 3, 0, 0, 0, "-2 b_0 z2", (2, -2 * b(0)))


def select_case(omega: OmegaConstraint, lam=0) -> _Plan:
    """The constructive branch used for ω at weight λ (no evaluation)."""
    lam = scalar(lam)
    cls = classify_omega(omega)
    if cls.approved(mode_for(lam)):
        raise NotApplicable(f"{omega} is admissible at weight {lam}")
    if lam != 0 and cls.kind != "Outside":
        if cls.tag == "ConstantPhi":
            a0 = cls.parameter
            return _Plan("W-const", 1, 0, 0, 0, "lambda a_0(a_0-1) z0", (0, -lam * a0 * (a0 - 1)), sign=-1)
        b0 = cls.parameter
        return _Plan("W-linear", 2, 1, 0, 0, "lambda^2 b_0 z1", (1, -lam * lam * b0), sign=-1)
    return _plan_weight_zero(omega)


def _evaluate(omega: OmegaConstraint, lam: Scalar, m: int, f, g, n_max: int = 1) -> CheckReport:
    alg, P, _ = make_divided_power(m, lam)
    return check_coextension_rb(P, omega, lam, [(f, g)], N=n_max, fixture=f"I_{m}")


def find_counterexample(omega: OmegaConstraint, lam=0, fallback: bool = True, certify: bool = True) -> CounterexampleWitness:
    """Certified counterexample for a constraint that is not admissible at weight λ.

    At weight 0, and for the two weight-λ shapes, the computed defect must
    equal the closed-form value; otherwise :class:`InternalMismatch` is
    raised.  For other constraints at nonzero weight the weight-0 branch is
    replayed on the weight-λ fixture and only nonvanishing is required; if it
    vanishes a bounded search takes over (when ``fallback`` is set).
    """
    lam = scalar(lam)
    plan = select_case(omega, lam)
    alg, P, _ = make_divided_power(plan.m, lam)
    f = delta_series(alg, lam, plan.f_index, alg.basis(plan.f_basis))
    g = delta_series(alg, lam, plan.g_index)
    report = _evaluate(omega, lam, plan.m, f, g)
    exact_branch = lam == 0 or plan.case_id.startswith("W-")
    expected = None
    if plan.expected is not None and exact_branch:
        idx, c = plan.expected
        expected = c * alg.basis(idx)
    if report.passed or report.witness["n"] != 1:
        if exact_branch:
            raise InternalMismatch(f"{plan.case_id} branch for {omega} at weight {lam} gave no defect at component 1")
        if not fallback:
            raise NoCounterexampleAtWeight(f"replayed branch {plan.case_id} vanishes for {omega} at weight {lam}")
        return search_counterexample(omega, lam, certify=certify)
    defect = report.witness["defect"]
    if expected is not None and defect != expected:
        raise InternalMismatch(f"{plan.case_id}: computed {defect}, expected {expected} for {omega}")
    wit = CounterexampleWitness(
        case_id=plan.case_id, fixture_m=plan.m, lam=lam, f=f, g=g, n=1, defect=defect,
        closed_form=plan.formula, variant=plan.variant, expected=expected,
        orientation_sign=plan.sign,
    )
    if certify:
        _certify(omega, wit)
    return wit


def _certify(omega: OmegaConstraint, wit: CounterexampleWitness) -> None:
    _, P, _ = make_divided_power(wit.fixture_m, wit.lam)
    again = naive_defect(P, omega, wit.lam, wit.f, wit.g, wit.n)
    if again != wit.defect or again.is_zero():
        raise InternalMismatch(f"independent evaluation gave {again}, checker gave {wit.defect}")
    wit.certified = True


def search_counterexample(omega: OmegaConstraint, lam=0, max_m: int = 4, max_index: int = 12, max_n: int = 3,
                          certify: bool = True) -> CounterexampleWitness:
    """Bounded search over fixtures m ≤ max_m and delta witnesses with indices ≤ max_index."""
    lam = scalar(lam)
    for m in range(1, max_m + 1):
        alg, P, _ = make_divided_power(m, lam)
        deltas = [delta_series(alg, lam, k, alg.basis(i)) for k in range(max_index + 1) for i in range(m)]
        pairs = list(itertools.combinations_with_replacement(deltas, 2))
        report = check_coextension_rb(P, omega, lam, pairs, N=max_n, fixture=f"I_{m}")
        if not report.passed:
            w = report.witness
            wit = CounterexampleWitness(
                case_id="search", fixture_m=m, lam=lam, f=w["f"], g=w["g"], n=w["n"],
                defect=w["defect"], closed_form="", search=True,
            )
            if certify:
                _certify(omega, wit)
            return wit
    raise NoCounterexampleAtWeight(f"no counterexample for {omega} at weight {lam} within the search bounds")


def verify_positive(omega: OmegaConstraint, lam=0, N: int = 6, trials: int = 20,
                    fixtures: Sequence[int] = DEFAULT_FIXTURES, seed: int = 0) -> CheckReport:
    """Run the coextension check on the divided-power fixtures with default and random witnesses."""
    lam = scalar(lam)
    total = 0
    for m in fixtures:
        alg, P, _ = make_divided_power(m, lam)
        pairs = witness_pairs(alg, lam, omega, trials=trials, seed=seed + m)
        report = check_coextension_rb(P, omega, lam, pairs, N=N, fixture=f"I_{m}")
        total += report.checked
        if not report.passed:
            report.checked = total
            return report
    return CheckReport(True, None, total, {"omega": omega, "lambda": lam, "fixtures": list(fixtures), "N": N})


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


def polynomials(max_deg: int, coeffs: Sequence[int]) -> List[Tuple[Scalar, ...]]:
    """Distinct trimmed coefficient tuples of degree ≤ max_deg, the zero polynomial first."""
    out = {()}
    nonzero = [c for c in coeffs if c != 0]
    for deg in range(max_deg + 1):
        for lower in itertools.product(coeffs, repeat=deg):
            for lead in nonzero:
                out.add(tuple(lower) + (lead,))
    return sorted(out, key=lambda t: (len(t), t))


def default_grid(max_deg: int = 3, coeffs: Sequence[int] = (-1, 0, 1, 2)) -> List[OmegaConstraint]:
    if max_deg < 0:
        return []
    polys = polynomials(max_deg, coeffs)
    return [OmegaConstraint(p, q) for p in polys for q in polys]


@dataclass
class SweepRow:
    """One (ω, λ) confrontation.

    ``symbolic`` is the classification verdict for the weight mode implied by
    λ and ``experimental`` is the computed verdict on the same claim.  At
    λ ≠ 0 the claim is the all-weights one, so a row is refuted by a
    certified counterexample at weight λ or, failing that, at weight 0
    (``refuted_at``).  ``holds_at_weight`` records separately whether the
    coextension survived every check at the row's own weight.
    """

    omega: OmegaConstraint
    lam: Scalar
    symbolic: bool
    experimental: bool
    agree: bool
    omega_class: OmegaClass
    case_id: Optional[str] = None
    defect: Optional[AlgElem] = None
    components_checked: int = 0
    holds_at_weight: bool = False
    refuted_at: Optional[Scalar] = None
    note: str = ""


def sweep_row(omega: OmegaConstraint, lam, N: int = 6, trials: int = 20, certify: bool = True,
              fixtures: Sequence[int] = DEFAULT_FIXTURES, seed: int = 0) -> SweepRow:
    lam = scalar(lam)
    cls = classify_omega(omega)
    symbolic = cls.approved(mode_for(lam))
    if symbolic:
        report = verify_positive(omega, lam, N=N, trials=trials, fixtures=fixtures, seed=seed)
        row = SweepRow(omega, lam, True, report.passed, report.passed, cls,
                       components_checked=report.checked, holds_at_weight=report.passed)
        if not report.passed:
            row.defect = report.defect
            row.refuted_at = lam
        return row
    try:
        wit = find_counterexample(omega, lam, certify=certify)
    except InternalMismatch as exc:
        return SweepRow(omega, lam, False, True, False, cls, note=str(exc))
    except NoCounterexampleAtWeight:
        report = verify_positive(omega, lam, N=N, trials=trials, fixtures=fixtures, seed=seed)
        if not report.passed:
            return SweepRow(omega, lam, False, False, True, cls, case_id="positive-suite",
                            defect=report.defect, components_checked=report.checked, refuted_at=lam)
        try:
            wit = find_counterexample(omega, 0, certify=certify)
        except (InternalMismatch, NotApplicable) as exc:
            return SweepRow(omega, lam, False, True, False, cls, components_checked=report.checked,
                            holds_at_weight=True, note=str(exc))
        return SweepRow(omega, lam, False, False, True, cls, case_id=wit.case_id, defect=wit.defect,
                        components_checked=report.checked + 2, holds_at_weight=True, refuted_at=0,
                        note=f"holds at weight {lam} on every fixture; refuted at weight 0")
    return SweepRow(omega, lam, False, False, True, cls, case_id=wit.case_id, defect=wit.defect,
                    components_checked=2, refuted_at=lam)


def sweep(grid: Iterable[OmegaConstraint], lambdas: Iterable, N: int = 6, trials: int = 20,
          certify: bool = True, fixtures: Sequence[int] = DEFAULT_FIXTURES, seed: int = 0) -> List[SweepRow]:
    """Confront the symbolic classification with computation on every (ω, λ)."""
    grid = list(grid)
    rows = [sweep_row(om, scalar(lam), N=N, trials=trials, certify=certify, fixtures=fixtures, seed=seed)
            for lam in lambdas for om in grid]
    rows.sort(key=lambda r: (r.lam, len(r.omega.phi), r.omega.phi, len(r.omega.psi), r.omega.psi))
    return rows


# ---------------------------------------------------------------------------
# Extension direction
# ---------------------------------------------------------------------------

DERIVATION_DEPTHS = (3, 4, 5, 7)


@lru_cache(maxsize=None)
def nilpotent_derivation(m: int) -> LinearOperator:
    """d(t) = t² on k[t]/(t^m), a weight-0 derivation with d^j(t) = j!·t^{j+1}."""
    alg = make_truncated_polynomial(m)
    image = [0] * m
    if m > 2:
        image[2] = 1
    return polynomial_derivation(alg, image)


def check_extension_chain(omega: OmegaConstraint, L: int = 4, depths: Sequence[int] = DERIVATION_DEPTHS) -> CheckReport:
    """Weight-0 Leibniz check of the extension on each nilpotent-derivation fixture in turn.

    A defect for ``φ = x^r`` shows up as ``d^{2r-1}`` of a letter, so deeper
    truncations catch higher-degree constraints; the first failing fixture is
    reported.
    """
    total = 0
    for m in depths:
        report = check_extension_diff(nilpotent_derivation(m), omega, 0, L=L, fixture=f"k[t]/(t^{m})")
        total += report.checked
        if not report.passed:
            report.checked = total
            return report
    return CheckReport(True, None, total, {"omega": omega, "lambda": 0, "L": L, "depths": list(depths)})


def cross_direction_agrees(omega: OmegaConstraint, L: int = 4, N: int = 6, trials: int = 20) -> bool:
    """Both transport directions give the same weight-0 verdict for ω."""
    ext_ok = check_extension_chain(omega, L=L).passed
    if classify_omega(omega).approved(WeightMode.ZERO):
        coext_ok = verify_positive(omega, 0, N=N, trials=trials).passed
    else:
        coext_ok = False
        find_counterexample(omega, 0)
    return ext_ok == coext_ok
