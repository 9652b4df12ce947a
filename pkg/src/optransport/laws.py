"""Componentwise identity checks with exact defects.

A failed check is a certified counterexample: the reported defect is a
nonzero exact value.  A passed check only covers the components, witnesses
and words that were actually examined.
"""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .algebra import (
    AlgElem,
    FinAlgebra,
    LinearOperator,
    OmegaConstraint,
    Scalar,
    binom,
    is_diff_operator,
    is_rb_operator,
    make_divided_power,
    omega_holds,
    scalar,
)
from .hurwitz import (
    Coextension,
    FiniteSupportSeries,
    HurwitzSeries,
    delta_series,
    h_eta,
    h_mul,
    h_shift,
    unit_series,
)
from .shuffle import (
    Extension,
    NestedShuffle,
    ShuffleAlgebra,
    TensorElem,
    Word,
    rb_epsilon,
)


class PreconditionViolation(ValueError):
    pass


@dataclass
class CheckReport:
    passed: bool
    witness: Optional[Dict[str, Any]] = None
    checked: int = 0
    config: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    @property
    def defect(self):
        return None if self.witness is None else self.witness.get("defect")


# ---------------------------------------------------------------------------
# Coextension direction
# ---------------------------------------------------------------------------


def _require_rb(P: LinearOperator, lam: Scalar) -> None:
    chk = is_rb_operator(P, lam)
    if not chk:
        raise PreconditionViolation(f"not a Rota-Baxter operator of weight {lam}; fails on {chk.witness}")


def _require_diff(d: LinearOperator, lam: Scalar) -> None:
    chk = is_diff_operator(d, lam)
    if not chk:
        raise PreconditionViolation(f"not a differential operator of weight {lam}; fails on {chk.witness}")


def rb_defect(coext: Coextension, f: HurwitzSeries, g: HurwitzSeries, n: int,
              images: Optional[Tuple[HurwitzSeries, HurwitzSeries]] = None) -> AlgElem:
    """Component n of ``P(P f · g) + P(f · P g) + λ P(f g) − P f · P g`` for the coextension P."""
    lam = f.lam
    Pf, Pg = images if images is not None else (coext(f), coext(g))
    op_side = coext(h_mul(Pf, g))[n] + coext(h_mul(f, Pg))[n]
    if lam:
        op_side = op_side + lam * coext(h_mul(f, g))[n]
    return op_side - h_mul(Pf, Pg)[n]


def default_witnesses(algebra: FinAlgebra, lam, omega: OmegaConstraint) -> List[FiniteSupportSeries]:
    """The unit series and δ_{·,k}·1 for k ≤ 2·max(r, s)² + 2."""
    top = max(omega.r or 0, omega.s or 0)
    series = [unit_series(algebra, lam)]
    series += [delta_series(algebra, lam, k) for k in range(1, 2 * top * top + 3)]
    return series


def random_series(algebra: FinAlgebra, lam, rng: random.Random, length: int = 6, spread: int = 2) -> FiniteSupportSeries:
    entries = {}
    for n in range(length):
        if rng.random() < 0.6:
            entries[n] = tuple(rng.randint(-spread, spread) for _ in range(algebra.dim))
    return FiniteSupportSeries(algebra, lam, entries)


def witness_pairs(algebra: FinAlgebra, lam, omega: OmegaConstraint, trials: int = 20,
                  seed: int = 0) -> List[Tuple[HurwitzSeries, HurwitzSeries]]:
    """All unordered pairs of default witnesses followed by ``trials`` random pairs."""
    base = default_witnesses(algebra, lam, omega)
    pairs = list(itertools.combinations_with_replacement(base, 2))
    rng = random.Random(seed)
    top = max(omega.r or 0, omega.s or 0)
    for _ in range(trials):
        pairs.append((random_series(algebra, lam, rng, length=top + 4),
                      random_series(algebra, lam, rng, length=top + 4)))
    return pairs


def describe_series(f: HurwitzSeries) -> Any:
    if isinstance(f, FiniteSupportSeries):
        return {str(n): AlgElem(f.algebra, c).__repr__() for n, c in sorted(f.entries.items())}
    return repr(f)


def check_coextension_rb(P: LinearOperator, omega: OmegaConstraint, lam,
                         witnesses: Optional[Sequence[Tuple[HurwitzSeries, HurwitzSeries]]] = None,
                         N: int = 6, fixture: str = "") -> CheckReport:
    """Check the weight-λ Rota-Baxter identity for the coextension, components 0..N.

    Components are scanned in increasing n, so the reported failure has the
    smallest n over all witness pairs (ties broken by pair order).
    """
    lam = scalar(lam)
    _require_rb(P, lam)
    if witnesses is None:
        witnesses = witness_pairs(P.domain, lam, omega)
    config = {"omega": omega, "lambda": lam, "fixture": fixture or P.domain.name, "N": N}
    coext = Coextension(P, omega)
    images: Dict[int, HurwitzSeries] = {}

    def image(f):
        key = id(f)
        if key not in images:
            images[key] = coext(f)
        return images[key]

    prepared = []
    for f, g in witnesses:
        Pf, Pg = image(f), image(g)
        op = [coext(h_mul(Pf, g)), coext(h_mul(f, Pg))]
        if lam:
            op.append(coext(h_mul(f, g)).scale(lam))
        prepared.append((f, g, op, h_mul(Pf, Pg)))
    checked = 0
    for n in range(N + 1):
        for f, g, op, prod in prepared:
            checked += 1
            total = list(prod.coords(n))
            for s in op:
                for k, x in enumerate(s.coords(n)):
                    total[k] -= x
            if any(total):
                defect = -AlgElem(P.domain, tuple(total))
                witness = {"n": n, "f": f, "g": g, "defect": defect}
                return CheckReport(False, witness, checked, config)
    return CheckReport(True, None, checked, config)


# independent evaluator ------------------------------------------------------


def _poly_powers(psi: Sequence[Scalar], upto: int) -> List[Dict[int, Scalar]]:
    """Coefficient tables of ψ(x)^k for k ≤ upto."""
    powers = [{0: 1}]
    for _ in range(upto):
        nxt: Dict[int, Scalar] = {}
        for e, c in powers[-1].items():
            for j, b in enumerate(psi):
                if b:
                    nxt[e + j] = nxt.get(e + j, 0) + c * b
        powers.append({e: c for e, c in nxt.items() if c})
    return powers


def _naive_coext(Q: LinearOperator, omega: OmegaConstraint, f: Callable[[int], AlgElem], n: int) -> AlgElem:
    """Closed-form expansion: Σ_i a_i Σ_{k<n} [ψ^k]_t f_{n-1-k+i+t} + Σ_t [ψ^n]_t Q(f_t)."""
    alg = Q.domain
    total = alg.zero
    powers = _poly_powers(omega.psi, n)
    for i, a in enumerate(omega.phi):
        if a:
            for k in range(n):
                for t, c in powers[k].items():
                    x = f(n - 1 - k + i + t)
                    if x:
                        total = total + (a * c) * x
    for t, c in powers[n].items():
        x = f(t)
        if x:
            total = total + c * Q(x)
    return total


def _naive_product(lam: Scalar, f: Callable[[int], AlgElem], g: Callable[[int], AlgElem], n: int) -> AlgElem:
    total = None
    for k in range(n + 1):
        for j in range(n - k + 1):
            x, y = f(n - j), g(k + j)
            if total is None:
                total = x.algebra.zero
            if x and y and (k == 0 or lam):
                total = total + (binom(n, k) * binom(n - k, j) * lam**k) * (x * y)
    return total


def naive_defect(P: LinearOperator, omega: OmegaConstraint, lam, f: HurwitzSeries, g: HurwitzSeries, n: int) -> AlgElem:
    """Recompute the Rota-Baxter defect of the coextension from the closed-form expansion.

    Uses no memo tables and none of the series machinery beyond raw component
    lookup, so it is independent of :func:`check_coextension_rb`.
    """
    lam = scalar(lam)
    fc = functools.lru_cache(maxsize=None)(lambda i: f[i])
    gc = functools.lru_cache(maxsize=None)(lambda i: g[i])
    Pf = functools.lru_cache(maxsize=None)(lambda i: _naive_coext(P, omega, fc, i))
    Pg = functools.lru_cache(maxsize=None)(lambda i: _naive_coext(P, omega, gc, i))
    memo = functools.lru_cache(maxsize=None)
    op = _naive_coext(P, omega, memo(lambda i: _naive_product(lam, Pf, gc, i)), n)
    op = op + _naive_coext(P, omega, memo(lambda i: _naive_product(lam, fc, Pg, i)), n)
    if lam:
        op = op + lam * _naive_coext(P, omega, memo(lambda i: _naive_product(lam, fc, gc, i)), n)
    return op - _naive_product(lam, Pf, Pg, n)


# ---------------------------------------------------------------------------
# Extension direction
# ---------------------------------------------------------------------------


_PAIR_CACHE: Dict[Tuple[int, int], List[Tuple[Word, Word]]] = {}


def word_pairs(dim: int, L: int) -> List[Tuple[Word, Word]]:
    """Unordered basis-word pairs with total grade ≤ L.

    Ordered by total grade, then by the shorter word's length descending
    (balanced pairs first), then lexicographically.
    """
    key = (dim, L)
    if key not in _PAIR_CACHE:
        words = [w for n in range(1, L) for w in itertools.product(range(dim), repeat=n)]
        pairs = [(u, v) for u in words for v in words if u <= v and len(u) + len(v) <= L]
        pairs.sort(key=lambda p: (len(p[0]) + len(p[1]), -min(len(p[0]), len(p[1])), p))
        _PAIR_CACHE[key] = pairs
    return _PAIR_CACHE[key]


def _leibniz_defect(ctx: ShuffleAlgebra, ext: Extension, u: Word, v: Word) -> Dict[Word, Scalar]:
    lam = ctx.lam
    du, dv = ext.on_word(u), ext.on_word(v)
    lhs = ext._apply(ctx.word_product(u, v))
    rhs = ctx.multiply_terms(du, {v: 1})
    for w, c in ctx.multiply_terms({u: 1}, dv).items():
        rhs[w] = rhs.get(w, 0) + c
    if lam:
        for w, c in ctx.multiply_terms(du, dv).items():
            rhs[w] = rhs.get(w, 0) + lam * c
    out = dict(lhs)
    for w, c in rhs.items():
        out[w] = out.get(w, 0) - c
    return {w: c for w, c in out.items() if c}


def check_extension_diff(d: LinearOperator, omega: OmegaConstraint, lam, L: int = 4,
                         ctx: Optional[ShuffleAlgebra] = None, fixture: str = "") -> CheckReport:
    """Weight-λ Leibniz rule for the extension on all word pairs of total grade ≤ L.

    Pairs with total grade ≤ L have products of grade < L, so both sides are
    computed without truncation loss.  A failure whose pair reaches total
    grade L is recomputed in a context with cap L + 2 before it is reported.
    """
    lam = scalar(lam)
    _require_diff(d, lam)
    if ctx is None or ctx.cap != L or ctx.lam != lam or ctx.algebra is not d.domain:
        ctx = ShuffleAlgebra(d.domain, lam, L)
    config = {"omega": omega, "lambda": lam, "fixture": fixture or d.domain.name, "L": L}
    ext = Extension(d, omega, ctx)
    checked = 0
    for u, v in word_pairs(d.domain.dim, L):
        checked += 1
        defect = _leibniz_defect(ctx, ext, u, v)
        if defect:
            if len(u) + len(v) == L:
                wide = ShuffleAlgebra(d.domain, lam, L + 2)
                confirm = _leibniz_defect(wide, Extension(d, omega, wide), u, v)
                if not confirm:
                    continue
                defect = confirm
                ctx = wide
            witness = {"u": u, "v": v, "defect": TensorElem(ctx, defect)}
            return CheckReport(False, witness, checked, config)
    return CheckReport(True, None, checked, config)


def extension_omega_defect(d: LinearOperator, omega: OmegaConstraint, ctx: ShuffleAlgebra, w: Word) -> Dict[Word, Scalar]:
    """``d̃(P w) − φ(d̃)(w) − P ψ(d̃)(w)`` for a word of grade < cap."""
    ext = Extension(d, omega, ctx)
    lhs = ext._apply({(k,) + w: c for k, c in ctx._unit_terms})
    top = max(len(omega.phi), len(omega.psi))
    powers = [{w: 1}]
    for _ in range(top):
        powers.append(ext._apply(powers[-1]))
    out = dict(lhs)
    for i, a in enumerate(omega.phi):
        for v, c in powers[i].items():
            out[v] = out.get(v, 0) - a * c
    for j, b in enumerate(omega.psi):
        for v, c in powers[j].items():
            for k, ck in ctx._unit_terms:
                key = (k,) + v
                if len(key) <= ctx.cap:
                    out[key] = out.get(key, 0) - b * c * ck
    return {v: c for v, c in out.items() if c}


# ---------------------------------------------------------------------------
# Lemmas and (co)monad laws
# ---------------------------------------------------------------------------


def _require_triple(d: LinearOperator, P: LinearOperator, omega: OmegaConstraint, lam: Scalar) -> None:
    _require_rb(P, lam)
    _require_diff(d, lam)
    chk = omega_holds(d, P, omega)
    if not chk:
        raise PreconditionViolation(f"d and P do not satisfy {omega}; fails on {chk.witness}")


def check_lemma_eta(d: LinearOperator, P: LinearOperator, omega: OmegaConstraint, lam,
                    sample: Optional[Sequence[AlgElem]] = None, N: int = 6) -> CheckReport:
    """The coextension of P applied to n ↦ dⁿx equals n ↦ dⁿ(Px)."""
    lam = scalar(lam)
    _require_triple(d, P, omega, lam)
    alg = d.domain
    if sample is None:
        sample = [alg.basis(i) for i in range(alg.dim)]
    coext = Coextension(P, omega)
    config = {"omega": omega, "lambda": lam, "fixture": alg.name, "N": N}
    checked = 0
    for x in sample:
        left = coext(h_eta(d, x, lam))
        right = h_eta(d, P(x), lam)
        for n in range(N + 1):
            checked += 1
            if left[n] != right[n]:
                return CheckReport(False, {"x": x, "n": n, "defect": left[n] - right[n]}, checked, config)
    return CheckReport(True, None, checked, config)


def check_lemma_eps(d: LinearOperator, P: LinearOperator, omega: OmegaConstraint, lam, L: int = 3) -> CheckReport:
    """Evaluating the extension of d by the fold with P agrees with d after the fold."""
    lam = scalar(lam)
    _require_triple(d, P, omega, lam)
    ctx = ShuffleAlgebra(d.domain, lam, L)
    ext = Extension(d, omega, ctx)
    config = {"omega": omega, "lambda": lam, "fixture": d.domain.name, "L": L}
    checked = 0
    for w in ctx.words():
        checked += 1
        u = ctx.word(*w)
        left = rb_epsilon(P, ext(u))
        right = d(rb_epsilon(P, u))
        if left != right:
            return CheckReport(False, {"word": w, "defect": left - right}, checked, config)
    return CheckReport(True, None, checked, config)


def check_comonad_laws(N: int = 4, algebra: Optional[FinAlgebra] = None, lam=0, seed: int = 0) -> CheckReport:
    """Counit and coassociativity of δ(f)_{n,m} = f_{n+m} on sample series, indices ≤ N."""
    if algebra is None:
        algebra, _, _ = make_divided_power(3, lam)
    rng = random.Random(seed)
    samples = [unit_series(algebra, lam)] + [delta_series(algebra, lam, k) for k in range(N + 1)]
    samples += [random_series(algebra, lam, rng, length=2 * N + 1) for _ in range(4)]
    config = {"N": N, "fixture": algebra.name, "lambda": scalar(lam)}
    checked = 0
    for idx, f in enumerate(samples):
        rows = lambda n, f=f: h_shift(f, n)
        for n in range(N + 1):
            checked += 2
            # counit on either side: entry (n, 0) and entry (0, n) both give f_n
            if rows(n)[0] != f[n]:
                return CheckReport(False, {"series": idx, "law": "counit-left", "n": n}, checked, config)
            if rows(0)[n] != f[n]:
                return CheckReport(False, {"series": idx, "law": "counit-right", "n": n}, checked, config)
        for n, m, p in itertools.product(range(N + 1), repeat=3):
            checked += 1
            # comultiply the rows, or comultiply the series of rows
            left = h_shift(rows(n), m)[p]
            right = rows(n + m)[p]
            if left != right or left != f[n + m + p]:
                return CheckReport(False, {"series": idx, "law": "coassociativity", "n": (n, m, p)}, checked, config)
    return CheckReport(True, None, checked, config)


def check_monad_laws(L_outer: int = 2, L_inner: int = 2, algebra: Optional[FinAlgebra] = None, lam=0) -> CheckReport:
    """Unit and associativity laws of the flattening map, exhaustively on basis words."""
    if algebra is None:
        algebra, _, _ = make_divided_power(2, lam)
    lam = scalar(lam)
    config = {"L_outer": L_outer, "L_inner": L_inner, "fixture": algebra.name, "lambda": lam}
    base = ShuffleAlgebra(algebra, lam, L_inner)
    nest = NestedShuffle(base, L_outer)
    checked = 0
    # unit laws
    for w in base.words():
        u = base.word(*w)
        checked += 1
        if nest.mu(nest.unit(u)) != u:
            return CheckReport(False, {"law": "unit-outer", "word": w}, checked, config)
        if len(w) <= L_outer:
            checked += 1
            if nest.mu(nest.lift_letters(u)) != u:
                return CheckReport(False, {"law": "unit-inner", "word": w}, checked, config)
    # associativity: flatten the outer two levels first, or the inner two
    mid = nest.outer
    top = NestedShuffle(mid, L_outer)
    mid_fin, mid_index = mid.as_fin_algebra()
    mid_words = list(mid_index)
    for W in top.outer.words():
        checked += 1
        U = top.outer.word(*W)
        first = nest.mu(top.mu(U))
        letters = [nest.mu(mid.word(*mid_words[i])) for i in W]
        inner_letters = [base.to_fin(x) for x in letters]
        flattened = mid.pure_tensor(inner_letters)
        second = nest.mu(flattened)
        if first != second:
            return CheckReport(False, {"law": "associativity", "word": W, "defect": first - second}, checked, config)
    return CheckReport(True, None, checked, config)


# ---------------------------------------------------------------------------
# Triple search
# ---------------------------------------------------------------------------


def _solve_affine(rows: List[List[Scalar]], rhs: List[Scalar]):
    """Exact solution set of ``rows · x = rhs``: (particular, nullspace basis) or None."""
    from fractions import Fraction

    ncols = len(rows[0]) if rows else 0
    M = [[Fraction(x) for x in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = 1 / M[rank][col]
        M[rank] = [x * inv for x in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col] != 0:
                fac = M[r][col]
                M[r] = [x - fac * y for x, y in zip(M[r], M[rank])]
        pivots.append(col)
        rank += 1
    if any(M[r][-1] != 0 for r in range(rank, len(M))):
        return None
    particular = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        particular[col] = M[r][-1]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [Fraction(0)] * ncols
        vec[fcol] = Fraction(1)
        for r, col in enumerate(pivots):
            vec[col] = -M[r][fcol]
        basis.append(vec)
    return particular, basis


def search_triples(algebra: FinAlgebra, omega: OmegaConstraint, lam=0, entries: Sequence[int] = (-1, 0, 1),
                   max_results: int = 5) -> Tuple[List[Tuple[LinearOperator, LinearOperator]], int]:
    """Bounded search for (d, P) with d differential, P Rota-Baxter and d∘P = φ(d) + P∘ψ(d).

    Candidates for d have matrix entries from ``entries`` (and kill the unit).
    For each, the constraint is linear in P and is solved exactly; small
    integer points of the solution space are then tested for the Rota-Baxter
    identity.  Returns the triples found and the number of d candidates that
    passed the differential check.
    """
    from .algebra import op_polynomial

    lam = scalar(lam)
    D = algebra.dim
    found = []
    n_diff = 0
    unit = algebra.one
    cols_choices = list(itertools.product(entries, repeat=D))
    for cols in itertools.product(cols_choices, repeat=D):
        d = LinearOperator(algebra, cols)
        if d(unit):
            continue
        if not is_diff_operator(d, lam):
            continue
        n_diff += 1
        phi_d = op_polynomial(d, omega.phi)
        psi_d = op_polynomial(d, omega.psi)
        # unknown P as D*D entries p[row][col]; equation (d P − P ψ(d))[i][k] = φ(d)[i][k]
        rows, rhs = [], []
        for i in range(D):
            for k in range(D):
                row = [0] * (D * D)
                for j in range(D):
                    row[j * D + k] += d.columns[j][i]
                    row[i * D + j] -= psi_d.columns[k][j]
                rows.append(row)
                rhs.append(phi_d.columns[k][i])
        sol = _solve_affine(rows, rhs)
        if sol is None:
            continue
        particular, basis = sol
        for coeffs in itertools.product(entries, repeat=len(basis)):
            vec = list(particular)
            for c, b in zip(coeffs, basis):
                if c:
                    vec = [x + c * y for x, y in zip(vec, b)]
            P = LinearOperator(algebra, [[vec[i * D + k] for i in range(D)] for k in range(D)])
            if is_rb_operator(P, lam) and omega_holds(d, P, omega):
                found.append((d, P))
                if len(found) >= max_results:
                    return found, n_diff
    return found, n_diff
