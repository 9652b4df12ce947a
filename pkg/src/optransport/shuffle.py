"""Truncated free commutative Rota-Baxter algebra on a finite-dimensional algebra.

Elements are linear combinations of words over the basis of A.  A word
``(i0, i1, ..., in)`` stands for ``e_i0 ⊗ e_i1 ⊗ ... ⊗ e_in``; its grade is
its length.  Everything of grade above the cap L is discarded, which is a
quotient by a Rota-Baxter ideal: products never lower the grade below the
larger input grade and the free operator raises it by one.
"""

from __future__ import annotations

import itertools
import threading
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from .algebra import (
    AlgElem,
    AlgebraMismatch,
    FinAlgebra,
    LinearOperator,
    OmegaConstraint,
    Scalar,
    require_homomorphism,
    scalar,
)

Word = Tuple[int, ...]


class QUnitNonzero(ValueError):
    """The operator to be extended does not kill the unit."""


class CapOverflow(ValueError):
    pass


def _accumulate(target: Dict[Word, Scalar], word: Word, c: Scalar) -> None:
    v = target.get(word, 0) + c
    if v:
        target[word] = v
    else:
        target.pop(word, None)


class ShuffleAlgebra:
    """The context ``(A, λ, L)`` shared by all elements of one truncated free algebra."""

    def __init__(self, algebra: FinAlgebra, lam, cap: int):
        if cap < 1:
            raise ValueError("cap must be at least 1")
        self.algebra = algebra
        self.lam = scalar(lam)
        self.cap = cap
        self._shuffle_memo: Dict[tuple, Dict[Word, Scalar]] = {}
        self._product_memo: Dict[tuple, Dict[Word, Scalar]] = {}
        self._lock = threading.Lock()
        self._unit_terms = tuple((k, c) for k, c in enumerate(algebra._unit) if c)
        self._fin: Optional[Tuple[FinAlgebra, Dict[Word, int]]] = None

    def __eq__(self, other):
        if not isinstance(other, ShuffleAlgebra):
            return NotImplemented
        return self.algebra is other.algebra and self.lam == other.lam and self.cap == other.cap

    def __hash__(self):
        return hash((id(self.algebra), self.lam, self.cap))

    def __repr__(self):
        return f"ShuffleAlgebra({self.algebra.name}, lam={self.lam}, cap={self.cap})"

    # constructors ----------------------------------------------------------
    def element(self, terms: Mapping[Word, object]) -> "TensorElem":
        return TensorElem(self, {tuple(w): scalar(c) for w, c in terms.items()})

    def word(self, *indices: int) -> "TensorElem":
        return TensorElem(self, {tuple(indices): 1})

    def embed(self, x: AlgElem) -> "TensorElem":
        """A as the grade-one part."""
        if x.algebra is not self.algebra:
            raise AlgebraMismatch("element lives in another algebra")
        return TensorElem(self, {(k,): c for k, c in enumerate(x.coords) if c})

    def pure_tensor(self, factors: Sequence[AlgElem]) -> "TensorElem":
        """``x0 ⊗ x1 ⊗ ... ⊗ xn`` expanded multilinearly into basis words."""
        if not factors:
            raise ValueError("tensors have at least one factor")
        for x in factors:
            if x.algebra is not self.algebra:
                raise AlgebraMismatch("factor lives in another algebra")
        terms: Dict[Word, Scalar] = {}
        if len(factors) <= self.cap:
            supports = [[(k, c) for k, c in enumerate(x.coords) if c] for x in factors]
            for combo in itertools.product(*supports):
                coeff = 1
                for _, c in combo:
                    coeff *= c
                _accumulate(terms, tuple(k for k, _ in combo), coeff)
        return TensorElem(self, terms)

    @property
    def one(self) -> "TensorElem":
        return self.embed(self.algebra.one)

    @property
    def zero(self) -> "TensorElem":
        return TensorElem(self, {})

    def words(self, max_len: Optional[int] = None) -> Iterable[Word]:
        """All basis words by increasing length."""
        top = self.cap if max_len is None else min(max_len, self.cap)
        for n in range(1, top + 1):
            yield from itertools.product(range(self.algebra.dim), repeat=n)

    # products on words -----------------------------------------------------
    def _shuffle(self, u: Word, v: Word, maxlen: int) -> Dict[Word, Scalar]:
        """Mixable shuffle of two tails, keeping words of length ≤ maxlen."""
        if len(u) > maxlen or len(v) > maxlen:
            return {}
        if not u:
            return {v: 1}
        if not v:
            return {u: 1}
        if v < u:
            u, v = v, u
        key = (u, v, maxlen)
        hit = self._shuffle_memo.get(key)
        if hit is not None:
            return hit
        out: Dict[Word, Scalar] = {}
        a, ut = u[0], u[1:]
        b, vt = v[0], v[1:]
        for w, c in self._shuffle(ut, v, maxlen - 1).items():
            _accumulate(out, (a,) + w, c)
        for w, c in self._shuffle(u, vt, maxlen - 1).items():
            _accumulate(out, (b,) + w, c)
        lam = self.lam
        if lam:
            merged = self.algebra._mul[a][b]
            if merged:
                for w, c in self._shuffle(ut, vt, maxlen - 1).items():
                    for k, ck in merged:
                        _accumulate(out, (k,) + w, lam * ck * c)
        with self._lock:
            self._shuffle_memo[key] = out
        return out

    def word_product(self, u: Word, v: Word) -> Dict[Word, Scalar]:
        """Product of two basis words; the result is cached and must not be mutated."""
        key = (u, v) if u <= v else (v, u)
        hit = self._product_memo.get(key)
        if hit is not None:
            return hit
        out: Dict[Word, Scalar] = {}
        head = self.algebra._mul[u[0]][v[0]]
        if head:
            for w, c in self._shuffle(u[1:], v[1:], self.cap - 1).items():
                for k, ck in head:
                    _accumulate(out, (k,) + w, ck * c)
        with self._lock:
            self._product_memo[key] = out
        return out

    def multiply_terms(self, a: Mapping[Word, Scalar], b: Mapping[Word, Scalar]) -> Dict[Word, Scalar]:
        out: Dict[Word, Scalar] = {}
        for w1, c1 in a.items():
            for w2, c2 in b.items():
                c = c1 * c2
                for w, cw in self.word_product(w1, w2).items():
                    _accumulate(out, w, c * cw)
        return out

    # the truncated algebra as a finite-dimensional algebra -------------------
    def as_fin_algebra(self) -> Tuple[FinAlgebra, Dict[Word, int]]:
        """Basis = all words of length ≤ cap.  Returns the algebra and the word index."""
        if self._fin is None:
            words = list(self.words())
            index = {w: i for i, w in enumerate(words)}
            dim = len(words)
            table = []
            for u in words:
                row = []
                for v in words:
                    vec = [0] * dim
                    for w, c in self.word_product(u, v).items():
                        vec[index[w]] += c
                    row.append(vec)
                table.append(row)
            unit = [0] * dim
            for k, c in self._unit_terms:
                unit[index[(k,)]] = c
            labels = ["⊗".join(self.algebra.labels[i] for i in w) for w in words]
            fin = FinAlgebra(labels, table, unit, name=f"M({self.algebra.name})/cap{self.cap}")
            self._fin = (fin, index)
        return self._fin

    def free_operator(self) -> LinearOperator:
        """The free operator as a matrix on :meth:`as_fin_algebra`."""
        fin, index = self.as_fin_algebra()
        cols = []
        for w in index:
            vec = [0] * fin.dim
            for v, c in p_free(self.word(*w)).terms.items():
                vec[index[v]] += c
            cols.append(vec)
        return LinearOperator(fin, cols)

    def to_fin(self, u: "TensorElem") -> AlgElem:
        fin, index = self.as_fin_algebra()
        vec = [0] * fin.dim
        for w, c in u.terms.items():
            vec[index[w]] += c
        return AlgElem(fin, tuple(vec))

    def from_fin(self, x: AlgElem) -> "TensorElem":
        fin, index = self.as_fin_algebra()
        if x.algebra is not fin:
            raise AlgebraMismatch("element is not from this truncated algebra")
        words = list(index)
        return TensorElem(self, {words[i]: c for i, c in enumerate(x.coords) if c})


class TensorElem:
    """Immutable linear combination of basis words in a :class:`ShuffleAlgebra`."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: ShuffleAlgebra, terms: Mapping[Word, Scalar]):
        cap = ctx.cap
        dim = ctx.algebra.dim
        clean = {}
        for w, c in terms.items():
            if not w:
                raise ValueError("the empty word is not an element")
            if any(i < 0 or i >= dim for i in w):
                raise ValueError(f"word {w} uses an index outside the basis")
            if c and len(w) <= cap:
                clean[w] = c
        self.ctx = ctx
        self.terms = clean

    def _check(self, other: "TensorElem") -> None:
        if other.ctx is not self.ctx and other.ctx != self.ctx:
            raise AlgebraMismatch(f"{self.ctx!r} vs {other.ctx!r}")

    def grade(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        if not isinstance(other, TensorElem):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            _accumulate(out, w, c)
        return TensorElem(self.ctx, out)

    def __sub__(self, other):
        if not isinstance(other, TensorElem):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            _accumulate(out, w, -c)
        return TensorElem(self.ctx, out)

    def __neg__(self):
        return TensorElem(self.ctx, {w: -c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, TensorElem):
            return msh_mul(self, other)
        if isinstance(other, (int,)) or hasattr(other, "denominator"):
            c = scalar(other)
            return TensorElem(self.ctx, {w: c * x for w, x in self.terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, TensorElem):
            return NotImplemented
        return self.__mul__(other)

    def __eq__(self, other):
        if not isinstance(other, TensorElem):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        labels = self.ctx.algebra.labels
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            word = "⊗".join(labels[i] for i in w)
            parts.append(word if c == 1 else f"({c})*{word}")
        return " + ".join(parts)


def msh_mul(u: TensorElem, v: TensorElem) -> TensorElem:
    """Mixable shuffle product, truncated at the cap."""
    u._check(v)
    return TensorElem(u.ctx, u.ctx.multiply_terms(u.terms, v.terms))


def p_free(u: TensorElem) -> TensorElem:
    """The free Rota-Baxter operator: prepend the unit of A."""
    ctx = u.ctx
    out: Dict[Word, Scalar] = {}
    for w, c in u.terms.items():
        if len(w) >= ctx.cap:
            continue
        for k, ck in ctx._unit_terms:
            _accumulate(out, (k,) + w, ck * c)
    return TensorElem(ctx, out)


def scale_first_slot(x: AlgElem, u: TensorElem) -> TensorElem:
    """``x · u`` with x in A read as a grade-one element; only the first slot changes."""
    ctx = u.ctx
    mul = ctx.algebra._mul
    out: Dict[Word, Scalar] = {}
    xs = [(i, c) for i, c in enumerate(x.coords) if c]
    for w, c in u.terms.items():
        head, tail = w[0], w[1:]
        for i, ci in xs:
            for k, ck in mul[i][head]:
                _accumulate(out, (k,) + tail, c * ci * ck)
    return TensorElem(ctx, out)


def _fold_word(P: LinearOperator, word: Word) -> tuple:
    alg = P.domain
    acc = alg.basis(word[-1]).coords
    for i in reversed(word[:-1]):
        acc = alg._mul_coords(alg.basis(i).coords, P.apply_coords(acc))
    return acc


def rb_epsilon(P: LinearOperator, u: TensorElem) -> AlgElem:
    """Evaluate words by the right-nested fold ``x0 P(x1 P(... P(xn)))``."""
    alg = u.ctx.algebra
    if P.domain is not alg or not P.is_endomorphism:
        raise AlgebraMismatch("operator must act on the coefficient algebra")
    out = [0] * alg.dim
    for w, c in u.terms.items():
        for k, x in enumerate(_fold_word(P, w)):
            if x:
                out[k] += c * x
    return AlgElem(alg, tuple(out))


def free_lift(P: LinearOperator, phi_hom: LinearOperator, u: TensorElem) -> AlgElem:
    """The Rota-Baxter morphism out of the free algebra that restricts to φ on A."""
    require_homomorphism(phi_hom)
    src = u.ctx.algebra
    if phi_hom.domain is not src:
        raise AlgebraMismatch("homomorphism must start at the coefficient algebra")
    R = phi_hom.codomain
    if P.domain is not R or not P.is_endomorphism:
        raise AlgebraMismatch("operator must act on the target algebra")
    out = [0] * R.dim
    for w, c in u.terms.items():
        acc = phi_hom.columns[w[-1]]
        for i in reversed(w[:-1]):
            acc = R._mul_coords(phi_hom.columns[i], P.apply_coords(acc))
        for k, x in enumerate(acc):
            if x:
                out[k] += c * x
    return AlgElem(R, tuple(out))


class Extension:
    """The extension of q along ω to an operator on the truncated free algebra.

    On grade one it is q.  On a longer word ``u0 ⊗ u'`` it is
    ``q(u0) ⊗ u' + (u0 + λ q(u0)) · (φ(d) + P ψ(d))(u')``, computed recursively
    with a per-word memo.
    """

    def __init__(self, q: LinearOperator, omega: OmegaConstraint, ctx: ShuffleAlgebra):
        if q.domain is not ctx.algebra or not q.is_endomorphism:
            raise AlgebraMismatch("q must be an operator on the coefficient algebra")
        if any(q.apply_coords(ctx.algebra._unit)):
            raise QUnitNonzero("the operator must vanish on the unit")
        self.q = q
        self.omega = omega
        self.ctx = ctx
        self._memo: Dict[Word, Dict[Word, Scalar]] = {}
        self._lock = threading.Lock()
        self._top = max(len(omega.phi), len(omega.psi)) - 1

    def __call__(self, u: TensorElem) -> TensorElem:
        if u.ctx != self.ctx:
            raise AlgebraMismatch("element from another truncated algebra")
        return TensorElem(self.ctx, self._apply(u.terms))

    def _apply(self, terms: Mapping[Word, Scalar]) -> Dict[Word, Scalar]:
        out: Dict[Word, Scalar] = {}
        for w, c in terms.items():
            for v, cv in self.on_word(w).items():
                _accumulate(out, v, c * cv)
        return out

    def on_word(self, w: Word) -> Dict[Word, Scalar]:
        hit = self._memo.get(w)
        if hit is not None:
            return hit
        ctx = self.ctx
        alg = ctx.algebra
        out: Dict[Word, Scalar] = {}
        qcol = self.q._sparse[w[0]]
        if len(w) == 1:
            for k, c in qcol:
                out[(k,)] = c
        else:
            tail = w[1:]
            for k, c in qcol:
                _accumulate(out, (k,) + tail, c)
            powers = [{tail: 1}]
            for _ in range(self._top):
                powers.append(self._apply(powers[-1]))
            inner: Dict[Word, Scalar] = {}
            for i, a in enumerate(self.omega.phi):
                if a:
                    for v, c in powers[i].items():
                        _accumulate(inner, v, a * c)
            lifted: Dict[Word, Scalar] = {}
            for j, b in enumerate(self.omega.psi):
                if b:
                    for v, c in powers[j].items():
                        _accumulate(lifted, v, b * c)
            for v, c in lifted.items():
                if len(v) < ctx.cap:
                    for k, ck in ctx._unit_terms:
                        _accumulate(inner, (k,) + v, ck * c)
            factor = [x + ctx.lam * y for x, y in zip(alg.basis(w[0]).coords, self.q.columns[w[0]])]
            factor = [(i, x) for i, x in enumerate(factor) if x]
            mul = alg._mul
            for v, c in inner.items():
                head, rest = v[0], v[1:]
                for i, x in factor:
                    for k, ck in mul[i][head]:
                        _accumulate(out, (k,) + rest, c * x * ck)
        if any(len(v) > len(w) for v in out):
            raise AssertionError(f"extension raised the grade of word {w}")
        with self._lock:
            self._memo[w] = out
        return out


def extend(q: LinearOperator, omega: OmegaConstraint, u: TensorElem) -> TensorElem:
    return Extension(q, omega, u.ctx)(u)


# ---------------------------------------------------------------------------
# The monad multiplication
# ---------------------------------------------------------------------------


class NestedShuffle:
    """Words whose letters are themselves elements of a truncated free algebra.

    ``inner`` is the truncated free algebra on A; ``outer`` is the truncated
    free algebra on ``inner`` viewed as a finite-dimensional algebra.
    """

    def __init__(self, inner: ShuffleAlgebra, outer_cap: int):
        if outer_cap < inner.cap:
            raise CapOverflow("the outer cap must be at least the inner cap")
        self.inner = inner
        fin, _ = inner.as_fin_algebra()
        self.outer = ShuffleAlgebra(fin, inner.lam, outer_cap)
        self._free = inner.free_operator()

    def mu(self, U: TensorElem) -> TensorElem:
        """Flatten one level: evaluate outer words by the fold with the free operator."""
        if U.ctx != self.outer:
            raise AlgebraMismatch("element is not a nested word")
        return self.inner.from_fin(rb_epsilon(self._free, U))

    def unit(self, u: TensorElem) -> TensorElem:
        """The outer unit map: u as a grade-one outer word."""
        return self.outer.embed(self.inner.to_fin(u))

    def lift_letters(self, u: TensorElem) -> TensorElem:
        """Apply the inner unit to every letter of a word over A."""
        inner_fin, index = self.inner.as_fin_algebra()
        out: Dict[Word, Scalar] = {}
        for w, c in u.terms.items():
            _accumulate(out, tuple(index[(i,)] for i in w), c)
        return TensorElem(self.outer, out)


def mu(nest: NestedShuffle, U: TensorElem) -> TensorElem:
    return nest.mu(U)
