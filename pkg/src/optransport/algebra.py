"""Exact scalars, finite-dimensional commutative algebras and linear operators.

Everything here is exact: scalars are Python ``int`` or ``fractions.Fraction``
and never floats.  An algebra is given by structure constants on a basis and
is validated (associative, commutative, unital) when constructed.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, NamedTuple, Optional, Sequence, Tuple, Union

Scalar = Union[int, Fraction]


class AlgebraMismatch(ValueError):
    """Two operands live in different algebras."""


class NotAHomomorphism(ValueError):
    pass


def scalar(x) -> Scalar:
    """Coerce ``x`` to a canonical exact scalar.

    Integers stay integers; fractions with unit denominator collapse to ints.
    Strings such as ``"3/4"`` are accepted.  Floats are rejected.
    """
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        raise TypeError(f"floats are not exact scalars: {x!r}")
    if isinstance(x, (Fraction, Rational, str)):
        q = Fraction(x)
        return q.numerator if q.denominator == 1 else q
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def scalar_str(x: Scalar) -> str:
    """Fraction string ``p/q`` (or ``p`` for integers)."""
    x = scalar(x)
    return str(x)


def binom(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


class FinAlgebra:
    """Finite-dimensional commutative unital algebra over the rationals.

    ``table[i][j]`` is the coordinate vector of ``e_i * e_j``.
    """

    def __init__(
        self,
        labels: Sequence[str],
        table: Sequence[Sequence[Sequence]],
        unit: Sequence,
        name: str = "",
        validate: bool = True,
    ):
        dim = len(labels)
        if dim < 1:
            raise ValueError("algebra must have positive dimension")
        self.dim = dim
        self.labels = tuple(labels)
        self.name = name or f"Alg[{dim}]"
        if len(table) != dim or any(len(row) != dim for row in table):
            raise ValueError("structure constant table has wrong shape")
        # sparse form: _mul[i][j] = ((k, c), ...)
        self._mul = tuple(
            tuple(
                tuple((k, scalar(c)) for k, c in enumerate(table[i][j]) if c != 0)
                for j in range(dim)
            )
            for i in range(dim)
        )
        for i in range(dim):
            for j in range(dim):
                if len(table[i][j]) != dim:
                    raise ValueError("structure constant table has wrong shape")
        unit = tuple(scalar(c) for c in unit)
        if len(unit) != dim:
            raise ValueError("unit vector has wrong length")
        self._unit = unit
        self._zero = (0,) * dim
        if validate:
            self.validate()

    def __repr__(self) -> str:
        return f"FinAlgebra({self.name!r}, dim={self.dim})"

    # elements -----------------------------------------------------------
    def element(self, coords: Iterable) -> "AlgElem":
        return AlgElem(self, tuple(scalar(c) for c in coords))

    def basis(self, i: int) -> "AlgElem":
        v = [0] * self.dim
        v[i] = 1
        return AlgElem(self, tuple(v))

    @property
    def one(self) -> "AlgElem":
        return AlgElem(self, self._unit)

    @property
    def zero(self) -> "AlgElem":
        return AlgElem(self, self._zero)

    def __getitem__(self, label: str) -> "AlgElem":
        return self.basis(self.labels.index(label))

    # raw coordinate arithmetic (used on hot paths) -------------------------
    def _mul_coords(self, a: tuple, b: tuple) -> tuple:
        out = [0] * self.dim
        mul = self._mul
        bs = [(j, y) for j, y in enumerate(b) if y]
        for i, x in enumerate(a):
            if not x:
                continue
            row = mul[i]
            for j, y in bs:
                xy = x * y
                for k, c in row[j]:
                    out[k] += xy * c
        return tuple(out)

    def _sparse_times_basis(self, vec: dict, k: int) -> dict:
        out: dict = {}
        for t, c in vec.items():
            for u, cu in self._mul[t][k]:
                out[u] = out.get(u, 0) + c * cu
        return {u: c for u, c in out.items() if c}

    def validate(self) -> None:
        """Check commutativity, unit law and associativity on basis elements."""
        d = self.dim
        unit = {i: c for i, c in enumerate(self._unit) if c}
        for i in range(d):
            if self._sparse_times_basis(unit, i) != {i: 1}:
                raise ValueError(f"unit law fails on basis element {self.labels[i]}")
            for j in range(i + 1, d):
                if self._mul[i][j] != self._mul[j][i]:
                    raise ValueError(
                        f"not commutative on ({self.labels[i]}, {self.labels[j]})"
                    )
        # with commutativity, (e_i e_j) e_k = e_i (e_j e_k) reads (ij)k = (jk)i
        prods = [[dict(self._mul[i][j]) for j in range(d)] for i in range(d)]
        for i in range(d):
            for j in range(d):
                ij = prods[i][j]
                for k in range(d):
                    if self._sparse_times_basis(ij, k) != self._sparse_times_basis(prods[j][k], i):
                        raise ValueError(
                            "not associative on "
                            f"({self.labels[i]}, {self.labels[j]}, {self.labels[k]})"
                        )


class AlgElem:
    """Immutable element of a :class:`FinAlgebra` given by coordinates."""

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: FinAlgebra, coords: tuple):
        if len(coords) != algebra.dim:
            raise ValueError("coordinate vector length does not match algebra")
        self.algebra = algebra
        self.coords = coords

    def _check(self, other: "AlgElem") -> None:
        if other.algebra is not self.algebra:
            raise AlgebraMismatch(f"{self.algebra!r} vs {other.algebra!r}")

    def __add__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        self._check(other)
        return AlgElem(self.algebra, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __sub__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        self._check(other)
        return AlgElem(self.algebra, tuple(x - y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgElem(self.algebra, tuple(-x for x in self.coords))

    def __mul__(self, other):
        if isinstance(other, AlgElem):
            self._check(other)
            return AlgElem(self.algebra, self.algebra._mul_coords(self.coords, other.coords))
        if isinstance(other, (int, Fraction)):
            if other == 1:
                return self
            return AlgElem(self.algebra, tuple(other * x for x in self.coords))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, AlgElem):
            return NotImplemented
        return self.algebra is other.algebra and self.coords == other.coords

    def __hash__(self):
        return hash((id(self.algebra), self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self) -> str:
        return format_coords(self.coords, self.algebra.labels)


def format_coords(coords: Sequence[Scalar], labels: Sequence[str]) -> str:
    parts = []
    for c, lab in zip(coords, labels):
        if not c:
            continue
        if c == 1:
            term = lab
        elif c == -1:
            term = "-" + lab
        else:
            cs = str(c)
            term = f"({cs})*{lab}" if "/" in cs else f"{cs}*{lab}"
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


def alg_mul(a: AlgElem, b: AlgElem) -> AlgElem:
    return a * b


class LinearOperator:
    """Linear map between finite-dimensional algebras; column k is the image of e_k.

    With ``codomain`` omitted this is an operator on ``domain``.
    """

    __slots__ = ("domain", "codomain", "columns", "_sparse", "_verdicts", "_lock")

    def __init__(self, domain: FinAlgebra, columns: Sequence[Sequence], codomain: Optional[FinAlgebra] = None):
        codomain = domain if codomain is None else codomain
        if len(columns) != domain.dim:
            raise ValueError("operator needs one column per basis element")
        cols = []
        for col in columns:
            if isinstance(col, AlgElem):
                if col.algebra is not codomain:
                    raise AlgebraMismatch("column lives in the wrong algebra")
                col = col.coords
            if len(col) != codomain.dim:
                raise ValueError("column length does not match codomain")
            cols.append(tuple(scalar(c) for c in col))
        self.domain = domain
        self.codomain = codomain
        self.columns = tuple(cols)
        self._sparse = tuple(tuple((k, c) for k, c in enumerate(col) if c) for col in self.columns)
        self._verdicts: dict = {}
        self._lock = threading.Lock()

    # constructors ----------------------------------------------------------
    @classmethod
    def identity(cls, algebra: FinAlgebra) -> "LinearOperator":
        return cls(algebra, [algebra.basis(i).coords for i in range(algebra.dim)])

    @classmethod
    def zero(cls, algebra: FinAlgebra, codomain: Optional[FinAlgebra] = None) -> "LinearOperator":
        cod = algebra if codomain is None else codomain
        return cls(algebra, [cod._zero] * algebra.dim, codomain)

    @classmethod
    def from_function(cls, algebra: FinAlgebra, fn, codomain: Optional[FinAlgebra] = None) -> "LinearOperator":
        """Build from the images of basis elements under ``fn``."""
        return cls(algebra, [fn(algebra.basis(i)) for i in range(algebra.dim)], codomain)

    @property
    def is_endomorphism(self) -> bool:
        return self.domain is self.codomain

    # action ----------------------------------------------------------------
    def apply_coords(self, coords: tuple) -> tuple:
        out = [0] * self.codomain.dim
        sp = self._sparse
        for i, x in enumerate(coords):
            if x:
                for k, c in sp[i]:
                    out[k] += x * c
        return tuple(out)

    def __call__(self, x: AlgElem) -> AlgElem:
        if x.algebra is not self.domain:
            raise AlgebraMismatch("operator applied to element of another algebra")
        return AlgElem(self.codomain, self.apply_coords(x.coords))

    # algebra of operators ----------------------------------------------------
    def _same_shape(self, other: "LinearOperator") -> None:
        if other.domain is not self.domain or other.codomain is not self.codomain:
            raise AlgebraMismatch("operators act between different algebras")

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        self._same_shape(other)
        return LinearOperator(
            self.domain,
            [tuple(x + y for x, y in zip(a, b)) for a, b in zip(self.columns, other.columns)],
            self.codomain,
        )

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        self._same_shape(other)
        return LinearOperator(
            self.domain,
            [tuple(x - y for x, y in zip(a, b)) for a, b in zip(self.columns, other.columns)],
            self.codomain,
        )

    def __neg__(self):
        return LinearOperator(self.domain, [tuple(-x for x in c) for c in self.columns], self.codomain)

    def scale(self, c) -> "LinearOperator":
        c = scalar(c)
        return LinearOperator(self.domain, [tuple(c * x for x in col) for col in self.columns], self.codomain)

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        """Composition ``self ∘ other``."""
        if other.codomain is not self.domain:
            raise AlgebraMismatch("cannot compose: codomain/domain differ")
        return LinearOperator(other.domain, [self.apply_coords(c) for c in other.columns], self.codomain)

    def __pow__(self, k: int) -> "LinearOperator":
        if not self.is_endomorphism:
            raise AlgebraMismatch("only endomorphisms have powers")
        if k < 0:
            raise ValueError("negative operator power")
        out = LinearOperator.identity(self.domain)
        base = self
        while k:
            if k & 1:
                out = base @ out
            base = base @ base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return (
            self.domain is other.domain
            and self.codomain is other.codomain
            and self.columns == other.columns
        )

    def __hash__(self):
        return hash((id(self.domain), id(self.codomain), self.columns))

    def is_zero(self) -> bool:
        return not any(any(c) for c in self.columns)

    def rank(self) -> int:
        """Exact rank via fraction-free elimination."""
        rows = [list(map(Fraction, r)) for r in zip(*self.columns)]
        rank = 0
        ncols = self.domain.dim
        for col in range(ncols):
            pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
            if pivot is None:
                continue
            rows[rank], rows[pivot] = rows[pivot], rows[rank]
            for r in range(len(rows)):
                if r != rank and rows[r][col] != 0:
                    f = rows[r][col] / rows[rank][col]
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
            rank += 1
        return rank

    def __repr__(self) -> str:
        cols = ", ".join(
            f"{self.domain.labels[i]}->{format_coords(c, self.codomain.labels)}"
            for i, c in enumerate(self.columns)
        )
        return f"LinearOperator({cols})"

    def _cached_verdict(self, key, compute):
        with self._lock:
            if key in self._verdicts:
                return self._verdicts[key]
        value = compute()
        with self._lock:
            self._verdicts[key] = value
        return value


def op_polynomial(op: LinearOperator, coeffs: Sequence) -> LinearOperator:
    """``sum(coeffs[i] * op**i)``; the empty list gives the zero operator."""
    alg = op.domain
    result = LinearOperator.zero(alg)
    power = LinearOperator.identity(alg)
    for i, c in enumerate(coeffs):
        c = scalar(c)
        if i:
            power = op @ power
        if c:
            result = result + power.scale(c)
    return result


# ---------------------------------------------------------------------------
# Constraints  xy - (phi(x) + y psi(x))
# ---------------------------------------------------------------------------


def _trim(coeffs: Iterable) -> Tuple[Scalar, ...]:
    out = [scalar(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class OmegaConstraint:
    """``ω = xy − (φ(x) + y ψ(x))`` stored as trimmed coefficient tuples.

    ``phi == ()`` is the zero polynomial; its degree is ``None``.
    """

    phi: Tuple[Scalar, ...] = ()
    psi: Tuple[Scalar, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "phi", _trim(self.phi))
        object.__setattr__(self, "psi", _trim(self.psi))

    @property
    def r(self) -> Optional[int]:
        return len(self.phi) - 1 if self.phi else None

    @property
    def s(self) -> Optional[int]:
        return len(self.psi) - 1 if self.psi else None

    def a(self, i: int) -> Scalar:
        return self.phi[i] if 0 <= i < len(self.phi) else 0

    def b(self, j: int) -> Scalar:
        return self.psi[j] if 0 <= j < len(self.psi) else 0

    def __str__(self) -> str:
        from .omega_syntax import format_omega

        return format_omega(self)


XY = OmegaConstraint()
FFTC = OmegaConstraint(phi=(1,))
COMMUTATOR = OmegaConstraint(psi=(0, 1))


class IdentityCheck(NamedTuple):
    """Verdict of a pointwise identity check; falsy when the identity fails."""

    ok: bool
    witness: Optional[tuple] = None
    defect: Optional[AlgElem] = None

    def __bool__(self):
        return self.ok


def is_rb_operator(P: LinearOperator, lam) -> IdentityCheck:
    """Rota-Baxter identity of weight ``lam`` on every basis pair."""
    lam = scalar(lam)
    return P._cached_verdict(("rb", lam), lambda: _rb_check(P, lam))


def _rb_check(P: LinearOperator, lam: Scalar) -> IdentityCheck:
    alg = P.domain
    if not P.is_endomorphism:
        raise AlgebraMismatch("Rota-Baxter operators are endomorphisms")
    for i in range(alg.dim):
        x = alg.basis(i)
        px = P(x)
        for j in range(i, alg.dim):
            y = alg.basis(j)
            py = P(y)
            lhs = px * py
            rhs = P(px * y) + P(x * py) + lam * P(x * y)
            if lhs != rhs:
                return IdentityCheck(False, (alg.labels[i], alg.labels[j]), lhs - rhs)
    return IdentityCheck(True)


def is_diff_operator(d: LinearOperator, lam) -> IdentityCheck:
    """``d(1) = 0`` and the weight-``lam`` Leibniz rule on every basis pair."""
    lam = scalar(lam)
    return d._cached_verdict(("diff", lam), lambda: _diff_check(d, lam))


def _diff_check(d: LinearOperator, lam: Scalar) -> IdentityCheck:
    alg = d.domain
    if not d.is_endomorphism:
        raise AlgebraMismatch("differential operators are endomorphisms")
    d1 = d(alg.one)
    if d1:
        return IdentityCheck(False, ("1",), d1)
    for i in range(alg.dim):
        x = alg.basis(i)
        dx = d(x)
        for j in range(i, alg.dim):
            y = alg.basis(j)
            dy = d(y)
            lhs = d(x * y)
            rhs = dx * y + x * dy + lam * (dx * dy)
            if lhs != rhs:
                return IdentityCheck(False, (alg.labels[i], alg.labels[j]), lhs - rhs)
    return IdentityCheck(True)


def omega_holds(d: LinearOperator, Q: LinearOperator, omega: OmegaConstraint) -> IdentityCheck:
    """Exact check of ``d∘Q = φ(d) + Q∘ψ(d)``; the witness is the first basis element where it fails."""
    if d.domain is not Q.domain or not d.is_endomorphism or not Q.is_endomorphism:
        raise AlgebraMismatch("d and Q must be operators on the same algebra")
    lhs = d @ Q
    rhs = op_polynomial(d, omega.phi) + Q @ op_polynomial(d, omega.psi)
    alg = d.domain
    for i, (a, b) in enumerate(zip(lhs.columns, rhs.columns)):
        if a != b:
            diff = AlgElem(alg, tuple(x - y for x, y in zip(a, b)))
            return IdentityCheck(False, (alg.labels[i],), diff)
    return IdentityCheck(True)


def is_homomorphism(phi: LinearOperator) -> IdentityCheck:
    """Unital algebra homomorphism check on basis pairs."""
    src, dst = phi.domain, phi.codomain
    if phi(src.one) != dst.one:
        return IdentityCheck(False, ("1",))
    imgs = [phi(src.basis(i)) for i in range(src.dim)]
    for i in range(src.dim):
        for j in range(i, src.dim):
            if phi(src.basis(i) * src.basis(j)) != imgs[i] * imgs[j]:
                return IdentityCheck(False, (src.labels[i], src.labels[j]))
    return IdentityCheck(True)


def require_homomorphism(phi: LinearOperator) -> None:
    chk = is_homomorphism(phi)
    if not chk:
        raise NotAHomomorphism(f"not a unital algebra homomorphism; fails at {chk.witness}")


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


def divided_power_product(m: int, n: int, lam) -> dict:
    """Coefficients of ``z_m z_n`` in the free Rota-Baxter algebra on k, as ``{index: coeff}``."""
    lam = scalar(lam)
    out = {}
    for j in range(m + 1):
        c = binom(m + n - j, n) * binom(n, j) * lam**j
        if c:
            out[m + n - j] = out.get(m + n - j, 0) + c
    return out


@lru_cache(maxsize=None)
def _divided_power_cached(m: int, lam: Scalar):
    labels = [f"z{i}" for i in range(m)]
    table = []
    for i in range(m):
        row = []
        for j in range(m):
            v = [0] * m
            for k, c in divided_power_product(i, j, lam).items():
                if k < m:
                    v[k] += c
            row.append(v)
        table.append(row)
    unit = [1] + [0] * (m - 1)
    alg = FinAlgebra(labels, table, unit, name=f"M(k)/I_{m}[lam={lam}]")
    P = LinearOperator(alg, [alg.basis(i + 1) if i + 1 < m else alg.zero for i in range(m)])
    d = LinearOperator(alg, [alg.basis(i - 1) if i > 0 else alg.zero for i in range(m)])
    return alg, P, d


def make_divided_power(m: int, lam=0) -> Tuple[FinAlgebra, LinearOperator, LinearOperator]:
    """Quotient ``M(k)/I_m`` of the free Rota-Baxter algebra on k.

    Returns the algebra with basis ``z0..z{m-1}``, the induced Rota-Baxter
    operator ``z_i -> z_{i+1}`` (with ``z_m = 0``) and the lowering map
    ``z_i -> z_{i-1}``, ``z_0 -> 0``.  Results are cached, so repeated calls
    with the same arguments return the same objects.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError("quotient depth m must be a positive integer")
    return _divided_power_cached(m, scalar(lam))


@lru_cache(maxsize=None)
def make_truncated_polynomial(m: int) -> FinAlgebra:
    """``k[t]/(t^m)`` with basis ``1, t, ..., t^{m-1}``."""
    if m < 1:
        raise ValueError("m must be positive")
    labels = ["1"] + ["t" if i == 1 else f"t^{i}" for i in range(1, m)]
    table = []
    for i in range(m):
        row = []
        for j in range(m):
            v = [0] * m
            if i + j < m:
                v[i + j] = 1
            row.append(v)
        table.append(row)
    return FinAlgebra(labels, table, [1] + [0] * (m - 1), name=f"k[t]/(t^{m})")


def polynomial_derivation(alg: FinAlgebra, t_image: Sequence) -> LinearOperator:
    """Weight-0 derivation of ``k[t]/(t^m)`` determined by the image of ``t``.

    ``d(t^k) = k t^{k-1} d(t)``.  Whether the result is well defined on the
    quotient is left to :func:`is_diff_operator`.
    """
    t_img = alg.element(t_image)
    t = alg.basis(1) if alg.dim > 1 else alg.zero
    cols = [alg.zero]
    power = alg.one
    for k in range(1, alg.dim):
        cols.append(k * (power * t_img))
        power = power * t
    return LinearOperator(alg, cols)
