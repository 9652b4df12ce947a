"""λ-Hurwitz series over a finite-dimensional algebra and the coextension of an operator.

A series is a map n -> A.  Three concrete bodies share one access path:
finitely supported series, finite prefixes (which refuse indices past their
length) and lazily derived series with a memo table.  Derived series carry
a horizon so that asking a finite prefix for data it does not have raises
:class:`HorizonExceeded` instead of quietly padding with zeros.
"""

from __future__ import annotations

import itertools
import math
import threading
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Union

from .algebra import (
    AlgElem,
    AlgebraMismatch,
    FinAlgebra,
    LinearOperator,
    OmegaConstraint,
    Scalar,
    binom,
    require_homomorphism,
    scalar,
)

INF = math.inf
Horizon = Union[int, float]


class HorizonExceeded(IndexError):
    def __init__(self, n: int, horizon: Horizon):
        super().__init__(f"component {n} requested but the series is only known below {horizon}")
        self.n = n
        self.horizon = horizon


class HurwitzSeries:
    """Base class.  Subclasses implement ``_raw(n)`` returning a coordinate tuple."""

    horizon: Horizon = INF

    def __init__(self, algebra: FinAlgebra, lam):
        self.algebra = algebra
        self.lam = scalar(lam)

    def _raw(self, n: int) -> tuple:
        raise NotImplementedError

    def coords(self, n: int) -> tuple:
        if n < 0:
            raise IndexError("negative series index")
        if n >= self.horizon:
            raise HorizonExceeded(n, self.horizon)
        return self._raw(n)

    def __getitem__(self, n: int) -> AlgElem:
        return AlgElem(self.algebra, self.coords(n))

    def prefix(self, length: int) -> list:
        return [self[n] for n in range(length)]

    def _same_ring(self, other: "HurwitzSeries") -> None:
        if other.algebra is not self.algebra:
            raise AlgebraMismatch("series over different algebras")
        if other.lam != self.lam:
            raise AlgebraMismatch(f"series of different weights {self.lam} and {other.lam}")

    def __mul__(self, other: "HurwitzSeries") -> "HurwitzSeries":
        return h_mul(self, other)

    def __add__(self, other: "HurwitzSeries") -> "HurwitzSeries":
        self._same_ring(other)
        return LazySeries(
            self.algebra,
            self.lam,
            lambda n: tuple(x + y for x, y in zip(self._raw(n), other._raw(n))),
            min(self.horizon, other.horizon),
        )

    def __sub__(self, other: "HurwitzSeries") -> "HurwitzSeries":
        self._same_ring(other)
        return LazySeries(
            self.algebra,
            self.lam,
            lambda n: tuple(x - y for x, y in zip(self._raw(n), other._raw(n))),
            min(self.horizon, other.horizon),
        )

    def scale(self, c) -> "HurwitzSeries":
        c = scalar(c)
        return LazySeries(self.algebra, self.lam, lambda n: tuple(c * x for x in self._raw(n)), self.horizon)

    def __repr__(self) -> str:
        shown = min(self.horizon, 4)
        body = ", ".join(repr(self[n]) for n in range(int(shown)))
        tail = ", ..." if self.horizon > shown else ""
        return f"{type(self).__name__}({body}{tail})"


class FiniteSupportSeries(HurwitzSeries):
    """Series with finitely many nonzero components; defined at every index."""

    def __init__(self, algebra: FinAlgebra, lam, entries: Mapping[int, object]):
        super().__init__(algebra, lam)
        clean: Dict[int, tuple] = {}
        for n, v in entries.items():
            if n < 0:
                raise ValueError("series indices are nonnegative")
            if isinstance(v, AlgElem):
                if v.algebra is not algebra:
                    raise AlgebraMismatch("entry lives in another algebra")
                c = v.coords
            else:
                c = tuple(scalar(x) for x in v)
                if len(c) != algebra.dim:
                    raise ValueError("entry has the wrong length")
            if any(c):
                clean[n] = c
        self.entries = clean
        self.support_bound = max(clean) + 1 if clean else 0
        self._zero = algebra._zero

    def _raw(self, n: int) -> tuple:
        return self.entries.get(n, self._zero)

    def describe(self) -> dict:
        return {n: self.entries[n] for n in sorted(self.entries)}


class PrefixSeries(HurwitzSeries):
    """The first N components of a series; indices ≥ N are unknown."""

    def __init__(self, algebra: FinAlgebra, lam, components: Sequence):
        super().__init__(algebra, lam)
        comps = []
        for v in components:
            if isinstance(v, AlgElem):
                if v.algebra is not algebra:
                    raise AlgebraMismatch("entry lives in another algebra")
                comps.append(v.coords)
            else:
                comps.append(tuple(scalar(x) for x in v))
        self.components = tuple(comps)
        self.horizon = len(comps)

    def _raw(self, n: int) -> tuple:
        return self.components[n]


class LazySeries(HurwitzSeries):
    """Series computed on demand by ``rule(n) -> coords`` and memoized."""

    def __init__(self, algebra: FinAlgebra, lam, rule: Callable[[int], tuple], horizon: Horizon = INF):
        super().__init__(algebra, lam)
        self._rule = rule
        self._memo: Dict[int, tuple] = {}
        self._lock = threading.RLock()
        self.horizon = horizon

    def _raw(self, n: int) -> tuple:
        memo = self._memo
        if n in memo:
            return memo[n]
        with self._lock:
            if n not in memo:
                memo[n] = self._rule(n)
            return memo[n]


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def unit_series(algebra: FinAlgebra, lam) -> FiniteSupportSeries:
    return FiniteSupportSeries(algebra, lam, {0: algebra.one})


def zero_series(algebra: FinAlgebra, lam) -> FiniteSupportSeries:
    return FiniteSupportSeries(algebra, lam, {})


def delta_series(algebra: FinAlgebra, lam, k: int, value: Optional[AlgElem] = None) -> FiniteSupportSeries:
    """The series with ``value`` (default the unit) at index k and zero elsewhere."""
    return FiniteSupportSeries(algebra, lam, {k: algebra.one if value is None else value})


def h_component(f: HurwitzSeries, n: int) -> AlgElem:
    return f[n]


# ---------------------------------------------------------------------------
# Ring structure
# ---------------------------------------------------------------------------


def _product_component(alg: FinAlgebra, lam: Scalar, fc, gc, n: int) -> tuple:
    out = [0] * alg.dim
    mul = alg._mul
    for k in range(n + 1):
        lk = lam**k if k else 1
        if not lk:
            break
        ck = binom(n, k) * lk
        for j in range(n - k + 1):
            a = fc(n - j)
            if not any(a):
                continue
            b = gc(k + j)
            if not any(b):
                continue
            c = ck * binom(n - k, j)
            for i1, x in enumerate(a):
                if not x:
                    continue
                row = mul[i1]
                cx = c * x
                for i2, y in enumerate(b):
                    if not y:
                        continue
                    cxy = cx * y
                    for t, sc in row[i2]:
                        out[t] += cxy * sc
    return tuple(out)


def h_mul(f: HurwitzSeries, g: HurwitzSeries) -> HurwitzSeries:
    """Hurwitz product of weight λ."""
    f._same_ring(g)
    alg, lam = f.algebra, f.lam
    if isinstance(f, FiniteSupportSeries) and isinstance(g, FiniteSupportSeries):
        bound = f.support_bound + g.support_bound - 1 if f.support_bound and g.support_bound else 0
        entries = {n: _product_component(alg, lam, f._raw, g._raw, n) for n in range(bound)}
        return FiniteSupportSeries(alg, lam, entries)
    return LazySeries(
        alg,
        lam,
        lambda n: _product_component(alg, lam, f._raw, g._raw, n),
        min(f.horizon, g.horizon),
    )


def h_partial(f: HurwitzSeries) -> HurwitzSeries:
    """The shift ∂f, (∂f)_n = f_{n+1}."""
    if isinstance(f, FiniteSupportSeries):
        return FiniteSupportSeries(f.algebra, f.lam, {n - 1: v for n, v in f.entries.items() if n > 0})
    if isinstance(f, PrefixSeries):
        return PrefixSeries(f.algebra, f.lam, f.components[1:])
    return LazySeries(f.algebra, f.lam, lambda n: f._raw(n + 1), f.horizon - 1)


def h_shift(f: HurwitzSeries, t: int) -> HurwitzSeries:
    """∂ applied t times."""
    if t == 0:
        return f
    if isinstance(f, FiniteSupportSeries):
        return FiniteSupportSeries(f.algebra, f.lam, {n - t: v for n, v in f.entries.items() if n >= t})
    if isinstance(f, PrefixSeries):
        return PrefixSeries(f.algebra, f.lam, f.components[t:])
    return LazySeries(f.algebra, f.lam, lambda n: f._raw(n + t), max(f.horizon - t, 0))


def h_epsilon(f: HurwitzSeries) -> AlgElem:
    return f[0]


def h_eta(d: LinearOperator, x: AlgElem, lam=0) -> HurwitzSeries:
    """The series n -> d^n(x)."""
    if x.algebra is not d.domain or not d.is_endomorphism:
        raise AlgebraMismatch("h_eta needs an operator on the algebra of x")
    powers = [x.coords]
    lock = threading.Lock()

    def rule(n):
        with lock:
            while len(powers) <= n:
                powers.append(d.apply_coords(powers[-1]))
            return powers[n]

    return LazySeries(x.algebra, lam, rule)


def h_delta(f: HurwitzSeries, n: int, m: int) -> AlgElem:
    """Entry (n, m) of the doubly indexed series δ(f); equals f_{n+m}."""
    return f[n + m]


def h_comultiply(f: HurwitzSeries) -> Callable[[int], HurwitzSeries]:
    """δ(f) as a series of series: row n is ∂^n f."""
    return lambda n: h_shift(f, n)


def cofree_lift(d: LinearOperator, phi_hom: LinearOperator, x: AlgElem, lam=0) -> HurwitzSeries:
    """The lift n -> φ(d^n x) of a unital homomorphism φ: R -> A."""
    require_homomorphism(phi_hom)
    if phi_hom.domain is not d.domain:
        raise AlgebraMismatch("homomorphism must start at the algebra of d")
    powers = h_eta(d, x, lam)
    return LazySeries(phi_hom.codomain, lam, lambda n: phi_hom.apply_coords(powers._raw(n)))


# ---------------------------------------------------------------------------
# Coextension
# ---------------------------------------------------------------------------


def coextension_demand(omega: OmegaConstraint, n: int) -> int:
    """Largest input index that component n of the coextension reads, or -1 if none."""
    r, s = omega.r, omega.s
    need = 0
    for k in range(1, n + 1):
        cand = -1
        if r is not None:
            cand = k - 1 + r
        if s is not None and need >= 0:
            cand = max(cand, need + s)
        need = cand
    return need


class Coextension:
    """The coextension of Q along ω to an operator on series.

    Calling the object on a series returns the lazily evaluated image.
    Each image keeps its own table of V(n, t) = component n of the image of
    the t-fold shift, so the cost of component n is polynomial in n.
    """

    def __init__(self, Q: LinearOperator, omega: OmegaConstraint):
        if not Q.is_endomorphism:
            raise AlgebraMismatch("Q must be an operator on one algebra")
        self.Q = Q
        self.omega = omega
        self._phi = tuple((i, a) for i, a in enumerate(omega.phi) if a)
        self._psi = tuple((j, b) for j, b in enumerate(omega.psi) if b)

    def demand(self, n: int) -> int:
        return coextension_demand(self.omega, n)

    def output_horizon(self, f: HurwitzSeries) -> Horizon:
        if f.horizon == INF:
            return INF
        if self.omega.r is None and not self.omega.s:
            # demand never grows past index 0
            return INF if f.horizon > 0 else 0
        n = 0
        while self.demand(n) < f.horizon:
            n += 1
            if self.demand(n) < 0:
                return INF
        return n

    def __call__(self, f: HurwitzSeries) -> LazySeries:
        if f.algebra is not self.Q.domain:
            raise AlgebraMismatch("series and operator live over different algebras")
        table: Dict[tuple, tuple] = {}
        dim = f.algebra.dim
        Q, phi, psi = self.Q, self._phi, self._psi

        def V(n: int, t: int) -> tuple:
            key = (n, t)
            hit = table.get(key)
            if hit is not None:
                return hit
            if n == 0:
                val = Q.apply_coords(f.coords(t))
            else:
                acc = [0] * dim
                for i, a in phi:
                    for k, x in enumerate(f.coords(n - 1 + i + t)):
                        if x:
                            acc[k] += a * x
                for j, b in psi:
                    for k, x in enumerate(V(n - 1, t + j)):
                        if x:
                            acc[k] += b * x
                val = tuple(acc)
            table[key] = val
            return val

        def rule(n: int) -> tuple:
            need = self.demand(n)
            if need >= f.horizon:
                raise HorizonExceeded(need, f.horizon)
            return V(n, 0)

        return LazySeries(f.algebra, f.lam, rule, self.output_horizon(f))


def coextend(Q: LinearOperator, omega: OmegaConstraint, f: HurwitzSeries) -> HurwitzSeries:
    return Coextension(Q, omega)(f)


def coextend_closed_form(Q: LinearOperator, omega: OmegaConstraint, f: HurwitzSeries, n: int) -> AlgElem:
    """Component n of the coextension by direct expansion over index tuples.

    Exponential in n; meant as an independent cross-check of :class:`Coextension`.
    """
    alg = Q.domain
    total = alg.zero
    psi = [(j, b) for j, b in enumerate(omega.psi) if b]
    for i, a in enumerate(omega.phi):
        if not a:
            continue
        for k in range(n):
            for js in itertools.product(psi, repeat=k):
                coeff = a
                for _, b in js:
                    coeff *= b
                total = total + coeff * f[n - 1 - k + i + sum(j for j, _ in js)]
    for js in itertools.product(psi, repeat=n):
        coeff = 1
        for _, b in js:
            coeff *= b
        total = total + coeff * Q(f[sum(j for j, _ in js)])
    return total
