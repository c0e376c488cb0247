"""Exact algebra over measure variables.

Values live in Q or a single quadratic extension Q(sqrt(k)): every solved
value is (a + b*sqrt(k)) with exact rational a, b and squarefree integer k.
Equations are polynomials (degree <= 2 in practice) with rational
coefficients over named measure variables. Solving is exact Gaussian
elimination on the linear subset plus single-unknown isolation for
nonlinear equations; anything richer is left unsolved rather than
approximated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple


class InconsistentSystem(Exception):
    """A contradiction (e.g. 0 = 1) was derived from the equation store."""


class MixedRadicals(Exception):
    """Arithmetic would combine values from distinct quadratic extensions."""


def _squarefree_split(n: int) -> Tuple[int, int]:
    """n = s*s*k with k squarefree; returns (s, k)."""
    s, k, d = 1, n, 2
    while d * d <= k:
        while k % (d * d) == 0:
            k //= d * d
            s *= d
        d += 1
    return s, k


@dataclass(frozen=True)
class Exact:
    """Exact value a + b*sqrt(k); b == 0 implies k == 0."""

    a: Fraction
    b: Fraction = Fraction(0)
    k: int = 0

    @staticmethod
    def of(value) -> "Exact":
        if isinstance(value, Exact):
            return value
        return Exact(Fraction(value))

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def __add__(self, other):
        other = Exact.of(other)
        if self.b == 0:
            return Exact(self.a + other.a, other.b, other.k)
        if other.b == 0:
            return Exact(self.a + other.a, self.b, self.k)
        if self.k != other.k:
            raise MixedRadicals(f"sqrt({self.k}) + sqrt({other.k})")
        b = self.b + other.b
        return Exact(self.a + other.a, b, self.k if b else 0)

    def __neg__(self):
        return Exact(-self.a, -self.b, self.k if self.b else 0)

    def __sub__(self, other):
        return self + (-Exact.of(other))

    def __mul__(self, other):
        other = Exact.of(other)
        if self.b == 0:
            b = self.a * other.b
            return Exact(self.a * other.a, b, other.k if b else 0)
        if other.b == 0:
            b = self.b * other.a
            return Exact(self.a * other.a, b, self.k if b else 0)
        if self.k != other.k:
            raise MixedRadicals(f"sqrt({self.k}) * sqrt({other.k})")
        a = self.a * other.a + self.b * other.b * self.k
        b = self.a * other.b + self.b * other.a
        return Exact(a, b, self.k if b else 0)

    def __truediv__(self, other):
        other = Exact.of(other)
        if other.b == 0:
            if other.a == 0:
                raise ZeroDivisionError("division by exact zero")
            return Exact(self.a / other.a, self.b / other.a, self.k if self.b else 0)
        # rationalize by the conjugate
        denom = other.a * other.a - other.b * other.b * other.k
        if denom == 0:
            raise ZeroDivisionError("division by exact zero")
        conj = Exact(other.a, -other.b, other.k)
        return (self * conj) / Exact(denom)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_negative(self) -> bool:
        if self.b == 0:
            return self.a < 0
        # sign of a + b*sqrt(k), k > 0
        if self.a >= 0 and self.b >= 0:
            return False
        if self.a <= 0 and self.b <= 0:
            return True
        return (self.a * self.a < self.b * self.b * self.k) == (self.a > 0)

    def sqrt(self) -> "Exact":
        """Exact nonnegative square root; defined for nonnegative rationals."""
        if self.b != 0:
            raise MixedRadicals("nested radical")
        if self.a < 0:
            raise ValueError("square root of a negative value")
        num, den = self.a.numerator, self.a.denominator
        s, k = _squarefree_split(num * den)
        coef = Fraction(s, den)
        if k == 1:
            return Exact(coef)
        return Exact(Fraction(0), coef, k)

    def __str__(self):
        if self.b == 0:
            return _frac_str(self.a)
        root = f"sqrt({self.k})" if self.b in (1, -1) else f"{_frac_str(abs(self.b))}*sqrt({self.k})"
        sign = "-" if self.b < 0 else ("+" if self.a != 0 else "")
        if self.a == 0:
            return f"{'-' if self.b < 0 else ''}{root}"
        return f"{_frac_str(self.a)}{sign}{root}"


def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


ZERO = Exact(Fraction(0))

# A polynomial maps monomials (sorted tuples of variable names; () is the
# constant term) to rational coefficients. Zero coefficients are dropped.
Poly = Dict[Tuple[str, ...], Fraction]


def poly_const(c) -> Poly:
    c = Fraction(c)
    return {(): c} if c else {}

def poly_var(name: str) -> Poly:
    return {(name,): Fraction(1)}

def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        c2 = out.get(m, Fraction(0)) + c
        if c2:
            out[m] = c2
        else:
            out.pop(m, None)
    return out

def poly_neg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}

def poly_sub(p: Poly, q: Poly) -> Poly:
    return poly_add(p, poly_neg(q))

def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = tuple(sorted(m1 + m2))
            c = out.get(m, Fraction(0)) + c1 * c2
            if c:
                out[m] = c
            else:
                out.pop(m, None)
    return out

def poly_scale(p: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {m: cc * c for m, cc in p.items()}

def poly_vars(p: Poly) -> set:
    out = set()
    for m in p:
        out.update(m)
    return out

def poly_key(p: Poly) -> tuple:
    """Canonical hashable key (normalized so scalar multiples coincide)."""
    if not p:
        return ()
    items = sorted(p.items())
    lead = items[0][1]
    return tuple((m, c / lead) for m, c in items)


def poly_eval(p: Poly, values: Dict[str, Exact]) -> Optional[Exact]:
    """Evaluate fully; None if any variable is unsolved or radicals mix."""
    total = ZERO
    try:
        for m, c in p.items():
            term = Exact(c)
            for v in m:
                val = values.get(v)
                if val is None:
                    return None
                term = term * val
            total = total + term
    except MixedRadicals:
        return None
    return total


def _substitute(p: Poly, values: Dict[str, Exact]):
    """Split p into (exact constant, residual poly over unsolved vars).

    Returns None when a solved irrational value would have to multiply an
    unsolved variable or another radical field (kept unsolved instead).
    """
    const = ZERO
    residual: Poly = {}
    for m, c in p.items():
        known = Exact(c)
        unknown = []
        for v in m:
            val = values.get(v)
            if val is None:
                unknown.append(v)
            else:
                try:
                    known = known * val
                except MixedRadicals:
                    return None
        if not unknown:
            try:
                const = const + known
            except MixedRadicals:
                return None
        else:
            if not known.is_rational:
                return None
            mono = tuple(sorted(unknown))
            c2 = residual.get(mono, Fraction(0)) + known.a
            if c2:
                residual[mono] = c2
            else:
                residual.pop(mono, None)
    return const, residual


class EquationSystem:
    """Monotone store of polynomial equations with a solved-value cache."""

    def __init__(self):
        self.equations: list = []  # Poly, each meaning poly == 0
        self._keys: set = set()
        self.solved: Dict[str, Exact] = {}
        self._dirty = False
        self._rref: list = []  # reduced rows from the last solve, for entails()

    def clone(self) -> "EquationSystem":
        out = EquationSystem.__new__(EquationSystem)
        out.equations = list(self.equations)
        out._keys = set(self._keys)
        out.solved = dict(self.solved)
        out._dirty = self._dirty
        out._rref = [(dict(r), b) for r, b in self._rref]
        return out

    def add(self, p: Poly) -> bool:
        """Add poly == 0; returns False if structurally already present."""
        key = poly_key(p)
        if key == ():  # 0 == 0
            return False
        if key in self._keys:
            return False
        if len(key) == 1 and key[0][0] == ():  # nonzero constant == 0
            raise InconsistentSystem("nonzero constant equated to zero")
        self._keys.add(key)
        self.equations.append(p)
        self._dirty = True
        return True

    def value_of(self, var: str) -> Optional[Exact]:
        return self.solved.get(var)

    def solve(self, charge=None) -> int:
        """Propagate until no change; returns the number of newly solved vars.

        charge, when given, is called with the number of elimination row
        operations performed (deterministic cost accounting).
        """
        if not self._dirty:
            return 0
        before = len(self.solved)
        ops = 0
        linear = []
        progress = True
        while progress:
            progress = False
            linear = []
            pending_nonlinear = []
            for p in self.equations:
                sub = _substitute(p, self.solved)
                if sub is None:
                    continue
                const, residual = sub
                if not residual:
                    if not const.is_zero():
                        raise InconsistentSystem("equation reduces to nonzero constant")
                    continue
                if all(len(m) == 1 for m in residual):
                    if not const.is_rational:
                        pending_nonlinear.append((const, residual))
                    else:
                        row = {m[0]: c for m, c in residual.items()}
                        linear.append((row, -const.a))
                else:
                    pending_nonlinear.append((const, residual))

            ops += self._eliminate(linear)
            solved_now = self._harvest(linear)
            solved_now += self._isolate(pending_nonlinear)
            if solved_now:
                progress = True
        self._rref = linear
        self._dirty = False
        if charge is not None:
            charge(ops)
        return len(self.solved) - before

    def entails(self, p: Poly) -> bool:
        """True iff p == 0 is a consequence of the current store.

        Decides linear consequences exactly (reduction against the solved
        cache and the RREF of the linear subset); nonlinear polynomials are
        only recognized when structurally present.
        """
        self.solve()
        sub = _substitute(p, self.solved)
        if sub is None:
            return False
        const, residual = sub
        if not residual:
            return const.is_zero()
        if any(len(m) != 1 for m in residual):
            return poly_key(p) in self._keys
        if not const.is_rational:
            return False
        row = {m[0]: c for m, c in residual.items()}
        rhs = -const.a
        pivots = {min(r): (r, b) for r, b in self._rref if r}
        while True:
            common = set(row) & pivots.keys()
            if not common:
                break
            prow, prhs = pivots[min(common)]
            factor = row[min(common)] / prow[min(common)]
            for v, c in prow.items():
                c2 = row.get(v, Fraction(0)) - factor * c
                if c2:
                    row[v] = c2
                else:
                    row.pop(v, None)
            rhs -= factor * prhs
        return not row and rhs == 0

    def _eliminate(self, rows) -> int:
        """In-place exact Gauss-Jordan elimination over (dict row, rhs) pairs.

        Invariant: each pivot row contains no other row's pivot variable, so
        after the pass a variable is uniquely determined iff it sits alone in
        some row.
        """
        ops = 0
        pivots = {}  # var -> row index

        def reduce_row(i, j, var):
            nonlocal ops
            row, rhs = rows[i]
            prow, prhs = rows[j]
            factor = row[var] / prow[var]
            for v, c in prow.items():
                c2 = row.get(v, Fraction(0)) - factor * c
                if c2:
                    row[v] = c2
                else:
                    row.pop(v, None)
            rows[i] = (row, rhs - factor * prhs)
            ops += 1

        for i in range(len(rows)):
            while True:
                common = set(rows[i][0]) & pivots.keys()
                if not common:
                    break
                v = min(common)
                reduce_row(i, pivots[v], v)
            row, rhs = rows[i]
            if not row:
                if rhs != 0:
                    raise InconsistentSystem("0 = nonzero after elimination")
                continue
            pv = min(row)
            for j in list(pivots.values()):
                if pv in rows[j][0]:
                    reduce_row(j, i, pv)
            pivots[pv] = i
        return ops

    def _harvest(self, rows) -> int:
        n = 0
        for row, rhs in rows:
            if len(row) == 1:
                (var, coef), = row.items()
                value = Exact(rhs / coef)
                if var not in self.solved:
                    self.solved[var] = value
                    n += 1
                elif self.solved[var] != value:
                    raise InconsistentSystem(f"{var} forced to two distinct values")
        return n

    def _isolate(self, pending) -> int:
        """Solve residuals in a single unknown: linear or pure-square forms."""
        n = 0
        for const, residual in pending:
            vs = poly_vars(residual)
            if len(vs) != 1:
                continue
            (var,) = vs
            if var in self.solved:
                continue
            lin = residual.get((var,), Fraction(0))
            quad = residual.get((var, var), Fraction(0))
            extra = [m for m in residual if m not in ((var,), (var, var))]
            if extra:
                continue
            if quad == 0:
                # lin*x + const = 0
                try:
                    self.solved[var] = (-const) / Exact(lin)
                    n += 1
                except MixedRadicals:
                    continue
            elif lin == 0:
                # quad*x^2 + const = 0; measures are nonnegative: take +root
                rhs = (-const) / Exact(quad)
                if not rhs.is_rational:
                    continue
                if rhs.is_negative():
                    raise InconsistentSystem(f"{var}^2 forced negative")
                self.solved[var] = rhs.sqrt()
                n += 1
            # mixed quadratic: rejected to unsolved
        return n
