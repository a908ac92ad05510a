"""Difference operators and generating-series machinery in a spectral variable u.

A ``DiffOp`` is a finite sum  f_a * d^a  in normal order: rational-function
coefficient on the left, shift monomial on the right.  Shifts act on
w-variables only: d_{i,r} w_{i,r} = (w_{i,r} + 1) d_{i,r}.

The spectral variable u commutes with everything and is never a registry
variable.  Scalar rational functions of u are ``URational`` values, kept as a
polynomial in u over a multiset of roots; u-dependent operators with poles are
``UPoleForm`` values; truncated expansions at u = infinity are ``USeries``.
"""
from __future__ import annotations

from math import comb
from typing import Iterable, Mapping, Sequence

from .arith import (
    rf_sum,
    GaussianRational,
    MultivarPoly,
    Q,
    RationalFunction,
    VariableRegistry,
    format_scalar,
    scalar,
    scalar_inv,
)


class UnsupportedPole(ValueError):
    pass


class TruncationError(ValueError):
    pass


# ------------------------------------------------------------------ ring


class DiffRing:
    """Context shared by all operators of one instance: registry and w-slots."""

    def __init__(self, reg: VariableRegistry):
        self.reg = reg
        self.w_vars = [k for k, v in enumerate(reg.variables) if v.role == "w"]
        self.slot_of = {reg.variables[k].key: n for n, k in enumerate(self.w_vars)}
        self.nw = len(self.w_vars)
        self.zero_shift = (0,) * self.nw
        self._shift_cache: dict = {}

    def __eq__(self, other):
        return self is other or (isinstance(other, DiffRing) and self.reg == other.reg)

    def __hash__(self):
        return hash(self.reg)

    # element constructors
    def rf(self, x) -> RationalFunction:
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, MultivarPoly):
            return RationalFunction.from_poly(x)
        return RationalFunction.const(self.reg, x)

    def poly(self, x) -> MultivarPoly:
        if isinstance(x, MultivarPoly):
            return x
        return MultivarPoly.const(self.reg, x)

    def wpoly(self, i, r) -> MultivarPoly:
        return MultivarPoly.var(self.reg, self.reg.variables[self.w_vars[self.slot_of[(i, r)]]].name)

    def var(self, name) -> MultivarPoly:
        return MultivarPoly.var(self.reg, name)

    def zero(self) -> "DiffOp":
        return DiffOp(self, {})

    def one(self) -> "DiffOp":
        return self.scalar(1)

    def scalar(self, c) -> "DiffOp":
        f = self.rf(c)
        return DiffOp(self, {self.zero_shift: f} if f else {})

    def shift(self, i, r, power=1) -> "DiffOp":
        key = [0] * self.nw
        key[self.slot_of[(i, r)]] = power
        return DiffOp(self, {tuple(key): self.rf(1)})

    def shift_key(self, i, r, power=1) -> tuple:
        key = [0] * self.nw
        key[self.slot_of[(i, r)]] = power
        return tuple(key)

    def shift_map(self, key: tuple) -> dict:
        """Translate a shift vector into a registry-index -> offset map."""
        m = self._shift_cache.get(key)
        if m is None:
            m = {self.w_vars[n]: a for n, a in enumerate(key) if a}
            self._shift_cache[key] = m
        return m

    def sigma(self, key: tuple, f):
        """Apply the automorphism w -> w + a to a coefficient."""
        if not any(key):
            return f
        return f.shift_substitute(self.shift_map(key))

    def shift_label(self, key: tuple) -> str:
        parts = []
        for n, a in enumerate(key):
            if a:
                i, r = self.reg.variables[self.w_vars[n]].key
                parts.append(f"d_{{{i},{r}}}" + ("" if a == 1 else f"^{a}"))
        return "*".join(parts) if parts else "1"


def _add_keys(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


# --------------------------------------------------------------- DiffOp


class DiffOp:
    """Normal-ordered element sum_a f_a d^a of the difference-operator ring."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: DiffRing, terms: Mapping[tuple, RationalFunction]):
        self.ring = ring
        self.terms = {k: f for k, f in terms.items() if f}

    @classmethod
    def _raw(cls, ring, terms):
        op = cls.__new__(cls)
        op.ring = ring
        op.terms = terms
        return op

    def _coerce(self, other) -> "DiffOp":
        if isinstance(other, DiffOp):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ValueError("operators over different rings")
            return other
        return self.ring.scalar(other)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_scalar(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.ring.zero_shift in self.terms)

    def scalar_part(self) -> RationalFunction:
        return self.terms.get(self.ring.zero_shift, self.ring.rf(0))

    def coefficient(self, key: tuple) -> RationalFunction:
        return self.terms.get(key, self.ring.rf(0))

    def __neg__(self):
        return DiffOp._raw(self.ring, {k: -f for k, f in self.terms.items()})

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, f in other.terms.items():
            g = out.get(k)
            if g is None:
                out[k] = f
            else:
                s = g + f
                if s:
                    out[k] = s
                else:
                    del out[k]
        return DiffOp._raw(self.ring, out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "DiffOp":
        """Left multiplication by a scalar or a coefficient-ring element."""
        if isinstance(c, MultivarPoly):
            c = RationalFunction.from_poly(c)
        if isinstance(c, RationalFunction):
            if not c:
                return self.ring.zero()
            return DiffOp._raw(self.ring, {k: c * f for k, f in self.terms.items()})
        c = scalar(c)
        if not c:
            return self.ring.zero()
        return DiffOp._raw(self.ring, {k: f * c for k, f in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, DiffOp):
            if isinstance(other, (MultivarPoly, RationalFunction)):
                return self * self.ring.scalar(other)
            return self.scale(other)
        return diffop_mul(self, other)

    def __rmul__(self, other):
        return self._coerce(other) * self

    def __pow__(self, e: int):
        out = self.ring.one()
        for _ in range(e):
            out = out * self
        return out

    def sigma(self, key: tuple) -> "DiffOp":
        """Conjugation d^a X d^-a."""
        return DiffOp._raw(self.ring, {k: self.ring.sigma(key, f) for k, f in self.terms.items()})

    def map_coefficients(self, fn) -> "DiffOp":
        return DiffOp(self.ring, {k: fn(f) for k, f in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, DiffOp) or isinstance(other, (int, RationalFunction, MultivarPoly)):
            return (self - self._coerce(other)).is_zero()
        return NotImplemented

    __hash__ = None

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def to_json(self):
        """Canonical serialization: sorted list of [shift label, coefficient]."""
        if not self.terms:
            return "0"
        if self.is_scalar():
            return str(self.scalar_part())
        return [[self.ring.shift_label(k), str(f)] for k, f in self.sorted_items()]

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k, f in self.sorted_items():
            lab = self.ring.shift_label(k)
            out.append(str(f) if lab == "1" else f"({f})*{lab}")
        return " + ".join(out)

    __repr__ = __str__


def diffop_sum(ring: DiffRing, ops) -> DiffOp:
    """Sum of many operators, combining each coefficient in one pass."""
    groups: dict = {}
    for X in ops:
        for k, f in X.terms.items():
            groups.setdefault(k, []).append(f)
    out = {}
    for k, fs in groups.items():
        f = fs[0] if len(fs) == 1 else rf_sum(fs)
        if f:
            out[k] = f
    return DiffOp._raw(ring, out)


def diffop_mul(X: DiffOp, Y: DiffOp) -> DiffOp:
    """Normal-ordered product: (f d^a)(g d^b) = f sigma^a(g) d^{a+b}."""
    if X.ring is not Y.ring and X.ring != Y.ring:
        raise ValueError("operators over different rings")
    ring = X.ring
    if not X.terms or not Y.terms:
        return ring.zero()
    groups: dict = {}
    zero = ring.zero_shift
    for ka, fa in X.terms.items():
        for kb, gb in Y.terms.items():
            g = gb if ka == zero else ring.sigma(ka, gb)
            t = fa * g
            if not t:
                continue
            k = kb if ka == zero else (ka if kb == zero else _add_keys(ka, kb))
            groups.setdefault(k, []).append(t)
    out = {}
    for k, ts in groups.items():
        f = ts[0] if len(ts) == 1 else rf_sum(ts)
        if f:
            out[k] = f
    return DiffOp._raw(ring, out)


def diffop_commutator(X: DiffOp, Y: DiffOp, anti: bool = False) -> DiffOp:
    if anti:
        return diffop_mul(X, Y) + diffop_mul(Y, X)
    return diffop_mul(X, Y) - diffop_mul(Y, X)


def commutator(X, Y):
    return diffop_commutator(X, Y)


def anticommutator(X, Y):
    return diffop_commutator(X, Y, anti=True)


# ------------------------------------------------------- univariate in u


def _rf(reg, x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, MultivarPoly):
        return RationalFunction.from_poly(x)
    return RationalFunction.const(reg, x)


class UPoly:
    """Polynomial in u with rational-function coefficients (index = degree)."""

    __slots__ = ("reg", "c")

    def __init__(self, reg: VariableRegistry, coeffs: Sequence):
        self.reg = reg
        c = [_rf(reg, x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = c

    @classmethod
    def from_roots(cls, reg, roots: Iterable, lead=1):
        """lead * prod (u - a)."""
        p = cls(reg, [lead])
        for a in roots:
            p = p * cls(reg, [-_rf(reg, a), 1])
        return p

    @classmethod
    def monomial(cls, reg, k, coeff=1):
        return cls(reg, [0] * k + [coeff])

    def degree(self):
        return len(self.c) - 1

    def is_zero(self):
        return not self.c

    def lead(self):
        return self.c[-1] if self.c else _rf(self.reg, 0)

    def __add__(self, o):
        o = o if isinstance(o, UPoly) else UPoly(self.reg, [o])
        n = max(len(self.c), len(o.c))
        z = _rf(self.reg, 0)
        return UPoly(self.reg, [(self.c[k] if k < len(self.c) else z) + (o.c[k] if k < len(o.c) else z) for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return UPoly(self.reg, [-x for x in self.c])

    def __sub__(self, o):
        o = o if isinstance(o, UPoly) else UPoly(self.reg, [o])
        return self + (-o)

    def __mul__(self, o):
        if not isinstance(o, UPoly):
            f = _rf(self.reg, o)
            return UPoly(self.reg, [x * f for x in self.c])
        if not self.c or not o.c:
            return UPoly(self.reg, [])
        out = [None] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if not a:
                continue
            for j, b in enumerate(o.c):
                if not b:
                    continue
                t = a * b
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        return UPoly(self.reg, [x if x is not None else 0 for x in out])

    __rmul__ = __mul__

    def __pow__(self, e):
        out = UPoly(self.reg, [1])
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, o):
        if not isinstance(o, UPoly):
            o = UPoly(self.reg, [o])
        return (self - o).is_zero()

    __hash__ = None

    def __call__(self, x):
        """Evaluate at an element of the coefficient field (Horner)."""
        x = _rf(self.reg, x)
        acc = _rf(self.reg, 0)
        for a in reversed(self.c):
            acc = acc * x + a
        return acc

    def compose_affine(self, alpha, shift) -> "UPoly":
        """p(alpha*u + shift)."""
        lin = UPoly(self.reg, [shift, alpha])
        acc = UPoly(self.reg, [])
        for a in reversed(self.c):
            acc = acc * lin + UPoly(self.reg, [a])
        return acc

    def shift(self, c) -> "UPoly":
        return self.compose_affine(1, c)

    def minus(self) -> "UPoly":
        """f^-(u) = (-1)^deg f * f(-u): monic again when f is monic."""
        d = self.degree()
        sign = -1 if d % 2 else 1
        return UPoly(self.reg, [x * (sign * (-1 if k % 2 else 1)) for k, x in enumerate(self.c)])

    def map(self, fn) -> "UPoly":
        return UPoly(self.reg, [fn(x) for x in self.c])

    def divmod(self, d: "UPoly"):
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial in u")
        rem = list(self.c)
        q = [_rf(self.reg, 0)] * max(len(rem) - len(d.c) + 1, 0)
        inv = d.lead().inverse()
        for k in range(len(rem) - len(d.c), -1, -1):
            coef = rem[k + len(d.c) - 1] * inv
            q[k] = coef
            if coef:
                for j, b in enumerate(d.c):
                    rem[k + j] = rem[k + j] - coef * b
        return UPoly(self.reg, q), UPoly(self.reg, rem[: len(d.c) - 1])

    def __str__(self):
        if not self.c:
            return "0"
        parts = []
        for k in range(len(self.c) - 1, -1, -1):
            a = self.c[k]
            if not a:
                continue
            mono = "" if k == 0 else ("u" if k == 1 else f"u^{k}")
            s = str(a)
            if not mono:
                parts.append(s)
            elif s == "1":
                parts.append(mono)
            elif s == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"({s})*{mono}")
        return "+".join(parts).replace("+-", "-")

    __repr__ = __str__


class URational:
    """A scalar rational function of u:  num(u) / prod (u - a)^m.

    Roots ``a`` are rational functions of the registry variables.  Keeping the
    denominator split into linear factors makes residues, principal parts and
    expansions at infinity exact and cheap.
    """

    __slots__ = ("reg", "num", "roots")

    def __init__(self, reg, num: UPoly, roots: Mapping | None = None):
        self.reg = reg
        self.num = num
        self.roots = {a: m for a, m in (roots or {}).items() if m}

    @classmethod
    def poly(cls, p: UPoly):
        return cls(p.reg, p, {})

    @classmethod
    def const(cls, reg, c):
        return cls(reg, UPoly(reg, [c]), {})

    @classmethod
    def from_factors(cls, reg, num_roots: Iterable = (), den_roots: Iterable = (), lead=1):
        """lead * prod(u - b) / prod(u - a)."""
        roots: dict = {}
        for a in den_roots:
            a = _rf(reg, a)
            roots[a] = roots.get(a, 0) + 1
        return cls(reg, UPoly.from_roots(reg, num_roots, lead), roots).cancel()

    @classmethod
    def from_ratio(cls, num: UPoly, den_roots: Mapping):
        return cls(num.reg, num, {_rf(num.reg, a): m for a, m in den_roots.items()}).cancel()

    def den_poly(self) -> UPoly:
        out = UPoly(self.reg, [1])
        for a, m in self.roots.items():
            out = out * UPoly(self.reg, [-a, 1]) ** m
        return out

    def cancel(self) -> "URational":
        num = self.num
        roots = dict(self.roots)
        if num.is_zero():
            return URational(self.reg, num, {})
        for a in list(roots):
            lin = UPoly(self.reg, [-a, 1])
            while roots[a] and not num(a):
                num, _ = num.divmod(lin)
                roots[a] -= 1
        return URational(self.reg, num, roots)

    def is_zero(self):
        return self.num.is_zero()

    def __neg__(self):
        return URational(self.reg, -self.num, self.roots)

    def _coerce(self, o):
        if isinstance(o, URational):
            return o
        if isinstance(o, UPoly):
            return URational.poly(o)
        return URational.const(self.reg, o)

    def __mul__(self, o):
        o = self._coerce(o)
        roots = dict(self.roots)
        for a, m in o.roots.items():
            roots[a] = roots.get(a, 0) + m
        return URational(self.reg, self.num * o.num, roots).cancel()

    __rmul__ = __mul__

    def __add__(self, o):
        o = self._coerce(o)
        roots = dict(self.roots)
        for a, m in o.roots.items():
            roots[a] = max(roots.get(a, 0), m)
        n1 = self.num * _lin_product(self.reg, roots, self.roots)
        n2 = o.num * _lin_product(self.reg, roots, o.roots)
        return URational(self.reg, n1 + n2, roots).cancel()

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-self._coerce(o))

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = URational.const(self.reg, 1)
        for _ in range(e):
            out = out * self
        return out

    def inverse(self) -> "URational":
        """Inverse; the numerator must be c*u^k so that its roots are known."""
        num = self.num
        nz = [k for k, c in enumerate(num.c) if c]
        if len(nz) != 1:
            raise UnsupportedPole("inverse of a u-rational with an unfactored numerator")
        k = nz[0]
        roots = {_rf(self.reg, 0): k} if k else {}
        return URational(self.reg, self.den_poly() * num.c[k].inverse(), roots).cancel()

    def __eq__(self, o):
        o = self._coerce(o)
        return (self - o).is_zero()

    __hash__ = None

    def __call__(self, x):
        x = _rf(self.reg, x)
        d = _rf(self.reg, 1)
        for a, m in self.roots.items():
            d = d * (x - a) ** m
        if not d:
            raise ZeroDivisionError("evaluation at a pole")
        return self.num(x) / d

    def substitute(self, alpha=1, shift=0) -> "URational":
        """R(alpha*u + shift) for nonzero scalar alpha."""
        alpha = scalar(alpha)
        if not alpha:
            raise UnsupportedPole("substitution u -> constant is not affine-invertible")
        shift = _rf(self.reg, shift)
        num = self.num.compose_affine(alpha, shift)
        roots = {}
        total = 0
        ainv = scalar_inv(alpha)
        for a, m in self.roots.items():
            roots[(a - shift) * ainv] = m
            total += m
        return URational(self.reg, num * scalar_inv(alpha) ** total if total else num, roots)

    def sigma(self, ring: DiffRing, key: tuple) -> "URational":
        if not any(key):
            return self
        return URational(
            self.reg,
            self.num.map(lambda f: ring.sigma(key, f)),
            {ring.sigma(key, a): m for a, m in self.roots.items()},
        )

    def map(self, fn) -> "URational":
        return URational(self.reg, self.num.map(fn), {fn(a): m for a, m in self.roots.items()})

    def expand(self, order: int) -> dict:
        """Coefficients c_s of u^{-s} at infinity for all s <= order."""
        # prod (u - a)^{-m} = u^{-M} prod (1 - a/u)^{-m}
        M = sum(self.roots.values())
        depth = order - M + self.num.degree()
        if depth < 0 or self.num.is_zero():
            return {}
        series = {0: _rf(self.reg, 1)}
        for a, m in self.roots.items():
            geo = {k: a ** k * comb(m + k - 1, k) for k in range(depth + 1)}
            series = _series_mul(series, geo, depth)
        out: dict = {}
        for k, a in enumerate(self.num.c):
            if not a:
                continue
            for j, b in series.items():
                s = j + M - k
                if s > order:
                    continue
                t = a * b
                out[s] = out[s] + t if s in out else t
        return {s: c for s, c in out.items() if c}

    def valuation(self) -> int:
        """Smallest s with a nonzero u^{-s} coefficient (i.e. minus the degree)."""
        return sum(self.roots.values()) - self.num.degree()

    def partial_fractions(self):
        """(polynomial part, {(a, k): coefficient of (u - a)^{-k}})."""
        den = self.den_poly()
        poly, _ = self.num.divmod(den)
        poles = {}
        for a, m in self.roots.items():
            # Laurent data at a: num(a+t) / (t^m prod_{b != a} (a - b + t)^{m_b})
            others = {b: mb for b, mb in self.roots.items() if b != a}
            shifted = self.num.compose_affine(1, a)
            inv = {0: _rf(self.reg, 1)}
            for b, mb in others.items():
                d = a - b
                dinv = d.inverse()
                # (d + t)^{-mb} = d^{-mb} sum_k C(mb+k-1,k) (-t/d)^k
                geo = {k: (dinv ** (mb + k)) * (comb(mb + k - 1, k) * (-1) ** k) for k in range(m)}
                inv = _series_mul(inv, geo, m - 1)
            numt = {k: c for k, c in enumerate(shifted.c) if k < m and c}
            laurent = _series_mul(numt, inv, m - 1)
            for k in range(m):
                c = laurent.get(k)
                if c:
                    poles[(a, m - k)] = c
        return poly, poles

    def principal_part(self) -> "URational":
        _, poles = self.partial_fractions()
        out = URational.const(self.reg, 0)
        for (a, k), c in poles.items():
            out = out + URational(self.reg, UPoly(self.reg, [c]), {a: k})
        return out

    def residue(self, a) -> RationalFunction:
        a = _rf(self.reg, a)
        _, poles = self.partial_fractions()
        return poles.get((a, 1), _rf(self.reg, 0))

    def __str__(self):
        if not self.roots:
            return f"({self.num})"
        den = "*".join(f"(u-({a}))" + (f"^{m}" if m > 1 else "") for a, m in self.roots.items())
        return f"({self.num})/({den})"

    __repr__ = __str__


def _lin_product(reg, target: Mapping, have: Mapping) -> UPoly:
    out = UPoly(reg, [1])
    for a, m in target.items():
        e = m - have.get(a, 0)
        if e:
            out = out * UPoly(reg, [-a, 1]) ** e
    return out


def _series_mul(a: Mapping[int, object], b: Mapping[int, object], depth: int) -> dict:
    out: dict = {}
    for i, x in a.items():
        if i > depth or not x:
            continue
        for j, y in b.items():
            k = i + j
            if k > depth or not y:
                continue
            t = x * y
            out[k] = out[k] + t if k in out else t
    return out


# -------------------------------------------------------------- USeries


class USeries:
    """Truncated series  sum_{lo <= s <= order} X_s u^{-s}  with DiffOp coefficients.

    ``order`` is the largest s whose coefficient is trustworthy; ``None``
    marks an exact (finite) series.  Coefficients below ``lo`` are zero.
    """

    __slots__ = ("ring", "coeffs", "lo", "order")

    def __init__(self, ring: DiffRing, coeffs: Mapping[int, DiffOp], lo: int, order: int | None):
        self.ring = ring
        self.coeffs = {s: X for s, X in coeffs.items() if X and (order is None or s <= order)}
        if any(s < lo for s in self.coeffs):
            raise ValueError("coefficient below declared valuation")
        self.lo = lo
        self.order = order

    @classmethod
    def from_scalars(cls, ring, coeffs: Mapping[int, object], lo: int, order):
        return cls(ring, {s: ring.scalar(c) for s, c in coeffs.items()}, lo, order)

    @classmethod
    def from_urational(cls, ring, R: URational, order: int):
        co = R.expand(order)
        lo = min([R.valuation()] + list(co))
        return cls.from_scalars(ring, co, lo, order)

    def mode(self, s: int) -> DiffOp:
        if self.order is not None and s > self.order:
            raise TruncationError(f"mode {s} beyond trusted order {self.order}")
        return self.coeffs.get(s, self.ring.zero())

    def has_mode(self, s: int) -> bool:
        return self.order is None or s <= self.order

    def _orders(self, o):
        if self.order is None:
            return o.order
        if o.order is None:
            return self.order
        return min(self.order, o.order)

    def __add__(self, o: "USeries"):
        out = dict(self.coeffs)
        for s, X in o.coeffs.items():
            out[s] = out[s] + X if s in out else X
        return USeries(self.ring, out, min(self.lo, o.lo), self._orders(o))

    def __neg__(self):
        return USeries(self.ring, {s: -X for s, X in self.coeffs.items()}, self.lo, self.order)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        return USeries(self.ring, {s: X.scale(c) for s, X in self.coeffs.items()}, self.lo, self.order)

    def left(self, X: DiffOp):
        return USeries(self.ring, {s: X * Y for s, Y in self.coeffs.items()}, self.lo, self.order)

    def right(self, X: DiffOp):
        return USeries(self.ring, {s: Y * X for s, Y in self.coeffs.items()}, self.lo, self.order)

    def __mul__(self, o: "USeries"):
        if not isinstance(o, USeries):
            return self.right(self.ring.scalar(o)) if not isinstance(o, DiffOp) else self.right(o)
        # product coefficient k needs X_s for s <= k - o.lo and Y_t for t <= k - self.lo
        cands = []
        if self.order is not None:
            cands.append(self.order + o.lo)
        if o.order is not None:
            cands.append(o.order + self.lo)
        order = min(cands) if cands else None
        out: dict = {}
        for s, X in self.coeffs.items():
            for t, Y in o.coeffs.items():
                k = s + t
                if order is not None and k > order:
                    continue
                P = X * Y
                if P:
                    out[k] = out[k] + P if k in out else P
        return USeries(self.ring, out, self.lo + o.lo, order)

    def mul_u_power(self, k: int) -> "USeries":
        """Multiply by u^k."""
        return USeries(
            self.ring,
            {s - k: X for s, X in self.coeffs.items()},
            self.lo - k,
            None if self.order is None else self.order - k,
        )

    def truncate(self, order: int) -> "USeries":
        if self.order is not None and order > self.order:
            raise TruncationError("cannot extend a truncated series")
        return USeries(self.ring, self.coeffs, self.lo, order)

    def principal(self) -> "USeries":
        return USeries(self.ring, {s: X for s, X in self.coeffs.items() if s > 0}, max(self.lo, 1), self.order)

    def is_zero(self) -> bool:
        return not self.coeffs

    def nonzero_modes(self):
        return sorted(self.coeffs)


def series_inverse(F: USeries) -> USeries:
    """Right inverse of a series whose leading coefficient is an invertible scalar."""
    lead = F.coeffs.get(F.lo)
    if lead is None or not lead.is_scalar():
        raise ArithmeticError("leading coefficient must be a nonzero scalar")
    ring = F.ring
    inv_lead = ring.scalar(lead.scalar_part().inverse())
    lo = -F.lo
    order = None if F.order is None else F.order - 2 * F.lo
    if order is None:
        raise TruncationError("series_inverse needs a truncation order for exact input")
    G = {lo: inv_lead}
    for k in range(1, order - lo + 1):
        acc = ring.zero()
        for j in range(1, k + 1):
            Fj = F.coeffs.get(F.lo + j)
            Gk = G.get(lo + k - j)
            if Fj is not None and Gk is not None:
                acc = acc + Fj * Gk
        if acc:
            G[lo + k] = -(inv_lead * acc)
    return USeries(ring, G, lo, order)


def exact_series_inverse(F: USeries, order: int) -> USeries:
    """Inverse of an exact series, trusted up to ``order``."""
    if F.order is not None:
        return series_inverse(F).truncate(order)
    return series_inverse(F.truncate(order + 2 * F.lo))


# ------------------------------------------------------------ UPoleForm


class UPoleForm:
    """Exact u-dependent operator: polynomial part plus pole terms (u - a)^{-m} X.

    The u-factor of each pole term sits to the left of its DiffOp coefficient.
    """

    __slots__ = ("ring", "poly", "poles")

    def __init__(self, ring: DiffRing, poly: Sequence[DiffOp] = (), poles: Mapping | None = None):
        self.ring = ring
        p = list(poly)
        while p and not p[-1]:
            p.pop()
        self.poly = p
        self.poles = {key: X for key, X in (poles or {}).items() if X}

    @classmethod
    def from_urational(cls, ring: DiffRing, R: URational, X: DiffOp | None = None):
        X = ring.one() if X is None else X
        poly, poles = R.partial_fractions()
        return cls(ring, [X.scale(c) for c in poly.c], {key: X.scale(c) for key, c in poles.items()})

    @classmethod
    def pole(cls, ring, location, X: DiffOp, order=1):
        return cls(ring, [], {(ring.rf(location), order): X})

    def is_zero(self):
        return not self.poly and not self.poles

    def __add__(self, o: "UPoleForm"):
        n = max(len(self.poly), len(o.poly))
        z = self.ring.zero()
        poly = [(self.poly[k] if k < len(self.poly) else z) + (o.poly[k] if k < len(o.poly) else z) for k in range(n)]
        poles = dict(self.poles)
        for key, X in o.poles.items():
            poles[key] = poles[key] + X if key in poles else X
        return UPoleForm(self.ring, poly, poles)

    def __neg__(self):
        return UPoleForm(self.ring, [-X for X in self.poly], {k: -X for k, X in self.poles.items()})

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        return UPoleForm(self.ring, [X.scale(c) for X in self.poly], {k: X.scale(c) for k, X in self.poles.items()})

    def right(self, Y: DiffOp):
        return UPoleForm(self.ring, [X * Y for X in self.poly], {k: X * Y for k, X in self.poles.items()})

    def left(self, Y: DiffOp):
        """Y * F for a u-free operator Y (pole locations get conjugated)."""
        out = UPoleForm(self.ring)
        for key, c in Y.terms.items():
            cY = DiffOp(self.ring, {key: c})
            poly = [cY * X for X in self.poly]
            poles = {}
            for (a, m), X in self.poles.items():
                loc = self.ring.sigma(key, a)
                poles[(loc, m)] = poles.get((loc, m), self.ring.zero()) + cY * X
            out = out + UPoleForm(self.ring, poly, poles)
        return out

    def _terms(self):
        """Yield (URational factor, DiffOp) pairs summing to self."""
        reg = self.ring.reg
        for k, X in enumerate(self.poly):
            yield URational.poly(UPoly.monomial(reg, k)), X
        for (a, m), X in self.poles.items():
            yield URational(reg, UPoly(reg, [1]), {a: m}), X

    def mul_urational_left(self, R: URational) -> "UPoleForm":
        """R(u) * F(u)."""
        out = UPoleForm(self.ring)
        for S, X in self._terms():
            out = out + UPoleForm.from_urational(self.ring, R * S, X)
        return out

    def mul_urational_right(self, R: URational) -> "UPoleForm":
        """F(u) * R(u); the shifts inside F act on the coefficients of R."""
        out = UPoleForm(self.ring)
        for S, X in self._terms():
            for key, c in X.terms.items():
                Rk = R.sigma(self.ring, key)
                out = out + UPoleForm.from_urational(self.ring, S * Rk, DiffOp(self.ring, {key: c}))
        return out

    def scale_by_u_poly(self, p: UPoly) -> "UPoleForm":
        return self.mul_urational_left(URational.poly(p))

    def substitute(self, alpha=1, shift=0) -> "UPoleForm":
        """F(alpha*u + shift)."""
        alpha = scalar(alpha)
        if not alpha:
            raise UnsupportedPole("substitution must keep u")
        ring = self.ring
        reg = ring.reg
        shift_rf = ring.rf(shift)
        out = UPoleForm(ring)
        if self.poly:
            lin = UPoly(reg, [shift_rf, alpha])
            acc = UPoly(reg, [1])
            for k, X in enumerate(self.poly):
                out = out + UPoleForm(ring, [X.scale(c) for c in acc.c])
                acc = acc * lin
        ainv = scalar_inv(alpha)
        poles = {}
        for (a, m), X in self.poles.items():
            loc = (a - shift_rf) * ainv
            poles[(loc, m)] = X.scale(ainv ** m)
        return out + UPoleForm(ring, [], poles)

    def principal_part(self, strict=True) -> "UPoleForm":
        if strict:
            for (a, m) in self.poles:
                if m > 2 or (m == 2 and not a.is_zero()):
                    raise UnsupportedPole(f"pole of order {m} at u = {a}")
        return UPoleForm(self.ring, [], self.poles)

    def to_series(self, order: int) -> USeries:
        ring = self.ring
        out: dict = {}
        lo = -(len(self.poly) - 1) if self.poly else 1
        for k, X in enumerate(self.poly):
            if X:
                out[-k] = out[-k] + X if -k in out else X
        for (a, m), X in self.poles.items():
            for k in range(0, order - m + 1):
                c = a ** k * comb(m + k - 1, k) if k else ring.rf(1)
                if not c:
                    continue
                s = m + k
                Y = X.scale(c)
                out[s] = out[s] + Y if s in out else Y
            lo = min(lo, m)
        return USeries(ring, out, min([lo] + list(out)), order)

    def modes(self, lo: int, hi: int) -> list:
        return extract_modes(self, (lo, hi))

    def __eq__(self, o):
        return (self - o).is_zero()

    __hash__ = None

    def to_json(self):
        poly = [X.to_json() for X in self.poly]
        poles = sorted(([str(a), m, X.to_json()] for (a, m), X in self.poles.items()), key=lambda t: (t[0], t[1]))
        return {"polynomial": poly, "poles": poles}


def poleform_ops(F: UPoleForm, action: str, arg=None):
    if action == "add":
        return F + arg
    if action == "scale_by_u_poly":
        return F.scale_by_u_poly(arg)
    if action == "substitute":
        alpha, shift = arg
        return F.substitute(alpha, shift)
    if action == "to_series":
        return F.to_series(arg)
    if action == "principal_part":
        return F.principal_part()
    raise ValueError(f"unknown pole-form action {action!r}")


def extract_modes(F, window) -> list:
    """Coefficients of u^{-s} for s in the inclusive window [lo, hi]."""
    lo, hi = window
    if isinstance(F, URational):
        co = F.expand(hi)
        reg = F.reg
        return [co.get(s, RationalFunction.const(reg, 0)) for s in range(lo, hi + 1)]
    if isinstance(F, UPoleForm):
        S = F.to_series(hi)
        return [S.coeffs.get(s, F.ring.zero()) for s in range(lo, hi + 1)]
    if isinstance(F, USeries):
        return [F.mode(s) for s in range(lo, hi + 1)]
    raise TypeError("cannot extract modes from this object")


# ------------------------------------------------------------- BiSeries


class BiSeries:
    """Truncated series sum X_{s,t} u^{-s} v^{-t} with independent bookkeeping."""

    __slots__ = ("ring", "coeffs", "lo", "order")

    def __init__(self, ring, coeffs: Mapping[tuple, DiffOp], lo: tuple, order: tuple):
        self.ring = ring
        ou, ov = order
        self.coeffs = {
            st: X for st, X in coeffs.items() if X and (ou is None or st[0] <= ou) and (ov is None or st[1] <= ov)
        }
        self.lo = lo
        self.order = order

    @classmethod
    def outer(cls, F: USeries, G: USeries, flip=False):
        """F(u)G(v), or G(v)F(u) when ``flip``."""
        out = {}
        for s, X in F.coeffs.items():
            for t, Y in G.coeffs.items():
                P = Y * X if flip else X * Y
                if P:
                    out[(s, t)] = P
        return cls(F.ring, out, (F.lo, G.lo), (F.order, G.order))

    @classmethod
    def in_u(cls, F: USeries):
        return cls(F.ring, {(s, 0): X for s, X in F.coeffs.items()}, (F.lo, 0), (F.order, None))

    @classmethod
    def in_v(cls, G: USeries):
        return cls(G.ring, {(0, t): X for t, X in G.coeffs.items()}, (0, G.lo), (None, G.order))

    @staticmethod
    def _min(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def __add__(self, o):
        out = dict(self.coeffs)
        for st, X in o.coeffs.items():
            out[st] = out[st] + X if st in out else X
        lo = (min(self.lo[0], o.lo[0]), min(self.lo[1], o.lo[1]))
        order = (self._min(self.order[0], o.order[0]), self._min(self.order[1], o.order[1]))
        return BiSeries(self.ring, out, lo, order)

    def __neg__(self):
        return BiSeries(self.ring, {st: -X for st, X in self.coeffs.items()}, self.lo, self.order)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        return BiSeries(self.ring, {st: X.scale(c) for st, X in self.coeffs.items()}, self.lo, self.order)

    def mul_monomial(self, a: int, b: int) -> "BiSeries":
        """Multiply by u^a v^b."""
        ou, ov = self.order
        return BiSeries(
            self.ring,
            {(s - a, t - b): X for (s, t), X in self.coeffs.items()},
            (self.lo[0] - a, self.lo[1] - b),
            (None if ou is None else ou - a, None if ov is None else ov - b),
        )

    def mul_poly(self, poly: Mapping[tuple, object]) -> "BiSeries":
        """Multiply by a polynomial sum c_{a,b} u^a v^b given as a dict."""
        out = None
        for (a, b), c in poly.items():
            term = self.mul_monomial(a, b).scale(c)
            out = term if out is None else out + term
        return out

    def coefficient(self, s, t) -> DiffOp:
        return self.coeffs.get((s, t), self.ring.zero())

    def window_residuals(self, lo=(1, 1)):
        """Nonzero coefficients inside the trusted window."""
        ou, ov = self.order
        return {
            st: X
            for st, X in self.coeffs.items()
            if (ou is None or st[0] <= ou) and (ov is None or st[1] <= ov) and st[0] >= lo[0] and st[1] >= lo[1]
        }
