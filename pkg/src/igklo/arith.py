"""Exact arithmetic over the Gaussian rationals Q(i).

Three layers live here: scalars (rationals, promoted to ``GaussianRational``
only when an imaginary part is present), sparse multivariate polynomials with
packed exponent vectors, and rational functions whose denominators are kept as
products of pairwise coprime monic factors.
"""
from __future__ import annotations

import heapq
import random
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

try:
    from gmpy2 import mpq as _mpq
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _mpq = Fraction

_QT = type(_mpq(0))
RATIONAL_TYPES = (int, Fraction, _QT)


class ArithmeticError_(ArithmeticError):
    pass


class RegistryMismatch(ValueError):
    pass


def Q(x=0, d=None):
    """Coerce ``x`` (or ``x/d``) to the exact rational type in use."""
    if d is not None:
        return _mpq(x, d)
    if isinstance(x, str):
        return _mpq(Fraction(x))
    return _mpq(x)


# ---------------------------------------------------------------- scalars


class GaussianRational:
    """re + im*i with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Q(re)
        self.im = Q(im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, RATIONAL_TYPES):
            return not self.im and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash(self.re) if not self.im else hash((self.re, self.im))

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, o):
        if isinstance(o, GaussianRational):
            return _gauss(self.re + o.re, self.im + o.im)
        if isinstance(o, RATIONAL_TYPES):
            return _gauss(self.re + o, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, GaussianRational):
            return _gauss(self.re - o.re, self.im - o.im)
        if isinstance(o, RATIONAL_TYPES):
            return _gauss(self.re - o, self.im)
        return NotImplemented

    def __rsub__(self, o):
        if isinstance(o, RATIONAL_TYPES):
            return _gauss(o - self.re, -self.im)
        return NotImplemented

    def __mul__(self, o):
        if isinstance(o, GaussianRational):
            return _gauss(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
        if isinstance(o, RATIONAL_TYPES):
            return _gauss(self.re * o, self.im * o)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self):
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("inverse of zero in Q(i)")
        return _gauss(self.re / n, -self.im / n)

    def __truediv__(self, o):
        if isinstance(o, RATIONAL_TYPES):
            if not o:
                raise ZeroDivisionError("division by zero in Q(i)")
            return _gauss(self.re / o, self.im / o)
        if isinstance(o, GaussianRational):
            return self * o.inverse()
        return NotImplemented

    def __rtruediv__(self, o):
        if isinstance(o, RATIONAL_TYPES):
            return self.inverse() * o
        return NotImplemented

    def __pow__(self, e: int):
        return scalar_pow(self, e)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __repr__(self):
        return f"GaussianRational({format_scalar(self)})"

    __str__ = lambda self: format_scalar(self)


I = GaussianRational(0, 1)


def _gauss(re, im):
    if im:
        g = GaussianRational.__new__(GaussianRational)
        g.re = re
        g.im = im
        return g
    return re


def scalar(x):
    """Normalize a user-facing number to the internal scalar representation."""
    if isinstance(x, GaussianRational):
        return _gauss(x.re, x.im)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, complex):
        raise TypeError("floating-point complex values are not exact")
    if isinstance(x, float):
        raise TypeError("floating-point values are not exact")
    return Q(x)


def as_gaussian(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    return GaussianRational(x, 0)


def scalar_inv(x):
    if isinstance(x, GaussianRational):
        return x.inverse()
    if not x:
        raise ZeroDivisionError("inverse of zero in Q(i)")
    return 1 / Q(x)


def scalar_pow(x, e: int):
    if e < 0:
        return scalar_pow(scalar_inv(x), -e)
    result = Q(1)
    base = x
    while e:
        if e & 1:
            result = result * base
        base = base * base
        e >>= 1
    return result


def sqrt_minus_one_power(m: int):
    """Principal square root of (-1)**m: 1 for even m, i for odd m."""
    return I if m % 2 else Q(1)


def format_scalar(x) -> str:
    if isinstance(x, GaussianRational):
        re, im = x.re, x.im
    else:
        re, im = Q(x), Q(0)
    if not im:
        return str(re)
    if im == 1:
        ims = "i"
    elif im == -1:
        ims = "-i"
    else:
        ims = f"{im}*i"
    if not re:
        return ims
    return f"{re}{ims}" if ims.startswith("-") else f"{re}+{ims}"


def parse_scalar(text: str):
    """Parse strings such as ``"3/2"``, ``"-i"``, ``"1/2-3*i"``."""
    t = text.replace(" ", "")
    try:
        if not t.endswith("i"):
            return Q(t)
        body = t[:-1].rstrip("*")
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut > 0:
            re_txt, im_txt = body[:cut], body[cut:]
        else:
            re_txt, im_txt = "0", body
        if im_txt in ("", "+"):
            im = Q(1)
        elif im_txt == "-":
            im = Q(-1)
        else:
            im = Q(im_txt.lstrip("+"))
        return _gauss(Q(re_txt), im)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not an exact Q(i) scalar: {text!r}") from None


def scalar_arith(a, b, op: str) -> GaussianRational:
    """Field operations on Q(i); unary ops act on ``b``."""
    a, b = scalar(a), scalar(b)
    if op == "add":
        r = a + b
    elif op == "mul":
        r = a * b
    elif op == "neg":
        r = -b
    elif op == "inv":
        r = scalar_inv(b)
    else:
        raise ValueError(f"unknown scalar op {op!r}")
    return as_gaussian(r)


# --------------------------------------------------------------- registry

BITS = 16
_MASK = (1 << BITS) - 1


class Variable(NamedTuple):
    name: str
    role: str  # "w", "z" or "aux"
    key: tuple


class VariableRegistry:
    """Ordered, immutable set of indeterminates.

    Earlier variables are more significant in the graded-lexicographic order.
    Monomials are packed into a single int: the total degree sits in the top
    field and each exponent gets ``BITS`` bits below it, so integer comparison
    of packed monomials is exactly grlex comparison.
    """

    __slots__ = ("variables", "_index", "n", "_shifts", "_units", "_deg_shift")

    def __init__(self, variables: Iterable[Variable]):
        self.variables = tuple(variables)
        self._index = {}
        for k, v in enumerate(self.variables):
            if v.name in self._index:
                raise ValueError(f"duplicate variable name {v.name}")
            self._index[v.name] = k
        self.n = len(self.variables)
        self._deg_shift = BITS * self.n
        self._shifts = tuple(BITS * (self.n - 1 - k) for k in range(self.n))
        self._units = tuple((1 << self._deg_shift) | (1 << s) for s in self._shifts)

    @classmethod
    def from_names(cls, names: Sequence[str], role="aux"):
        return cls(Variable(nm, role, (nm,)) for nm in names)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        return self is other or (isinstance(other, VariableRegistry) and self.variables == other.variables)

    def __hash__(self):
        return hash(self.variables)

    def index(self, name) -> int:
        if isinstance(name, int):
            return name
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def names(self):
        return [v.name for v in self.variables]

    def unit(self, k: int) -> int:
        return self._units[k]

    def exponent(self, mono: int, k: int) -> int:
        return (mono >> self._shifts[k]) & _MASK

    def total_degree(self, mono: int) -> int:
        return mono >> self._deg_shift

    def unpack(self, mono: int) -> tuple:
        return tuple((mono >> s) & _MASK for s in self._shifts)

    def pack(self, exps: Sequence[int]) -> int:
        m = 0
        for e, u in zip(exps, self._units):
            if e < 0:
                raise ValueError("negative exponent")
            m += e * u
        return m

    def divides(self, d: int, m: int) -> bool:
        for s in self._shifts:
            if ((m >> s) & _MASK) < ((d >> s) & _MASK):
                return False
        return True

    def support(self, mono: int):
        return [k for k, s in enumerate(self._shifts) if (mono >> s) & _MASK]

    def monomial_str(self, mono: int) -> str:
        parts = []
        for k, s in enumerate(self._shifts):
            e = (mono >> s) & _MASK
            if e == 1:
                parts.append(self.variables[k].name)
            elif e:
                parts.append(f"{self.variables[k].name}^{e}")
        return "*".join(parts)


def w_name(i, r) -> str:
    return f"w_{{{i},{r}}}"


def z_name(i, s) -> str:
    return f"z_{{{i},{s}}}"


def make_registry(w_slots=(), z_slots=(), aux=()) -> VariableRegistry:
    """Registry with w-variables first, then z-variables, then auxiliaries."""
    vs = [Variable(w_name(i, r), "w", (i, r)) for i, r in w_slots]
    vs += [Variable(z_name(i, s), "z", (i, s)) for i, s in z_slots]
    vs += [Variable(a, "aux", (a,)) for a in aux]
    return VariableRegistry(vs)


# ------------------------------------------------------------ polynomials


def _clean(d: dict) -> dict:
    return {m: c for m, c in d.items() if c}


class MultivarPoly:
    """Sparse polynomial over Q(i); immutable."""

    __slots__ = ("reg", "terms", "_hash")

    def __init__(self, reg: VariableRegistry, terms: Mapping[int, object] | None = None, _trusted=False):
        self.reg = reg
        if terms is None:
            self.terms = {}
        elif _trusted:
            self.terms = terms
        else:
            self.terms = {m: scalar(c) for m, c in terms.items() if c}
            self.terms = {m: c for m, c in self.terms.items() if c}
        self._hash = None

    # constructors
    @classmethod
    def const(cls, reg, c):
        c = scalar(c)
        return cls(reg, {0: c} if c else {}, True)

    @classmethod
    def var(cls, reg, name, power=1):
        k = reg.index(name)
        return cls(reg, {power * reg.unit(k): Q(1)}, True)

    @classmethod
    def from_exponents(cls, reg, mapping: Mapping[tuple, object]):
        return cls(reg, {reg.pack(e): c for e, c in mapping.items()})

    @classmethod
    def linear(cls, reg, coeffs: Mapping[str, object], constant=0):
        terms = {}
        for name, c in coeffs.items():
            c = scalar(c)
            if c:
                terms[reg.unit(reg.index(name))] = c
        c0 = scalar(constant)
        if c0:
            terms[0] = c0
        return cls(reg, terms, True)

    def _check(self, other):
        if self.reg is not other.reg and self.reg != other.reg:
            raise RegistryMismatch("polynomials over different registries")

    def _coerce(self, other):
        if isinstance(other, MultivarPoly):
            self._check(other)
            return other
        return MultivarPoly.const(self.reg, other)

    # predicates
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get(0, Q(0))

    def degree(self) -> int:
        if not self.terms:
            return -1
        return self.reg.total_degree(max(self.terms))

    def is_linear(self) -> bool:
        return self.degree() == 1

    def leading_monomial(self) -> int:
        return max(self.terms)

    def leading_coefficient(self):
        return self.terms[max(self.terms)] if self.terms else Q(0)

    def variables_used(self) -> set:
        used = set()
        for m in self.terms:
            used.update(self.reg.support(m))
        return used

    def degree_in(self, k: int) -> int:
        if not self.terms:
            return -1
        return max(self.reg.exponent(m, k) for m in self.terms)

    # arithmetic
    def __neg__(self):
        return MultivarPoly(self.reg, {m: -c for m, c in self.terms.items()}, True)

    def __add__(self, other):
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, c in small.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return MultivarPoly(self.reg, out, True)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        if not isinstance(c, (GaussianRational, _QT)):
            c = scalar(c)
        if not c:
            return MultivarPoly(self.reg, {}, True)
        return MultivarPoly(self.reg, {m: v * c for m, v in self.terms.items()}, True)

    def __mul__(self, other):
        if not isinstance(other, MultivarPoly):
            return self.scale(scalar(other))
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (mb, cb), = b.items()
            if mb == 0:
                if cb == 1:
                    return MultivarPoly(self.reg, a, True)
                return MultivarPoly(self.reg, {m: c * cb for m, c in a.items()}, True)
            return MultivarPoly(self.reg, {m + mb: c * cb for m, c in a.items()}, True)
        out = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = ma + mb
                v = get(m)
                out[m] = ca * cb if v is None else v + ca * cb
        return MultivarPoly(self.reg, _clean(out), True)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of a polynomial")
        result = MultivarPoly.const(self.reg, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MultivarPoly):
            return self.reg == other.reg and self.terms == other.terms
        if isinstance(other, RATIONAL_TYPES + (GaussianRational,)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def monic(self):
        lc = self.leading_coefficient()
        if not lc or lc == 1:
            return self
        return self.scale(scalar_inv(lc))

    # substitution
    def shift_substitute(self, shift: Mapping, *, w_only=True):
        """Apply x -> x + a_x for each entry of ``shift`` (keys: names or indices)."""
        terms = self.terms
        reg = self.reg
        for key, a in shift.items():
            if not a:
                continue
            k = reg.index(key)
            if w_only and reg.variables[k].role != "w":
                raise RegistryMismatch(f"shift_substitute only moves w-variables, got {reg.variables[k].name}")
            a = scalar(a)
            u = reg.unit(k)
            s = reg._shifts[k]
            out = {}
            get = out.get
            for m, c in terms.items():
                e = (m >> s) & _MASK
                if not e:
                    v = get(m)
                    out[m] = c if v is None else v + c
                    continue
                base = m - e * u
                row = _binomial_row(e)
                apow = Q(1)
                for j in range(e, -1, -1):
                    mm = base + j * u
                    t = c * (row[j] * apow)
                    v = get(mm)
                    out[mm] = t if v is None else v + t
                    apow = apow * a
            terms = _clean(out)
        return MultivarPoly(reg, terms, True)

    def eval_at(self, values: Mapping):
        """Substitute exact scalars for a subset of variables."""
        reg = self.reg
        subs = [(reg.index(k), scalar(v)) for k, v in values.items()]
        out = {}
        get = out.get
        for m, c in self.terms.items():
            for k, val in subs:
                e = reg.exponent(m, k)
                if e:
                    c = c * scalar_pow(val, e)
                    m -= e * reg.unit(k)
                    if not c:
                        break
            if not c:
                continue
            v = get(m)
            out[m] = c if v is None else v + c
        return MultivarPoly(reg, _clean(out), True)

    def eval_point(self, point: Sequence):
        """Full evaluation at a point given as a sequence indexed by variable."""
        reg = self.reg
        total = Q(0)
        shifts = reg._shifts
        for m, c in self.terms.items():
            t = c
            for k, s in enumerate(shifts):
                e = (m >> s) & _MASK
                if e:
                    t = t * point[k] ** e
            total = total + t
        return total

    def compose(self, mapping: Mapping):
        """Substitute polynomials for variables."""
        reg = self.reg
        subs = [(reg.index(k), v) for k, v in mapping.items()]
        result = MultivarPoly(reg, {}, True)
        cache = {}
        for m, c in self.terms.items():
            rest = m
            factor = MultivarPoly(reg, {0: c}, True)
            for k, p in subs:
                e = reg.exponent(m, k)
                if e:
                    rest -= e * reg.unit(k)
                    key = (k, e)
                    if key not in cache:
                        cache[key] = p ** e
                    factor = factor * cache[key]
            result = result + factor * MultivarPoly(reg, {rest: Q(1)}, True)
        return result

    # division
    def divmod(self, d: "MultivarPoly"):
        """Multivariate division by ``d`` with respect to grlex."""
        self._check(d)
        if not d.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        reg = self.reg
        ld = max(d.terms)
        lc_inv = scalar_inv(d.terms[ld])
        dterms = [(m, c) for m, c in d.terms.items() if m != ld]
        rem = dict(self.terms)
        heap = [-m for m in rem]
        heapq.heapify(heap)
        quot = {}
        remainder = {}
        while heap:
            m = -heapq.heappop(heap)
            c = rem.pop(m, None)
            if not c:
                continue
            if reg.divides(ld, m):
                qm = m - ld
                qc = c * lc_inv
                quot[qm] = qc
                for dm, dc in dterms:
                    mm = qm + dm
                    v = rem.get(mm)
                    if v is None:
                        rem[mm] = -qc * dc
                        heapq.heappush(heap, -mm)
                    else:
                        rem[mm] = v - qc * dc
            else:
                remainder[m] = c
        return MultivarPoly(reg, _clean(quot), True), MultivarPoly(reg, _clean(remainder), True)

    def exact_div(self, d: "MultivarPoly"):
        q, r = self.divmod(d)
        if r.terms:
            raise ArithmeticError_("inexact polynomial division")
        return q

    def try_div(self, d: "MultivarPoly"):
        q, r = self.divmod(d)
        return None if r.terms else q

    # display
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: -t[0])

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            mono = self.reg.monomial_str(m)
            cs = format_scalar(c)
            if not mono:
                piece = cs
            elif cs == "1":
                piece = mono
            elif cs == "-1":
                piece = "-" + mono
            elif isinstance(c, GaussianRational) and c.re:
                piece = f"({cs})*{mono}"
            else:
                piece = f"{cs}*{mono}"
            pieces.append(piece)
        out = pieces[0]
        for p in pieces[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self):
        return f"MultivarPoly({self})"


_BINOM_CACHE: dict = {}


def _binomial_row(e: int):
    row = _BINOM_CACHE.get(e)
    if row is None:
        row = [1]
        for j in range(e):
            row.append(row[-1] * (e - j) // (j + 1))
        _BINOM_CACHE[e] = row
    return row


def poly_arith(p: MultivarPoly, q, op: str):
    """Dispatch for the polynomial operations exposed to callers.

    ``eval_at`` and ``shift_substitute`` take a mapping as ``q``.
    """
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "eval_at":
        return p.eval_at(q)
    if op == "shift_substitute":
        if any(not isinstance(a, int) for a in q.values()):
            raise ValueError("shift vectors are integral")
        return p.shift_substitute(q)
    raise ValueError(f"unknown polynomial op {op!r}")


# -------------------------------------------------------------------- gcd


def _split_main(p: MultivarPoly, k: int) -> dict:
    """View p as a polynomial in variable k: degree -> coefficient poly."""
    reg = p.reg
    s = reg._shifts[k]
    u = reg.unit(k)
    out: dict = {}
    for m, c in p.terms.items():
        e = (m >> s) & _MASK
        out.setdefault(e, {})[m - e * u] = c
    return {e: MultivarPoly(reg, t, True) for e, t in out.items()}


def _join_main(reg, coeffs: Mapping[int, MultivarPoly], k: int) -> MultivarPoly:
    u = reg.unit(k)
    terms = {}
    for e, c in coeffs.items():
        for m, v in c.terms.items():
            terms[m + e * u] = v
    return MultivarPoly(reg, terms, True)


def poly_gcd(p: MultivarPoly, q: MultivarPoly) -> MultivarPoly:
    """Monic (grlex) gcd via recursive content / primitive-part reduction."""
    p._check(q)
    if not p.terms:
        return q.monic()
    if not q.terms:
        return p.monic()
    return _gcd(p, q).monic()


def _gcd(p: MultivarPoly, q: MultivarPoly) -> MultivarPoly:
    reg = p.reg
    if p.is_constant() or q.is_constant():
        return MultivarPoly.const(reg, 1)
    if len(q.terms) == 1 or len(p.terms) == 1:
        return _monomial_gcd(p, q)
    vars_p, vars_q = p.variables_used(), q.variables_used()
    common = vars_p & vars_q
    if not common:
        return MultivarPoly.const(reg, 1)
    k = min(common)
    pc = _split_main(p, k)
    qc = _split_main(q, k)
    cont_p = _content(pc.values())
    cont_q = _content(qc.values())
    cont = _gcd(cont_p, cont_q)
    pp = {e: c.exact_div(cont_p) for e, c in pc.items()}
    qp = {e: c.exact_div(cont_q) for e, c in qc.items()}
    if max(pp) < max(qp):
        pp, qp = qp, pp
    while max(qp) > 0:
        r = _prem(pp, qp)
        if not r:
            break
        cr = _content(r.values())
        pp, qp = qp, {e: c.exact_div(cr) for e, c in r.items()}
    else:
        # qp became free of the main variable: gcd of primitive parts is 1
        return cont
    g = _join_main(reg, qp, k)
    return cont * g


def _monomial_gcd(p, q):
    reg = p.reg
    if len(p.terms) != 1:
        p, q = q, p
    (mp,) = p.terms
    exps = list(reg.unpack(mp))
    for m in q.terms:
        e2 = reg.unpack(m)
        exps = [min(a, b) for a, b in zip(exps, e2)]
    return MultivarPoly(reg, {reg.pack(exps): Q(1)}, True)


def _content(coeffs: Iterable[MultivarPoly]) -> MultivarPoly:
    g = None
    for c in coeffs:
        if not c.terms:
            continue
        g = c.monic() if g is None else _gcd(g, c).monic()
        if g.is_constant():
            return MultivarPoly.const(c.reg, 1)
    return g


def _prem(a: dict, b: dict) -> dict:
    """Pseudo-remainder of a by b (dicts degree -> coefficient poly)."""
    db = max(b)
    lb = b[db]
    a = {e: c for e, c in a.items() if c.terms}
    while a and max(a) >= db:
        da = max(a)
        la = a[da]
        shift = da - db
        new = {e: c * lb for e, c in a.items()}
        for e, c in b.items():
            t = new.get(e + shift)
            prod = c * la
            new[e + shift] = -prod if t is None else t - prod
        a = {e: c for e, c in new.items() if c.terms}
    return a


# ----------------------------------------------------- rational functions


_PROBE_RNG = random.Random(20240531)


_PRIME = (1 << 61) - 1
_RESIDUES: dict = {}


def _residue(c):
    r = _RESIDUES.get(c)
    if r is None:
        if len(_RESIDUES) > 200000:
            _RESIDUES.clear()
        if isinstance(c, GaussianRational):
            r = (_residue(c.re)[0], _residue(c.im)[0])
        else:
            d = int(c.denominator)
            n = int(c.numerator) % _PRIME
            r = (n if d == 1 else n * pow(d, -1, _PRIME) % _PRIME, 0)
        _RESIDUES[c] = r
    return r


class _Probe:
    """Random points mod a large prime used to reject non-divisibility quickly."""

    _points: dict = {}

    @classmethod
    def point(cls, reg: VariableRegistry):
        pt = cls._points.get(reg)
        if pt is None:
            pt = [_PROBE_RNG.randrange(2, _PRIME) for _ in range(reg.n)]
            cls._points[reg] = pt
        return pt


def _eval_mod(poly: MultivarPoly, point: Sequence):
    """Real and imaginary parts of poly(point) mod a prime, with power caches."""
    P = _PRIME
    shifts = poly.reg._shifts
    cache = [{1: x} for x in point]
    re = im = 0
    for m, c in poly.terms.items():
        t = 1
        for k, s in enumerate(shifts):
            e = (m >> s) & _MASK
            if e:
                pk = cache[k]
                v = pk.get(e)
                if v is None:
                    v = pk[e] = pow(point[k], e, P)
                t = t * v % P
        a, b = _residue(c)
        re += t * a
        if b:
            im += t * b
    return re % P, im % P


def _linear_divides(f: MultivarPoly, num: MultivarPoly):
    """Quotient num/f for a monic linear f, or None when f does not divide."""
    reg = num.reg
    lead = max(f.terms)
    k = reg.support(lead)[0]
    if not num.degree_in(k):
        return None
    rest = MultivarPoly(reg, {m: c for m, c in f.terms.items() if m != lead}, True)
    if not any(isinstance(c, GaussianRational) for c in f.terms.values()):
        # a probe point on the hyperplane f = 0; nonzero there (mod p) proves f does not divide
        pt = list(_Probe.point(reg))
        pt[k] = 0
        r, _ = _eval_mod(rest, pt)
        pt[k] = -r * pow(_residue(f.terms[lead])[0], -1, _PRIME) % _PRIME
        if _eval_mod(num, pt) != (0, 0):
            return None
    return num.try_div(f)


def _expand(factors: Mapping[MultivarPoly, int], reg) -> MultivarPoly:
    out = MultivarPoly.const(reg, 1)
    for f, e in sorted(factors.items(), key=lambda t: str(t[0])):
        out = out * f ** e
    return out


def _refine(pairs: list) -> dict:
    """Turn a list of (monic factor, exponent) into a coprime basis dict."""
    basis: dict = {}
    work = [(f, e) for f, e in pairs if e and not f.is_constant()]
    while work:
        f, e = work.pop()
        if f in basis:
            basis[f] += e
            continue
        split = False
        for h in list(basis):
            if f.is_linear() and h.is_linear():
                continue
            g = poly_gcd(f, h)
            if g.is_constant():
                continue
            k = basis.pop(h)
            work.append((g, e + k))
            fo = f.exact_div(g).monic()
            ho = h.exact_div(g).monic()
            if not fo.is_constant():
                work.append((fo, e))
            if not ho.is_constant():
                work.append((ho, k))
            split = True
            break
        if not split:
            basis[f] = e
    return basis


def _cancel(num: MultivarPoly, basis: dict):
    """Divide out common factors; returns (num, basis) with gcd 1."""
    if not num.terms:
        return num, {}
    out = {}
    work = list(basis.items())
    while work:
        f, e = work.pop()
        while e:
            if f.is_linear():
                q = _linear_divides(f, num)
                if q is None:
                    break
                num = q
                e -= 1
                continue
            g = poly_gcd(num, f)
            if g.is_constant():
                break
            if g == f:
                num = num.exact_div(f)
                e -= 1
                continue
            h = f.exact_div(g).monic()
            sub = _refine([(g, e), (h, e)])
            work.extend(sub.items())
            e = 0
        if e:
            out[f] = out.get(f, 0) + e
    if len(out) > 1 and any(not f.is_linear() for f in out):
        out = _refine(list(out.items()))
    return num, out


class RationalFunction:
    """num / prod(f**e) with monic, pairwise coprime denominator factors."""

    __slots__ = ("num", "den", "_hash", "_den_poly")

    def __init__(self, num: MultivarPoly, den: Mapping[MultivarPoly, int] | None = None, _trusted=False):
        self.num = num
        self.den = dict(den) if den else {}
        self._hash = None
        self._den_poly = None
        if not _trusted:
            self._normalize()

    def _normalize(self):
        pairs = []
        for f, e in self.den.items():
            if e < 0:
                raise ValueError("negative denominator exponent")
            if f.is_zero():
                raise ZeroDivisionError("zero denominator")
            lc = f.leading_coefficient()
            if lc != 1:
                self.num = self.num.scale(scalar_inv(scalar_pow(lc, e)))
                f = f.monic()
            if f.is_constant():
                continue
            pairs.append((f, e))
        basis = _refine(pairs)
        self.num, self.den = _cancel(self.num, basis)

    # constructors
    @property
    def reg(self):
        return self.num.reg

    @classmethod
    def const(cls, reg, c):
        return cls(MultivarPoly.const(reg, c), None, True)

    @classmethod
    def from_poly(cls, p: MultivarPoly):
        return cls(p, None, True)

    @classmethod
    def from_parts(cls, num: MultivarPoly, den: MultivarPoly):
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if den.is_constant():
            return cls(num.scale(scalar_inv(den.constant_value())), None, True)
        return cls(num, {den: 1})

    @classmethod
    def from_factors(cls, num: MultivarPoly, factors: Iterable[tuple]):
        den: dict = {}
        for f, e in factors:
            den[f] = den.get(f, 0) + e
        return cls(num, den)

    # predicates
    def is_zero(self):
        return not self.num.terms

    def __bool__(self):
        return bool(self.num.terms)

    def is_polynomial(self):
        return not self.den

    def is_scalar(self):
        return not self.den and self.num.is_constant()

    def scalar_value(self):
        if not self.is_scalar():
            raise ValueError("rational function is not a scalar")
        return self.num.constant_value()

    def denominator(self) -> MultivarPoly:
        if self._den_poly is None:
            self._den_poly = _expand(self.den, self.reg)
        return self._den_poly

    # arithmetic
    def _coerce(self, o):
        if isinstance(o, RationalFunction):
            self.num._check(o.num)
            return o
        if isinstance(o, MultivarPoly):
            return RationalFunction(o, None, True)
        return RationalFunction.const(self.reg, o)

    def __neg__(self):
        return RationalFunction(-self.num, self.den, True)

    def __add__(self, o):
        o = self._coerce(o)
        if not o.num.terms:
            return self
        if not self.num.terms:
            return o
        if self.den == o.den:
            if not self.den:
                return RationalFunction(self.num + o.num, None, True)
            num, den = _cancel(self.num + o.num, self.den)
            return RationalFunction(num, den, True)
        if _all_linear(self.den) and _all_linear(o.den):
            basis = dict(self.den)
            for f, e in o.den.items():
                if basis.get(f, 0) < e:
                    basis[f] = e
        else:
            basis = _refine(list(self.den.items()) + list(o.den.items()))
            basis = {f: 0 for f in basis}
            for f in basis:
                basis[f] = max(_multiplicity(f, self.den), _multiplicity(f, o.den))
        n1 = self.num * _expand(_quotient_exps(basis, self.den), self.reg)
        n2 = o.num * _expand(_quotient_exps(basis, o.den), self.reg)
        num, den = _cancel(n1 + n2, basis)
        return RationalFunction(num, den, True)

    __radd__ = __add__

    def __sub__(self, o):
        return self + (-self._coerce(o))

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __mul__(self, o):
        if not isinstance(o, (RationalFunction, MultivarPoly)):
            c = scalar(o)
            if not c:
                return RationalFunction.const(self.reg, 0)
            return RationalFunction(self.num.scale(c), self.den, True)
        o = self._coerce(o)
        if not self.num.terms or not o.num.terms:
            return RationalFunction.const(self.reg, 0)
        if not self.den and not o.den:
            return RationalFunction(self.num * o.num, None, True)
        # both factors are reduced, so only cross cancellations can occur
        a, d_o = _cancel(self.num, o.den) if o.den and not self.num.is_constant() else (self.num, o.den)
        c, d_s = _cancel(o.num, self.den) if self.den and not o.num.is_constant() else (o.num, self.den)
        num = a * c
        if not d_s or not d_o:
            return RationalFunction(num, dict(d_s or d_o), True)
        if _all_linear(d_s) and _all_linear(d_o):
            den = dict(d_s)
            for f, e in d_o.items():
                den[f] = den.get(f, 0) + e
            return RationalFunction(num, den, True)
        den = _refine(list(d_s.items()) + list(d_o.items()))
        num, den = _cancel(num, den)
        return RationalFunction(num, den, True)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num.terms:
            raise ZeroDivisionError("inverse of the zero rational function")
        new_num = self.denominator()
        lc = self.num.leading_coefficient()
        new_num = new_num.scale(scalar_inv(lc))
        f = self.num.monic()
        if f.is_constant():
            return RationalFunction(new_num, None, True)
        # num/den was reduced, so den/num is reduced as well
        return RationalFunction(new_num, {f: 1}, True)

    def __truediv__(self, o):
        return self * self._coerce(o).inverse()

    def __rtruediv__(self, o):
        return self._coerce(o) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        num = self.num ** e
        return RationalFunction(num, {f: k * e for f, k in self.den.items()}, True)

    def shift_substitute(self, shift: Mapping):
        if not shift:
            return self
        num = self.num.shift_substitute(shift)
        den = {f.shift_substitute(shift): e for f, e in self.den.items()}
        return RationalFunction(num, den, True)

    def eval_at(self, values: Mapping):
        num = self.num.eval_at(values)
        den = self.denominator().eval_at(values)
        return RationalFunction.from_parts(num, den)

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return (self - other).is_zero()
        if isinstance(other, MultivarPoly):
            return not self.den and self.num == other
        if isinstance(other, RATIONAL_TYPES + (GaussianRational,)):
            return self.is_scalar() and self.scalar_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.denominator()))
        return self._hash

    def __str__(self):
        if not self.den:
            return str(self.num)
        n = str(self.num)
        d = str(self.denominator())
        if len(self.num.terms) > 1:
            n = f"({n})"
        return f"{n}/({d})"

    def __repr__(self):
        return f"RationalFunction({self})"


def rf_sum(items) -> RationalFunction:
    """Sum of several rational functions with a single cancellation pass."""
    items = [f for f in items if f.num.terms]
    if not items:
        raise ValueError("rf_sum needs at least one nonzero term; use RationalFunction.const")
    if len(items) == 1:
        return items[0]
    reg = items[0].reg
    if not all(_all_linear(f.den) for f in items):
        out = items[0]
        for f in items[1:]:
            out = out + f
        return out
    basis: dict = {}
    for f in items:
        for h, e in f.den.items():
            if basis.get(h, 0) < e:
                basis[h] = e
    num = MultivarPoly.const(reg, 0)
    for f in items:
        num = num + f.num * _expand(_quotient_exps(basis, f.den), reg)
    if not basis:
        return RationalFunction(num, None, True)
    num, den = _cancel(num, basis)
    return RationalFunction(num, den, True)


def _all_linear(den):
    for f in den:
        if not f.is_linear():
            return False
    return True


def _multiplicity(f, den):
    if f in den:
        return den[f]
    # f is a piece of a refined basis: count how often it divides the product
    total = 0
    for h, e in den.items():
        k = 0
        rest = h
        while True:
            q = rest.try_div(f)
            if q is None:
                break
            k += 1
            rest = q
        total += k * e
    return total


def _quotient_exps(basis, den):
    return {f: e - _multiplicity(f, den) for f, e in basis.items() if e - _multiplicity(f, den)}


def ratfun_arith(f: RationalFunction, g: RationalFunction | None, op: str):
    """Dispatch for rational-function operations; unary ops act on ``g``."""
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    if op == "inv":
        return g.inverse()
    if op == "is_zero":
        return (g if g is not None else f).is_zero()
    raise ValueError(f"unknown rational-function op {op!r}")
