"""Polynomial kits, chi-coefficients and the images of the generators.

All polynomials in u are kept as root multisets so that every evaluation
produces products of linear factors; this keeps denominators factored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, NamedTuple

from .arith import (
    Q,
    MultivarPoly,
    RationalFunction,
    make_registry,
    scalar,
    scalar_inv,
    scalar_pow,
    sqrt_minus_one_power,
)
from .diffalg import DiffOp, DiffRing, UPoleForm, URational
from .satake import ConfigError, GkloData, build_diagram, cartan_matrix, derive_parameters

HALF = Q(1, 2)


class OutsideWindow(LookupError):
    """A mode outside the validity window of a generator model."""


# ------------------------------------------------------------ factor products


class FactorProduct:
    """c * prod f^e over monic polynomials f, exponents of either sign."""

    __slots__ = ("reg", "coeff", "factors")

    def __init__(self, reg, coeff=1, factors=None):
        self.reg = reg
        self.coeff = scalar(coeff)
        self.factors = dict(factors or {})

    def mul_linear(self, f: MultivarPoly, e: int = 1):
        """Multiply by f^e (f of degree <= 1 in the registry variables)."""
        if not e:
            return self
        if f.is_constant():
            c = f.constant_value()
            if not c:
                if e < 0:
                    raise ZeroDivisionError("factor vanishes identically")
                self.coeff = scalar(0)
            else:
                self.coeff = self.coeff * scalar_pow(c, e)
            return self
        lc = f.leading_coefficient()
        if lc != 1:
            self.coeff = self.coeff * scalar_pow(lc, e)
            f = f.monic()
        k = self.factors.get(f, 0) + e
        if k:
            self.factors[f] = k
        else:
            self.factors.pop(f, None)
        return self

    def mul(self, other: "FactorProduct", e: int = 1):
        self.coeff = self.coeff * scalar_pow(other.coeff, e)
        for f, k in other.factors.items():
            self.mul_linear(f, k * e)
        return self

    def scale(self, c):
        self.coeff = self.coeff * scalar(c)
        return self

    def to_rf(self) -> RationalFunction:
        if not self.coeff:
            return RationalFunction.const(self.reg, 0)
        num = MultivarPoly.const(self.reg, self.coeff)
        den = []
        for f, k in self.factors.items():
            if k > 0:
                num = num * f ** k
            else:
                den.append((f, -k))
        if not den:
            return RationalFunction.from_poly(num)
        return RationalFunction.from_factors(num, den)


# ------------------------------------------------------------------ RootSet


class RootSet:
    """lead * prod (u - a)^m with integer multiplicities (a monic 'polynomial')."""

    __slots__ = ("reg", "roots", "lead")

    def __init__(self, reg, roots=None, lead=1):
        self.reg = reg
        self.lead = scalar(lead)
        out: dict = {}
        items = roots.items() if isinstance(roots, Mapping) else ((a, 1) for a in (roots or ()))
        for a, m in items:
            a = a if isinstance(a, MultivarPoly) else MultivarPoly.const(reg, a)
            out[a] = out.get(a, 0) + m
        self.roots = {a: m for a, m in out.items() if m}

    @classmethod
    def one(cls, reg):
        return cls(reg, {})

    def __mul__(self, o: "RootSet"):
        r = dict(self.roots)
        for a, m in o.roots.items():
            r[a] = r.get(a, 0) + m
        return RootSet(self.reg, r, self.lead * o.lead)

    def __pow__(self, e: int):
        return RootSet(self.reg, {a: m * e for a, m in self.roots.items()}, scalar_pow(self.lead, e))

    def inverse(self):
        return self ** -1

    def degree(self) -> int:
        return sum(self.roots.values())

    def minus(self) -> "RootSet":
        """f^-(u): the monic polynomial with opposite roots."""
        return RootSet(self.reg, {-a: m for a, m in self.roots.items()}, self.lead)

    def shifted(self, c) -> "RootSet":
        """Root set of f(u - c): roots a + c."""
        c = MultivarPoly.const(self.reg, c) if not isinstance(c, MultivarPoly) else c
        return RootSet(self.reg, {a + c: m for a, m in self.roots.items()}, self.lead)

    def at(self, x) -> FactorProduct:
        x = x if isinstance(x, MultivarPoly) else MultivarPoly.const(self.reg, x)
        fp = FactorProduct(self.reg, self.lead)
        for a, m in self.roots.items():
            fp.mul_linear(x - a, m)
        return fp

    def urational(self) -> URational:
        num = [a for a, m in self.roots.items() if m > 0 for _ in range(m)]
        den = [a for a, m in self.roots.items() if m < 0 for _ in range(-m)]
        return URational.from_factors(self.reg, num, den, self.lead)

    def __eq__(self, o):
        return isinstance(o, RootSet) and self.roots == o.roots and self.lead == o.lead

    __hash__ = None

    def __str__(self):
        parts = [f"(u-({a}))" + (f"^{m}" if m != 1 else "") for a, m in sorted(self.roots.items(), key=lambda t: str(t[0]))]
        return "*".join(parts) or "1"


def kappa_bold(reg, c=0) -> RootSet:
    """Bold kappa(u - c) = (u-c-1/2)(u-c+1/2)/(u-c)^2."""
    c = scalar(c)
    return RootSet(reg, {c + HALF: 1, c - HALF: 1, c: -2})


def kappa_plain_at(reg, x, power: int) -> FactorProduct:
    """kappa(x)^power with kappa(x) = 1 - 1/(2x) = (x - 1/2)/x."""
    fp = FactorProduct(reg)
    fp.mul_linear(x - HALF, power)
    fp.mul_linear(x, -power)
    return fp


# ------------------------------------------------------------ PolynomialKit


class PolynomialKit:
    """Per-node polynomials W, bold W, W circ, W_{i,r}, W diamond, W bar, Z, bold Z, Z bar."""

    def __init__(self, g: GkloData, ring: DiffRing, z_split: Mapping[int, list] | None = None):
        self.g = g
        self.ring = ring
        self.reg = ring.reg
        d = g.diagram
        self.d = d
        self.W: dict = {}
        self.Wb: dict = {}
        self.Wo: dict = {}
        self.Wr: dict = {}
        self.Wd: dict = {}
        self.Wbar: dict = {}
        self.Z: dict = {}
        self.Zb: dict = {}
        self.Zbar: dict = {}
        reg = self.reg
        z_split = {int(k): list(v) for k, v in (z_split or {}).items()}
        for i in d.nodes:
            fv = g.node("fv", i)
            fw = g.node("fw", i)
            ws = [self.w(i, r) for r in range(1, fv + 1)]
            zs = [self.z(i, s) for s in range(1, fw + 1)]
            if d.t(i) == i:
                th = g.node("theta", i)
                vs = g.node("varsigma", i)
                zero = MultivarPoly.const(reg, 0)
                pm = {}
                for a in ws:
                    pm[a] = pm.get(a, 0) + 1
                    pm[-a] = pm.get(-a, 0) + 1
                self.W[i] = RootSet(reg, ws)
                self.Z[i] = RootSet(reg, zs)
                self.Wo[i] = RootSet(reg, pm)
                self.Wb[i] = RootSet(reg, {zero: th}) * self.Wo[i]
                zpm = {zero: vs}
                for a in zs:
                    zpm[a] = zpm.get(a, 0) + 1
                    zpm[-a] = zpm.get(-a, 0) + 1
                self.Zb[i] = RootSet(reg, zpm)
                self.Wbar[i] = RootSet(reg, {zero: th}) * self.W[i].minus()
                self.Zbar[i] = RootSet(reg, {zero: vs}) * self.Z[i].minus()
                for r in range(1, fv + 1):
                    rest = RootSet(reg, {zero: th}) * RootSet(
                        reg, [x for s, a in enumerate(ws, 1) if s != r for x in (a, -a)]
                    )
                    self.Wd[(i, r)] = rest
                    self.Wr[(i, r)] = rest * RootSet(reg, [-ws[r - 1]])
            else:
                zeta = g.zeta[i]
                self.W[i] = RootSet(reg, ws[:zeta])
                self.Wb[i] = RootSet(reg, ws)
                self.Wo[i] = self.Wb[i]
                self.Zb[i] = RootSet(reg, zs)
                for r in range(1, fv + 1):
                    self.Wr[(i, r)] = RootSet(reg, [a for s, a in enumerate(ws, 1) if s != r])
                    self.Wd[(i, r)] = self.Wr[(i, r)]
        # Z_i for non-fixed nodes: which z-roots of bold Z_i go to Z_i (i in I1)
        for i in d.I1:
            fw = g.node("fw", i)
            chosen = z_split.pop(i, list(range(1, fw + 1)))
            if any(not 1 <= s <= fw for s in chosen) or len(set(chosen)) != len(chosen):
                raise ConfigError(f"z_split for node {i} must list distinct indices in 1..{fw}")
            ti = d.t(i)
            self.Z[i] = RootSet(reg, [self.z(i, s) for s in chosen])
            self.Z[ti] = RootSet(reg, [self.z(ti, s) for s in range(1, fw + 1) if s not in chosen])
        if z_split:
            raise ConfigError(f"z_split only applies to I1 nodes, got {sorted(z_split)}")
        for i in d.nodes:
            if d.t(i) != i:
                self.Zbar[i] = self.Z[i].minus()
                self.Wbar[i] = self.W[i].minus()

    # aliased variables
    def w(self, i, r) -> MultivarPoly:
        d = self.d
        if d.t(i) >= i:
            return self.ring.wpoly(i, r)
        ti = d.t(i)
        return -self.ring.wpoly(ti, self.g.node("fv", ti) + 1 - r)

    def z(self, i, s) -> MultivarPoly:
        d = self.d
        if d.t(i) >= i:
            return MultivarPoly.var(self.reg, f"z_{{{i},{s}}}")
        return -MultivarPoly.var(self.reg, f"z_{{{d.t(i)},{s}}}")

    def shift_key(self, i, r, power=1) -> tuple:
        d = self.d
        if d.t(i) >= i:
            return self.ring.shift_key(i, r, power)
        ti = d.t(i)
        return self.ring.shift_key(ti, self.g.node("fv", ti) + 1 - r, -power)

    def shift(self, i, r, power=1) -> DiffOp:
        return DiffOp(self.ring, {self.shift_key(i, r, power): self.ring.rf(1)})


def registry_for(g: GkloData, aux=()):
    d = g.diagram
    w_slots = [(i, r) for i in d.iI for r in range(1, g.node("fv", i) + 1)]
    z_slots = [(i, s) for i in d.iI for s in range(1, g.node("fw", i) + 1)]
    return make_registry(w_slots, z_slots, aux)


def build_polynomials(g: GkloData, z_split=None, ring: DiffRing | None = None) -> PolynomialKit:
    ring = ring or DiffRing(registry_for(g))
    return PolynomialKit(g, ring, z_split)


# --------------------------------------------------------------------- chi


class ChiTerm(NamedTuple):
    node: int
    sign: str  # "+" or "-"
    r: int
    loc: RationalFunction  # B_i(u) contains X / (u - loc)
    op: DiffOp


def _sqrt_sign(g: GkloData, i: int, sum_range: str) -> object:
    d = g.diagram
    if sum_range == "literal":
        nb = [j for j in d.neighbours(i) if j in d.iI]
    else:
        nb = d.neighbours(i)
    e = g.node("fw", i) + sum(g.node("fv", j) for j in nb)
    return sqrt_minus_one_power(e)


def sqrt_range_differs(g: GkloData, i: int) -> bool:
    a = _sqrt_sign(g, i, "literal")
    b = _sqrt_sign(g, i, "all")
    return a != b


def build_chi(g: GkloData, kit: PolynomialKit, z_placement="split", sqrt_sum="literal") -> dict:
    """chi-terms per node for the quasi-split images (split included as tau = id).

    z_placement "split" puts Z_i in the first sum and Z bar^- in the second;
    "second" puts all of bold Z_i into the second sum.
    """
    d = g.diagram
    reg = kit.reg
    ring = kit.ring
    out = {}
    for i in d.nodes:
        terms = []
        fv = g.node("fv", i)
        into = g.into(i)
        outof = g.out_of(i)
        if d.t(i) == i:
            vt = g.node("vartheta", i)
            for r in range(1, fv + 1):
                w = kit.w(i, r)
                # first sum: shift d^{-1}, pole at w - 1/2
                x = w - HALF
                fp = kappa_plain_at(reg, w, -vt).scale(-1)
                if z_placement == "split":
                    fp.mul(kit.Z[i].at(x))
                for j in into:
                    fp.mul(kit.Wb[j].at(x))
                for j in outof:
                    if d.t(j) == j:
                        fp.mul(kit.Wbar[j].at(x))
                fp.mul(kit.Wr[(i, r)].at(w), -1)
                op = DiffOp(ring, {kit.shift_key(i, r, -1): fp.to_rf()})
                terms.append(ChiTerm(i, "+", r, ring.rf(x), op))
                # second sum: shift d, pole at -w - 1/2
                x = w + HALF
                fp = kappa_plain_at(reg, -w, -vt).scale(-1)
                if z_placement == "split":
                    fp.mul(kit.Zbar[i].at(x))
                else:
                    fp.mul(kit.Zb[i].at(x))
                for j in into:
                    if d.t(j) != j:
                        fp.mul(kit.Wb[j].at(x))
                for j in outof:
                    if d.t(j) == j:
                        fp.mul(kit.W[j].at(x))
                fp.mul(kit.Wr[(i, r)].at(w), -1)
                op = DiffOp(ring, {kit.shift_key(i, r, 1): fp.to_rf()})
                terms.append(ChiTerm(i, "-", r, ring.rf(-x), op))
            if g.node("theta", i):
                fp = FactorProduct(reg, _sqrt_sign(g, i, sqrt_sum))
                fp.mul(kit.Z[i].at(0))
                fp.mul(kit.Wo[i].at(HALF), -1)
                for j in d.neighbours(i):
                    fp.mul(kit.W[j].at(0))
                terms.append(ChiTerm(i, "+", 0, ring.rf(0), ring.scalar(fp.to_rf())))
        else:
            ti = d.t(i)
            for r in range(1, g.zeta[i] + 1):
                w = kit.w(i, r)
                x = w - HALF
                fp = FactorProduct(reg, -1)
                fp.mul(kit.Z[i].at(x))
                for j in into:
                    fp.mul(kit.Wb[j].at(x))
                fp.mul(kit.Wr[(i, r)].at(w), -1)
                op = DiffOp(ring, {kit.shift_key(i, r, -1): fp.to_rf()})
                terms.append(ChiTerm(i, "+", r, ring.rf(x), op))
            for r in range(1, g.zeta[ti] + 1):
                w = kit.w(ti, r)
                x = w + HALF
                fp = FactorProduct(reg, -1)
                fp.mul(kit.Z[i].minus().at(x))
                for j in d.neighbours(i):
                    if g.arrow(ti, d.t(j)):
                        fp.mul(kit.Wb[d.t(j)].at(x))
                fp.mul(kit.Wr[(ti, r)].at(w), -1)
                op = DiffOp(ring, {kit.shift_key(ti, r, 1): fp.to_rf()})
                # aliased index r' = frak v + 1 - r on node i
                terms.append(ChiTerm(i, "+", fv + 1 - r, ring.rf(-x), op))
        out[i] = terms
    return out


def sabotage_chi(chi: dict) -> tuple:
    """Negate one chi-term of a node with at least two terms, else double a single one."""
    for i in sorted(chi):
        if len(chi[i]) >= 2:
            t = chi[i][0]
            chi[i] = [t._replace(op=-t.op)] + chi[i][1:]
            return i, "negate", (t.sign, t.r)
    for i in sorted(chi):
        if chi[i]:
            t = chi[i][0]
            chi[i] = [t._replace(op=t.op.scale(2))] + chi[i][1:]
            return i, "double", (t.sign, t.r)
    return None


def chi_poleform(ring: DiffRing, terms, shift=0) -> UPoleForm:
    """sum X / (u - loc + shift): the exact form of B(u) (or E(u)) from chi-terms."""
    poles = {}
    sh = ring.rf(shift)
    for t in terms:
        key = (t.loc - sh, 1)
        poles[key] = poles[key] + t.op if key in poles else t.op
    return UPoleForm(ring, [], poles)


# -------------------------------------------------------------- mode tables


@dataclass
class ModeTable:
    """Modes X^{(r)} for lo <= r <= hi; below lo the modes vanish when zero_below."""

    lo: int
    hi: int
    getter: Callable
    zero_below: bool = True
    exact: object = None  # URational or UPoleForm when known exactly
    scalar_valued: bool = False
    _cache: dict = field(default_factory=dict)

    def get(self, r):
        X = self._cache.get(r)
        if X is None:
            X = self.getter(r)
            self._cache[r] = X
        return X


def pole_mode_getter(ring: DiffRing, poles: list):
    """Modes of sum X/(u - a): the u^{-s} coefficient is sum a^{s-1} X."""
    powers = [{0: ring.rf(1)} for _ in poles]

    def get(s):
        acc = ring.zero()
        for k, (a, X) in enumerate(poles):
            pw = powers[k]
            if s - 1 not in pw:
                top = max(pw)
                for e in range(top + 1, s):
                    pw[e] = pw[e - 1] * a
            acc = acc + X.scale(pw[s - 1])
        return acc

    return get


def urational_mode_getter(ring: DiffRing, R: URational, hi: int):
    cache = {}

    def get(r):
        if not cache:
            cache.update(R.expand(hi))
        c = cache.get(r)
        return ring.scalar(c) if c is not None else ring.zero()

    return get


class GeneratorModel:
    """Mode tables for the images of the generators of one instance."""

    def __init__(self, ring: DiffRing, kind: str, cartan, tau, mu, N: int, provenance: str, info=None):
        self.ring = ring
        self.kind = kind  # "quasisplit", "gl" or "drinfeld"
        self.cartan = tuple(tuple(r) for r in cartan)
        self.tau = tuple(tau)
        self.mu = tuple(mu)
        self.N = N
        self.provenance = provenance
        self.info = dict(info or {})
        self.tables: dict = {}

    @property
    def nodes(self):
        return range(1, len(self.cartan) + 1)

    def c(self, i, j):
        return self.cartan[i - 1][j - 1]

    def t(self, i):
        return self.tau[i - 1]

    def add(self, family, node, table: ModeTable):
        self.tables[(family, node)] = table

    def table(self, family, node) -> ModeTable:
        return self.tables[(family, node)]

    def window(self, family, node):
        t = self.tables[(family, node)]
        return t.lo, t.hi

    def has(self, family, node, r) -> bool:
        t = self.tables[(family, node)]
        return r <= t.hi and (r >= t.lo or t.zero_below)

    def mode(self, family, node, r) -> DiffOp:
        t = self.tables[(family, node)]
        if r > t.hi:
            raise OutsideWindow(f"{family}_{node}^({r}) above window {t.hi}")
        if r < t.lo:
            if t.zero_below:
                return self.ring.zero()
            raise OutsideWindow(f"{family}_{node}^({r}) below window {t.lo}")
        return t.get(r)

    def exact(self, family, node):
        return self.tables[(family, node)].exact

    def mode_json(self, family, node, lo, hi) -> dict:
        out = {}
        for r in range(lo, hi + 1):
            try:
                out[str(r)] = self.mode(family, node, r).to_json()
            except OutsideWindow:
                out[str(r)] = "outside validity window"
        return out


# ----------------------------------------------------- quasi-split images


def h_rootset_quasisplit(g: GkloData, kit: PolynomialKit, i: int) -> RootSet:
    reg = kit.reg
    d = g.diagram
    wp = g.node("wp", i)
    R = RootSet(reg, {scalar(-Fraction(wp, 4)) if wp else 0: 1}) * RootSet(reg, {0: -1})
    R = R * kappa_bold(reg) ** g.node("vartheta", i)
    R = R * kit.Zb[i]
    R = R * kit.Wb[i].shifted(HALF).inverse() * kit.Wb[i].shifted(-HALF).inverse()
    for j in d.neighbours(i):
        R = R * kit.Wb[j]
    return R


def image_quasisplit(
    g: GkloData,
    N: int = 8,
    z_split=None,
    z_placement="split",
    sqrt_sum="literal",
    sabotage=False,
    provenance="direct",
) -> GeneratorModel:
    ring = DiffRing(registry_for(g))
    kit = build_polynomials(g, z_split, ring)
    chi = build_chi(g, kit, z_placement, sqrt_sum)
    info = {"zeta_flags": list(g.flags)}
    if sabotage:
        info["sabotage"] = sabotage_chi(chi)
    d = g.diagram
    flags = [i for i in d.I0 if g.node("theta", i) and sqrt_range_differs(g, i)]
    if flags:
        info["sqrt_range_differs_at"] = flags
    model = GeneratorModel(ring, "quasisplit", d.cartan, d.tau, g.mu, N, provenance, info)
    model.kit = kit
    model.chi = chi
    model.data = g
    for i in d.nodes:
        R = h_rootset_quasisplit(g, kit, i).urational()
        lo = -g.node("mu", i)
        model.add("H", i, ModeTable(lo, 2 * N + 2, urational_mode_getter(ring, R, 2 * N + 2), True, R, True))
        poles = [(t.loc, t.op) for t in chi[i]]
        model.add("B", i, ModeTable(1, N, pole_mode_getter(ring, poles), False, chi_poleform(ring, chi[i])))
    return model


def instance(cartan_kind: str, rank: int, lam, mu, tau=None, orientation=None, zeta=None) -> GkloData:
    d = build_diagram(cartan_matrix(cartan_kind, rank), tau)
    return derive_parameters(d, lam, mu, orientation, zeta)


# ------------------------------------------------------------- shift models


def shift_composed_model(base: GeneratorModel, nu, provenance="shift-composed") -> GeneratorModel:
    """Pull back a model for mu + nu + tau(nu) along the shift homomorphism."""
    n = len(base.cartan)
    nu = tuple(nu)
    if len(nu) != n:
        raise ConfigError("nu has the wrong length")
    tnu = tuple(nu[base.t(i) - 1] for i in base.nodes)
    if any(x > 0 for x in nu):
        raise ConfigError("nu must be anti-dominant")
    s = tuple(a + b for a, b in zip(nu, tnu))
    if any(x % 2 for x in s):
        raise ConfigError("nu + tau(nu) must be even")
    mu = tuple(m - x for m, x in zip(base.mu, s))
    if any(x % 2 for x in mu):
        raise ConfigError("mu must be even")
    model = GeneratorModel(base.ring, base.kind, base.cartan, base.tau, mu, base.N, provenance, dict(base.info))
    ring = base.ring
    for i in base.nodes:
        off_h = s[i - 1]
        off_b = nu[i - 1]
        th = base.table("H", i)
        model.add(
            "H",
            i,
            ModeTable(th.lo + off_h, th.hi + off_h, (lambda r, th=th, o=off_h: th.get(r - o)), True, None, True),
        )
        tb = base.table("B", i)
        fac = sqrt_minus_one_power(off_b) if off_b % 2 else 1
        model.add(
            "B",
            i,
            ModeTable(
                1,
                tb.hi + off_b,
                (lambda r, tb=tb, o=off_b, f=fac: tb.get(r - o).scale(f)),
                False,
            ),
        )
    model.base = base
    return model


# ---------------------------------------------------------------- gl images


@dataclass
class GlData:
    n: int
    lam: tuple  # <lambda, eps_j>
    mu: tuple
    v: tuple  # v_0..v_n
    sl: GkloData  # split A_{n-1} data of the same instance
    z0: dict  # x -> m_x (x a scalar, or a name of an auxiliary variable)
    aux: tuple


def gl_data(n: int, lam, mu, z0=None) -> GlData:
    lam, mu = tuple(int(x) for x in lam), tuple(int(x) for x in mu)
    if n < 2 or len(lam) != n or len(mu) != n:
        raise ConfigError("gl_n data needs n >= 2 and length-n lambda, mu")
    v = [0]
    for j in range(n):
        v.append(v[-1] + lam[j] - mu[j])
    if v[n] != 0:
        raise ConfigError("lambda - mu must lie in the root lattice (v_n = 0)")
    if any(x < 0 for x in v):
        raise ConfigError("lambda >= mu fails")
    lam_sl = tuple(lam[j] - lam[j + 1] for j in range(n - 1))
    mu_sl = tuple(mu[j] - mu[j + 1] for j in range(n - 1))
    d = build_diagram(cartan_matrix("A", n - 1))
    sl = derive_parameters(d, lam_sl, mu_sl)
    theta1 = sl.theta[0]
    if z0 is None:
        diff = theta1 - lam[0]
        if diff % 2:
            raise ConfigError("theta_1 - <lambda, eps_1> must be even for the default Z_0")
        z0 = {"x_{0}": diff // 2} if diff else {}
    else:
        z0 = dict(z0)
        total = sum(z0.values())
        if lam[0] != theta1 - 2 * total:
            raise ConfigError("Z_0 multiplicities violate <lambda, eps_1> = theta_1 - 2 sum m_x")
    aux = tuple(x for x in z0 if isinstance(x, str))
    return GlData(n, lam, mu, tuple(v), sl, z0, aux)


class GlKit:
    """Polynomial kit of the sl part extended by the conventions at nodes 0 and n."""

    def __init__(self, gd: GlData, ring: DiffRing):
        self.gd = gd
        self.ring = ring
        reg = ring.reg
        self.reg = reg
        self.base = PolynomialKit(gd.sl, ring)
        n = gd.n
        one = RootSet.one(reg)
        self.Wb = dict(self.base.Wb)
        self.W = dict(self.base.W)
        self.Wbar = dict(self.base.Wbar)
        self.Zb = dict(self.base.Zb)
        self.Z = dict(self.base.Z)
        self.Zbar = dict(self.base.Zbar)
        for k in (0, n):
            self.Wb[k] = one
            self.W[k] = one
            self.Wbar[k] = one
        zero = MultivarPoly.const(reg, 0)
        roots = {zero: -gd.sl.theta[0]}
        for x, m in gd.z0.items():
            a = MultivarPoly.var(reg, x) if isinstance(x, str) else MultivarPoly.const(reg, x)
            roots[a] = roots.get(a, 0) + m
            roots[-a] = roots.get(-a, 0) + m
        self.Zb[0] = RootSet(reg, roots)
        self.fv = [0] + list(gd.sl.fv) + [0]
        self.theta = [0] + list(gd.sl.theta) + [0]
        self.vartheta = [0] + list(gd.sl.vartheta) + [0]

    def w(self, i, r):
        return self.base.w(i, r)


def d_rootset(kit: GlKit, i: int) -> RootSet:
    reg = kit.reg
    R = kit.Wb[i].shifted(Fraction(i - 1, 2)) * kit.Wb[i - 1].shifted(Fraction(i, 2)).inverse()
    for j in range(i):
        R = R * kappa_bold(reg, Fraction(j, 2)) ** kit.vartheta[j] * kit.Zb[j].shifted(Fraction(j, 2))
    return R


def build_chi_gl(kit: GlKit, z_placement="second") -> dict:
    """chi-terms of E_i(u) with poles at (i-1)/2 + w, (i-1)/2 - w and i/2."""
    gd = kit.gd
    g = gd.sl
    reg = kit.reg
    ring = kit.ring
    out = {}
    for i in range(1, gd.n):
        c = Fraction(i - 1, 2)
        terms = []
        vt = kit.vartheta[i]
        for r in range(1, kit.fv[i] + 1):
            w = kit.w(i, r)
            x = w - HALF
            fp = kappa_plain_at(reg, w, -vt).scale(-1)
            if z_placement == "split":
                fp.mul(kit.Z[i].at(x))
            fp.mul(kit.Wb[i - 1].at(x))
            fp.mul(kit.Wbar[i + 1].at(x))
            fp.mul(kit.base.Wr[(i, r)].at(w), -1)
            op = DiffOp(ring, {ring.shift_key(i, r, -1): fp.to_rf()})
            terms.append(ChiTerm(i, "+", r, ring.rf(w + c), op))
            x = w + HALF
            fp = kappa_plain_at(reg, -w, -vt).scale(-1)
            fp.mul((kit.Zbar[i] if z_placement == "split" else kit.Zb[i]).at(x))
            fp.mul(kit.W[i + 1].at(x))
            fp.mul(kit.base.Wr[(i, r)].at(w), -1)
            op = DiffOp(ring, {ring.shift_key(i, r, 1): fp.to_rf()})
            terms.append(ChiTerm(i, "-", r, ring.rf(-w + c), op))
        if kit.theta[i]:
            e = g.node("fw", i) + kit.fv[i - 1] + kit.fv[i + 1]
            fp = FactorProduct(reg, sqrt_minus_one_power(e))
            fp.mul(kit.Z[i].at(0))
            fp.mul(kit.base.Wo[i].at(HALF), -1)
            for j in (i - 1, i + 1):
                fp.mul(kit.W[j].at(0))
            terms.append(ChiTerm(i, "+", 0, ring.rf(Fraction(i, 2)), ring.scalar(fp.to_rf())))
        out[i] = terms
    return out


def image_gl(gd: GlData, N: int = 6, z_placement="second", sabotage=False) -> GeneratorModel:
    g = gd.sl
    ring = DiffRing(registry_for(g, gd.aux))
    kit = GlKit(gd, ring)
    chi = build_chi_gl(kit, z_placement)
    info = {"n": gd.n, "lambda": list(gd.lam), "mu_gl": list(gd.mu), "z0": {str(k): m for k, m in gd.z0.items()}}
    if sabotage:
        info["sabotage"] = sabotage_chi(chi)
    n = gd.n
    model = GeneratorModel(ring, "gl", g.diagram.cartan, g.diagram.tau, g.mu, N, "direct", info)
    model.kit = kit
    model.chi = chi
    model.gl = gd
    model.D = {}
    model.Dt = {}
    for i in range(1, n + 1):
        R = d_rootset(kit, i)
        D = R.urational()
        Dt = R.inverse().urational()
        model.D[i] = R
        m = gd.mu[i - 1]
        model.add("D", i, ModeTable(m, N, urational_mode_getter(ring, D, N), True, D, True))
        model.add("Dt", i, ModeTable(-m, N, urational_mode_getter(ring, Dt, N), True, Dt, True))
    for i in range(1, n):
        poles = [(t.loc, t.op) for t in chi[i]]
        model.add("E", i, ModeTable(1, N, pole_mode_getter(ring, poles), False, chi_poleform(ring, chi[i])))
    return model


def eta_model(glm: GeneratorModel, N: int | None = None) -> GeneratorModel:
    """Split A_{n-1} model with B_i(u) = E_i(u + i/2), H_i(u) = Dt_i D_{i+1}(u + i/2)."""
    N = glm.N if N is None else N
    gd = glm.gl
    ring = glm.ring
    g = gd.sl
    model = GeneratorModel(ring, "quasisplit", g.diagram.cartan, g.diagram.tau, g.mu, N, "eta-composed", glm.info)
    model.data = g
    for i in range(1, gd.n):
        H = (glm.D[i].inverse() * glm.D[i + 1]).shifted(-Fraction(i, 2)).urational()
        lo = -g.node("mu", i)
        model.add("H", i, ModeTable(lo, 2 * N + 2, urational_mode_getter(ring, H, 2 * N + 2), True, H, True))
        poles = [(t.loc - ring.rf(Fraction(i, 2)), t.op) for t in glm.chi[i]]
        model.add(
            "B", i, ModeTable(1, N, pole_mode_getter(ring, poles), False, chi_poleform(ring, glm.chi[i], Fraction(i, 2)))
        )
    return model
