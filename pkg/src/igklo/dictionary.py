"""Partitions, shift matrices, W-algebra types, dimension counts and the kappa translation."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .arith import sqrt_minus_one_power
from .images import GeneratorModel, ModeTable, image_quasisplit, instance
from .satake import ConfigError


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


@dataclass(frozen=True)
class Partition:
    parts: tuple  # ascending

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        if not p or any(x < 0 for x in p):
            raise ConfigError("partition parts must be nonnegative and nonempty")
        if list(p) != sorted(p):
            raise ConfigError("partition parts must be ascending")
        if len({x % 2 for x in p}) != 1:
            raise ConfigError("partition parts must share one parity")
        object.__setattr__(self, "parts", p)

    @property
    def n(self):
        return len(self.parts)

    @property
    def N(self):
        return sum(self.parts)

    @property
    def theta(self):
        return self.parts[0] % 2


def partition_from_v(n: int, N: int, v) -> Partition:
    """p_i = v_{n-i} - v_{n-i+1} with v_0 = N and v_n = 0."""
    vv = [N] + list(v) + [0]
    if len(vv) != n + 1:
        raise ConfigError("v must have n - 1 entries")
    parts = tuple(vv[n - i] - vv[n - i + 1] for i in range(1, n + 1))
    if any(x < 0 for x in parts):
        raise ConfigError(f"negative part in {parts}")
    return Partition(parts)


def v_from_coweight(n: int, N: int, mu) -> tuple:
    """Coroot coordinates of N*w_1 - mu for sl_n."""
    mu = tuple(int(x) for x in mu)
    if len(mu) != n - 1:
        raise ConfigError("mu must have n - 1 pairings")
    if n == 1:
        return ()
    lam = (N,) + (0,) * (n - 2)
    # (C v)_i = lam_i - mu_i; solve the tridiagonal system via v_i = sum_j (C^{-1})_{ij} d_j
    d = [Fraction(a - b) for a, b in zip(lam, mu)]
    v = []
    for i in range(1, n):
        s = Fraction(0)
        for j in range(1, n):
            s += Fraction(min(i, j) * (n - max(i, j)), n) * d[j - 1]
        v.append(s)
    if any(x.denominator != 1 for x in v):
        raise ConfigError("N*w_1 - mu is not in the coroot lattice")
    return tuple(int(x) for x in v)


def partition_from_coweight(n: int, N: int, mu) -> Partition:
    mu = tuple(int(x) for x in mu)
    if any(x % 2 for x in mu):
        raise ConfigError("mu must be even")
    if any(x < 0 for x in mu):
        raise ConfigError("mu must be dominant")
    v = v_from_coweight(n, N, mu)
    if any(x < 0 for x in v):
        raise ConfigError("N*w_1 >= mu fails")
    p = partition_from_v(n, N, v)
    for i in range(1, n):
        if p.parts[i] - p.parts[i - 1] != mu[n - i - 1]:
            raise ConsistencyError("partition differences disagree with mu")
    return p


def coweight_from_partition(p: Partition) -> tuple:
    """(n, N, mu) with <mu, alpha_{n-i}> = p_{i+1} - p_i."""
    n = p.n
    mu = [0] * (n - 1)
    for i in range(1, n):
        mu[n - i - 1] = p.parts[i] - p.parts[i - 1]
    return n, p.N, tuple(mu)


def v_from_partition(p: Partition) -> tuple:
    """v_i = p_1 + ... + p_{n-i}."""
    n = p.n
    return tuple(sum(p.parts[: n - i]) for i in range(1, n))


def shift_matrix(p: Partition) -> list:
    n = p.n
    s = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            val = Fraction(p.parts[j] - p.parts[i], 2)
            if val.denominator != 1:
                raise ConfigError("unequal parities")
            s[i][j] = s[j][i] = int(val)
    return s


def check_additivity(s) -> bool:
    n = len(s)
    for i in range(n):
        for j in range(n):
            for m in range(n):
                if abs(i - j) + abs(j - m) == abs(i - m) and s[i][j] + s[j][m] != s[i][m]:
                    return False
    return True


@dataclass(frozen=True)
class WAlgebraType:
    family: str
    k: int

    def __str__(self):
        return f"{self.family}{self.k}"


def classify(p: Partition) -> WAlgebraType:
    k = p.N // 2
    if p.theta == 0:
        return WAlgebraType("C", k)
    return WAlgebraType("B" if p.n % 2 else "D", k)


def pbw_dimension(p: Partition) -> int:
    """2 * sum frak_v_i + k, cross-checked against sum (n-a) p_a + sum floor(p_a / 2)."""
    n = p.n
    v = v_from_partition(p)
    a = 2 * sum(x // 2 for x in v) + p.N // 2
    b = sum((n - k) * p.parts[k - 1] for k in range(1, n)) + sum(x // 2 for x in p.parts)
    if a != b:
        raise ConsistencyError(f"dimension counts disagree: {a} vs {b}")
    return a


def equal_parity_partitions(N: int, n: int | None = None):
    """Ascending equal-parity partitions of N (with zero parts allowed when even), optionally with n parts."""

    def rec(rem, k, lo):
        if k == 0:
            if rem == 0:
                yield ()
            return
        for x in range(lo, rem + 1):
            if x * k > rem:
                break
            for rest in rec(rem - x, k - 1, x):
                yield (x,) + rest

    sizes = [n] if n is not None else range(1, N + 1)
    for k in sizes:
        for parts in rec(N, k, 0):
            if len({x % 2 for x in parts}) == 1:
                yield Partition(parts)


# ------------------------------------------------------ q-numbers and P


def q_numbers(p: Partition) -> list:
    """q_i for 0 <= i < n, with v_0 = N."""
    n = p.n
    th = p.theta
    v = [p.N] + list(v_from_partition(p))
    return [(v[i] - th) + 2 * sum((-1) ** j * (v[i + j] - th) for j in range(1, n - i)) for i in range(n)]


class RootProduct:
    """lead * prod (u - a)^m with rational roots; exact equality by multiplicities."""

    def __init__(self, roots=None):
        self.roots = Counter({Fraction(a): m for a, m in (roots or {}).items() if m})

    def __mul__(self, o):
        c = Counter(self.roots)
        for a, m in o.roots.items():
            c[a] += m
        return RootProduct({a: m for a, m in c.items() if m})

    def __pow__(self, e):
        return RootProduct({a: m * e for a, m in self.roots.items()})

    def inverse(self):
        return self ** -1

    def shifted(self, c):
        """f(u - c)."""
        return RootProduct({a + Fraction(c): m for a, m in self.roots.items()})

    def is_one(self):
        return not any(self.roots.values())


def one_minus_sq(c) -> RootProduct:
    """1 - (c / 2u)^2 = (u - c/2)(u + c/2) / u^2."""
    c = Fraction(c, 2)
    if c == 0:
        return RootProduct()
    return RootProduct({c: 1, -c: 1, 0: -2})


def frak_p(p: Partition, i: int) -> RootProduct:
    n = p.n
    q = q_numbers(p)
    out = RootProduct()
    for j in range(1, i):
        out = out * one_minus_sq(i - j) ** q[n - j]
    return out


def script_p_roots(p: Partition) -> dict:
    """Roots of u^{q_0} prod_j (u^2 - (j/2)^2)^{q_j}."""
    q = q_numbers(p)
    roots = Counter({Fraction(0): q[0]})
    for j in range(1, p.n):
        roots[Fraction(j, 2)] += q[j]
        roots[Fraction(-j, 2)] += q[j]
    return {str(a): m for a, m in sorted(roots.items()) if m}


def p_identity(p: Partition) -> list:
    """For each 1 <= i < n the product that must equal 1; returns the failing i."""
    n = p.n
    v = [p.N] + list(v_from_partition(p))
    bad = []
    for i in range(1, n):
        lhs = one_minus_sq(1) ** (p.theta - v[i])
        lhs = lhs * frak_p(p, n - i - 1) * frak_p(p, n - i + 1)
        P = frak_p(p, n - i)
        lhs = lhs * P.shifted(Fraction(1, 2)).inverse() * P.shifted(-Fraction(1, 2)).inverse()
        if not lhs.is_one():
            bad.append(i)
    return bad


def q_and_P(p: Partition) -> dict:
    bad = p_identity(p)
    if bad:
        raise ConsistencyError(f"P-identity fails at i = {bad}")
    return {"q": q_numbers(p), "script_P_roots": script_p_roots(p), "P_identity": "ok"}


def describe(p: Partition) -> dict:
    n, N, mu = coweight_from_partition(p)
    s = shift_matrix(p)
    t = classify(p)
    return {
        "partition": list(p.parts),
        "n": n,
        "N": N,
        "mu": list(mu),
        "v": list(v_from_partition(p)),
        "type": t.family,
        "k": t.k,
        "dim": pbw_dimension(p),
        "shift_matrix": s,
        **{f"s{i}{i + 1}": s[i - 1][i] for i in range(1, n)},
        "superdiagonal": [s[i - 1][i] for i in range(1, n)],
        "ell": p.parts[-1],
        "q": q_numbers(p),
    }


# ------------------------------------------------------ kappa translation


def split_model_for(p: Partition, N_modes: int = 6, **kw) -> GeneratorModel:
    n, N, mu = coweight_from_partition(p)
    lam = (N,) + (0,) * (n - 2)
    g = instance("A", n - 1, lam, mu)
    return image_quasisplit(g, N=N_modes, **kw)


def kappa_translate(s, model: GeneratorModel) -> GeneratorModel:
    """Drinfeld-side families cH_i^{(R)} = H_{n-i}^{(R - 2s)} and cB_i^{(S)} = B_{n-i}^{(S - s)} / sqrt((-1)^s)."""
    n = len(model.cartan) + 1
    out = GeneratorModel(model.ring, "drinfeld", model.cartan, model.tau, model.mu, model.N, "kappa-translated", dict(model.info))
    for i in range(1, n):
        k = s[i - 1][i]
        if model.mu[n - i - 1] != 2 * k:
            raise ConfigError("shift matrix does not match the model's coweight")
        th = model.table("H", n - i)
        out.add(
            "cH",
            i,
            ModeTable(th.lo + 2 * k, th.hi + 2 * k, (lambda R, th=th, k=k: th.get(R - 2 * k)), True, None, True),
        )
        tb = model.table("B", n - i)
        fac = sqrt_minus_one_power(k)
        inv = fac.inverse() if hasattr(fac, "inverse") else 1 / fac
        out.add("cB", i, ModeTable(k + 1, tb.hi + k, (lambda S, tb=tb, k=k, f=inv: tb.get(S - k).scale(f)), False))
    out.base = model
    return out
