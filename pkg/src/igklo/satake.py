"""Satake diagrams, coweights and the per-node data of an iGKLO instance.

Nodes are labelled 1..n.  Coweights are pairing vectors (<mu, alpha_i>)_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence


class ConfigError(ValueError):
    """Invalid diagram, coweight or instance data."""


# ---------------------------------------------------------------- Cartan


def cartan_matrix(kind: str, rank: int) -> tuple:
    """Simply-laced Cartan matrix with the usual (Bourbaki) labelling."""
    kind = kind.upper()
    n = rank
    edges = []
    if kind == "A" and n >= 1:
        edges = [(k, k + 1) for k in range(1, n)]
    elif kind == "D" and n >= 4:
        edges = [(k, k + 1) for k in range(1, n - 1)] + [(n - 2, n)]
    elif kind == "E" and n in (6, 7, 8):
        edges = [(1, 3), (3, 4), (4, 5), (2, 4)] + [(k, k + 1) for k in range(5, n)]
    else:
        raise ConfigError(f"unsupported diagram {kind}{rank}")
    c = [[2 if a == b else 0 for b in range(n)] for a in range(n)]
    for a, b in edges:
        c[a - 1][b - 1] = c[b - 1][a - 1] = -1
    return tuple(tuple(row) for row in c)


def _positive_definite(c) -> bool:
    n = len(c)
    m = [[Fraction(x) for x in row] for row in c]
    for k in range(n):
        if m[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return True


def solve_rational(c, rhs) -> list:
    """Exact solution of c x = rhs by Gaussian elimination over Q."""
    n = len(c)
    m = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(c, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k]), None)
        if piv is None:
            raise ConfigError("singular Cartan matrix")
        m[k], m[piv] = m[piv], m[k]
        for i in range(n):
            if i != k and m[i][k]:
                f = m[i][k] / m[k][k]
                m[i] = [a - f * b for a, b in zip(m[i], m[k])]
    return [m[k][n] / m[k][k] for k in range(n)]


# -------------------------------------------------------------- diagrams


@dataclass(frozen=True)
class SatakeDiagram:
    cartan: tuple
    tau: tuple  # tau[i-1] = image of node i

    @property
    def n(self) -> int:
        return len(self.cartan)

    @property
    def nodes(self):
        return range(1, self.n + 1)

    def c(self, i: int, j: int) -> int:
        return self.cartan[i - 1][j - 1]

    def t(self, i: int) -> int:
        return self.tau[i - 1]

    def is_split(self) -> bool:
        return all(self.t(i) == i for i in self.nodes)

    @property
    def I0(self):
        return [i for i in self.nodes if self.t(i) == i]

    @property
    def I1(self):
        return [i for i in self.nodes if self.t(i) > i]

    @property
    def Im1(self):
        return [i for i in self.nodes if self.t(i) < i]

    @property
    def iI(self):
        """Representatives of tau-orbits: I1 together with I0."""
        return [i for i in self.nodes if self.t(i) >= i]

    def rep(self, i: int) -> int:
        return min(i, self.t(i))

    def neighbours(self, i: int):
        return [j for j in self.nodes if j != i and self.c(i, j)]

    def edges(self):
        return [(i, j) for i in self.nodes for j in self.nodes if i < j and self.c(i, j)]


def build_diagram(cartan: Sequence[Sequence[int]], tau: Sequence[int] | None = None) -> SatakeDiagram:
    c = tuple(tuple(int(x) for x in row) for row in cartan)
    n = len(c)
    if n == 0 or any(len(row) != n for row in c):
        raise ConfigError("Cartan matrix must be square and nonempty")
    for i in range(n):
        if c[i][i] != 2:
            raise ConfigError("Cartan matrix diagonal must be 2")
        for j in range(n):
            if i != j and c[i][j] not in (0, -1):
                raise ConfigError("only simply-laced (ADE) Cartan matrices are supported")
            if c[i][j] != c[j][i]:
                raise ConfigError("simply-laced Cartan matrices are symmetric")
    if not _positive_definite(c):
        raise ConfigError("Cartan matrix is not of finite type")
    t = tuple(range(1, n + 1)) if tau is None else tuple(int(x) for x in tau)
    if sorted(t) != list(range(1, n + 1)):
        raise ConfigError("tau must be a permutation of the nodes")
    for i in range(1, n + 1):
        if t[t[i - 1] - 1] != i:
            raise ConfigError("tau must be an involution")
        for j in range(1, n + 1):
            if c[i - 1][j - 1] != c[t[i - 1] - 1][t[j - 1] - 1]:
                raise ConfigError("tau must preserve the Cartan matrix")
    return SatakeDiagram(c, t)


def parse_tau(value, n: int) -> tuple:
    """Accept an image list [t1,...,tn] or a list of 2-cycles [[1,3]]."""
    if value is None or value == [] or value == "id":
        return tuple(range(1, n + 1))
    if all(isinstance(x, int) for x in value):
        return tuple(value)
    t = list(range(1, n + 1))
    for cyc in value:
        if len(cyc) != 2:
            raise ConfigError("tau cycles must be pairs")
        a, b = cyc
        if not (1 <= a <= n and 1 <= b <= n):
            raise ConfigError("tau cycle out of range")
        t[a - 1], t[b - 1] = b, a
    return tuple(t)


# -------------------------------------------------------------- coweights


def fundamental(n: int, *nodes: int, mult: int = 1) -> tuple:
    """Pairing vector of mult * sum of the given fundamental coweights."""
    out = [0] * n
    for i in nodes:
        out[i - 1] += mult
    return tuple(out)


def coroot_pairings(d: SatakeDiagram, coeffs: Mapping[int, int]) -> tuple:
    """Pairings of sum_i coeffs[i] alpha_i^vee."""
    return tuple(sum(coeffs.get(j, 0) * d.c(j, i) for j in d.nodes) for i in d.nodes)


def spherical_witness(d: SatakeDiagram, mu: Sequence[int]):
    """Return pairings of mu1 with mu = mu1 + tau mu1, or None if impossible."""
    m = [0] * d.n
    for i in d.nodes:
        ti = d.t(i)
        if ti == i:
            if mu[i - 1] % 2:
                return None
            m[i - 1] = mu[i - 1] // 2
        elif ti > i:
            if mu[i - 1] != mu[ti - 1]:
                return None
            m[i - 1] = mu[i - 1]
            m[ti - 1] = 0
    return tuple(m)


def coweight_predicates(d: SatakeDiagram, mu: Sequence[int]) -> dict:
    mu = tuple(mu)
    if len(mu) != d.n:
        raise ConfigError("coweight length does not match the diagram")
    witness = spherical_witness(d, mu)
    return {
        "even": all(x % 2 == 0 for x in mu),
        "spherical": witness is not None,
        "dominant": all(x >= 0 for x in mu),
        "anti_dominant": all(x <= 0 for x in mu),
        "tau_invariant": all(mu[i - 1] == mu[d.t(i) - 1] for i in d.nodes),
        "witness": witness,
    }


def twist_sum(d: SatakeDiagram, nu: Sequence[int]) -> tuple:
    """Pairings of nu + tau(nu)."""
    return tuple(nu[i - 1] + nu[d.t(i) - 1] for i in d.nodes)


# ----------------------------------------------------------- orientation


def default_orientation(d: SatakeDiagram) -> frozenset:
    arrows = {(i, j) for i, j in d.edges()}
    for i, j in sorted(d.edges()):
        if (i, j) not in arrows and (j, i) not in arrows:
            continue
        a, b = (i, j) if (i, j) in arrows else (j, i)
        if d.t(a) == a and d.t(b) == b:
            continue
        need = (d.t(b), d.t(a))
        if need in arrows:
            continue
        # conflicting tau-pair: flip the lexicographically later edge
        e1 = tuple(sorted((a, b)))
        e2 = tuple(sorted(need))
        later = max(e1, e2)
        x, y = later
        if (x, y) in arrows:
            arrows.remove((x, y))
            arrows.add((y, x))
        else:
            arrows.remove((y, x))
            arrows.add((x, y))
    return frozenset(arrows)


def check_orientation(d: SatakeDiagram, arrows) -> None:
    arrows = set(arrows)
    for i, j in d.edges():
        if ((i, j) in arrows) == ((j, i) in arrows):
            raise ConfigError(f"edge {i}-{j} must carry exactly one arrow")
    for a, b in arrows:
        if not d.c(a, b) or a == b:
            raise ConfigError(f"arrow {a}->{b} is not an edge")
        if d.t(a) == a and d.t(b) == b:
            continue
        if (d.t(b), d.t(a)) not in arrows:
            raise ConfigError(f"orientation not tau-compatible at {a}->{b}")


def reverse_orientation(arrows) -> frozenset:
    return frozenset((b, a) for a, b in arrows)


# ------------------------------------------------------------ instance


@dataclass(frozen=True)
class GkloData:
    diagram: SatakeDiagram
    lam: tuple
    mu: tuple
    orientation: frozenset
    zeta: Mapping[int, int]
    v: tuple  # coroot coordinates of lambda - mu
    fv: tuple  # frak v
    theta: tuple
    vartheta: tuple
    wb: tuple  # bold w = <lambda, alpha_i>
    fw: tuple  # frak w
    varsigma: tuple
    wp: tuple  # orientation signs wp_i
    flags: tuple = field(default=())

    def node(self, name: str, i: int):
        return getattr(self, name)[i - 1]

    def arrow(self, a: int, b: int) -> bool:
        return (a, b) in self.orientation

    def into(self, i: int):
        """Nodes j with j -> i."""
        return sorted(j for j in self.diagram.nodes if (j, i) in self.orientation)

    def out_of(self, i: int):
        """Nodes j with j <- i."""
        return sorted(j for j in self.diagram.nodes if (i, j) in self.orientation)

    def to_json(self) -> dict:
        d = self.diagram
        return {
            "cartan": [list(r) for r in d.cartan],
            "tau": list(d.tau),
            "lambda": list(self.lam),
            "mu": list(self.mu),
            "orientation": sorted([list(a) for a in self.orientation]),
            "zeta": {str(k): v for k, v in sorted(self.zeta.items())},
            "v": list(self.v),
            "frak_v": list(self.fv),
            "theta": list(self.theta),
            "vartheta": list(self.vartheta),
            "bold_w": list(self.wb),
            "frak_w": list(self.fw),
            "varsigma": list(self.varsigma),
            "wp": list(self.wp),
            "flags": list(self.flags),
        }


def solve_v(d: SatakeDiagram, lam, mu) -> tuple:
    diff = [a - b for a, b in zip(lam, mu)]
    sol = solve_rational(d.cartan, diff)
    if any(x.denominator != 1 for x in sol) or any(x < 0 for x in sol):
        raise ConfigError(f"lambda >= mu fails: lambda - mu has coroot coordinates {[str(x) for x in sol]}")
    return tuple(int(x) for x in sol)


def derive_parameters(
    d: SatakeDiagram,
    lam: Sequence[int],
    mu: Sequence[int],
    orientation=None,
    zeta_overrides: Mapping[int, int] | None = None,
) -> GkloData:
    lam, mu = tuple(lam), tuple(mu)
    if len(lam) != d.n or len(mu) != d.n:
        raise ConfigError("coweight length does not match the diagram")
    pl, pm = coweight_predicates(d, lam), coweight_predicates(d, mu)
    if not pl["dominant"]:
        raise ConfigError("lambda must be dominant")
    if not pl["tau_invariant"]:
        raise ConfigError("lambda must be tau-invariant")
    if not pm["even"]:
        raise ConfigError("mu must be even")
    if not pm["spherical"]:
        raise ConfigError("mu must be spherical")
    v = solve_v(d, lam, mu)
    fixed = [d.t(i) == i for i in d.nodes]
    fv = tuple(v[k] // 2 if fixed[k] else v[k] for k in range(d.n))
    theta = tuple(v[k] % 2 if fixed[k] else 0 for k in range(d.n))
    for i, j in d.edges():
        if theta[i - 1] and theta[j - 1]:
            raise ConfigError(f"parity condition fails on edge {i}-{j}: c_ij*theta_i*theta_j = {d.c(i, j)}")
    vartheta = []
    for i in d.nodes:
        if not fixed[i - 1]:
            vartheta.append(theta[i - 1])
        else:
            vartheta.append(max(theta[j - 1] for j in d.nodes if d.c(i, j)))
    wb = lam
    fw = tuple(wb[k] // 2 if fixed[k] else wb[k] for k in range(d.n))
    varsigma = tuple(wb[k] % 2 if fixed[k] else 0 for k in range(d.n))
    for i in d.nodes:
        if theta[i - 1] and varsigma[i - 1]:
            raise ConfigError(
                f"node {i}: theta = 1 with odd <lambda, alpha_i>; evenness of mu and the parity condition exclude this"
            )
    if orientation is None:
        arrows = default_orientation(d)
    else:
        arrows = frozenset(tuple(a) for a in orientation)
    check_orientation(d, arrows)
    wp = []
    for i in d.nodes:
        ti = d.t(i)
        if d.c(i, ti) in (0, 2):
            wp.append(0)
        elif (ti, i) in arrows:
            wp.append(1)
        else:
            wp.append(-1)
    zeta = {}
    flags = []
    overrides = dict(zeta_overrides or {})
    for i in d.I1:
        f = fv[i - 1]
        z = overrides.pop(i, None)
        if z is None:
            z = min(max(-(-f // 2), 0), f)
        if not 0 <= z <= f:
            raise ConfigError(f"zeta_{i} = {z} outside [0, {f}]")
        if z == 0:
            flags.append(f"zeta_{i}=0 lies outside the range 1 <= zeta_i <= frak_v_i")
        zeta[i] = z
        zeta[d.t(i)] = f - z
    if overrides:
        raise ConfigError(f"zeta overrides only apply to I1 nodes, got {sorted(overrides)}")
    return GkloData(
        diagram=d,
        lam=lam,
        mu=mu,
        orientation=arrows,
        zeta=zeta,
        v=v,
        fv=fv,
        theta=theta,
        vartheta=tuple(vartheta),
        wb=wb,
        fw=fw,
        varsigma=varsigma,
        wp=tuple(wp),
        flags=tuple(flags),
    )
