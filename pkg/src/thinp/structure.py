"""Subgroup structure of small pc groups: series, Frattini, Omega_1, thinness.

Subgroups are explicit sets of element indices.  Everything here is exhaustive
and meant for groups with at most a few thousand elements.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .pcgroup import BoundExceeded, Group, GroupElement

NORMAL_SUBGROUP_BOUND = 3**6


@dataclass(frozen=True)
class Subgroup:
    group: Group
    members: frozenset[int]
    generators: tuple[GroupElement, ...] = field(default=(), compare=False)

    @property
    def order(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, g) -> bool:
        if isinstance(g, int):
            return g in self.members
        return self.group.index(g) in self.members

    def __iter__(self) -> Iterator[GroupElement]:
        G = self.group
        return (G.element(i) for i in sorted(self.members))

    def __le__(self, other: "Subgroup") -> bool:
        return self.members <= other.members

    def __lt__(self, other: "Subgroup") -> bool:
        return self.members < other.members

    def gen_indices(self) -> list[int]:
        return [self.group.index(g) for g in self.generators]

    def __repr__(self) -> str:
        return f"<Subgroup of {self.group.name} of order {self.order}>"


def _close(G: Group, start: Iterable[int], gens: Sequence[int]) -> set[int]:
    seen = set(start)
    seen.add(G.index(G.identity))
    queue = deque(seen)
    mul = G.mul_idx
    while queue:
        x = queue.popleft()
        for g in gens:
            y = mul(x, g)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def closure(G: Group, gens: Iterable[GroupElement]) -> Subgroup:
    gens = tuple(gens)
    idx = [G.index(g) for g in gens]
    return Subgroup(G, frozenset(_close(G, idx, idx)), gens)


def _subgroup_from_indices(G: Group, idx: Iterable[int]) -> Subgroup:
    idx = sorted(set(idx))
    return Subgroup(G, frozenset(_close(G, idx, idx)), tuple(G.element(i) for i in idx))


def whole(G: Group) -> Subgroup:
    return Subgroup(G, frozenset(range(G.order)), tuple(G.generators()))


def trivial(G: Group) -> Subgroup:
    return Subgroup(G, frozenset([G.index(G.identity)]), ())


def join(A: Subgroup, B: Subgroup) -> Subgroup:
    G = A.group
    gens = A.generators + B.generators
    idx = [G.index(g) for g in gens]
    return Subgroup(G, frozenset(_close(G, A.members | B.members, idx)), gens)


def normal_closure(G: Group, S: Iterable[GroupElement]) -> Subgroup:
    gens = [G.index(g) for g in S]
    pc = [G.index(t) for t in G.generators()]
    members = _close(G, gens, gens)
    queue = deque(gens)
    while queue:
        g = queue.popleft()
        for t in pc:
            c = G.conj_idx(g, t)
            if c not in members:
                gens.append(c)
                queue.append(c)
                members = _close(G, members, gens)
    return Subgroup(G, frozenset(members), tuple(G.element(i) for i in gens))


def is_normal(G: Group, S: Subgroup) -> bool:
    pc = [G.index(t) for t in G.generators()]
    return all(G.conj_idx(g, t) in S.members for g in S.gen_indices() for t in pc)


def is_abelian(S: Subgroup) -> bool:
    G = S.group
    gens = S.gen_indices()
    ident = G.index(G.identity)
    return all(G.comm_idx(a, b) == ident for a in gens for b in gens)


def commutator_subgroup(G: Group, A: Subgroup, B: Subgroup) -> Subgroup:
    """[A, B], generated by all [a, b] with a in A, b in B."""
    if is_normal(G, A) and is_normal(G, B):
        # for normal A, B the normal closure of generator commutators suffices
        comms = {G.comm_idx(a, b) for a in A.gen_indices() for b in B.gen_indices()}
        return normal_closure(G, [G.element(c) for c in sorted(comms)])
    comms = {G.comm_idx(a, b) for a in A.members for b in B.members}
    return _subgroup_from_indices(G, comms)


def centralizer(G: Group, S: Subgroup) -> Subgroup:
    gens = S.gen_indices()
    ident = G.index(G.identity)
    members = [g for g in range(G.order) if all(G.comm_idx(g, s) == ident for s in gens)]
    return _subgroup_from_indices(G, members)


@lru_cache(maxsize=64)
def center(G: Group) -> Subgroup:
    return centralizer(G, whole(G))


def _upper_step(G: Group, Z: Subgroup) -> Subgroup:
    pc = [G.index(t) for t in G.generators()]
    members = [g for g in range(G.order) if all(G.comm_idx(g, t) in Z.members for t in pc)]
    return _subgroup_from_indices(G, members)


@dataclass(frozen=True)
class CentralSeries:
    terms: tuple[Subgroup, ...]
    kind: str

    @property
    def nilpotency_class(self) -> int:
        return len(self.terms) - 1

    def orders(self) -> list[int]:
        return [t.order for t in self.terms]


@lru_cache(maxsize=64)
def lower_central_series(G: Group) -> CentralSeries:
    terms = [whole(G)]
    while terms[-1].order > 1:
        nxt = commutator_subgroup(G, terms[-1], terms[0])
        if nxt.order == terms[-1].order:
            raise RuntimeError(f"lower central series of {G.name} stalls; inconsistent group?")
        terms.append(nxt)
    return CentralSeries(tuple(terms), "lower")


@lru_cache(maxsize=64)
def upper_central_series(G: Group) -> CentralSeries:
    terms = [trivial(G)]
    while terms[-1].order < G.order:
        nxt = _upper_step(G, terms[-1])
        if nxt.order == terms[-1].order:
            raise RuntimeError(f"upper central series of {G.name} stalls; inconsistent group?")
        terms.append(nxt)
    return CentralSeries(tuple(terms), "upper")


def nilpotency_class(G: Group) -> int:
    return lower_central_series(G).nilpotency_class


def gamma(G: Group, i: int) -> Subgroup:
    """gamma_i(G), 1-based; trivial beyond the class."""
    terms = lower_central_series(G).terms
    return terms[i - 1] if i <= len(terms) else terms[-1]


def upper(G: Group, i: int) -> Subgroup:
    """Z_i(G); Z_0 is trivial."""
    terms = upper_central_series(G).terms
    return terms[i] if i < len(terms) else terms[-1]


def weight(G: Group, g: int) -> int:
    """Largest i with g in gamma_i(G); the identity gets class + 1."""
    terms = lower_central_series(G).terms
    w = 0
    for t in terms:
        if g not in t.members:
            break
        w += 1
    return w


@lru_cache(maxsize=64)
def frattini(G: Group) -> Subgroup:
    """Phi(G) = G^p [G, G]."""
    p = G.p
    powers = set()
    for g in range(G.order):
        x = g
        for _ in range(p - 1):
            x = G.mul_idx(x, g)
        powers.add(x)
    derived = gamma(G, 2)
    gens = [G.index(g) for g in derived.generators] + sorted(powers)
    return Subgroup(G, frozenset(_close(G, derived.members | powers, gens)),
                    tuple(G.element(i) for i in gens))


def omega1(A: Subgroup) -> Subgroup:
    if not is_abelian(A):
        raise ValueError("omega1 needs an abelian subgroup")
    G = A.group
    ident = G.index(G.identity)
    members = [a for a in A.members if _pow_idx(G, a, G.p) == ident]
    return _subgroup_from_indices(G, members)


def _pow_idx(G: Group, g: int, k: int) -> int:
    x = G.index(G.identity)
    for _ in range(k):
        x = G.mul_idx(x, g)
    return x


def _log_p(G: Group, m: int) -> int:
    d = round(math.log(m, G.p))
    if G.p**d != m:
        raise ValueError(f"{m} is not a power of {G.p}")
    return d


def quotient_rank(A: Subgroup, B: Subgroup) -> int:
    """d(A/B) for normal B <= A with A/B abelian: log_p |A / A^p B|."""
    G = A.group
    powers = {_pow_idx(G, a, G.p) for a in A.members}
    gens = B.gen_indices() + sorted(powers)
    sub = _close(G, B.members | powers, gens)
    return _log_p(G, A.order // len(sub))


def min_generators(G: Group) -> int:
    return _log_p(G, G.order // frattini(G).order)


def abelian_invariants(A: Subgroup) -> tuple[int, ...]:
    """Cyclic factor orders of an abelian p-group, largest first."""
    if not is_abelian(A):
        raise ValueError("abelian_invariants needs an abelian subgroup")
    G = A.group
    p = G.p
    ident = G.index(G.identity)
    omega_sizes = [1]
    k = 1
    while omega_sizes[-1] < A.order:
        omega_sizes.append(sum(1 for a in A.members if _pow_idx(G, a, p**k) == ident))
        k += 1
    # r_k = number of cyclic factors of order >= p^k
    r = [_log_p(G, omega_sizes[k] // omega_sizes[k - 1]) for k in range(1, len(omega_sizes))]
    r.append(0)
    inv = []
    for k in range(len(r) - 1, 0, -1):
        inv.extend([p**k] * (r[k - 1] - r[k]))
    return tuple(inv)


# ------------------------------------------------------- normal subgroups

@lru_cache(maxsize=64)
def normal_subgroups(G: Group, bound: int = NORMAL_SUBGROUP_BOUND) -> tuple[Subgroup, ...]:
    """All normal subgroups, sorted by order then members.

    Every normal subgroup is the join of the normal closures of its
    elements, so closing the set of cyclic normal closures under joins is
    exhaustive.
    """
    if G.order > bound:
        raise BoundExceeded(f"|G| = {G.order} exceeds normal-subgroup bound {bound}")
    seen_classes: set[int] = set()
    cyclic: dict[frozenset, Subgroup] = {}
    pc = [G.index(t) for t in G.generators()]
    for g in range(G.order):
        if g in seen_classes:
            continue
        orbit, queue = {g}, deque([g])
        while queue:
            x = queue.popleft()
            for t in pc:
                y = G.conj_idx(x, t)
                if y not in orbit:
                    orbit.add(y)
                    queue.append(y)
        seen_classes |= orbit
        N = normal_closure(G, [G.element(g)])
        cyclic.setdefault(N.members, N)
    lattice: dict[frozenset, Subgroup] = dict(cyclic)
    lattice.setdefault(trivial(G).members, trivial(G))
    frontier = list(lattice.values())
    atoms = list(cyclic.values())
    while frontier:
        new = []
        for N in frontier:
            for C in atoms:
                if C.members <= N.members:
                    continue
                J = join(N, C)
                if J.members not in lattice:
                    lattice[J.members] = J
                    new.append(J)
        frontier = new
    return tuple(sorted(lattice.values(), key=lambda S: (S.order, sorted(S.members))))


def all_subgroups(G: Group) -> list[Subgroup]:
    """Brute-force subgroup lattice; only for cross-checking at small order."""
    found = {trivial(G).members: trivial(G)}
    frontier = [trivial(G)]
    while frontier:
        new = []
        for H in frontier:
            for g in range(G.order):
                if g in H.members:
                    continue
                gens = H.gen_indices() + [g]
                K = Subgroup(G, frozenset(_close(G, H.members, gens)),
                             tuple(G.element(i) for i in gens))
                if K.members not in found:
                    found[K.members] = K
                    new.append(K)
        frontier = new
    return sorted(found.values(), key=lambda S: (S.order, sorted(S.members)))


def maximum_antichain(items: Sequence, leq) -> list:
    """Maximum antichain of a finite poset (``leq`` must be a partial order).

    Dilworth via König: width = n - (maximum matching in the strict
    comparability bipartite graph); the antichain is read off a minimum
    vertex cover.
    """
    n = len(items)
    B = nx.Graph()
    left = [("L", i) for i in range(n)]
    B.add_nodes_from(left)
    B.add_nodes_from(("R", i) for i in range(n))
    for i in range(n):
        for j in range(n):
            if i != j and leq(items[i], items[j]):
                B.add_edge(("L", i), ("R", j))
    matching = nx.bipartite.hopcroft_karp_matching(B, top_nodes=left)
    cover = nx.bipartite.to_vertex_cover(B, matching, top_nodes=left)
    chosen = [items[i] for i in range(n) if ("L", i) not in cover and ("R", i) not in cover]
    width = n - len(matching) // 2
    assert len(chosen) == width, (len(chosen), width)
    return chosen


# -------------------------------------------------------------- thinness

@dataclass
class ThinnessReport:
    is_thin: bool
    method: str
    max_antichain_size: int | None = None
    witness: object = None

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, list):
            w = [sorted(list(S.generators)) for S in w]
        return {
            "is_thin": self.is_thin,
            "method": self.method,
            "max_antichain_size": self.max_antichain_size,
            "witness": w,
        }


def _layer_shape(G: Group, i: int) -> tuple[int, bool, bool]:
    """Order, elementary-abelian flag and cyclic flag of gamma_i / gamma_{i+1}."""
    A, B = gamma(G, i), gamma(G, i + 1)
    size = A.order // B.order
    elementary = all(_pow_idx(G, a, G.p) in B.members for a in A.members)
    cyclic = False
    for a in A.members:
        x, k = a, 1
        while x not in B.members:
            x = G.mul_idx(x, a)
            k += 1
        if k == size:
            cyclic = True
            break
    return size, elementary, cyclic


def coverty_check(G: Group) -> ThinnessReport:
    """Layer-size and covering test: [h,G] gamma_{i+2} = gamma_{i+1} for h in gamma_i - gamma_{i+1}.

    Layers must be cyclic or elementary abelian of order at most p^2.
    """
    p = G.p
    c = nilpotency_class(G)
    pc = [G.index(t) for t in G.generators()]
    for i in range(1, c + 1):
        size, elementary, cyclic = _layer_shape(G, i)
        if not (cyclic or (elementary and size <= p * p)):
            return ThinnessReport(False, "coverty", witness={"layer": i, "order": size})
    for i in range(1, c + 1):
        Gi, Gi1, Gi2 = gamma(G, i), gamma(G, i + 1), gamma(G, i + 2)
        for h in sorted(Gi.members - Gi1.members):
            hG = normal_closure(G, [G.element(G.comm_idx(h, t)) for t in pc])
            covered = join(hG, Gi2) if Gi2.order > 1 else hG
            if covered.members != Gi1.members:
                return ThinnessReport(False, "coverty",
                                      witness={"h": list(G.element(h)), "i": i})
    return ThinnessReport(True, "coverty")


def is_thin(G: Group, method: str = "exact") -> ThinnessReport:
    if method == "coverty":
        return coverty_check(G)
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    lattice = normal_subgroups(G)
    chain = maximum_antichain(list(lattice), lambda a, b: a.members <= b.members)
    size = len(chain)
    thin = size <= G.p + 1
    return ThinnessReport(thin, "exact", size, None if thin else chain)


def is_maximal_class(G: Group) -> bool:
    if G.order <= G.p**2:
        return True
    return nilpotency_class(G) == G.n - 1


def maximal_class_boundary(G: Group) -> bool:
    """True when is_maximal_class holds only by the order <= p^2 convention."""
    return G.order <= G.p**2


def series_coincide(G: Group) -> bool:
    low = lower_central_series(G).terms
    up = upper_central_series(G).terms
    return len(low) == len(up) and all(a == b for a, b in zip(low, reversed(up)))


# ------------------------------------------------------ standing assumptions

@dataclass
class AssumptionReport:
    order: int
    prime: int
    nilpotency_class: int
    p_odd: bool
    thin: bool
    class_at_least_4: bool
    strongly_frattinian: bool
    d_G: int
    d_Z: int
    d_Z2_mod_Z: int
    d_condition: bool
    center_cyclic_p: bool
    z2_mod_z_elementary_p2: bool
    z2_invariants: tuple[int, ...] | None
    z2_type: str | None
    # facts the derivation construction leans on
    frattini_is_gamma2: bool
    quotient_gamma3_exponent_p: bool
    z2_commutes_with_gamma2: bool
    z2_is_gamma_c_minus_1: bool

    @property
    def eligible(self) -> bool:
        return all((self.p_odd, self.thin, self.class_at_least_4, self.strongly_frattinian,
                    self.d_condition, self.center_cyclic_p, self.z2_mod_z_elementary_p2))

    @property
    def construction_applicable(self) -> bool:
        """Thin, odd p, class >= 4 and the structural facts the lift needs."""
        return all((self.p_odd, self.thin, self.class_at_least_4, self.d_G == 2,
                    self.quotient_gamma3_exponent_p, self.z2_commutes_with_gamma2,
                    self.z2_invariants is not None))

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items()}
        out["z2_invariants"] = list(self.z2_invariants) if self.z2_invariants else None
        out["eligible"] = self.eligible
        out["construction_applicable"] = self.construction_applicable
        return out


def z2_type_name(p: int, inv: tuple[int, ...] | None) -> str | None:
    if inv is None:
        return None
    if inv == (p, p, p):
        return "Cp^3"
    if inv == (p * p, p):
        return "Cp^2xCp"
    return "x".join(f"C{q}" for q in inv) or "1"


@lru_cache(maxsize=64)
def standing_assumptions(G: Group, thin_method: str | None = None) -> AssumptionReport:
    p = G.p
    c = nilpotency_class(G)
    if thin_method is None:
        thin_method = "exact" if G.order <= NORMAL_SUBGROUP_BOUND else "coverty"
    thin = is_thin(G, thin_method).is_thin
    Phi = frattini(G)
    Z = center(G)
    Z2 = upper(G, 2)
    g2, g3 = gamma(G, 2), gamma(G, 3)
    strongly = centralizer(G, Phi).members == _center_of(Phi).members
    d_G = min_generators(G)
    d_Z = quotient_rank(Z, trivial(G))
    d_Z2Z = quotient_rank(Z2, Z)
    inv = abelian_invariants(Z2) if is_abelian(Z2) else None
    ident = G.index(G.identity)
    return AssumptionReport(
        order=G.order,
        prime=p,
        nilpotency_class=c,
        p_odd=p % 2 == 1,
        thin=thin,
        class_at_least_4=c >= 4,
        strongly_frattinian=strongly,
        d_G=d_G,
        d_Z=d_Z,
        d_Z2_mod_Z=d_Z2Z,
        d_condition=d_Z2Z == d_G * d_Z,
        center_cyclic_p=Z.order == p,
        z2_mod_z_elementary_p2=Z2.order == p * p * Z.order and d_Z2Z == 2,
        z2_invariants=inv,
        z2_type=z2_type_name(p, inv),
        frattini_is_gamma2=Phi == g2,
        quotient_gamma3_exponent_p=all(_pow_idx(G, g, p) in g3.members for g in range(G.order)),
        z2_commutes_with_gamma2=all(G.comm_idx(a, b) == ident
                                    for a in Z2.gen_indices() for b in g2.gen_indices()),
        z2_is_gamma_c_minus_1=c >= 2 and Z2 == gamma(G, c - 1),
    )


def _center_of(S: Subgroup) -> Subgroup:
    G = S.group
    gens = S.gen_indices()
    ident = G.index(G.identity)
    members = [a for a in S.members if all(G.comm_idx(a, b) == ident for b in gens)]
    return _subgroup_from_indices(G, members)
