"""Derivations (1-cocycles) into normal abelian subgroups, and their lifts.

Free words are tuples of ``(symbol, exponent)`` pairs over named free
generators such as ``"x"`` and ``"y"``.  A derivation is stored by its
values on those generators together with the projection of each generator
into the owning group; the module action is conjugation, ``m^g = g^-1 m g``.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

from . import structure as st
from .pcgroup import Group, GroupElement

FreeWord = tuple[tuple[str, int], ...]


class DerivationError(ValueError):
    pass


class KernelError(DerivationError):
    pass


class LiftError(RuntimeError):
    """The lift of a derivation failed to be a homomorphism."""


# ------------------------------------------------------------ free words

def letter(sym: str, e: int = 1) -> FreeWord:
    return ((sym, e),)


def free_reduce(w: Sequence[tuple[str, int]]) -> FreeWord:
    out: list[list] = []
    for s, e in w:
        if e == 0:
            continue
        if out and out[-1][0] == s:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([s, e])
    return tuple((s, e) for s, e in out)


def free_mul(*ws: FreeWord) -> FreeWord:
    return free_reduce([f for w in ws for f in w])


def free_inverse(w: FreeWord) -> FreeWord:
    return tuple((s, -e) for s, e in reversed(w))


def free_power(w: FreeWord, k: int) -> FreeWord:
    if k < 0:
        return free_power(free_inverse(w), -k)
    return free_reduce(list(w) * k)


def free_comm(a: FreeWord, b: FreeWord, *rest: FreeWord) -> FreeWord:
    """Left-normed commutator [a, b, c, ...] = [[a, b], c, ...]."""
    c = free_mul(free_inverse(a), free_inverse(b), a, b)
    for r in rest:
        c = free_comm(c, r)
    return c


def random_word(rng: random.Random, symbols: Sequence[str], max_len: int = 6,
                max_exp: int = 3) -> FreeWord:
    n = rng.randint(0, max_len)
    return free_reduce([(rng.choice(symbols), rng.choice([e for e in range(-max_exp, max_exp + 1) if e]))
                        for _ in range(n)])


# -------------------------------------------------------------- modules

@dataclass(frozen=True)
class GroupModule:
    owner: Group
    carrier: st.Subgroup

    def __post_init__(self):
        if not st.is_abelian(self.carrier):
            raise DerivationError("module carrier must be abelian")
        if not st.is_normal(self.owner, self.carrier):
            raise DerivationError("module carrier must be normal")

    def act(self, m: GroupElement, g: GroupElement) -> GroupElement:
        return self.owner.conjugate(m, g)


@dataclass(frozen=True)
class Derivation:
    module: GroupModule
    gen_images: Mapping[str, GroupElement]
    gen_map: Mapping[str, GroupElement]

    @property
    def group(self) -> Group:
        return self.module.owner

    def __call__(self, w: FreeWord) -> GroupElement:
        return eval_derivation(self, w)

    def project(self, w: FreeWord) -> GroupElement:
        """pi(w) in the owning group."""
        G = self.group
        out = G.index(G.identity)
        for s, e in w:
            g = G.index(self._gen(s))
            if e < 0:
                g, e = G.inv_idx(g), -e
            for _ in range(e):
                out = G.mul_idx(out, g)
        return G.element(out)

    def _gen(self, s: str) -> GroupElement:
        try:
            return self.gen_map[s]
        except KeyError:
            raise DerivationError(f"unknown generator symbol {s!r}") from None


def extend_from_generators(module: GroupModule, images: Mapping[str, GroupElement],
                           gen_map: Mapping[str, GroupElement]) -> Derivation:
    if set(images) != set(gen_map):
        raise DerivationError("images and gen_map must share their keys")
    G = module.owner
    for s, m in images.items():
        if tuple(m) not in module.carrier:
            raise DerivationError(f"image of {s} lies outside the module")
    return Derivation(module, {s: tuple(m) for s, m in images.items()},
                      {s: G.check_element(g) for s, g in gen_map.items()})


def eval_derivation(delta: Derivation, w: FreeWord) -> GroupElement:
    """Left-to-right evaluation of ``delta(u s) = delta(u)^pi(s) delta(s)``."""
    G = delta.group
    mul, inv, conj = G.mul_idx, G.inv_idx, G.conj_idx
    d = G.index(G.identity)
    for s, e in w:
        g = G.index(delta._gen(s))
        m = G.index(delta.gen_images[s])
        if e < 0:
            # delta(s^-1) = (delta(s)^-1)^(pi(s)^-1)
            g = inv(g)
            m = conj(inv(m), g)
            e = -e
        for _ in range(e):
            d = mul(conj(d, g), m)
    return G.element(d)


@dataclass
class KernelReport:
    values: list[tuple[FreeWord, GroupElement]]

    @property
    def kernel_ok(self) -> bool:
        return all(not any(v) for _, v in self.values)


def check_relation_kernel(delta: Derivation, relations: Sequence[FreeWord]) -> KernelReport:
    return KernelReport([(r, eval_derivation(delta, r)) for r in relations])


# ----------------------------------------------------- preimage words

class PreimageWords:
    """A word over the free generators for every element of the owning group.

    Built breadth-first from the projected generators; ``normal_form_word``
    gives a second, independent preimage route through the pc generators.
    """

    def __init__(self, G: Group, gen_map: Mapping[str, GroupElement]):
        self.group = G
        self.symbols = tuple(sorted(gen_map))
        gens = [(s, G.index(gen_map[s])) for s in self.symbols]
        ident = G.index(G.identity)
        parent: dict[int, tuple[int, str]] = {ident: (-1, "")}
        queue = deque([ident])
        while queue:
            x = queue.popleft()
            for s, g in gens:
                y = G.mul_idx(x, g)
                if y not in parent:
                    parent[y] = (x, s)
                    queue.append(y)
        if len(parent) != G.order:
            raise DerivationError("projected generators do not generate the group")
        self._parent = parent
        self._cache: dict[int, FreeWord] = {ident: ()}
        self.pc_words = [self.word(g) for g in G.generators()]

    def word(self, g: GroupElement | int) -> FreeWord:
        i = g if isinstance(g, int) else self.group.index(g)
        if i not in self._cache:
            letters = []
            j = i
            while self._parent[j][0] != -1:
                j, s = self._parent[j]
                letters.append((s, 1))
            self._cache[i] = free_reduce(reversed(letters))
        return self._cache[i]

    def normal_form_word(self, g: GroupElement) -> FreeWord:
        return free_mul(*(free_power(self.pc_words[k], e) for k, e in enumerate(g) if e))


@lru_cache(maxsize=32)
def _preimages(G: Group, gen_items: tuple) -> PreimageWords:
    return PreimageWords(G, dict(gen_items))


def preimage_words(G: Group, gen_map: Mapping[str, GroupElement]) -> PreimageWords:
    return _preimages(G, tuple(sorted(gen_map.items())))


@dataclass(frozen=True)
class InducedDerivation:
    """A derivation on the owning group, evaluated through preimage words."""

    base: Derivation
    relations: tuple[FreeWord, ...]
    preimages: PreimageWords = field(repr=False)

    @property
    def module(self) -> GroupModule:
        return self.base.module

    @property
    def group(self) -> Group:
        return self.base.group

    def __call__(self, g: GroupElement) -> GroupElement:
        return eval_derivation(self.base, self.preimages.word(g))


def induce_on_quotient(delta: Derivation, relations: Sequence[FreeWord], *,
                       samples: int = 20, seed: int = 0) -> InducedDerivation:
    report = check_relation_kernel(delta, relations)
    if not report.kernel_ok:
        raise KernelError("derivation does not vanish on the relations")
    G = delta.group
    pre = preimage_words(G, delta.gen_map)
    rng = random.Random(seed)
    symbols = pre.symbols
    for _ in range(samples):
        g = G.element(rng.randrange(G.order))
        if eval_derivation(delta, pre.word(g)) != eval_derivation(delta, pre.normal_form_word(g)):
            raise KernelError(f"preimages of {g} disagree; derivation is not well defined")
        f = random_word(rng, symbols)
        conj_by = random_word(rng, symbols)
        r = free_mul(free_inverse(conj_by), rng.choice(list(relations)), conj_by)
        if eval_derivation(delta, free_mul(f, r)) != eval_derivation(delta, f):
            raise KernelError("derivation is not constant on relation cosets")
    return InducedDerivation(delta, tuple(relations), pre)


# ---------------------------------------------------------- endomorphisms

@dataclass(frozen=True)
class Endo:
    """A map of the group given by the images of the pc generators."""

    owner: Group
    images: tuple[GroupElement, ...]
    tag: str = "endomorphism"

    def apply(self, g: GroupElement) -> GroupElement:
        G = self.owner
        out = G.index(G.identity)
        for k, e in enumerate(g):
            if e:
                im = G.index(self.images[k])
                for _ in range(e):
                    out = G.mul_idx(out, im)
        return G.element(out)

    def respects_relations(self) -> bool:
        G = self.owner
        for kind, key, tail in G.presentation.relators():
            rhs = G.evaluate(tail, self.images)
            if kind == "pow":
                lhs = G.power(self.images[key[0] - 1], G.p)
            else:
                j, i = key
                lhs = G.commutator(self.images[j - 1], self.images[i - 1])
            if lhs != rhs:
                return False
        return True

    def is_bijective(self) -> bool:
        return st.closure(self.owner, self.images).order == self.owner.order

    def compose(self, other: "Endo") -> "Endo":
        """self after other."""
        return Endo(self.owner, tuple(self.apply(g) for g in other.images), self.tag)

    def is_identity(self) -> bool:
        return self.images == tuple(self.owner.generators())

    def key(self) -> tuple[int, ...]:
        return tuple(self.owner.index(g) for g in self.images)


def lift_to_automorphism(delta: InducedDerivation) -> Endo:
    """phi(g) = g delta(g), checked to be a homomorphism and, if delta(M) = 1, bijective."""
    G = delta.group
    kills_module = all(not any(delta(m)) for m in delta.module.carrier)
    images = tuple(G.multiply(a, delta(a)) for a in G.generators())
    phi = Endo(G, images)
    if not phi.respects_relations():
        raise LiftError("lifted map is not a homomorphism")
    if kills_module and phi.is_bijective():
        return Endo(G, images, "automorphism")
    return phi


# ------------------------------------------------- free derivation identities

@dataclass
class ClauseResult:
    applicable: bool
    trials: int = 0
    failures: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0


@dataclass
class PropertyReport:
    clauses: dict[str, ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())


def _iterated(G: Group, A: st.Subgroup, i: int) -> st.Subgroup:
    """[A, G, ..., G] with i copies of G."""
    W = st.whole(G)
    for _ in range(i):
        A = st.commutator_subgroup(G, A, W)
    return A


def derivation_image(delta: Derivation) -> st.Subgroup:
    """Subgroup generated by delta(F), via the pairs (pi(f), pi(f) delta(f))."""
    G = delta.group
    gens = [(G.index(delta.gen_map[s]), G.index(G.multiply(delta.gen_map[s], delta.gen_images[s])))
            for s in sorted(delta.gen_map)]
    ident = G.index(G.identity)
    seen = {(ident, ident)}
    queue = deque(seen)
    while queue:
        a, b = queue.popleft()
        for ga, gb in gens:
            y = (G.mul_idx(a, ga), G.mul_idx(b, gb))
            if y not in seen:
                seen.add(y)
                queue.append(y)
    values = {G.mul_idx(G.inv_idx(a), b) for a, b in seen}
    return st._subgroup_from_indices(G, values)


def verify_free_derivation_identities(delta: Derivation, samples: int = 500, *,
                                      seed: int = 0) -> PropertyReport:
    G = delta.group
    p = G.p
    M = delta.module.carrier
    rng = random.Random(seed)
    symbols = sorted(delta.gen_map)
    mul, conj = G.multiply, G.conjugate
    clauses: dict[str, ClauseResult] = {}

    a = ClauseResult(True)
    for _ in range(samples):
        f = random_word(rng, symbols)
        d, g = delta(f), delta.project(f)
        expected, twist = G.identity, G.identity
        for _k in range(p):
            expected = mul(expected, conj(d, twist))
            twist = mul(twist, g)
        a.trials += 1
        a.failures += delta(free_power(f, p)) != expected
    clauses["power_fold"] = a

    metabelian = _iterated(G, M, 2).order == 1
    b = ClauseResult(metabelian)
    if metabelian:
        for _ in range(samples):
            f = random_word(rng, symbols)
            d, g = delta(f), delta.project(f)
            expected = mul(G.power(d, p), G.power(G.commutator(d, g), p * (p - 1) // 2))
            b.trials += 1
            b.failures += delta(free_power(f, p)) != expected
    clauses["power_binomial"] = b

    D = derivation_image(delta)
    c_cls = st.nilpotency_class(G)
    for i in range(1, c_cls + 2):
        ok = _iterated(G, M, i).order == 1
        res = ClauseResult(ok)
        if ok:
            target = _iterated(G, D, i - 1)
            for _ in range(samples):
                words = [random_word(rng, symbols, max_len=4) for _ in range(i)]
                w = words[0] if i == 1 else free_comm(*words)
                res.trials += 1
                res.failures += delta(w) not in target
        clauses[f"gamma_{i}"] = res

    Phi = st.frattini(G)
    ident = G.index(G.identity)
    inside_z2 = M.members <= st.upper(G, 2).members
    flat = inside_z2 and all(G.comm_idx(m, h) == ident for m in M.gen_indices()
                             for h in Phi.gen_indices())
    cl = ClauseResult(flat)
    if flat:
        for _ in range(samples):
            g, h = random_word(rng, symbols), random_word(rng, symbols)
            lhs = delta(free_comm(g, h))
            rhs = mul(G.commutator(delta(g), delta.project(h)),
                      G.commutator(delta.project(g), delta(h)))
            cl.trials += 1
            cl.failures += lhs != rhs
    clauses["commutator_law"] = cl
    return PropertyReport(clauses)
