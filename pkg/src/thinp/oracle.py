"""Exhaustive automorphism search and an independent certificate checker.

The search fixes a minimal generating set S made of pc generators, tries
every tuple of images (pruned by element order and lower-central weight),
keeps tuples that satisfy every defining relation, and checks surjectivity
from the induced map on all elements.  Work is vectorised over candidate
tuples with numpy on the Cayley table.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import structure as st
from .derivation import Endo
from .pcgroup import Group, GroupElement

log = logging.getLogger(__name__)

ORACLE_BOUND = 3**6
WARN_ORDER = 5**4
CHUNK = 200_000


class OracleBoundExceeded(ValueError):
    pass


class CertificateError(ValueError):
    """Certificate is malformed."""


class CertificateMismatch(ValueError):
    """Certificate names a different group."""


@dataclass
class AutSearchResult:
    group: str
    total: int
    inner: int
    noninner_order_p: int
    representative: tuple[GroupElement, ...] | None

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "total": self.total,
            "inner": self.inner,
            "noninner_order_p": self.noninner_order_p,
            "representative": None if self.representative is None
            else [list(g) for g in self.representative],
        }


def _check_bound(G: Group, bound: int) -> None:
    if G.order > bound:
        raise OracleBoundExceeded(f"|{G.name}| = {G.order} exceeds oracle bound {bound}")
    if G.order > WARN_ORDER and G.p >= 5:
        log.warning("oracle search on %s (order %d) may be slow", G.name, G.order)
    if not G.has_table:
        G._build_table()


def _basis(G: Group) -> list[int]:
    """Pc generators (0-based) independent modulo the Frattini subgroup."""
    Phi = st.frattini(G)
    chosen: list[int] = []
    span = set(Phi.members)
    for k, a in enumerate(G.generators()):
        ia = G.index(a)
        if ia not in span:
            chosen.append(k)
            gens = Phi.gen_indices() + [G.index(G.generators()[j]) for j in chosen]
            span = st._close(G, span, gens)
    return chosen


def _spanning_tree(G: Group, gens: list[int]) -> tuple[list[int], list[int], list[int]]:
    """BFS order with parents: element = parent * gens[via]."""
    ident = G.index(G.identity)
    order, parent, via = [ident], {ident: -1}, {ident: -1}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s, g in enumerate(gens):
            y = G.mul_idx(x, g)
            if y not in parent:
                parent[y], via[y] = x, s
                order.append(y)
                queue.append(y)
    return order, [parent[x] for x in order], [via[x] for x in order]


@dataclass
class _Search:
    group: Group
    basis: list[int]
    perms: np.ndarray      # element-major: perms[x, a] = image of x under automorphism a
    images: np.ndarray     # images of all pc generators (indices)
    orders: np.ndarray
    inner_mask: np.ndarray
    inner_perms: np.ndarray
    fixes_phi: np.ndarray


def _full_maps(G: Group, tree, basis_imgs: np.ndarray) -> np.ndarray:
    """Element-major maps: out[x, a] is the image of element x under candidate a."""
    T = G.table
    order, parent, via = tree
    out = np.empty((G.order, basis_imgs.shape[0]), dtype=np.int32)
    out[order[0]] = order[0]
    cols = np.ascontiguousarray(basis_imgs.T)
    for x, par, s in zip(order[1:], parent[1:], via[1:]):
        out[x] = T[out[par], cols[s]]
    return out


@lru_cache(maxsize=16)
def _search(G: Group, bound: int = ORACLE_BOUND) -> _Search:
    _check_bound(G, bound)
    T, inv = G.table, G.inverse_table
    N = G.order
    basis = _basis(G)
    gens = [G.index(a) for a in G.generators()]
    bgens = [gens[k] for k in basis]
    tree = _spanning_tree(G, bgens)
    pos = {x: i for i, x in enumerate(tree[0])}

    orders = np.array([G.element_order(G.element(i)) for i in range(N)])
    weights = np.array([st.weight(G, i) for i in range(N)])
    cands = [np.nonzero((orders == orders[g]) & (weights == weights[g]))[0].astype(np.int32)
             for g in bgens]

    def words_for(target: int) -> list[int]:
        path = []
        i = pos[target]
        while tree[1][i] != -1:
            path.append(tree[2][i])
            i = pos[tree[1][i]]
        return path[::-1]

    pc_paths = [words_for(g) for g in gens]
    relators = G.presentation.relators()
    total = int(np.prod([len(c) for c in cands]))
    kept = []
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK))
        cols = []
        rem = idx
        for c in reversed(cands):
            rem, r = np.divmod(rem, len(c))
            cols.append(c[r])
        B = np.stack(cols[::-1], axis=1)
        ident = G.index(G.identity)
        imgs = []
        for path in pc_paths:
            cur = np.full(len(idx), ident, dtype=np.int32)
            for s in path:
                cur = T[cur, B[:, s]]
            imgs.append(cur)
        ok = np.ones(len(idx), dtype=bool)
        for kind, key, tail in relators:
            rhs = np.full(len(idx), ident, dtype=np.int32)
            for k, e in tail:
                for _ in range(e):
                    rhs = T[rhs, imgs[k - 1]]
            if kind == "pow":
                a = imgs[key[0] - 1]
                lhs = a
                for _ in range(G.p - 1):
                    lhs = T[lhs, a]
            else:
                a, b = imgs[key[0] - 1], imgs[key[1] - 1]
                lhs = T[T[T[inv[a], inv[b]], a], b]
            ok &= lhs == rhs
        if ok.any():
            kept.append((B[ok], np.stack([im[ok] for im in imgs], axis=1)))
    if kept:
        B = np.concatenate([k[0] for k in kept])
        imgs = np.concatenate([k[1] for k in kept])
    else:
        B = np.empty((0, len(basis)), dtype=np.int32)
        imgs = np.empty((0, G.n), dtype=np.int32)
    maps = _full_maps(G, tree, B)
    # the image of a homomorphism is the subgroup generated by the images; onto iff a permutation
    onto = (np.sort(maps, axis=0) == np.arange(N)[:, None]).all(axis=0)
    maps, imgs = maps[:, onto], imgs[onto]
    sort = np.lexsort(imgs.T[::-1])
    maps, imgs = maps[:, sort], imgs[sort]
    A = len(imgs)

    gens_row = np.array(gens, dtype=np.int32)
    cols = np.arange(A)
    orders_out = np.zeros(A, dtype=np.int64)
    cur = imgs.copy()
    k = 1
    while (orders_out == 0).any():
        done = (cur == gens_row).all(axis=1) & (orders_out == 0)
        orders_out[done] = k
        cur = maps[cur, cols[:, None]]
        k += 1
        if k > 10 * N:
            raise RuntimeError("automorphism order search did not terminate")

    # conjugation by h on the pc generators: inv[h] * g * h
    hs = np.arange(N)
    inner_imgs = np.stack([T[T[inv[hs], g], hs] for g in gens], axis=1)
    inner_perms = np.unique(inner_imgs, axis=0)
    inner_keys = {row.tobytes() for row in inner_perms}
    inner_mask = np.array([row.tobytes() in inner_keys for row in imgs.astype(np.int32)], dtype=bool)
    phi = np.array(sorted(st.frattini(G).members), dtype=np.int32)
    fixes_phi = (maps[phi] == phi[:, None]).all(axis=0)
    perms = maps
    return _Search(G, basis, perms, imgs, orders_out, inner_mask, inner_perms, fixes_phi)


def _endo(G: Group, row, tag="automorphism") -> Endo:
    return Endo(G, tuple(G.element(int(i)) for i in row), tag)


def all_automorphisms(G: Group, bound: int = ORACLE_BOUND) -> list[Endo]:
    s = _search(G, bound)
    return [_endo(G, row) for row in s.images]


def inner_automorphisms(G: Group) -> list[Endo]:
    """One conjugation map per coset of the centre."""
    if not G.has_table:
        G._build_table()
    gens = [G.index(a) for a in G.generators()]
    seen: dict[tuple, Endo] = {}
    for h in range(G.order):
        key = tuple(G.conj_idx(g, h) for g in gens)
        if key not in seen:
            seen[key] = _endo(G, key)
    return [seen[k] for k in sorted(seen)]


def aut_search(G: Group, bound: int = ORACLE_BOUND) -> AutSearchResult:
    s = _search(G, bound)
    good = np.nonzero((s.orders == G.p) & ~s.inner_mask)[0]
    rep = None
    if len(good):
        rep = tuple(G.element(int(i)) for i in s.images[good[0]])
    return AutSearchResult(G.name, len(s.images), len(s.inner_perms), len(good), rep)


def find_noninner_order_p(G: Group, bound: int = ORACLE_BOUND, *,
                          fix_frattini: bool = True) -> Endo | None:
    """First non-inner automorphism of order p in canonical order, if any.

    With ``fix_frattini`` only maps fixing Phi(G) elementwise qualify.
    """
    s = _search(G, bound)
    mask = (s.orders == G.p) & ~s.inner_mask
    if fix_frattini:
        mask &= s.fixes_phi
    good = np.nonzero(mask)[0]
    return _endo(G, s.images[good[0]]) if len(good) else None


def classify(G: Group, images, bound: int = ORACLE_BOUND) -> dict:
    """Look a map up in the exhaustive search and report its classification."""
    s = _search(G, bound)
    key = np.array([G.index(tuple(g)) for g in images], dtype=np.int32)
    hit = np.nonzero((s.images == key).all(axis=1))[0]
    if not len(hit):
        return {"found": False, "inner": None, "order": None, "fixes_frattini": None}
    i = hit[0]
    return {"found": True, "inner": bool(s.inner_mask[i]), "order": int(s.orders[i]),
            "fixes_frattini": bool(s.fixes_phi[i])}


def endo_order(phi: Endo) -> int:
    if not phi.is_bijective():
        raise ValueError("endo_order needs an automorphism")
    G = phi.owner
    gens = tuple(G.generators())
    cur, k = phi.images, 1
    while cur != gens:
        cur = tuple(phi.apply(g) for g in cur)
        k += 1
    return k


# ------------------------------------------------------ certificate checks

def _local_closure(G: Group, start: set[int], gens: list[int]) -> set[int]:
    seen = set(start) | {G.index(G.identity)}
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = G.mul_idx(x, g)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def _local_frattini(G: Group) -> set[int]:
    pcs = [G.index(a) for a in G.generators()]
    gens = [G.comm_idx(a, b) for a in pcs for b in pcs]
    gens += [G.index(G.power(G.element(g), G.p)) for g in range(G.order)]
    gens = sorted(set(gens))
    members = _local_closure(G, set(gens), gens)
    # normal closure under conjugation by pc generators
    queue = deque(gens)
    while queue:
        g = queue.popleft()
        for t in pcs:
            c = G.conj_idx(g, t)
            if c not in members:
                gens.append(c)
                queue.append(c)
                members = _local_closure(G, members, gens)
    return members


def certificate_checks(G: Group, cert: dict) -> dict[str, bool]:
    """Recompute every check from the presentation and the generator images."""
    if cert.get("group") != G.name or cert.get("order") != G.order:
        raise CertificateMismatch(
            f"certificate is for {cert.get('group')!r} of order {cert.get('order')}, "
            f"not {G.name!r} of order {G.order}")
    try:
        images = tuple(G.check_element(g) for g in cert["automorphism"])
        claimed = cert["checks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateError(f"malformed certificate: {exc}") from exc
    if len(images) != G.n:
        raise CertificateError("wrong number of generator images")
    if not G.has_table and G.order <= G.enumeration_bound:
        G._build_table()

    def apply(g: GroupElement) -> GroupElement:
        out = G.identity
        for k, e in enumerate(g):
            for _ in range(e):
                out = G.multiply(out, images[k])
        return out

    hom = True
    for kind, key, tail in G.presentation.relators():
        rhs = G.identity
        for k, e in tail:
            for _ in range(e):
                rhs = G.multiply(rhs, images[k - 1])
        if kind == "pow":
            lhs = G.identity
            for _ in range(G.p):
                lhs = G.multiply(lhs, images[key[0] - 1])
        else:
            j, i = key
            lhs = G.commutator(images[j - 1], images[i - 1])
        hom &= lhs == rhs
    idx = [G.index(g) for g in images]
    bij = len(_local_closure(G, set(idx), idx)) == G.order
    gens = tuple(G.generators())
    cur = images
    for _ in range(G.p - 1):
        cur = tuple(apply(g) for g in cur)
    order_p = hom and images != gens and cur == gens
    phi_set = _local_frattini(G)
    fixes = hom and all(apply(G.element(h)) == G.element(h) for h in phi_set)
    pcs = [G.index(a) for a in gens]
    inner = any(all(G.conj_idx(a, h) == b for a, b in zip(pcs, idx)) for h in range(G.order))
    checks = {
        "homomorphism": hom,
        "bijective": bij,
        "order_p": order_p,
        "fixes_frattini": fixes,
        "non_inner": not inner,
    }
    checks["claims_match"] = (
        claimed.get("homomorphism") is True and claimed.get("bijective") is True
        and claimed.get("order_p") is True and claimed.get("fixes_frattini") is True
        and claimed.get("inner_witness") is None
    )
    return checks


def verify_certificate(G: Group, cert: dict) -> bool:
    return all(certificate_checks(G, cert).values())


def random_elements(G: Group, k: int, seed: int = 0) -> list[GroupElement]:
    rng = random.Random(seed)
    return [G.element(rng.randrange(G.order)) for _ in range(k)]
