"""Non-inner automorphisms of order p for thin p-groups, built from derivations.

The two free generators ``x`` and ``y`` project onto pc generators spanning
G/Phi(G).  Every pair (u, v) in Omega_1(Z_2(G)) defines a derivation of the
free group; it vanishes on the relators of the extraspecial quotient
G/gamma_3(G), so it descends to G and lifts to ``g -> g delta(g)``.

Which candidate is used depends on the group:

* ``counting``: Z_2 is elementary of rank 3; candidates are scanned in order
  and the first one fixing Phi(G) with no inner witness is taken.
* ``noncentral``: Z_2 is C_{p^2} x C_p; u is the first non-central element of
  Omega_1(Z_2) and v the first non-identity one whose lift fixes Phi(G).  An
  inner witness here is a hard failure.
* ``scan``: the construction applies but the d-condition fails; candidates
  are scanned as in the counting case.

Anything else goes to the exhaustive oracle.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from . import derivation as dv
from . import oracle
from . import structure as st
from .pcgroup import Group, GroupElement

CERT_VERSION = 1
SYMBOLS = ("x", "y")


class NotEligible(ValueError):
    """The group does not meet the hypotheses of the construction."""


class CannotCertify(RuntimeError):
    """Neither the construction nor the oracle can produce a certificate."""


class PipelineFailure(RuntimeError):
    """The construction produced something the argument says is impossible."""


# ------------------------------------------------------------ setup

def quotient_relations(p: int) -> tuple[dv.FreeWord, ...]:
    """Relators of the extraspecial group of order p^3 and exponent p."""
    x, y = dv.letter("x"), dv.letter("y")
    yx = dv.free_comm(y, x)
    return (dv.free_power(x, p), dv.free_power(y, p), dv.free_comm(yx, x), dv.free_comm(yx, y))


def frattini_basis(G: Group) -> tuple[GroupElement, GroupElement]:
    """First two pc generators independent modulo Phi(G)."""
    Phi = st.frattini(G)
    chosen: list[GroupElement] = []
    span = Phi
    for a in G.generators():
        if a not in span:
            chosen.append(a)
            span = st.closure(G, [G.element(i) for i in Phi.gen_indices()] + chosen)
    if len(chosen) != 2 or span.order != G.order:
        raise NotEligible(f"{G.name} is not 2-generated")
    return chosen[0], chosen[1]


def omega1_z2(G: Group) -> st.Subgroup:
    return st.omega1(st.upper(G, 2))


@lru_cache(maxsize=16)
def _module(G: Group) -> dv.GroupModule:
    return dv.GroupModule(G, omega1_z2(G))


def _gen_map(G: Group) -> dict[str, GroupElement]:
    return dict(zip(SYMBOLS, frattini_basis(G)))


def _require(G: Group) -> st.AssumptionReport:
    rep = st.standing_assumptions(G)
    if not rep.construction_applicable:
        raise NotEligible(f"{G.name} does not satisfy the hypotheses of the construction")
    return rep


def mode_of(G: Group) -> str:
    rep = _require(G)
    if not rep.eligible:
        return "scan"
    return "counting" if rep.z2_type == "Cp^3" else "noncentral"


# ------------------------------------------------------------ candidates

def candidate_assignments(G: Group, *, require_eligible: bool = True) -> list[tuple[GroupElement, GroupElement]]:
    """All pairs (u, v) from Omega_1(Z_2(G)), lexicographic in (u, v)."""
    if require_eligible:
        _require(G)
    omega = [G.element(i) for i in sorted(omega1_z2(G).members)]
    return [(u, v) for u in omega for v in omega]


def build_derivation(G: Group, u: GroupElement, v: GroupElement, *,
                     seed: int = 0) -> dv.InducedDerivation:
    delta = dv.extend_from_generators(_module(G), {"x": u, "y": v}, _gen_map(G))
    return dv.induce_on_quotient(delta, quotient_relations(G.p), seed=seed)


def build_automorphism(G: Group, u: GroupElement, v: GroupElement, *, seed: int = 0) -> dv.Endo:
    phi = dv.lift_to_automorphism(build_derivation(G, u, v, seed=seed))
    if phi.tag != "automorphism":
        raise dv.LiftError(f"lift of ({u}, {v}) is not an automorphism")
    return phi


def iter_automorphisms(G: Group, *, seed: int = 0) -> Iterator[tuple[tuple[GroupElement, GroupElement], dv.Endo]]:
    for u, v in candidate_assignments(G):
        yield (u, v), build_automorphism(G, u, v, seed=seed)


# ------------------------------------------------------------ innerness

def is_inner(G: Group, phi: dv.Endo, *, confirm: int = 10, seed: int = 0) -> GroupElement | None:
    """First h with phi(g) = h^-1 g h on the Frattini basis, or None."""
    basis = [G.index(a) for a in frattini_basis(G)]
    targets = [G.index(phi.apply(G.element(a))) for a in basis]
    for h in range(G.order):
        if all(G.conj_idx(a, h) == t for a, t in zip(basis, targets)):
            rng = random.Random(seed)
            for _ in range(confirm):
                g = rng.randrange(G.order)
                if G.index(phi.apply(G.element(g))) != G.conj_idx(g, h):
                    raise PipelineFailure("map agrees with a conjugation on generators only")
            return G.element(h)
    return None


def inner_count_from_z3(G: Group) -> int:
    """Number of distinct conjugations by elements of Z_3(G)."""
    gens = [G.index(a) for a in G.generators()]
    maps = {tuple(G.conj_idx(g, h) for g in gens) for h in st.upper(G, 3).members}
    count = len(maps)
    if count * st.center(G).order != st.upper(G, 3).order:
        raise PipelineFailure("conjugation count disagrees with |Z_3/Z|")
    if st.standing_assumptions(G).construction_applicable and count > G.p**4:
        raise PipelineFailure(f"{count} inner automorphisms from Z_3 exceed p^4")
    return count


def first_noncentral(G: Group) -> tuple[GroupElement, GroupElement]:
    Z = st.center(G).members
    omega = sorted(omega1_z2(G).members)
    u = next((i for i in omega if i not in Z), None)
    v = next((i for i in omega if i != G.index(G.identity)), None)
    if u is None or v is None:
        raise PipelineFailure("Omega_1(Z_2) has no non-central element")
    return G.element(u), G.element(v)


# ------------------------------------------------------------ certificates

@dataclass
class NonInnerCertificate:
    group: str
    order: int
    prime: int
    nilpotency_class: int
    z2_type: str | None
    method: str
    mode: str
    assignment: tuple[GroupElement, GroupElement] | None
    automorphism: tuple[GroupElement, ...]
    checks: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        c = self.checks
        return (c.get("order_p") is True and c.get("fixes_frattini") is True
                and c.get("homomorphism") is True and c.get("bijective") is True
                and c.get("inner_witness") is None)

    def to_json(self) -> dict:
        return {
            "cert_version": CERT_VERSION,
            "group": self.group,
            "order": self.order,
            "prime": self.prime,
            "class": self.nilpotency_class,
            "z2_type": self.z2_type,
            "method": self.method,
            "mode": self.mode,
            "assignment": None if self.assignment is None
            else {"u": list(self.assignment[0]), "v": list(self.assignment[1])},
            "automorphism": [list(g) for g in self.automorphism],
            "checks": dict(self.checks),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "NonInnerCertificate":
        if data.get("cert_version") != CERT_VERSION:
            raise ValueError(f"unsupported certificate version {data.get('cert_version')!r}")
        a = data.get("assignment")
        return cls(
            group=data["group"], order=data["order"], prime=data["prime"],
            nilpotency_class=data["class"], z2_type=data["z2_type"],
            method=data["method"], mode=data["mode"],
            assignment=None if a is None else (tuple(a["u"]), tuple(a["v"])),
            automorphism=tuple(tuple(g) for g in data["automorphism"]),
            checks=dict(data["checks"]),
        )


def map_order(phi: dv.Endo, limit: int) -> int | None:
    G = phi.owner
    gens = tuple(G.generators())
    cur = phi.images
    for k in range(1, limit + 1):
        if cur == gens:
            return k
        cur = tuple(phi.apply(g) for g in cur)
    return None


def pipeline_checks(G: Group, phi: dv.Endo, witness: GroupElement | None) -> dict:
    return {
        "homomorphism": phi.respects_relations(),
        "bijective": phi.is_bijective(),
        "order_p": map_order(phi, G.p) == G.p,
        "fixes_frattini": fixes_frattini(G, phi),
        "inner_witness": None if witness is None else list(witness),
    }


def _oracle_confirm(G: Group, phi: dv.Endo, bound: int) -> bool | str:
    if G.order > bound:
        return "not_run"
    c = oracle.classify(G, phi.images, bound)
    return bool(c["found"] and not c["inner"] and c["order"] == G.p)


def _certificate(G: Group, phi: dv.Endo, *, method: str, mode: str,
                 assignment, witness, bound: int, confirm: bool) -> NonInnerCertificate:
    checks = pipeline_checks(G, phi, witness)
    checks["oracle_confirmed"] = _oracle_confirm(G, phi, bound) if confirm else "not_run"
    return NonInnerCertificate(
        group=G.name, order=G.order, prime=G.p,
        nilpotency_class=st.nilpotency_class(G),
        z2_type=st.standing_assumptions(G).z2_type, method=method, mode=mode,
        assignment=assignment, automorphism=phi.images, checks=checks,
    )


def fixes_frattini(G: Group, phi: dv.Endo) -> bool:
    return all(phi.apply(G.element(h)) == G.element(h) for h in st.frattini(G).members)


def find_noninner_order_p(G: Group, *, oracle_bound: int = oracle.ORACLE_BOUND,
                          confirm: bool = True, mode: str | None = None,
                          seed: int = 0) -> NonInnerCertificate:
    """First candidate whose lift fixes Phi(G) and has no inner witness.

    Only lifts with delta([y, x]) = 1 fix Phi(G); they are a subgroup of
    index p among the candidates, which still outnumbers the inner ones.
    ``mode`` overrides the case selection (for exercising both branches).
    """
    mode = mode or mode_of(G)
    chosen = None
    if mode == "noncentral":
        u, _ = first_noncentral(G)
        ident = G.identity
        for v in (G.element(i) for i in sorted(omega1_z2(G).members)):
            if v == ident:
                continue
            phi = build_automorphism(G, u, v, seed=seed)
            if not fixes_frattini(G, phi):
                continue
            witness = is_inner(G, phi, seed=seed)
            if witness is not None:
                raise PipelineFailure(f"non-central assignment gave an inner map (witness {witness})")
            chosen = ((u, v), phi)
            break
    elif mode in ("counting", "scan"):
        for pair, phi in iter_automorphisms(G, seed=seed):
            if fixes_frattini(G, phi) and is_inner(G, phi, seed=seed) is None:
                chosen = (pair, phi)
                break
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if chosen is None:
        raise PipelineFailure(f"no candidate on {G.name} gives a non-inner map fixing Phi(G)")
    pair, phi = chosen
    cert = _certificate(G, phi, method="pipeline", mode=mode, assignment=pair,
                        witness=None, bound=oracle_bound, confirm=confirm)
    if not cert.valid:
        raise PipelineFailure(f"pipeline certificate failed its own checks: {cert.checks}")
    return cert


def route_fallback(G: Group, *, oracle_bound: int = oracle.ORACLE_BOUND) -> NonInnerCertificate:
    if G.order > oracle_bound:
        raise CannotCertify(f"{G.name} (order {G.order}) is outside the construction "
                            f"and above the oracle bound {oracle_bound}")
    phi = oracle.find_noninner_order_p(G, oracle_bound)
    if phi is None:
        raise CannotCertify(f"oracle found no non-inner automorphism of order {G.p} on {G.name}")
    cert = _certificate(G, phi, method="oracle", mode="oracle", assignment=None,
                        witness=None, bound=oracle_bound, confirm=True)
    if not cert.valid:
        raise PipelineFailure(f"oracle certificate failed its checks: {cert.checks}")
    return cert


def certify(G: Group, *, oracle_bound: int = oracle.ORACLE_BOUND, seed: int = 0) -> NonInnerCertificate:
    """Construction when it applies, exhaustive search otherwise."""
    if G.order > oracle_bound and (G.p == 2 or st.nilpotency_class(G) < 4):
        raise CannotCertify(f"{G.name} (order {G.order}) is outside the construction "
                            f"and above the oracle bound {oracle_bound}")
    if st.standing_assumptions(G).construction_applicable:
        return find_noninner_order_p(G, oracle_bound=oracle_bound, seed=seed)
    return route_fallback(G, oracle_bound=oracle_bound)
