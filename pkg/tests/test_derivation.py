import random

import pytest

from thinp import berkovich as bk
from thinp import derivation as dv
from thinp import structure as st

from conftest import load

# (group, u, v) triples; u, v drawn from Omega_1(Z_2)
CASES = [
    ("M243", (0, 0, 0, 1, 2), (0, 0, 0, 2, 1)),
    ("M243", (0, 0, 0, 0, 1), (0, 0, 0, 1, 0)),
    ("T729", (0, 0, 0, 1, 2, 1), (0, 0, 0, 2, 1, 0)),
    ("T729", (0, 0, 0, 0, 0, 1), (0, 0, 0, 1, 0, 0)),
]


def make(name, u, v) -> dv.Derivation:
    G = load(name)
    module = dv.GroupModule(G, bk.omega1_z2(G))
    return dv.extend_from_generators(module, {"x": u, "y": v}, bk._gen_map(G))


def twisted(delta: dv.Derivation, w: dv.FreeWord):
    """delta(w) = pi(w)^-1 psi(w), psi the homomorphism x -> pi(x) delta(x)."""
    G = delta.group
    psi = G.identity
    for s, e in w:
        t = G.multiply(delta.gen_map[s], delta.gen_images[s])
        psi = G.multiply(psi, G.power(t, e))
    return G.multiply(G.inverse(delta.project(w)), psi)


# ------------------------------------------------------------ free words

def test_free_word_helpers():
    x, y = dv.letter("x"), dv.letter("y")
    assert dv.free_mul(x, dv.free_inverse(x)) == ()
    assert dv.free_power(x, 3) == (("x", 3),)
    assert dv.free_power(x, -2) == (("x", -2),)
    assert dv.free_comm(x, x) == ()
    assert dv.free_comm(y, x) == (("y", -1), ("x", -1), ("y", 1), ("x", 1))
    assert dv.free_comm(y, x, x) == dv.free_comm(dv.free_comm(y, x), x)


def test_projection_of_commutator():
    delta = make(*CASES[0])
    G = delta.group
    a, b = delta.gen_map["x"], delta.gen_map["y"]
    assert delta.project(dv.free_comm(dv.letter("y"), dv.letter("x"))) == G.commutator(b, a)


# ------------------------------------------------------------ derivation law

@pytest.mark.parametrize("case", CASES)
def test_cocycle_law(case):
    delta = make(*case)
    G = delta.group
    rng = random.Random(1000)
    for _ in range(1000):
        w1, w2 = dv.random_word(rng, "xy"), dv.random_word(rng, "xy")
        lhs = delta(dv.free_mul(w1, w2))
        rhs = G.multiply(G.conjugate(delta(w1), delta.project(w2)), delta(w2))
        assert lhs == rhs


@pytest.mark.parametrize("case", CASES)
def test_matches_twisted_homomorphism(case):
    delta = make(*case)
    rng = random.Random(5)
    for _ in range(300):
        w = dv.random_word(rng, "xy", max_len=10)
        assert delta(w) == twisted(delta, w)


def test_values_on_generators_and_inverses():
    delta = make(*CASES[2])
    G = delta.group
    u = delta.gen_images["x"]
    assert delta(dv.letter("x")) == u
    assert delta(()) == G.identity
    assert G.multiply(G.conjugate(delta(dv.letter("x", -1)), delta.gen_map["x"]), u) == G.identity


def test_uniqueness_from_generator_values():
    """Two derivations agreeing on x and y agree everywhere."""
    a = make(*CASES[0])
    b = dv.Derivation(a.module, dict(a.gen_images), dict(a.gen_map))
    rng = random.Random(2)
    for _ in range(200):
        w = dv.random_word(rng, "xy")
        assert a(w) == b(w)


def test_module_must_be_abelian_and_normal():
    G = load("ES27")
    with pytest.raises(dv.DerivationError):
        dv.GroupModule(G, st.whole(G))
    H = st.closure(G, [G.generators()[0]])
    with pytest.raises(dv.DerivationError):
        dv.GroupModule(G, H)


def test_image_outside_module_rejected():
    G = load("M243")
    module = dv.GroupModule(G, bk.omega1_z2(G))
    with pytest.raises(dv.DerivationError):
        dv.extend_from_generators(module, {"x": G.generators()[0], "y": G.identity}, bk._gen_map(G))


def test_unknown_symbol_rejected():
    delta = make(*CASES[0])
    with pytest.raises(dv.DerivationError):
        delta(dv.letter("z"))


# ------------------------------------------------------------ relation kernel and quotient

@pytest.mark.parametrize("case", CASES)
def test_vanishes_on_quotient_relations(case):
    delta = make(*case)
    assert dv.check_relation_kernel(delta, bk.quotient_relations(delta.group.p)).kernel_ok


def test_kernel_failure_is_reported():
    delta = make(*CASES[0])
    report = dv.check_relation_kernel(delta, [dv.letter("x")])
    assert not report.kernel_ok
    with pytest.raises(dv.KernelError):
        dv.induce_on_quotient(delta, [dv.letter("x")])


@pytest.mark.parametrize("case", CASES)
def test_induced_derivation_law_on_group(case):
    delta = make(*case)
    G = delta.group
    induced = dv.induce_on_quotient(delta, bk.quotient_relations(G.p), samples=50)
    rng = random.Random(11)
    for _ in range(500):
        g, h = G.element(rng.randrange(G.order)), G.element(rng.randrange(G.order))
        assert induced(G.multiply(g, h)) == G.multiply(G.conjugate(induced(g), h), induced(h))


@pytest.mark.parametrize("case", CASES)
def test_induced_derivation_constant_on_gamma3_cosets(case):
    delta = make(*case)
    G = delta.group
    induced = dv.induce_on_quotient(delta, bk.quotient_relations(G.p))
    g3 = st.gamma(G, 3).members
    for k in sorted(g3):
        assert not any(induced(G.element(k)))
    g = G.generators()[0]
    for k in sorted(g3):
        assert induced(G.multiply(g, G.element(k))) == induced(g)


# ------------------------------------------------------------ lift

@pytest.mark.parametrize("case", CASES)
def test_lift_is_automorphism_of_order_dividing_p(case):
    delta = make(*case)
    G = delta.group
    phi = dv.lift_to_automorphism(dv.induce_on_quotient(delta, bk.quotient_relations(G.p)))
    assert phi.tag == "automorphism"
    assert phi.respects_relations() and phi.is_bijective()
    cur = phi
    for _ in range(G.p - 1):
        cur = phi.compose(cur)
    assert cur.is_identity()
    for g in (G.element(i) for i in range(0, G.order, 7)):
        induced = dv.induce_on_quotient(delta, bk.quotient_relations(G.p))
        assert phi.apply(g) == G.multiply(g, induced(g))


def test_lift_of_zero_derivation_is_identity():
    G = load("M243")
    delta = make("M243", G.identity, G.identity)
    phi = dv.lift_to_automorphism(dv.induce_on_quotient(delta, bk.quotient_relations(G.p)))
    assert phi.is_identity()


class ConstantMap(dv.InducedDerivation):
    """Not a derivation: every element goes to the same module element."""

    def __call__(self, g):
        return self.base.gen_images["x"]


def test_lift_rejects_non_homomorphism():
    G = load("M243")
    delta = make(*CASES[0])
    bogus = ConstantMap(delta, (), dv.preimage_words(G, delta.gen_map))
    with pytest.raises(dv.LiftError):
        dv.lift_to_automorphism(bogus)


def test_central_assignment_lifts_without_relation_check():
    # a map into the centre that kills commutators is a homomorphism G -> Z, hence a derivation
    G = load("W81")
    M = st.center(G)
    z = G.element(max(M.members))
    delta = dv.extend_from_generators(dv.GroupModule(G, M), {"x": z, "y": G.identity},
                                      {"x": G.generators()[0], "y": G.generators()[1]})
    phi = dv.lift_to_automorphism(dv.induce_on_quotient(delta, bk.quotient_relations(G.p)))
    assert phi.tag == "automorphism"
    assert phi.apply(G.generators()[0]) == G.multiply(G.generators()[0], z)


def test_preimage_words_project_correctly():
    G = load("T729")
    pre = dv.preimage_words(G, bk._gen_map(G))
    delta = make(*CASES[2])
    for i in range(0, G.order, 13):
        g = G.element(i)
        assert delta.project(pre.word(g)) == g
        assert delta.project(pre.normal_form_word(g)) == g


# ------------------------------------------------------------ free derivation identities

@pytest.mark.parametrize("case", CASES)
def test_free_identities(case):
    delta = make(*case)
    report = dv.verify_free_derivation_identities(delta, samples=500, seed=0)
    for name, clause in report.clauses.items():
        assert clause.passed, (name, clause)
    for clause in report.clauses.values():
        assert clause.trials == (500 if clause.applicable else 0)
    assert report.clauses["power_binomial"].applicable
    assert report.clauses["commutator_law"].applicable
    # M is not central, so [M, F] = 1 fails and the first gamma clause is vacuous
    assert not report.clauses["gamma_1"].applicable
    assert report.clauses["gamma_2"].applicable


def test_derivation_image_contains_generator_values():
    delta = make(*CASES[0])
    D = dv.derivation_image(delta)
    assert delta.gen_images["x"] in D and delta.gen_images["y"] in D
    assert D <= delta.module.carrier
