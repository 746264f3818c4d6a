import itertools

import pytest

from thinp import structure as st
from thinp.pcgroup import Group

from conftest import NAMES, SMALL, load

C9 = Group.from_text("group C9\nprime 3\nngens 2\npow 1 = a2\n")
THIN = ["EA9", "ES27", "W81", "M243", "MC625", "T729"]
NONABELIAN_THIN = THIN[1:]


# ------------------------------------------------------------ series

@pytest.mark.parametrize("name, lower, upper", [
    ("ES27", [27, 3, 1], [1, 3, 27]),
    ("W81", [81, 9, 3, 1], [1, 3, 9, 81]),
    ("M243", [243, 27, 9, 3, 1], [1, 3, 9, 27, 243]),
    ("T729", [729, 81, 27, 3, 1], [1, 3, 27, 81, 729]),
    ("EA27", [27, 1], [1, 27]),
])
def test_central_series_orders(name, lower, upper):
    G = load(name)
    assert st.lower_central_series(G).orders() == lower
    assert st.upper_central_series(G).orders() == upper
    assert st.nilpotency_class(G) == len(lower) - 1


def test_gamma_and_upper_indexing():
    G = load("W81")
    assert st.gamma(G, 1) == st.whole(G)
    assert st.upper(G, 0) == st.trivial(G)
    assert st.upper(G, 1) == st.center(G)
    assert st.gamma(G, 10).order == 1


@pytest.mark.parametrize("name", SMALL)
def test_center_brute_force(name):
    G = load(name)
    e = G.index(G.identity)
    members = {a for a in range(G.order) if all(G.comm_idx(a, b) == e for b in range(G.order))}
    assert st.center(G).members == members


@pytest.mark.parametrize("name", SMALL)
def test_frattini_is_intersection_of_maximal_subgroups(name):
    G = load(name)
    maximal = [S for S in st.all_subgroups(G) if S.order * G.p == G.order]
    inter = set(range(G.order))
    for S in maximal:
        inter &= S.members
    assert st.frattini(G).members == inter


@pytest.mark.parametrize("name, d", [("EA9", 2), ("EA27", 3), ("ES27", 2), ("W81", 2), ("M243", 2)])
def test_min_generators(name, d):
    assert st.min_generators(load(name)) == d


def test_abelian_invariants():
    assert st.abelian_invariants(st.whole(C9)) == (9,)
    assert st.abelian_invariants(st.whole(load("EA27"))) == (3, 3, 3)
    G = load("M243")
    assert st.abelian_invariants(st.upper(G, 2)) == (3, 3)
    assert st.abelian_invariants(st.upper(load("T729"), 2)) == (3, 3, 3)


def test_omega1_rejects_nonabelian():
    with pytest.raises(ValueError):
        st.omega1(st.whole(load("ES27")))


def test_weight():
    G = load("M243")
    assert [st.weight(G, G.index(a)) for a in G.generators()] == [1, 1, 2, 3, 4]
    assert st.weight(G, G.index(G.identity)) == st.nilpotency_class(G) + 1


# ------------------------------------------------------------ lattice

@pytest.mark.parametrize("name", ["EA9", "ES27", "EA27", "W81"])
def test_normal_subgroups_match_brute_force(name):
    G = load(name)
    brute = {S.members for S in st.all_subgroups(G) if st.is_normal(G, S)}
    assert {S.members for S in st.normal_subgroups(G)} == brute


def test_normal_subgroup_counts():
    # elementary abelian of order 9: 1, four lines, whole group
    assert len(st.normal_subgroups(load("EA9"))) == 6
    # maximal class: p + 1 maximal subgroups plus the lower central terms
    assert len(st.normal_subgroups(load("W81"))) == 4 + 4
    assert len(st.normal_subgroups(load("M243"))) == 4 + 5


def test_maximum_antichain_small_poset():
    items = [1, 2, 3, 4, 6, 12]
    anti = st.maximum_antichain(items, lambda a, b: b % a == 0)
    assert len(anti) == 2
    assert all(not (a != b and b % a == 0) for a, b in itertools.permutations(anti, 2))


# ------------------------------------------------------------ thinness

@pytest.mark.parametrize("name", SMALL)
def test_thinness_methods_agree(name):
    G = load(name)
    assert st.is_thin(G, "exact").is_thin == st.is_thin(G, "coverty").is_thin


def test_thinness_methods_agree_on_cyclic():
    assert st.is_thin(C9, "exact").is_thin and st.is_thin(C9, "coverty").is_thin


@pytest.mark.parametrize("name, thin", [
    ("EA9", True), ("EA27", False), ("ES27", True), ("W81", True), ("M243", True),
])
def test_thinness_verdicts(name, thin):
    assert st.is_thin(load(name)).is_thin is thin


def test_elementary_27_antichain_witness():
    rep = st.is_thin(load("EA27"), "exact")
    assert not rep.is_thin and rep.max_antichain_size >= 4
    assert len(rep.witness) == rep.max_antichain_size


def test_maximal_class_antichain_is_maximal_subgroups():
    G = load("W81")
    rep = st.is_thin(G, "exact")
    assert rep.max_antichain_size == G.p + 1


def test_unknown_thin_method():
    with pytest.raises(ValueError):
        st.is_thin(load("EA9"), "guess")


# ------------------------------------------------------------ thin-group invariants

@pytest.mark.parametrize("name", NONABELIAN_THIN)
def test_thin_group_structure(name):
    G = load(name)
    p = G.p
    assert st.series_coincide(G)
    assert st.center(G).order == p
    assert st.frattini(G) == st.gamma(G, 2)
    c = st.nilpotency_class(G)
    for i in range(1, c + 1):
        size, elementary, _ = st._layer_shape(G, i)
        assert elementary and size <= p * p


@pytest.mark.parametrize("name", [n for n in THIN if load(n).order <= 3**5])
def test_covering_property_exhaustive(name):
    G = load(name)
    c = st.nilpotency_class(G)
    for i in range(1, c + 1):
        Gi, Gi1, Gi2 = st.gamma(G, i), st.gamma(G, i + 1), st.gamma(G, i + 2)
        for h in Gi.members - Gi1.members:
            hG = st.commutator_subgroup(G, st.normal_closure(G, [G.element(h)]), st.whole(G))
            assert st.join(hG, Gi2) == Gi1


@pytest.mark.parametrize("name", [n for n in THIN if load(n).order <= 3**5])
def test_lower_central_terms_are_unique_of_their_order(name):
    G = load(name)
    normals = st.normal_subgroups(G)
    terms = {T.members for T in st.lower_central_series(G).terms}
    for N in normals:
        unique = sum(M.order == N.order for M in normals) == 1
        assert unique == (N.members in terms), N


def test_thin_not_maximal_class_has_order_at_least_p5():
    G = load("T729")
    assert not st.is_maximal_class(G) and G.order >= G.p**5
    assert all(st._pow_idx(G, g, G.p) in st.gamma(G, 3).members for g in range(G.order))


def test_maximal_class_flags():
    assert st.is_maximal_class(load("W81"))
    assert st.is_maximal_class(load("M243"))
    assert not st.is_maximal_class(load("EA27"))
    assert st.is_maximal_class(load("EA9"))


# ------------------------------------------------------------ standing assumptions

def test_m243_assumptions():
    rep = st.standing_assumptions(load("M243"))
    assert rep.thin and rep.p_odd and rep.class_at_least_4 and rep.strongly_frattinian
    assert (rep.d_G, rep.d_Z, rep.d_Z2_mod_Z) == (2, 1, 1)
    assert not rep.d_condition and not rep.eligible
    assert rep.construction_applicable
    assert rep.z2_type == "C3xC3"


def test_t729_assumptions():
    rep = st.standing_assumptions(load("T729"))
    assert rep.eligible and rep.construction_applicable
    assert rep.z2_type == "Cp^3"
    assert rep.z2_is_gamma_c_minus_1 and rep.frattini_is_gamma2


@pytest.mark.parametrize("name", ["ES27", "W81", "EA27", "EA9"])
def test_small_class_groups_are_not_eligible(name):
    rep = st.standing_assumptions(load(name))
    assert not rep.eligible and not rep.construction_applicable


def test_assumption_json_is_plain():
    data = st.standing_assumptions(load("T729")).to_json()
    assert data["eligible"] is True and data["z2_invariants"] == [3, 3, 3]


def test_no_order_243_class_4_group_meets_d_condition():
    # class 4 at order p^5 is maximal class, so Z_2/Z is cyclic of order p
    G = load("M243")
    assert st.upper(G, 2).order // st.center(G).order == G.p
