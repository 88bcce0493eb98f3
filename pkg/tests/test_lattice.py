import re

import numpy as np
import pytest

from qglab import catalog, coideal, harmonic, lattice
from qglab.errors import NoConvergence
from conftest import s3_subgroup


def states_by_subgroup(name):
    g = catalog.builtin(name)
    out = {}
    for f in catalog.catalog_functionals(g, name):
        s = coideal.as_idempotent_state(f, name=f.name)
        out[catalog.subgroup_of_state(name, s.coeffs)] = s
    return g, out


# ----------------------------------------------------------------------
# meet and join against the subgroup oracle
# ----------------------------------------------------------------------

def test_meet_is_idempotent_on_arguments(c_s3):
    _, by_sub = states_by_subgroup("c_s3")
    for s in by_sub.values():
        assert lattice.meet(s, s).distance(s) < 1e-9
        assert lattice.join(s, s).distance(s) < 1e-9


def test_meet_of_transposition_subgroups_is_counit():
    g, by_sub = states_by_subgroup("c_s3")
    a = by_sub[s3_subgroup({"e", "(12)"})]
    b = by_sub[s3_subgroup({"e", "(13)"})]
    got = lattice.meet(a, b)
    assert got.distance(harmonic.convolution_unit(g)) < 1e-9


def test_meet_absorbs_contained_subgroup():
    _, by_sub = states_by_subgroup("c_s3")
    whole = by_sub[frozenset(range(6))]
    half = by_sub[s3_subgroup({"e", "(12)"})]
    assert lattice.meet(whole, half).distance(half) < 1e-9


def test_join_generates_whole_group():
    g, by_sub = states_by_subgroup("c_s3")
    a = by_sub[s3_subgroup({"e", "(12)"})]
    b = by_sub[s3_subgroup({"e", "(13)"})]
    got, diag = lattice.join_with_diagnostics(a, b)
    assert got.distance(harmonic.haar_functional(g)) < 1e-9
    assert diag.iterations <= 200
    assert diag.two_path_distance < 1e-8
    assert diag.slice_residual < 1e-8
    assert not diag.cesaro_used


def test_join_on_group_algebra_is_pointwise():
    g, by_sub = states_by_subgroup("cg_s3")
    a = by_sub[s3_subgroup({"e", "(12)"})]
    b = by_sub[s3_subgroup({"e", "(13)"})]
    got = lattice.join(a, b)
    # the intersection subgroup is trivial, so the join is the point mass,
    # which is the invariant state of the group algebra
    assert got.distance(harmonic.haar_functional(g)) < 1e-9


def test_join_no_convergence_cap():
    _, by_sub = states_by_subgroup("c_s3")
    a = by_sub[s3_subgroup({"e", "(12)"})]
    b = by_sub[s3_subgroup({"e", "(13)"})]
    with pytest.raises(NoConvergence):
        lattice.join(a, b, n_max=2)


def test_join_zero_absorbs(c_z2):
    eps = coideal.as_idempotent_state(harmonic.convolution_unit(c_z2))
    assert lattice.join(harmonic.ZERO_STATE, eps) is harmonic.ZERO_STATE
    assert lattice.join(eps, harmonic.ZERO_STATE) is harmonic.ZERO_STATE


def test_cesaro_candidate_damps_oscillation():
    flip = [np.array([1.0, 0.0]), np.array([0.0, 1.0])] * 10
    averaged = lattice._cesaro_candidate(flip)
    assert np.allclose(averaged, [0.5, 0.5])


# ----------------------------------------------------------------------
# enumeration
# ----------------------------------------------------------------------

EXPECTED_COUNTS = {"c_z2": 2, "c_z3": 2, "c_z4": 3, "c_s3": 6,
                   "cg_s3": 6, "cg_z4": 3}


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_catalog_enumeration_counts(name):
    enum = lattice.enumerate_idempotents(catalog.builtin(name),
                                         strategy="catalog")
    assert len(enum.states) == EXPECTED_COUNTS[name]
    # closed under both operations, contains the two extremes
    g = catalog.builtin(name)
    names = {s.name for s in enum.states}
    assert len(names) == len(enum.states)
    coeffs = [s.coeffs for s in enum.states]
    assert any(np.max(np.abs(c - g.counit)) < 1e-9 for c in coeffs)
    assert any(np.max(np.abs(c - g.haar)) < 1e-9 for c in coeffs)


def test_search_enumeration_z2(c_z2):
    enum = lattice.enumerate_idempotents(c_z2, strategy="search", restarts=40)
    assert len(enum.states) == 2
    assert enum.report.coverage == "full"


def test_search_enumeration_finds_catalog_s3(c_s3):
    enum = lattice.enumerate_idempotents(c_s3, strategy="search")
    assert len(enum.states) == 6
    assert enum.report.coverage == "full"


def test_enumeration_deterministic(c_s3):
    first = lattice.enumerate_idempotents(c_s3, strategy="search", restarts=60)
    second = lattice.enumerate_idempotents(c_s3, strategy="search", restarts=60)
    assert len(first.states) == len(second.states)
    for a, b in zip(first.states, second.states):
        assert np.array_equal(a.coeffs, b.coeffs)


def test_catalog_strategy_requires_builtin(c_z2):
    import dataclasses

    scrambled = dataclasses.replace(c_z2, haar=None, labels=None,
                                    counit=c_z2.counit.copy())
    # still recognized (tensors unchanged): allowed
    assert lattice.enumerate_idempotents(scrambled, strategy="catalog")
    with pytest.raises(ValueError):
        lattice.enumerate_idempotents(c_z2, strategy="bogus")


# ----------------------------------------------------------------------
# the lattice itself
# ----------------------------------------------------------------------

def test_build_lattice_chain_z2(c_z2):
    enum = lattice.enumerate_idempotents(c_z2, strategy="catalog")
    lat = lattice.build_lattice(enum.states)
    assert lat.order.sum() == 3  # two reflexive pairs plus one strict
    assert lat.hasse_edges == [(0, 1)]


def test_lattice_matches_subgroup_lattice_oracle(c_s3):
    subs, order, meet_idx, join_idx = catalog.subgroup_lattice_oracle("c_s3")
    enum = lattice.enumerate_idempotents(c_s3, strategy="catalog")
    lat = lattice.build_lattice(enum.states)
    # align enumerated states with oracle subgroups
    position = []
    for s in lat.states:
        sub = catalog.subgroup_of_state("c_s3", s.coeffs)
        position.append(subs.index(sub))
    k = len(subs)
    assert sorted(position) == list(range(k))
    for i in range(k):
        for j in range(k):
            assert lat.order[i, j] == order[position[i], position[j]]
            assert (position[lat.meet_table[i, j]]
                    == meet_idx[position[i], position[j]])
            assert (position[lat.join_table[i, j]]
                    == join_idx[position[i], position[j]])
    # Hasse edges match the oracle's cover relation
    oracle_covers = set()
    for i in range(k):
        for j in range(k):
            if i != j and order[i, j] and not any(
                    l not in (i, j) and order[i, l] and order[l, j]
                    for l in range(k)):
                oracle_covers.add((i, j))
    got = {(position[i], position[j]) for i, j in lat.hasse_edges}
    assert got == oracle_covers


def test_group_algebra_lattice_is_reversed_subgroup_lattice(cg_s3):
    subs, order, _, _ = catalog.subgroup_lattice_oracle("cg_s3")
    enum = lattice.enumerate_idempotents(cg_s3, strategy="catalog")
    lat = lattice.build_lattice(enum.states)
    position = [subs.index(catalog.subgroup_of_state("cg_s3", s.coeffs))
                for s in lat.states]
    for i in range(len(subs)):
        for j in range(len(subs)):
            assert lat.order[i, j] == order[position[j], position[i]]


def test_to_dot_syntax(c_s3):
    enum = lattice.enumerate_idempotents(c_s3, strategy="catalog")
    lat = lattice.build_lattice(enum.states)
    dot = lattice.to_dot(lat)
    lines = dot.strip().splitlines()
    assert lines[0] == "digraph idempotent_lattice {"
    assert lines[-1] == "}"
    node = re.compile(r'^  "[^"]+" \[label="[^"]+"\];$')
    edge = re.compile(r'^  "[^"]+" -> "[^"]+";$')
    for line in lines[1:-1]:
        assert node.match(line) or edge.match(line), line
    assert sum(1 for line in lines if edge.match(line)) == len(lat.hasse_edges)


# ----------------------------------------------------------------------
# commutation equivalences and the modular law
# ----------------------------------------------------------------------

def test_commutation_with_counit_all_true(c_s3):
    _, by_sub = states_by_subgroup("c_s3")
    eps = by_sub[frozenset({0})]
    for other in by_sub.values():
        report = lattice.commutation_equivalences(eps, other)
        assert report.commute


def test_commutation_normal_subgroup_true():
    _, by_sub = states_by_subgroup("c_s3")
    rho = by_sub[s3_subgroup({"e", "(123)", "(132)"})]
    mu = by_sub[s3_subgroup({"e", "(12)"})]
    assert lattice.commutation_equivalences(rho, mu).commute


def test_commutation_two_transpositions_false():
    _, by_sub = states_by_subgroup("c_s3")
    rho = by_sub[s3_subgroup({"e", "(12)"})]
    mu = by_sub[s3_subgroup({"e", "(13)"})]
    report = lattice.commutation_equivalences(rho, mu)
    assert not report.commute
    assert all(v >= 1e-9 for v in report.residuals.values())


def test_commutation_never_disagrees_on_catalog(c_s3):
    _, by_sub = states_by_subgroup("c_s3")
    states = list(by_sub.values())
    for a in states:
        for b in states:
            lattice.commutation_equivalences(a, b)  # must not raise


def test_modular_law_named_instance():
    _, by_sub = states_by_subgroup("c_s3")
    omega = by_sub[frozenset(range(6))]
    mu = by_sub[s3_subgroup({"e", "(12)"})]
    rho = by_sub[s3_subgroup({"e", "(123)", "(132)"})]
    report = lattice.modular_law_check(omega, mu, rho)
    assert all(ok for ok, _ in report.hypotheses.values())
    assert report.applicable
    assert report.holds and report.conclusion_distance < 1e-9


def test_modular_law_flags_failed_hypothesis():
    _, by_sub = states_by_subgroup("c_s3")
    omega = by_sub[s3_subgroup({"e", "(12)"})]
    mu = by_sub[s3_subgroup({"e", "(13)"})]
    rho = by_sub[s3_subgroup({"e", "(123)", "(132)"})]
    report = lattice.modular_law_check(omega, mu, rho)
    assert not report.hypotheses["rho-precedes-omega"][0]
    assert not report.applicable and report.holds is None


def test_modular_law_with_counit_trivial():
    g, by_sub = states_by_subgroup("c_s3")
    omega = by_sub[s3_subgroup({"e", "(12)"})]
    mu = by_sub[s3_subgroup({"e", "(123)", "(132)"})]
    eps = by_sub[frozenset({0})]
    report = lattice.modular_law_check(omega, mu, eps)
    assert report.applicable and report.holds


# ----------------------------------------------------------------------
# order extremality over the enumerated set
# ----------------------------------------------------------------------

@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_meet_join_are_extremal_bounds(name):
    enum = lattice.enumerate_idempotents(catalog.builtin(name),
                                         strategy="catalog")
    lat = lattice.build_lattice(enum.states)
    k = len(lat.states)
    for i in range(k):
        for j in range(k):
            lower = [l for l in range(k) if lat.order[l, i] and lat.order[l, j]]
            assert all(lat.order[l, lat.meet_table[i, j]] for l in lower)
            upper = [l for l in range(k) if lat.order[i, l] and lat.order[j, l]]
            assert all(lat.order[lat.join_table[i, j], l] for l in upper)
            assert lat.meet_table[i, lat.join_table[i, j]] == i
            assert lat.join_table[i, lat.meet_table[i, j]] == i


def test_singleton_lattice_is_trivial(c_z2):
    eps = coideal.as_idempotent_state(harmonic.convolution_unit(c_z2))
    lat = lattice.build_lattice([eps])
    assert lat.order.tolist() == [[True]]
    assert lat.hasse_edges == []
    assert lat.meet_table.tolist() == [[0]] and lat.join_table.tolist() == [[0]]
