import numpy as np
import pytest

from qglab import catalog, coideal, harmonic, hopf
from qglab.errors import NotACoideal, NotASubalgebra, NotIdempotent
from qglab.linalg import frob, subspace_distance
from conftest import s3_subgroup


def coset_algebra(group, table, subgroup):
    """Functions constant on left cosets gH, as explicit indicator sums."""
    n = len(table)
    cosets = {}
    for g in range(n):
        key = frozenset(table[g][h] for h in subgroup)
        cosets.setdefault(key, np.zeros(n, dtype=complex))
        for x in key:
            cosets[key][x] = 1.0
    return np.column_stack(sorted(cosets.values(), key=lambda v: tuple(v.real)))


def subgroup_algebra_span(group, subgroup):
    n = group.dim
    cols = []
    for g in sorted(subgroup):
        v = np.zeros(n, dtype=complex)
        v[g] = 1.0
        cols.append(v)
    return np.column_stack(cols)


# ----------------------------------------------------------------------
# expectations
# ----------------------------------------------------------------------

def test_expectation_of_counit_is_identity(c_s3):
    e = coideal.expectation(harmonic.convolution_unit(c_s3))
    assert np.allclose(e, np.eye(6))


def test_expectation_of_haar_is_state_times_unit(c_s3):
    e = coideal.expectation(harmonic.haar_functional(c_s3))
    assert np.allclose(e, np.outer(c_s3.unit, c_s3.haar))


def test_expectation_averages_right_cosets(c_s3):
    # oracle built directly from the group table
    table, _ = catalog.group_table("s3")
    h = s3_subgroup({"e", "(12)"})
    state = catalog.uniform_measure_functional(c_s3, h)
    e = coideal.expectation(state)
    expected = np.zeros((6, 6))
    for g in range(6):
        for x in h:
            expected[g, table[g][x]] += 1.0 / len(h)
    # E(f)(g) = avg f(gh): as a matrix on coefficient columns this is the
    # transpose of the coset-averaging kernel
    assert np.allclose(e, expected.T)


def test_expectation_rejects_non_idempotent(c_z2):
    bad = harmonic.Functional(home=c_z2, coeffs=np.array([0.25, 0.75]))
    with pytest.raises(NotIdempotent):
        coideal.expectation(bad)


def test_range_coideal_examples(c_s3, cg_s3):
    full = coideal.range_coideal(harmonic.convolution_unit(c_s3))
    assert full.dim == 6
    scalars = coideal.range_coideal(harmonic.haar_functional(c_s3))
    assert scalars.dim == 1
    h = s3_subgroup({"e", "(12)"})
    ind = catalog.indicator_functional(cg_s3, h)
    sub = coideal.range_coideal(ind)
    assert sub.dim == 2
    assert subspace_distance(
        hopf.gns(cg_s3).orthonormal_basis @ subgroup_algebra_span(cg_s3, h),
        sub.gns_basis()) < 1e-10
    for coid in (full, scalars, sub):
        assert coid.is_coideal and coid.is_subalgebra
        assert coid.is_star_closed and coid.contains_unit


# ----------------------------------------------------------------------
# coideal certification
# ----------------------------------------------------------------------

def test_is_coideal_examples(c_s3):
    assert coideal.is_coideal(c_s3, c_s3.unit[:, None])
    assert coideal.is_coideal(c_s3, np.eye(6))
    delta_e = np.zeros((6, 1))
    delta_e[0, 0] = 1.0
    assert not coideal.is_coideal(c_s3, delta_e)


def test_coset_algebra_is_coideal_but_point_mass_is_not(c_s3):
    table, _ = catalog.group_table("s3")
    span = coset_algebra(c_s3, table, s3_subgroup({"e", "(12)"}))
    coid = coideal.coideal_from_span(c_s3, span)
    assert coid.dim == 3 and coid.is_coideal


# ----------------------------------------------------------------------
# generated subalgebras and intersections
# ----------------------------------------------------------------------

def test_generated_subalgebra_scalars(c_s3):
    scalars = coideal.coideal_from_span(c_s3, c_s3.unit[:, None])
    again = coideal.generated_subalgebra(scalars, scalars)
    assert again.dim == 1


def test_generated_coset_algebras_fill_everything(c_s3):
    table, _ = catalog.group_table("s3")
    n1 = coideal.coideal_from_span(
        c_s3, coset_algebra(c_s3, table, s3_subgroup({"e", "(12)"})))
    n2 = coideal.coideal_from_span(
        c_s3, coset_algebra(c_s3, table, s3_subgroup({"e", "(13)"})))
    generated = coideal.generated_subalgebra(n1, n2)
    assert generated.dim == 6


def test_generated_subgroup_algebras(cg_s3):
    n1 = coideal.coideal_from_span(
        cg_s3, subgroup_algebra_span(cg_s3, s3_subgroup({"e", "(12)"})))
    n2 = coideal.coideal_from_span(
        cg_s3, subgroup_algebra_span(cg_s3, s3_subgroup({"e", "(123)", "(132)"})))
    assert coideal.generated_subalgebra(n1, n2).dim == 6


def test_intersections(c_s3, cg_s3):
    table, _ = catalog.group_table("s3")
    n1 = coideal.coideal_from_span(
        c_s3, coset_algebra(c_s3, table, s3_subgroup({"e", "(12)"})))
    assert coideal.intersect(n1, n1).dim == n1.dim
    n2 = coideal.coideal_from_span(
        c_s3, coset_algebra(c_s3, table, s3_subgroup({"e", "(13)"})))
    assert coideal.intersect(n1, n2).dim == 1
    m1 = coideal.coideal_from_span(
        cg_s3, subgroup_algebra_span(cg_s3, s3_subgroup({"e", "(12)"})))
    m2 = coideal.coideal_from_span(
        cg_s3, subgroup_algebra_span(cg_s3, s3_subgroup({"e", "(123)", "(132)"})))
    assert coideal.intersect(m1, m2).dim == 1


def test_gns_projection_ranks(c_s3):
    table, _ = catalog.group_table("s3")
    scalars = coideal.coideal_from_span(c_s3, c_s3.unit[:, None])
    assert np.linalg.matrix_rank(coideal.gns_projection(scalars)) == 1
    everything = coideal.coideal_from_span(c_s3, np.eye(6))
    assert np.allclose(coideal.gns_projection(everything), np.eye(6))
    cosets = coideal.coideal_from_span(
        c_s3, coset_algebra(c_s3, table, s3_subgroup({"e", "(12)"})))
    assert np.linalg.matrix_rank(coideal.gns_projection(cosets)) == 3


# ----------------------------------------------------------------------
# trace-preserving expectation
# ----------------------------------------------------------------------

def test_trace_expectation_examples(c_s3):
    scalars = coideal.coideal_from_span(c_s3, c_s3.unit[:, None])
    e = coideal.trace_expectation(scalars)
    assert np.allclose(e, np.outer(c_s3.unit, c_s3.haar))
    everything = coideal.coideal_from_span(c_s3, np.eye(6))
    assert np.allclose(coideal.trace_expectation(everything), np.eye(6))


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_trace_expectation_agrees_with_state_expectation(name):
    # both are invariant-state-preserving expectations onto the same range;
    # under a trace that map is unique
    g = catalog.builtin(name)
    for f in catalog.catalog_functionals(g, name):
        state = coideal.as_idempotent_state(f)
        via_trace = coideal.trace_expectation(state.coideal)
        assert frob(via_trace - state.conditional_expectation) < 1e-9


def test_trace_expectation_requires_unital_star_subalgebra(c_s3):
    delta_e = np.zeros((6, 1))
    delta_e[0, 0] = 1.0
    no_unit = coideal.coideal_from_span(c_s3, delta_e)
    with pytest.raises(NotASubalgebra):
        coideal.trace_expectation(no_unit)


# ----------------------------------------------------------------------
# the bijection
# ----------------------------------------------------------------------

def test_state_from_coideal_examples(c_s3):
    table, _ = catalog.group_table("s3")
    scalars = coideal.coideal_from_span(c_s3, c_s3.unit[:, None])
    assert coideal.state_from_coideal(scalars).functional.distance(
        harmonic.haar_functional(c_s3)) < 1e-10
    everything = coideal.coideal_from_span(c_s3, np.eye(6))
    assert coideal.state_from_coideal(everything).functional.distance(
        harmonic.convolution_unit(c_s3)) < 1e-10
    h = s3_subgroup({"e", "(12)"})
    cosets = coideal.coideal_from_span(c_s3, coset_algebra(c_s3, table, h))
    got = coideal.state_from_coideal(cosets)
    assert got.functional.distance(
        catalog.uniform_measure_functional(c_s3, h)) < 1e-10


def test_state_from_coideal_rejects_non_coideal(c_s3):
    # span{1, delta_e} is a unital *-subalgebra but not a coideal
    span = np.zeros((6, 2), dtype=complex)
    span[:, 0] = c_s3.unit
    span[0, 1] = 1.0
    not_coideal = coideal.coideal_from_span(c_s3, span)
    assert not_coideal.is_subalgebra and not not_coideal.is_coideal
    with pytest.raises(NotACoideal):
        coideal.state_from_coideal(not_coideal)


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_bijection_roundtrip(name):
    g = catalog.builtin(name)
    for f in catalog.catalog_functionals(g, name):
        state = coideal.as_idempotent_state(f)
        back = coideal.state_from_coideal(state.coideal)
        assert back.functional.distance(f) < 1e-9
        forth = coideal.range_coideal(back.functional)
        assert subspace_distance(forth.gns_basis(),
                                 state.coideal.gns_basis()) < 1e-9


@pytest.mark.parametrize("name", catalog.BUILTIN_NAMES)
def test_expectation_embeds_as_projection(name):
    # the embedded expectation is exactly the orthogonal range projection
    g = catalog.builtin(name)
    space = hopf.gns(g)
    for f in catalog.catalog_functionals(g, name):
        state = coideal.as_idempotent_state(f)
        l2map = (space.orthonormal_basis @ state.conditional_expectation
                 @ space.inverse_basis)
        assert frob(l2map - state.l2_projection) < 1e-10


def test_order_criteria_through_coideal_operations(c_s3):
    # reverify the order equivalences with coideal-level machinery only
    states = [coideal.as_idempotent_state(f)
              for f in catalog.catalog_functionals(c_s3, "c_s3")]
    for a in states:
        for b in states:
            conv = harmonic.convolve(a.functional, b.functional).distance(
                b.functional) < 1e-9
            comp = frob(a.conditional_expectation @ b.conditional_expectation
                        - b.conditional_expectation) < 1e-7
            crossing = coideal.intersect(a.coideal, b.coideal)
            contain = subspace_distance(crossing.gns_basis(),
                                        b.coideal.gns_basis()) < 1e-7
            porder = frob(a.l2_projection @ b.l2_projection
                          - b.l2_projection) < 1e-7
            assert conv == comp == contain == porder


def test_coideal_json_roundtrip(c_s3):
    state = coideal.as_idempotent_state(
        catalog.uniform_measure_functional(c_s3, s3_subgroup({"e", "(12)"})))
    doc = coideal.coideal_to_dict(state.coideal)
    again = coideal.coideal_from_dict(doc, c_s3)
    assert subspace_distance(again.gns_basis(), state.coideal.gns_basis()) < 1e-10
    assert again.is_coideal and again.is_subalgebra
