"""The machinery is basis-free: transport a built-in through a random
invertible change of basis and everything must still work, with results
matching the originals after transport.

This guards against hidden reliance on 0/1 structure constants,
orthonormal starting bases, or real-valued tensors.
"""
import numpy as np
import pytest

from qglab import catalog, harmonic, hopf, lattice


def transported(group: hopf.FiniteQuantumGroup, m: np.ndarray) -> hopf.FiniteQuantumGroup:
    """The same quantum group written in the basis with coordinate map m."""
    m_inv = np.linalg.inv(m)
    mult = np.einsum("ai,bj,abc,kc->ijk", m, m, group.mult, m_inv)
    unit = m_inv @ group.unit
    comult = np.einsum("ai,abc,jb,kc->ijk", m, group.comult, m_inv, m_inv)
    counit = group.counit @ m
    antipode = m_inv @ group.antipode @ m
    star = m_inv @ group.star @ np.conj(m)
    haar = group.haar @ m
    return hopf.FiniteQuantumGroup(dim=group.dim, mult=mult, unit=unit,
                                   comult=comult, counit=counit,
                                   antipode=antipode, star=star, haar=haar)


@pytest.fixture(scope="module")
def moved_s3():
    g = catalog.builtin("c_s3")
    rng = np.random.default_rng(23)
    m = np.eye(6) + 0.25 * (rng.standard_normal((6, 6))
                            + 1j * rng.standard_normal((6, 6)))
    return g, m, transported(g, m)


def test_transported_group_validates(moved_s3):
    _, _, moved = moved_s3
    report = hopf.validate(moved)
    assert report.passed, report.failing()


def test_transport_is_not_recognized_as_builtin(moved_s3):
    _, _, moved = moved_s3
    assert catalog.recognize(moved) is None


def test_invariant_state_transports(moved_s3):
    g, m, moved = moved_s3
    computed = hopf.compute_haar(hopf.FiniteQuantumGroup(
        dim=6, mult=moved.mult, unit=moved.unit, comult=moved.comult,
        counit=moved.counit, antipode=moved.antipode, star=moved.star))
    assert np.max(np.abs(computed - g.haar @ m)) < 1e-10


def test_search_recovers_transported_catalog(moved_s3):
    g, m, moved = moved_s3
    enum = lattice.enumerate_idempotents(moved, strategy="search")
    assert len(enum.states) == 6
    # functionals transport contravariantly: values on the new basis are
    # values on the old images
    expected = sorted(
        tuple(np.round(f.coeffs @ m, 7)) for f in
        catalog.catalog_functionals(g, "c_s3"))
    got = sorted(tuple(np.round(s.coeffs, 7)) for s in enum.states)
    for a, b in zip(expected, got):
        assert np.max(np.abs(np.array(a) - np.array(b))) < 1e-6


def test_lattice_shape_is_basis_independent(moved_s3):
    _, _, moved = moved_s3
    enum = lattice.enumerate_idempotents(moved, strategy="search",
                                         restarts=120)
    lat = lattice.build_lattice(enum.states)
    order_counts = sorted(lat.order.sum(axis=1).tolist())
    # the subgroup lattice of S3: the counit below everything, the
    # invariant state on top, four pairwise incomparable states between
    assert order_counts == [1, 2, 2, 2, 2, 6]
    assert len(lat.hasse_edges) == 8


def test_support_postconditions_on_random_degenerate_states():
    # support projections of non-idempotent, rank-deficient states still
    # satisfy their compression identities (checked inside the call)
    g = catalog.builtin("cg_s3")
    rng = np.random.default_rng(31)
    for _ in range(10):
        y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        y[rng.random(6) < 0.5] = 0.0
        if not np.any(y):
            continue
        rho = g.multiply(g.adjoint(y), y)
        coeffs = np.einsum("i,ijk,k->j", rho, g.mult, g.haar)
        norm = coeffs @ g.unit
        state = harmonic.Functional(home=g, coeffs=coeffs / norm)
        qperp = harmonic.support_projection(state)
        assert harmonic.projection_defect(g, qperp) < 1e-9
        assert abs(state(g.unit - qperp)) < 1e-9
