"""Coideal subalgebras, conditional expectations and the state bijection.

A left coideal is a subalgebra N whose coproduct lands in A (x) N.  For an
idempotent state the range of its conditional expectation is such a coideal;
conversely every coideal subalgebra here arises this way, and the inverse map
composes the counit with the trace-preserving expectation onto the coideal.
Subspaces are stored with bases orthonormal in the GNS inner product, so all
containment claims reduce to projection residuals.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from . import hopf
from .errors import (
    InternalInconsistency,
    NotACoideal,
    NotASubalgebra,
    NotIdempotent,
)
from .harmonic import (
    DEFAULT_TOL,
    Functional,
    IdempotentState,
    as_functional,
    expectation_matrix,
    is_idempotent_state,
    state_defects,
    support_projection,
)
from .linalg import (
    containment_defect,
    dagger,
    frob,
    min_eigval,
    orthonormal_columns,
    subspace_distance,
    subspace_intersection,
)


@dataclasses.dataclass(frozen=True, eq=False)
class Coideal:
    """A subspace with certification flags.

    basis columns are algebra-coordinate vectors, orthonormal with respect
    to the GNS inner product.  defects records the residual behind each
    flag.
    """

    home: hopf.FiniteQuantumGroup
    basis: np.ndarray
    is_subalgebra: bool
    is_star_closed: bool
    is_coideal: bool
    contains_unit: bool
    defects: dict[str, float]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def gns_basis(self) -> np.ndarray:
        return hopf.gns(self.home).orthonormal_basis @ self.basis

    def l2_projector(self) -> np.ndarray:
        b = self.gns_basis()
        return b @ dagger(b)

    def contains(self, vector, tol: float = DEFAULT_TOL) -> bool:
        v = hopf.gns(self.home).orthonormal_basis @ np.asarray(vector, complex)
        return containment_defect(self.gns_basis(), v[:, None]) < tol


def _span_defects(group, basis_alg, basis_gns, tol) -> dict[str, float]:
    space = hopf.gns(group)
    t = space.orthonormal_basis
    k = basis_alg.shape[1]
    proj = basis_gns @ dagger(basis_gns)
    eye = np.eye(group.dim)
    resid = lambda vecs: float(np.max(np.abs(vecs - proj @ vecs))) if vecs.size else 0.0

    if k:
        products = np.einsum("ai,abc,bj->cij", basis_alg, group.mult,
                             basis_alg).reshape(group.dim, k * k)
        stars = group.star @ np.conj(basis_alg)
        d_sub = resid(t @ products)
        d_star = resid(t @ stars)
    else:
        d_sub = d_star = 0.0
    d_unit = resid((t @ group.unit)[:, None])
    comp = eye - proj
    seconds = np.einsum("pq,iqr,rs->ips", t, np.einsum("ai,ajk->ijk", basis_alg,
                                                       group.comult), t.T)
    d_coid = max((frob(seconds[i] @ comp.T) for i in range(k)), default=0.0)
    return {"subalgebra": d_sub, "star": d_star, "unit": d_unit,
            "coideal": d_coid}


def coideal_from_span(group, vectors, tol: float = DEFAULT_TOL) -> Coideal:
    """Orthonormalize a spanning set and certify its closure properties."""
    vectors = np.asarray(vectors, complex)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    space = hopf.gns(group)
    basis_gns = orthonormal_columns(space.orthonormal_basis @ vectors)
    basis_alg = space.inverse_basis @ basis_gns
    defects = _span_defects(group, basis_alg, basis_gns, tol)
    return Coideal(
        home=group, basis=basis_alg,
        is_subalgebra=defects["subalgebra"] < tol,
        is_star_closed=defects["star"] < tol,
        is_coideal=defects["coideal"] < tol,
        contains_unit=defects["unit"] < tol,
        defects=defects)


def is_coideal(group, subspace, tol: float = DEFAULT_TOL) -> bool:
    """Whether the coproduct of the span lands in A (x) span."""
    if isinstance(subspace, Coideal):
        return coideal_from_span(group, subspace.basis, tol).is_coideal
    return coideal_from_span(group, subspace, tol).is_coideal


def gns_projection(coid: Coideal) -> np.ndarray:
    """Orthogonal projection of L2 onto the embedded subspace."""
    return coid.l2_projector()


def coideal_to_dict(coid: Coideal) -> dict:
    """JSON form: basis vectors in algebra coordinates, plus flags."""
    return {
        "basis": [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in col]
                  for col in coid.basis.T],
        "flags": {"is_subalgebra": coid.is_subalgebra,
                  "is_star_closed": coid.is_star_closed,
                  "is_coideal": coid.is_coideal,
                  "contains_unit": coid.contains_unit},
        "group_hash": hopf.group_hash(hopf.with_haar(coid.home)),
    }


def coideal_from_dict(doc: dict, group: hopf.FiniteQuantumGroup,
                      tol: float = DEFAULT_TOL) -> Coideal:
    from .errors import ParseError

    if "basis" not in doc:
        raise ParseError("missing field: basis")
    expected = hopf.group_hash(hopf.with_haar(group))
    if doc.get("group_hash") not in (None, expected):
        raise ParseError("group_hash: coideal belongs to a different group")
    cols = [np.array([complex(re, im) for re, im in col])
            for col in doc["basis"]]
    return coideal_from_span(group, np.column_stack(cols), tol)


# ----------------------------------------------------------------------
# conditional expectations
# ----------------------------------------------------------------------

def choi_min_eig(group, e_mat) -> float:
    """Smallest eigenvalue of the complete-positivity matrix of a map.

    The matrix pairs the invariant state against compressions of the map
    applied to products of basis elements; the map is completely positive
    exactly when it is positive semidefinite.
    """
    group = hopf.with_haar(group)
    sm = hopf.star_mult_tensor(group)
    n = group.dim
    mapped = np.einsum("ab,jkb->jka", e_mat, sm)
    t1 = np.einsum("ai,jkb,abc->ijkc", group.star, mapped, group.mult)
    t2 = np.einsum("ijkc,cld,d->ijkl", t1, group.mult, group.haar)
    choi = t2.transpose(0, 1, 3, 2).reshape(n * n, n * n)
    return min_eigval(choi)


def expectation(phi, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The conditional expectation attached to an idempotent state.

    Verifies idempotency of the map, unitality, complete positivity,
    bimodularity over the range and compatibility with the GNS projection
    onto the range.
    """
    f = as_functional(phi)
    if not is_idempotent_state(f, tol):
        raise NotIdempotent(f"defects: {state_defects(f)}")
    group = f.home
    e = expectation_matrix(f)
    if frob(e @ e - e) > 100 * tol:
        raise InternalInconsistency("expectation is not idempotent")
    if frob(e @ group.unit - group.unit) > 100 * tol:
        raise InternalInconsistency("expectation is not unital")
    if choi_min_eig(group, e) < -100 * tol:
        raise InternalInconsistency("expectation is not completely positive")
    space = hopf.gns(group)
    image = orthonormal_columns(space.orthonormal_basis @ e)
    proj = image @ dagger(image)
    l2map = space.orthonormal_basis @ e @ space.inverse_basis
    if frob(l2map - proj) > 100 * tol:
        raise InternalInconsistency(
            "expectation does not embed as the orthogonal range projection")
    basis_alg = space.inverse_basis @ image
    # bimodularity over the range: E(x z y) = x E(z) y for x, y in the range
    xz = np.einsum("ai,abc->ibc", basis_alg, group.mult)
    xzy = np.einsum("ibc,cde,dj->ibje", xz, group.mult, basis_alg)
    lhs = np.einsum("fe,ibje->ibjf", e, xzy)
    x_ez = np.einsum("ai,acq,cb->ibq", basis_alg, group.mult, e)
    rhs = np.einsum("ibq,qde,dj->ibje", x_ez, group.mult, basis_alg)
    worst = frob(lhs - rhs)
    if worst > 100 * tol:
        raise InternalInconsistency(f"expectation is not bimodular ({worst:.2e})")
    return e


def range_coideal(phi, tol: float = DEFAULT_TOL) -> Coideal:
    """The range of the conditional expectation, certified as a coideal."""
    f = as_functional(phi)
    if not is_idempotent_state(f, tol):
        raise NotIdempotent(f"defects: {state_defects(f)}")
    coid = coideal_from_span(f.home, expectation_matrix(f), tol)
    if not (coid.is_coideal and coid.is_subalgebra and coid.is_star_closed
            and coid.contains_unit):
        raise InternalInconsistency(
            f"expectation range failed certification: {coid.defects}")
    return coid


def generated_subalgebra(n1: Coideal, n2: Coideal,
                         tol: float = DEFAULT_TOL) -> Coideal:
    """Smallest *-subalgebra containing both spans.

    Alternates span closure under multiplication and the involution until
    the dimension stabilizes; the ambient dimension caps the loop.
    """
    require_same_home_coideals(n1, n2)
    group = n1.home
    space = hopf.gns(group)
    t = space.orthonormal_basis
    current = orthonormal_columns(np.column_stack([t @ n1.basis, t @ n2.basis]))
    for _ in range(group.dim + 1):
        alg = space.inverse_basis @ current
        k = alg.shape[1]
        extra = [t @ group.multiply(alg[:, i], alg[:, j])
                 for i in range(k) for j in range(k)]
        extra += [t @ group.adjoint(alg[:, i]) for i in range(k)]
        grown = orthonormal_columns(np.column_stack([current] + extra))
        if grown.shape[1] == current.shape[1]:
            break
        current = grown
    return coideal_from_span(group, space.inverse_basis @ current, tol)


def intersect(n1: Coideal, n2: Coideal, tol: float = DEFAULT_TOL) -> Coideal:
    """Subspace intersection, recertified."""
    require_same_home_coideals(n1, n2)
    space = hopf.gns(n1.home)
    meet_gns = subspace_intersection(n1.gns_basis(), n2.gns_basis())
    return coideal_from_span(n1.home, space.inverse_basis @ meet_gns, tol)


def require_same_home_coideals(n1: Coideal, n2: Coideal) -> None:
    if n1.home is not n2.home and hopf.group_hash(n1.home) != hopf.group_hash(n2.home):
        raise InternalInconsistency("coideals live on different quantum groups")


def trace_expectation(coid: Coideal, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The trace-preserving conditional expectation onto a unital *-subalgebra.

    Exists because the invariant state is a trace here; no modular
    correction is needed.
    """
    missing = [name for name, ok in
               [("subalgebra", coid.is_subalgebra),
                ("star", coid.is_star_closed),
                ("unit", coid.contains_unit)] if not ok]
    if missing:
        raise NotASubalgebra(
            f"span is not a unital *-subalgebra (failing: {', '.join(missing)}; "
            f"defects {coid.defects})")
    group = coid.home
    space = hopf.gns(group)
    e = space.inverse_basis @ coid.l2_projector() @ space.orthonormal_basis
    if frob(e @ e - e) > 100 * tol or frob(e @ group.unit - group.unit) > 100 * tol:
        raise InternalInconsistency("trace expectation failed its map axioms")
    if frob(group.haar @ e - group.haar) > 100 * tol:
        raise InternalInconsistency("trace expectation does not preserve the trace")
    if choi_min_eig(group, e) < -100 * tol:
        raise InternalInconsistency("trace expectation is not completely positive")
    return e


# ----------------------------------------------------------------------
# the bijection between idempotent states and coideal subalgebras
# ----------------------------------------------------------------------

def as_idempotent_state(phi, tol: float = DEFAULT_TOL,
                        name: str | None = None) -> IdempotentState:
    """Verify idempotency and assemble the cached derived objects.

    The type's invariants are enforced here: the functional is an
    idempotent state, its expectation embeds as the orthogonal projection
    onto the coideal, and the support projection lies inside the coideal.
    The heavier map-level certificates (complete positivity, bimodularity)
    live in expectation().
    """
    f = as_functional(phi)
    if name is not None and f.name != name:
        f = Functional(home=f.home, coeffs=f.coeffs, name=name)
    if not is_idempotent_state(f, tol):
        raise NotIdempotent(f"defects: {state_defects(f)}")
    group = f.home
    e = expectation_matrix(f)
    coid = range_coideal(f, tol)
    proj = coid.l2_projector()
    space = hopf.gns(group)
    l2map = space.orthonormal_basis @ e @ space.inverse_basis
    if frob(l2map - proj) > 100 * tol:
        raise InternalInconsistency(
            "expectation does not embed as the orthogonal range projection")
    qperp = support_projection(f, tol)
    if not coid.contains(qperp, 100 * tol):
        raise InternalInconsistency("support projection lies outside the coideal")
    return IdempotentState(functional=f, q_perp=qperp, coideal=coid,
                           conditional_expectation=e, l2_projection=proj)


def state_from_coideal(coid: Coideal, tol: float = DEFAULT_TOL,
                       name: str | None = None) -> IdempotentState:
    """The unique idempotent state whose expectation range is the coideal.

    The candidate is the counit composed with the trace-preserving
    expectation; the construction then verifies idempotency, that the range
    comes back unchanged, and the projection identity of the coideal's GNS
    projection against the regular unitary.
    """
    failing = [name2 for name2, ok in
               [("subalgebra", coid.is_subalgebra),
                ("star", coid.is_star_closed),
                ("coideal", coid.is_coideal),
                ("unit", coid.contains_unit)] if not ok]
    if failing:
        raise NotACoideal(
            f"input span is not a coideal subalgebra (failing: {', '.join(failing)}; "
            f"defects {coid.defects})")
    group = coid.home
    e = trace_expectation(coid, tol)
    candidate = Functional(home=group, coeffs=group.counit @ e, name=name)
    if not is_idempotent_state(candidate, tol):
        raise NotACoideal(
            f"trace-expectation state is not idempotent: {state_defects(candidate)}")
    state = as_idempotent_state(candidate, tol)
    gap = subspace_distance(state.coideal.gns_basis(), coid.gns_basis())
    if gap > 100 * tol:
        raise NotACoideal(f"state's range differs from the input coideal ({gap:.2e})")
    from .duality import regular_unitary  # deferred: duality builds on this module

    w = regular_unitary(group).w
    p = coid.l2_projector()
    eye = np.eye(group.dim)
    pp = dagger(w) @ np.kron(eye, p) @ w @ np.kron(p, eye) - np.kron(p, p)
    if frob(pp) > 100 * tol:
        raise NotACoideal(
            f"coideal projection fails the dual projection identity ({frob(pp):.2e})")
    return state
