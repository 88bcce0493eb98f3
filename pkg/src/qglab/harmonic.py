"""The convolution algebra of functionals on a finite quantum group.

Functionals are complex covectors paired linearly with algebra elements.
Convolution transports the coproduct; its unit is the counit.  A state is
a normalized functional whose sesquilinear matrix is positive
semidefinite, and an idempotent state reproduces itself under convolution.
This module also computes the support projection of a state (through the
density with respect to the invariant trace), the reconstruction of an
idempotent state from the complement of its left kernel, and the domination
order with its four provably equivalent criteria.
"""
from __future__ import annotations

import dataclasses
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from . import hopf
from .errors import (
    CriteriaDisagree,
    HomeMismatch,
    InternalInconsistency,
    NotAProjection,
    NotAState,
    ZeroMass,
)
from .linalg import (
    containment_defect,
    dagger,
    frob,
    min_eigval,
    orthonormal_columns,
    real_nullspace,
    sup,
)

if TYPE_CHECKING:  # pragma: no cover
    from .coideal import Coideal

DEFAULT_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class Functional:
    """An element of the dual space, tied to its quantum group."""

    home: hopf.FiniteQuantumGroup
    coeffs: np.ndarray
    name: str | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.coeffs, dtype=complex))
        if c.shape != (self.home.dim,):
            raise HomeMismatch(
                f"coefficient vector of length {c.shape} on a group of dim {self.home.dim}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x) -> complex:
        return complex(np.dot(self.coeffs, np.asarray(x, complex)))

    def hermitian_defect(self) -> float:
        return frob(self.home.star.T @ self.coeffs - np.conj(self.coeffs))

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return self.hermitian_defect() < tol

    def distance(self, other: "Functional") -> float:
        """Sup-norm distance of coefficient vectors."""
        require_same_home(self, other)
        return sup(self.coeffs - other.coeffs)


class ZeroState:
    """The formal zero adjoined to the set of idempotent states.

    It is the largest element of the extended domination order and absorbs
    the join operation.  On a finite quantum group no
    computation ever produces it; it exists so the result types mirror the
    extended lattice faithfully.
    """

    def __repr__(self):  # pragma: no cover
        return "ZeroState()"


ZERO_STATE = ZeroState()


def require_same_home(a, b) -> None:
    ga, gb = a.home, b.home
    if ga is gb:
        return
    if hopf.group_hash(ga) != hopf.group_hash(gb):
        raise HomeMismatch("functionals live on different quantum groups")


def convolve(phi: Functional, chi: Functional) -> Functional:
    """Convolution product: the pair acts through the coproduct."""
    require_same_home(phi, chi)
    coeffs = np.einsum("ijk,j,k->i", phi.home.comult, phi.coeffs, chi.coeffs)
    return Functional(home=phi.home, coeffs=coeffs)


def convolution_unit(group: hopf.FiniteQuantumGroup) -> Functional:
    return Functional(home=group, coeffs=group.counit, name="counit")


def haar_functional(group: hopf.FiniteQuantumGroup) -> Functional:
    group = hopf.with_haar(group)
    return Functional(home=group, coeffs=group.haar, name="haar")


def positivity_matrix(phi: Functional) -> np.ndarray:
    return hopf.sesquilinear_matrix(phi.home, phi.coeffs)


def state_defects(phi: Functional) -> dict[str, float]:
    """Residuals of the three idempotent-state conditions."""
    conv = sup(convolve(phi, phi).coeffs - phi.coeffs)
    norm = abs(phi(phi.home.unit) - 1.0)
    neg = max(0.0, -min_eigval(positivity_matrix(phi)))
    return {"idempotency": conv, "normalization": norm, "negativity": neg}


def is_state(phi: Functional, tol: float = DEFAULT_TOL) -> bool:
    d = state_defects(phi)
    return d["normalization"] < tol and d["negativity"] < tol


def is_idempotent_state(phi: Functional, tol: float = DEFAULT_TOL) -> bool:
    d = state_defects(phi)
    return all(v < tol for v in d.values())


def expectation_matrix(phi: Functional) -> np.ndarray:
    """Matrix of x -> (id (x) phi)(coproduct(x)) on coefficient columns."""
    return np.einsum("ijk,k->ij", phi.home.comult, phi.coeffs).T


# ----------------------------------------------------------------------
# support projection and reconstruction
# ----------------------------------------------------------------------

def density_element(phi: Functional) -> np.ndarray:
    """The element rho with phi = (invariant state)(rho x); needs faithfulness."""
    group = hopf.with_haar(phi.home)
    bil = np.einsum("ijk,k->ij", group.mult, group.haar)
    return np.linalg.solve(bil.T, phi.coeffs)


def projection_defect(group: hopf.FiniteQuantumGroup, p) -> float:
    p = np.asarray(p, complex)
    return max(frob(group.multiply(p, p) - p), frob(group.adjoint(p) - p))


def support_projection(phi: Functional, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Complement of the left-kernel projection of a state.

    Computed as the spectral support of the density of the state with
    respect to the invariant trace.  Checked postconditions: the result is
    a projection, the state kills its complement, compressing by it leaves
    the state unchanged, and it annihilates every positive element of
    vanishing expectation.
    """
    group = hopf.with_haar(phi.home)
    space = hopf.gns(group)
    if not is_state(phi, tol):
        d = state_defects(phi)
        raise NotAState(f"normalization defect {d['normalization']:.2e}, "
                        f"negativity {d['negativity']:.2e}")
    rho = density_element(phi)
    mat = space.represent(rho)
    herm = frob(mat - dagger(mat))
    if herm > 100 * tol:
        raise NotAState(f"density is not self-adjoint (defect {herm:.2e})")
    evals, vecs = np.linalg.eigh((mat + dagger(mat)) / 2.0)
    cut = tol * max(1.0, float(evals[-1]))
    support = vecs[:, evals > cut]
    proj_mat = support @ dagger(support)
    rep = space.left_mult.transpose(1, 2, 0).reshape(group.dim ** 2, group.dim)
    q, _, _, _ = np.linalg.lstsq(rep, proj_mat.reshape(-1), rcond=None)
    fit = frob(space.represent(q) - proj_mat)
    if fit > 100 * tol:
        raise InternalInconsistency(
            f"spectral projection does not pull back to the algebra (fit {fit:.2e})")
    defect = projection_defect(group, q)
    if defect > 100 * tol:
        raise InternalInconsistency(f"support is not a projection ({defect:.2e})")
    qc = group.unit - q
    if abs(phi(qc)) > 100 * tol:
        raise InternalInconsistency("state does not vanish on the kernel projection")
    compressed = np.einsum("a,abk,j,kjr->br", q, group.mult, q, group.mult)
    if sup(compressed @ phi.coeffs - phi.coeffs) > 100 * tol:
        raise InternalInconsistency("compression by the support changes the state")
    kernel = left_kernel_basis(phi, tol)
    for v in kernel.T:
        x = group.multiply(group.adjoint(v), v)
        if frob(group.multiply(q, x)) > np.sqrt(tol) * max(1.0, frob(x)):
            raise InternalInconsistency(
                "support projection fails to annihilate a null positive element")
    return q


def left_kernel_basis(phi: Functional, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of {x : phi(x* x) = 0} in coefficient coordinates."""
    k = positivity_matrix(phi)
    k = (k + dagger(k)) / 2.0
    evals, vecs = np.linalg.eigh(k)
    cut = tol * max(1.0, float(evals[-1]))
    return vecs[:, evals <= cut]


def state_from_qperp(group: hopf.FiniteQuantumGroup, qperp,
                     tol: float = DEFAULT_TOL, name: str | None = None) -> Functional:
    """The normalized compression of the invariant state by a projection."""
    group = hopf.with_haar(group)
    q = np.asarray(qperp, complex)
    defect = projection_defect(group, q)
    if defect > tol:
        raise NotAProjection(f"projection defect {defect:.2e}")
    mass = group.haar_of(q)
    if abs(mass) <= tol:
        raise ZeroMass("projection has vanishing invariant mass")
    coeffs = np.einsum("a,abk,j,kjr,r->b", q, group.mult, q, group.mult,
                       group.haar) / mass
    return Functional(home=group, coeffs=coeffs, name=name)


# ----------------------------------------------------------------------
# group-like projections and the Haar-type test
# ----------------------------------------------------------------------

def group_like_defect(group: hopf.FiniteQuantumGroup, p) -> float:
    """Residual of coproduct(p) (1 (x) p) = p (x) p."""
    p = np.asarray(p, complex)
    dp = group.coproduct(p)
    one_p = np.outer(group.unit, p)
    return frob(group.tensor_multiply(dp, one_p) - np.outer(p, p))


def group_like_check(group: hopf.FiniteQuantumGroup, p,
                     tol: float = DEFAULT_TOL) -> bool:
    return projection_defect(group, p) < tol and group_like_defect(group, p) < tol


def haar_type_test(phi, tol: float = DEFAULT_TOL) -> bool:
    """Whether the null space of the state is a two-sided *-closed ideal.

    The null space of any state is a left ideal; states induced from a
    genuine quantum subgroup have a two-sided, star-closed one.  This is the
    standard operational criterion; it is imported from the companion
    literature on quantum-subgroup-induced idempotents rather than derived
    here.
    """
    phi = as_functional(phi)
    group = phi.home
    kernel = left_kernel_basis(phi, tol)
    if kernel.shape[1] == 0:
        return True
    eye = np.eye(group.dim)
    for v in kernel.T:
        stars = group.adjoint(v)
        if containment_defect(kernel, stars[:, None]) > np.sqrt(tol):
            return False
        for j in range(group.dim):
            w = group.multiply(v, eye[j])
            if frob(w) < tol:
                continue
            if containment_defect(kernel, w[:, None]) > np.sqrt(tol):
                return False
    return True


# ----------------------------------------------------------------------
# idempotent states and the domination order
# ----------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class IdempotentState:
    """A verified idempotent state with its cached derived objects.

    q_perp is the support projection, coideal the range of the conditional
    expectation, conditional_expectation its matrix on coefficient columns
    and l2_projection the orthogonal projection onto the embedded range.
    """

    functional: Functional
    q_perp: np.ndarray
    coideal: "Coideal"
    conditional_expectation: np.ndarray
    l2_projection: np.ndarray

    @property
    def home(self) -> hopf.FiniteQuantumGroup:
        return self.functional.home

    @property
    def coeffs(self) -> np.ndarray:
        return self.functional.coeffs

    @property
    def name(self) -> str | None:
        return self.functional.name

    def __call__(self, x) -> complex:
        return self.functional(x)

    def distance(self, other) -> float:
        return self.functional.distance(as_functional(other))


def as_functional(phi) -> Functional:
    if isinstance(phi, IdempotentState):
        return phi.functional
    if isinstance(phi, Functional):
        return phi
    raise TypeError(f"expected a functional, got {type(phi).__name__}")


def _order_data(phi):
    """(functional, expectation matrix, range basis, L2 projection)."""
    if isinstance(phi, IdempotentState):
        return (phi.functional, phi.conditional_expectation,
                orthonormal_columns(phi.conditional_expectation),
                phi.l2_projection)
    f = as_functional(phi)
    e = expectation_matrix(f)
    space = hopf.gns(f.home)
    image = orthonormal_columns(space.orthonormal_basis @ e)
    proj = image @ dagger(image)
    return f, e, orthonormal_columns(e), proj


def preceq(mu, nu, tol: float = DEFAULT_TOL) -> bool:
    """Domination order on idempotent states: mu precedes nu.

    Evaluates all four equivalent criteria (convolution absorption,
    composition of expectations, reversed range containment, ordering of
    the orthogonal projections) and demands they agree.
    """
    if isinstance(nu, ZeroState):
        return True
    if isinstance(mu, ZeroState):
        return False
    fmu, emu, nmu, pmu = _order_data(mu)
    fnu, enu, nnu, pnu = _order_data(nu)
    require_same_home(fmu, fnu)
    r1 = sup(convolve(fmu, fnu).coeffs - fnu.coeffs)
    r2 = frob(emu @ enu - enu)
    r3 = containment_defect(nmu, nnu)
    r4 = frob(pmu @ pnu - pnu)
    answers = [r1 < tol, r2 < tol, r3 < tol, r4 < tol]
    if len(set(answers)) != 1:
        raise CriteriaDisagree(
            "order criteria disagree: "
            f"convolution {r1:.2e}, expectation {r2:.2e}, "
            f"range {r3:.2e}, projection {r4:.2e}")
    return answers[0]


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

def functional_to_dict(phi: Functional) -> dict:
    """JSON form: the covector plus the content hash of its group."""
    doc = {
        "coeffs": [[float(z.real) + 0.0, float(z.imag) + 0.0]
                   for z in phi.coeffs],
        "group_hash": hopf.group_hash(hopf.with_haar(phi.home)),
    }
    if phi.name:
        doc["name"] = phi.name
    return doc


def functional_from_dict(doc: dict, group: hopf.FiniteQuantumGroup) -> Functional:
    from .errors import ParseError

    if "coeffs" not in doc:
        raise ParseError("missing field: coeffs")
    expected = hopf.group_hash(hopf.with_haar(group))
    if doc.get("group_hash") not in (None, expected):
        raise ParseError(
            f"group_hash: functional belongs to {doc['group_hash']}, "
            f"not {expected}")
    coeffs = np.array([complex(re, im) for re, im in doc["coeffs"]])
    return Functional(home=group, coeffs=coeffs, name=doc.get("name"))


# ----------------------------------------------------------------------
# hermitian coordinates (used by the idempotent search)
# ----------------------------------------------------------------------

@lru_cache(maxsize=64)
def hermitian_basis(group: hopf.FiniteQuantumGroup) -> np.ndarray:
    """Complex (n, k) basis of the real space of hermitian functionals."""
    n = group.dim
    sr, si = group.star.T.real, group.star.T.imag
    eye = np.eye(n)
    block = np.block([[sr - eye, -si], [si, sr + eye]])
    basis = real_nullspace(block)
    return basis[:n, :] + 1j * basis[n:, :]
