"""The dual quantum group, the regular unitary and the state duality.

The dual algebra lives on the dual vector space with convolution as
product; the regular unitary acts on L2 (x) L2, implements the coproduct
and intertwines the two sides.  Conventions (which tensor factor the
coproduct acts through, and whether the dual coproduct flips) are not
prescribed: a finite set of candidates is searched and the unique one
passing the pinning invariants (unitarity, pentagon identity, slices by
idempotent states giving range projections, biduality on the nose) is
kept.  The search is deterministic, so the report always names the same
winner.
"""
from __future__ import annotations

import dataclasses
from functools import lru_cache

import numpy as np

from . import hopf
from .coideal import Coideal, coideal_from_span, as_idempotent_state, state_from_coideal
from .errors import ConventionFailure, InternalInconsistency, NotIdempotent
from .harmonic import (
    DEFAULT_TOL,
    Functional,
    IdempotentState,
    as_functional,
    expectation_matrix,
    group_like_defect,
    is_idempotent_state,
    state_from_qperp,
    sup,
)
from .linalg import dagger, frob, nullspace, subspace_distance

W_KINDS = ("coproduct-first-factor", "coproduct-second-factor")


# ----------------------------------------------------------------------
# the regular unitary on L2 (x) L2
# ----------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class RegularUnitary:
    group: hopf.FiniteQuantumGroup
    w: np.ndarray
    second_legs: np.ndarray   # second_legs[k] = first-leg matrix paired with e_k
    kind: str
    residuals: dict[str, float]


def _galois_matrix(group: hopf.FiniteQuantumGroup, kind: str) -> np.ndarray:
    """Algebra-coordinate matrix of the candidate unitary."""
    d, m = group.comult, group.mult
    n = group.dim
    if kind == "coproduct-first-factor":
        # a (x) b  ->  coproduct(a) (1 (x) b)
        mat = np.einsum("ipq,qjr->prij", d, m)
    elif kind == "coproduct-second-factor":
        # a (x) b  ->  coproduct(b) (a (x) 1)
        mat = np.einsum("jpq,pir->rqij", d, m)
    else:  # pragma: no cover
        raise ValueError(kind)
    return mat.reshape(n * n, n * n)


def _leg_swap(n: int) -> np.ndarray:
    perm = np.arange(n ** 3).reshape(n, n, n).transpose(0, 2, 1).reshape(-1)
    return np.eye(n ** 3)[perm]


def pentagon_defect(w: np.ndarray, n: int) -> float:
    eye = np.eye(n)
    w12 = np.kron(w, eye)
    w23 = np.kron(eye, w)
    swap = _leg_swap(n)
    w13 = swap @ w12 @ swap
    return frob(w12 @ w13 @ w23 - w23 @ w12)


def _second_leg_fit(w: np.ndarray, space: hopf.GnsSpace) -> tuple[np.ndarray, float]:
    """Write w = sum_k c_k (x) L2(e_k); return (c, fit residual)."""
    n = space.group.dim
    rep = space.left_mult.transpose(1, 2, 0).reshape(n * n, n)
    wt = w.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)
    sol, _, _, _ = np.linalg.lstsq(rep, wt.T, rcond=None)
    fit = frob(rep @ sol - wt.T)
    legs = sol.T.reshape(n, n, n).transpose(2, 0, 1)
    return legs, fit


def _unitary_battery(group, w, legs, space) -> dict[str, float]:
    n = group.dim
    res = {
        "unitarity": frob(dagger(w) @ w - np.eye(n * n)),
        "pentagon": pentagon_defect(w, n),
    }
    res["counit-slice"] = frob(np.einsum("k,kab->ab", group.counit, legs) - np.eye(n))
    vac = space.embed(group.unit)
    rank1 = np.outer(vac, np.conj(vac))
    res["haar-slice"] = frob(np.einsum("k,kab->ab", group.haar, legs) - rank1)
    emat = expectation_matrix(Functional(home=group, coeffs=group.haar))
    proj = space.orthonormal_basis @ emat @ space.inverse_basis
    res["haar-expectation"] = frob(np.einsum("k,kab->ab", group.haar, legs) - proj)
    return res


@lru_cache(maxsize=32)
def regular_unitary(group: hopf.FiniteQuantumGroup,
                    tol: float = DEFAULT_TOL) -> RegularUnitary:
    """Select and return the regular unitary by its pinning invariants."""
    group = hopf.with_haar(group)
    space = hopf.gns(group)
    tt = np.kron(space.orthonormal_basis, space.orthonormal_basis)
    tt_inv = np.kron(space.inverse_basis, space.inverse_basis)
    failures = {}
    for kind in W_KINDS:
        w = tt @ _galois_matrix(group, kind) @ tt_inv
        legs, fit = _second_leg_fit(w, space)
        res = _unitary_battery(group, w, legs, space)
        res["second-leg-fit"] = fit
        if all(v < tol for v in res.values()):
            return RegularUnitary(group=group, w=w, second_legs=legs,
                                  kind=kind, residuals=res)
        failures[kind] = res
    raise ConventionFailure(f"no unitary candidate passes: {failures}")


def slice_second_leg(reg: RegularUnitary, phi) -> np.ndarray:
    """(id (x) phi)(W): the dual-side image of a functional."""
    f = as_functional(phi)
    return np.einsum("k,kab->ab", f.coeffs, reg.second_legs)


def multiplicative_unitary(pair: DualPair, states=(),
                           tol: float = DEFAULT_TOL) -> np.ndarray:
    """The pinned unitary of a pair, optionally re-verified against states.

    Unitarity, the pentagon identity and the counit/invariant-state slices
    were already enforced when the pair was built; passing idempotent states
    additionally checks that slicing by each returns its range projection
    and that the projection identity holds.
    """
    reg = pair.regular
    eye = np.eye(pair.group.dim)
    for s in states:
        if frob(slice_second_leg(reg, s) - s.l2_projection) > tol:
            raise InternalInconsistency(
                f"slice of the unitary by {s.name or 'a state'} "
                "is not its range projection")
        p = s.l2_projection
        resid = frob(dagger(reg.w) @ np.kron(eye, p) @ reg.w
                     @ np.kron(p, eye) - np.kron(p, p))
        if resid > tol:
            raise InternalInconsistency(
                f"projection identity fails for {s.name or 'a state'} "
                f"({resid:.2e})")
    return pair.w


def slice_first_leg(reg: RegularUnitary, theta_coeffs) -> np.ndarray:
    """(theta (x) id)(W) for a functional on the dual, given by coefficients."""
    space = hopf.gns(reg.group)
    return space.represent(np.asarray(theta_coeffs, complex))


# ----------------------------------------------------------------------
# the dual quantum group
# ----------------------------------------------------------------------

def build_dual_tensors(group: hopf.FiniteQuantumGroup,
                       flip: bool) -> hopf.FiniteQuantumGroup:
    """Transpose the structure onto the dual space; flip mirrors the coproduct."""
    d, m = group.comult, group.mult
    mult_hat = np.einsum("kij->ijk", d)
    comult_hat = (np.einsum("jik->kij", m) if flip
                  else np.einsum("ijk->kij", m))
    antipode_hat = group.antipode.T.copy()
    star_hat = group.antipode.T @ group.star.conj().T
    labels = None
    if group.labels is not None:
        labels = tuple(f"hat_{x}" for x in group.labels)
    dual_group = hopf.FiniteQuantumGroup(
        dim=group.dim, mult=mult_hat, unit=group.counit.copy(),
        comult=comult_hat, counit=group.unit.copy(),
        antipode=antipode_hat, star=star_hat, labels=labels)
    return hopf.with_haar(dual_group)


@dataclasses.dataclass(frozen=True, eq=False)
class ConventionReport:
    w_kind: str
    comult_flip: bool
    residuals: dict[str, float]
    candidates_passing: tuple[str, ...]


@dataclasses.dataclass(frozen=True, eq=False)
class DualPair:
    group: hopf.FiniteQuantumGroup
    dual_group: hopf.FiniteQuantumGroup
    pairing: np.ndarray
    w: np.ndarray
    lambda_rep: np.ndarray
    regular: RegularUnitary
    convention: ConventionReport


def _dual_battery(group, dual_group, reg, flip, tol) -> dict[str, float]:
    res = {}
    report = hopf.validate(dual_group, tol=max(tol, 1e-10))
    res["dual-axioms"] = report.max_residual
    rng = np.random.default_rng(7)
    worst_h, worst_s = 0.0, 0.0
    for _ in range(4):
        a = Functional(home=group, coeffs=rng.standard_normal(group.dim)
                       + 1j * rng.standard_normal(group.dim))
        b = Functional(home=group, coeffs=rng.standard_normal(group.dim)
                       + 1j * rng.standard_normal(group.dim))
        prod = dual_group.multiply(a.coeffs, b.coeffs)
        lhs = np.einsum("k,kab->ab", prod, reg.second_legs)
        rhs = (slice_second_leg(reg, a) @ slice_second_leg(reg, b))
        worst_h = max(worst_h, frob(lhs - rhs) / max(1.0, frob(rhs)))
        star = dual_group.adjoint(a.coeffs)
        worst_s = max(worst_s, frob(np.einsum("k,kab->ab", star, reg.second_legs)
                                    - dagger(slice_second_leg(reg, a))))
    res["lambda-homomorphism"] = worst_h
    res["lambda-star"] = worst_s
    double = build_dual_tensors(dual_group, flip)
    res["biduality"] = max(
        frob(double.mult - group.mult), frob(double.unit - group.unit),
        frob(double.comult - group.comult), frob(double.counit - group.counit),
        frob(double.antipode - group.antipode), frob(double.star - group.star),
        frob(double.haar - hopf.with_haar(group).haar))
    res["haar-group-like"] = group_like_defect(dual_group, group.haar)
    return res


@lru_cache(maxsize=16)
def dual(group: hopf.FiniteQuantumGroup, tol: float = DEFAULT_TOL) -> DualPair:
    """Construct the dual pair, pinning conventions by the invariants."""
    group = hopf.with_haar(group)
    reg = regular_unitary(group, tol)
    candidates = []
    results = {}
    for flip in (False, True):
        dual_group = build_dual_tensors(group, flip)
        res = _dual_battery(group, dual_group, reg, flip, tol)
        results[flip] = (dual_group, res)
        if all(v < tol for v in res.values()):
            candidates.append(flip)
    if not candidates:
        raise ConventionFailure(
            f"no dual convention passes the invariants: "
            f"{ {k: v[1] for k, v in results.items()} }")
    flip = candidates[0]
    dual_group, res = results[flip]
    res = dict(res)
    res.update(reg.residuals)
    names = tuple(f"comult_flip={c}" for c in candidates)
    report = ConventionReport(w_kind=reg.kind, comult_flip=flip,
                              residuals=res, candidates_passing=names)
    return DualPair(group=group, dual_group=dual_group,
                    pairing=np.eye(group.dim, dtype=complex), w=reg.w,
                    lambda_rep=reg.second_legs, regular=reg, convention=report)


# ----------------------------------------------------------------------
# co-duals of coideals
# ----------------------------------------------------------------------

def _codual_primal(coid: Coideal, pair: DualPair, tol: float) -> Coideal:
    """Solve the dual-side membership equation against the range projection.

    The co-dual of a coideal N is the set of dual elements y with
    (coproduct of y)(1 (x) P) = y (x) P, where P projects L2 onto N; the
    equation is represented through the dual's image on L2 (x) L2 and
    solved as a linear system.  A commutant of the one-sided multiplication
    image of N lands on the modular-conjugate copy instead, which is a
    coideal for the opposite coproduct; this form is convention-stable.
    """
    dual_group = pair.dual_group
    n = pair.group.dim
    proj = coid.l2_projector()
    legs = pair.lambda_rep
    legs_proj = np.einsum("kbd,de->kbe", legs, proj)
    lhs = np.einsum("ijk,jac,kbd->iabcd", dual_group.comult, legs, legs_proj)
    rhs = np.einsum("iac,bd->iabcd", legs, proj)
    system = (lhs - rhs).reshape(n, n ** 4).T
    kernel = nullspace(system)
    out = coideal_from_span(dual_group, kernel, tol)
    if not out.is_coideal:
        raise InternalInconsistency(
            f"co-dual is not a coideal: defects {out.defects}")
    return out


def codual(coid: Coideal, pair: DualPair, side: str = "primal",
           tol: float = DEFAULT_TOL) -> Coideal:
    """Co-dual of a coideal: the matching coideal on the other side.

    side="primal" takes a coideal of the group and returns one of the dual
    (in dual coordinates); side="dual" goes the other way through the
    double dual, whose coordinates coincide with the original group's.
    Applying the two in succession returns the original coideal.
    """
    if side == "primal":
        return _codual_primal(coid, pair, tol)
    if side == "dual":
        mirror = dual(pair.dual_group, tol)
        out = _codual_primal(coid, mirror, tol)
        return coideal_from_span(pair.group, out.basis, tol)
    raise ValueError(side)  # pragma: no cover


# ----------------------------------------------------------------------
# the dual state
# ----------------------------------------------------------------------

def dual_state(state: IdempotentState, pair: DualPair,
               tol: float = DEFAULT_TOL) -> IdempotentState:
    """The idempotent state on the dual attached to an idempotent state.

    The coefficient vector of the state, read as an element of the dual
    algebra, is a group-like projection; compressing the dual invariant
    state by it gives the dual state.  Verified: the dual state's range is
    the co-dual of the original range, slicing the regular unitary by the
    dual state returns the original support projection, and the dual
    state's support is the original coefficient vector.
    """
    if not is_idempotent_state(state.functional, tol):
        raise NotIdempotent("dual_state needs an idempotent state")
    dual_group = pair.dual_group
    name = f"dual({state.name})" if state.name else None
    checked = state_from_qperp(dual_group, state.coeffs, tol, name=name)
    out = as_idempotent_state(checked, tol)
    gap = subspace_distance(out.coideal.gns_basis(),
                            codual(state.coideal, pair, "primal", tol).gns_basis())
    if gap > 100 * tol:
        raise InternalInconsistency(
            f"dual state's coideal is not the co-dual ({gap:.2e})")
    if sup(out.coeffs - state.q_perp) > 100 * tol:
        raise InternalInconsistency(
            "slicing the regular unitary by the dual state "
            "does not return the support projection")
    if sup(out.q_perp - state.coeffs) > 100 * tol:
        raise InternalInconsistency(
            "dual state's support is not the original coefficient vector")
    return out


def double_dual_state(state: IdempotentState, pair: DualPair,
                      tol: float = DEFAULT_TOL) -> IdempotentState:
    """Apply the duality twice; lands on the double dual group."""
    once = dual_state(state, pair, tol)
    return dual_state(once, dual(pair.dual_group, tol), tol)


@dataclasses.dataclass
class ExchangeReport:
    meet_distance: float
    join_distance: float
    passed: bool


def duality_exchange_check(a: IdempotentState, b: IdempotentState,
                           pair: DualPair, tol: float = DEFAULT_TOL) -> ExchangeReport:
    """Duality swaps the lattice operations: meets go to joins and back."""
    from . import lattice  # deferred: lattice builds on this module

    da = dual_state(a, pair, tol)
    db = dual_state(b, pair, tol)
    lhs_meet = dual_state(lattice.meet(a, b, tol), pair, tol)
    rhs_meet = lattice.join(da, db, tol=tol)
    d1 = sup(lhs_meet.coeffs - rhs_meet.coeffs)
    lhs_join = dual_state(lattice.join(a, b, tol=tol), pair, tol)
    rhs_join = lattice.meet(da, db, tol)
    d2 = sup(lhs_join.coeffs - rhs_join.coeffs)
    return ExchangeReport(meet_distance=d1, join_distance=d2,
                          passed=bool(d1 < 100 * tol and d2 < 100 * tol))


@dataclasses.dataclass
class CodualStateReport:
    distance: float
    passed: bool


def dual_state_from_codual_check(state: IdempotentState, pair: DualPair,
                                 tol: float = DEFAULT_TOL) -> CodualStateReport:
    """Independent route to the dual state: through the co-dual coideal."""
    codual_coideal = codual(state.coideal, pair, "primal", tol)
    via_coideal = state_from_coideal(codual_coideal, tol)
    direct = dual_state(state, pair, tol)
    d = sup(via_coideal.coeffs - direct.coeffs)
    return CodualStateReport(distance=d, passed=bool(d < 100 * tol))
