"""Lattice operations on the idempotent states of a finite quantum group.

The meet of two idempotent states is carried by the subalgebra generated by
their expectation ranges; the join is the limit of convolution powers of
their product, cross-checked against the alternating-projection limit on
the GNS space.  Enumeration either reads a recognized built-in's subgroup
catalog or runs a multistart damped Gauss-Newton search, and the resulting
set is closed under both operations before lattice tables are built.

Everything here is a pure function of immutable inputs: search restarts
are independent draws from one seeded stream and results merge by sorted
deduplication, so the operations parallelize safely and deterministically.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from . import catalog, duality, hopf
from .coideal import as_idempotent_state, generated_subalgebra, intersect, state_from_coideal
from .errors import CriteriaDisagree, InternalInconsistency, NoConvergence
from .harmonic import (
    DEFAULT_TOL,
    Functional,
    IdempotentState,
    ZERO_STATE,
    ZeroState,
    convolution_unit,
    convolve,
    haar_functional,
    is_idempotent_state,
    preceq,
    require_same_home,
    sup,
)
from .linalg import frob, subspace_distance

DEFAULT_SEED = 1729
DEFAULT_RESTARTS = 200
DEFAULT_DEDUP_TOL = 1e-7
DEFAULT_CONV_TOL = 1e-12
DEFAULT_N_MAX = 10000


# ----------------------------------------------------------------------
# meet and join
# ----------------------------------------------------------------------

def meet(a: IdempotentState, b: IdempotentState,
         tol: float = DEFAULT_TOL) -> IdempotentState:
    """The largest idempotent state dominated by both arguments.

    Carried by the subalgebra generated by the two coideals.
    """
    require_same_home(a.functional, b.functional)
    generated = generated_subalgebra(a.coideal, b.coideal, tol)
    result = state_from_coideal(generated, tol)
    if not (preceq(result, a, tol) and preceq(result, b, tol)):
        raise InternalInconsistency("meet does not precede its arguments")
    return result


@dataclasses.dataclass
class JoinDiagnostics:
    iterations: int
    power_residual: float
    slice_residual: float
    two_path_distance: float
    l2_intersection_residual: float
    cesaro_used: bool


def _cesaro_candidate(history: list[np.ndarray]) -> np.ndarray:
    """Window average of iterates; damps rotating components."""
    return np.mean(np.stack(history), axis=0)


def join(a, b, tol: float = DEFAULT_TOL, conv_tol: float = DEFAULT_CONV_TOL,
         n_max: int = DEFAULT_N_MAX):
    """The smallest idempotent state dominating both arguments.

    May formally be the adjoined zero; see join_with_diagnostics.
    """
    state, _ = join_with_diagnostics(a, b, tol, conv_tol, n_max)
    return state


def join_with_diagnostics(a, b, tol: float = DEFAULT_TOL,
                          conv_tol: float = DEFAULT_CONV_TOL,
                          n_max: int = DEFAULT_N_MAX):
    """Convolution-power limit with the alternating-projection cross-check.

    The formal zero absorbs the operation; a finite quantum group never
    produces it from honest states, and hitting it internally is an error.
    """
    if isinstance(a, ZeroState) or isinstance(b, ZeroState):
        return ZERO_STATE, JoinDiagnostics(0, 0.0, 0.0, 0.0, 0.0, False)
    require_same_home(a.functional, b.functional)
    group = a.home
    reg = duality.regular_unitary(group)

    step = convolve(a.functional, b.functional)
    current = step
    proj_a, proj_b = a.l2_projection, b.l2_projection
    factor = proj_a @ proj_b
    matrix_power = factor.copy()
    slice_residual = 0.0
    history: list[np.ndarray] = []
    residuals: list[float] = []
    cesaro_used = False
    iterations = None
    window = 50
    for n in range(1, n_max + 1):
        if n <= 64 or n % 16 == 0:
            lam = duality.slice_second_leg(reg, current)
            slice_residual = max(slice_residual, frob(lam - matrix_power))
        nxt = convolve(current, step)
        r = sup(nxt.coeffs - current.coeffs)
        residuals.append(r)
        history.append(current.coeffs)
        if len(history) > window:
            history.pop(0)
        if r < conv_tol:
            current = nxt
            iterations = n
            break
        if (len(residuals) > 2 * window
                and min(residuals[-window:]) > 0.5 * min(residuals[:-window])
                and r > conv_tol):
            candidate = Functional(home=group, coeffs=_cesaro_candidate(history))
            if sup(convolve(candidate, candidate).coeffs - candidate.coeffs) < np.sqrt(conv_tol):
                current = candidate
                cesaro_used = True
                iterations = n
                break
        current = nxt
        matrix_power = matrix_power @ factor
    if iterations is None:
        raise NoConvergence(
            f"convolution powers did not stabilize in {n_max} steps "
            f"(last residual {residuals[-1]:.2e})")
    if abs(current(group.unit) - 1.0) > 0.5:
        raise InternalInconsistency(
            "join collapsed toward the formal zero on a finite quantum group")

    limit = matrix_power
    for _ in range(n_max):
        nxt = limit @ factor
        stable = frob(nxt - limit) < conv_tol
        limit = nxt
        if stable:
            break
    else:
        raise NoConvergence(
            f"alternating projections did not stabilize in {n_max} steps")

    result = as_idempotent_state(Functional(home=group, coeffs=current.coeffs), tol)

    recovered, _, _, _ = np.linalg.lstsq(
        reg.second_legs.reshape(group.dim, -1).T, limit.reshape(-1), rcond=None)
    two_path = sup(result.coeffs - recovered)

    crossing = intersect(a.coideal, b.coideal, tol)
    l2_res = frob(limit - crossing.l2_projector())
    if subspace_distance(result.coideal.gns_basis(), crossing.gns_basis()) > 100 * tol:
        raise InternalInconsistency(
            "join's coideal is not the intersection of the arguments' coideals")
    if not (preceq(a, result, tol) and preceq(b, result, tol)):
        raise InternalInconsistency("join does not dominate its arguments")
    diag = JoinDiagnostics(
        iterations=iterations, power_residual=residuals[-1],
        slice_residual=slice_residual, two_path_distance=two_path,
        l2_intersection_residual=l2_res, cesaro_used=cesaro_used)
    return result, diag


# ----------------------------------------------------------------------
# enumeration
# ----------------------------------------------------------------------

@dataclasses.dataclass
class EnumerationReport:
    strategy: str
    recognized: str | None
    restarts: int
    seed: int | None
    converged: int
    positive: int
    coverage: str


@dataclasses.dataclass
class EnumerationResult:
    states: list[IdempotentState]
    report: EnumerationReport

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)


def _dedup(functionals, dedup_tol):
    kept = []
    for f in functionals:
        if all(sup(f.coeffs - g.coeffs) >= dedup_tol for g in kept):
            kept.append(f)
    return kept


def _close_under_ops(states, tol, dedup_tol, conv_tol, n_max):
    states = list(states)
    changed = True
    while changed:
        changed = False
        size = len(states)
        for i in range(size):
            for j in range(i, size):
                for result in (meet(states[i], states[j], tol),
                               join(states[i], states[j], tol=tol,
                                    conv_tol=conv_tol, n_max=n_max)):
                    if all(sup(result.coeffs - s.coeffs) >= dedup_tol
                           for s in states):
                        states.append(result)
                        changed = True
        if len(states) > states[0].home.dim ** 2 + 4:
            raise InternalInconsistency("closure under meet/join is not stabilizing")
    return states


def _canonical_sort(states):
    def key(s):
        c = np.round(s.coeffs, 9)
        return (-s.coideal.dim, tuple(zip(c.real.tolist(), c.imag.tolist())))
    return sorted(states, key=key)


def _positive_seed(group, rng):
    """Random element seed; its squared modulus gives a random state density."""
    n = group.dim
    mask = rng.random(n) < 0.5
    if not mask.any():
        mask[int(rng.integers(n))] = True
    y = mask.astype(complex)
    if rng.random() < 0.67:
        y = y * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return y


def _functional_of_element(group, y):
    """The state x -> trace-state(y* y x), before normalization."""
    rho = group.multiply(group.adjoint(y), y)
    return np.einsum("i,ijk,k->j", rho, group.mult, group.haar)


def _search_residual(group, herm_basis, y):
    """Real residual vector of idempotency plus normalization."""
    coeffs = _functional_of_element(group, y)
    f = Functional(home=group, coeffs=coeffs)
    gap = convolve(f, f).coeffs - coeffs
    stacked = np.concatenate([gap.real @ herm_basis.real + gap.imag @ herm_basis.imag,
                              [float((coeffs @ group.unit).real) - 1.0]])
    return stacked, coeffs


def _gauss_newton_state(group, herm_basis, y0, target=1e-12, max_iter=120):
    """Levenberg-damped Gauss-Newton on the squared-element parametrization.

    Parametrizing the functional through y* y keeps every iterate positive,
    so the search can reach idempotent states that are isolated only within
    the state space (a plain hermitian-coordinate Newton stalls on nearby
    non-positive idempotent functionals).  The damping handles the gauge
    directions of the parametrization, which make the plain normal
    equations nearly singular.
    """
    n = group.dim
    y = y0.astype(complex)
    res, _ = _search_residual(group, herm_basis, y)
    norm = float(np.linalg.norm(res))
    basis = np.eye(n)
    lam = 1e-3
    for _ in range(max_iter):
        if norm < target:
            return y, norm, True
        jac = np.empty((res.size, 2 * n))
        eps = 1e-7 * max(1.0, float(np.linalg.norm(y)))
        for a in range(n):
            for part, shift in enumerate((eps, 1j * eps)):
                bumped, _ = _search_residual(group, herm_basis, y + shift * basis[a])
                jac[:, 2 * a + part] = (bumped - res) / eps
        u, s, vt = np.linalg.svd(jac, full_matrices=False)
        projected = u.T @ (-res)
        improved = False
        for _ in range(25):
            step = vt.T @ (s / (s ** 2 + lam ** 2) * projected)
            trial = y + (step[0::2] + 1j * step[1::2])
            trial_res, _ = _search_residual(group, herm_basis, trial)
            trial_norm = float(np.linalg.norm(trial_res))
            if trial_norm < norm:
                y, res, norm = trial, trial_res, trial_norm
                lam = max(lam / 3.0, 1e-9)
                improved = True
                break
            lam = min(lam * 4.0, 1e6)
        if not improved:
            return y, norm, norm < target
    return y, norm, norm < target


def _search_idempotents(group, restarts, seed, tol, dedup_tol):
    from .harmonic import hermitian_basis

    group = hopf.with_haar(group)
    herm = hermitian_basis(group)
    rng = np.random.default_rng(seed)
    found = [convolution_unit(group), haar_functional(group)]
    converged = 0
    for _ in range(restarts):
        y0 = _positive_seed(group, rng)
        y, norm, ok = _gauss_newton_state(group, herm, y0, target=1e-12)
        if not ok:
            continue
        converged += 1
        coeffs = _functional_of_element(group, y)
        f = Functional(home=group, coeffs=coeffs)
        if not is_idempotent_state(f, tol):
            continue
        found.append(f)
    kept = _dedup(found, dedup_tol)
    return kept, converged


def enumerate_idempotents(group, strategy: str = "auto",
                          restarts: int = DEFAULT_RESTARTS,
                          seed: int = DEFAULT_SEED,
                          dedup_tol: float = DEFAULT_DEDUP_TOL,
                          tol: float = DEFAULT_TOL,
                          conv_tol: float = DEFAULT_CONV_TOL,
                          n_max: int = DEFAULT_N_MAX) -> EnumerationResult:
    """All idempotent states found by the chosen strategy, closed and sorted.

    "catalog" reads the subgroup catalog of a recognized built-in;
    "search" runs the multistart solver; "auto" prefers the catalog.
    Search incompleteness is reported, never raised.
    """
    group = hopf.with_haar(group)
    recognized = catalog.recognize(group)
    use_catalog = strategy == "catalog" or (strategy == "auto" and recognized)
    if strategy not in ("auto", "catalog", "search"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if use_catalog and not recognized:
        raise ValueError("catalog strategy requires a recognized built-in")

    if use_catalog:
        functionals = catalog.catalog_functionals(group, recognized)
        converged = len(functionals)
        used = "catalog"
    else:
        functionals, converged = _search_idempotents(
            group, restarts, seed, tol, dedup_tol)
        used = "search"

    states = [as_idempotent_state(f, tol, name=f.name) for f in functionals]
    states = _close_under_ops(states, tol, dedup_tol, conv_tol, n_max)
    states = _canonical_sort(states)
    states = _assign_names(group, recognized, states)

    coverage = "catalog"
    if used == "search":
        if recognized:
            expected = len(catalog.catalog_functionals(group, recognized))
            missing = expected - len(states)
            coverage = "full" if missing == 0 else f"missing {missing} of {expected}"
        else:
            coverage = "best-effort (no oracle)"
    report = EnumerationReport(
        strategy=used, recognized=recognized, restarts=restarts if used == "search" else 0,
        seed=seed if used == "search" else None, converged=converged,
        positive=len(states), coverage=coverage)
    return EnumerationResult(states=states, report=report)


def _assign_names(group, recognized, states):
    named = []
    for idx, s in enumerate(states):
        name = s.name
        if recognized:
            sub = catalog.subgroup_of_state(recognized, s.coeffs)
            if sub is not None:
                _, short = recognized.split("_", 1)
                _, labels = catalog.group_table(short)
                tag = catalog.subgroup_label(sub, labels)
                name = ("unif" if recognized.startswith("c_") else "ind") + tag
        if name is None:
            if sup(s.coeffs - group.counit) < 1e-7:
                name = "counit"
            elif sup(s.coeffs - group.haar) < 1e-7:
                name = "haar"
            else:
                name = f"state{idx}"
        if name != s.name:
            f = Functional(home=group, coeffs=s.coeffs, name=name)
            s = dataclasses.replace(s, functional=f)
        named.append(s)
    return named


# ----------------------------------------------------------------------
# the lattice
# ----------------------------------------------------------------------

@dataclasses.dataclass
class IdempotentLattice:
    states: list[IdempotentState]
    order: np.ndarray
    meet_table: np.ndarray
    join_table: np.ndarray
    hasse_edges: list[tuple[int, int]]

    @property
    def names(self) -> list[str]:
        return [s.name or f"state{i}" for i, s in enumerate(self.states)]


def _match_index(states, result, dedup_tol):
    for idx, s in enumerate(states):
        if sup(s.coeffs - result.coeffs) < dedup_tol:
            return idx
    raise InternalInconsistency("lattice operation left the enumerated set")


def build_lattice(states, tol: float = DEFAULT_TOL,
                  dedup_tol: float = DEFAULT_DEDUP_TOL,
                  conv_tol: float = DEFAULT_CONV_TOL,
                  n_max: int = DEFAULT_N_MAX) -> IdempotentLattice:
    """Order matrix, operation tables and Hasse diagram of a closed set.

    Input order is preserved.  The partial-order axioms, commutativity,
    associativity, the absorption laws and the extremal characterizations
    of meet and join are all verified; violations are internal errors.
    """
    states = list(states)
    k = len(states)
    order = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            order[i, j] = preceq(states[i], states[j], tol)
    for i in range(k):
        if not order[i, i]:
            raise InternalInconsistency("order is not reflexive")
        for j in range(k):
            if i != j and order[i, j] and order[j, i]:
                raise InternalInconsistency("order is not antisymmetric; duplicates?")
            for l in range(k):
                if order[i, j] and order[j, l] and not order[i, l]:
                    raise InternalInconsistency("order is not transitive")

    meet_table = np.zeros((k, k), dtype=int)
    join_table = np.zeros((k, k), dtype=int)
    for i in range(k):
        for j in range(i, k):
            mi = _match_index(states, meet(states[i], states[j], tol), dedup_tol)
            ji = _match_index(states, join(states[i], states[j], tol=tol,
                                           conv_tol=conv_tol, n_max=n_max),
                              dedup_tol)
            meet_table[i, j] = meet_table[j, i] = mi
            join_table[i, j] = join_table[j, i] = ji

    for i in range(k):
        for j in range(k):
            lower = [l for l in range(k) if order[l, i] and order[l, j]]
            m = meet_table[i, j]
            if m not in lower or not all(order[l, m] for l in lower):
                raise InternalInconsistency(
                    "meet is not the largest common lower bound")
            upper = [l for l in range(k) if order[i, l] and order[j, l]]
            jn = join_table[i, j]
            if jn not in upper or not all(order[jn, l] for l in upper):
                raise InternalInconsistency(
                    "join is not the smallest common upper bound")
            for l in range(k):
                if (meet_table[meet_table[i, j], l] != meet_table[i, meet_table[j, l]]
                        or join_table[join_table[i, j], l] != join_table[i, join_table[j, l]]):
                    raise InternalInconsistency("operation tables are not associative")
            if meet_table[i, join_table[i, j]] != i or join_table[i, meet_table[i, j]] != i:
                raise InternalInconsistency("absorption laws fail")

    edges = []
    for i in range(k):
        for j in range(k):
            if i == j or not order[i, j]:
                continue
            if any(l not in (i, j) and order[i, l] and order[l, j] for l in range(k)):
                continue
            edges.append((i, j))
    return IdempotentLattice(states=states, order=order, meet_table=meet_table,
                             join_table=join_table, hasse_edges=sorted(edges))


def to_dot(lat: IdempotentLattice) -> str:
    """Hasse diagram as Graphviz DOT (node and edge statements only)."""
    names = lat.names
    lines = ["digraph idempotent_lattice {"]
    for name in names:
        safe = name.replace('"', r'\"')
        lines.append(f'  "{safe}" [label="{safe}"];')
    for i, j in lat.hasse_edges:
        a = names[i].replace('"', r'\"')
        b = names[j].replace('"', r'\"')
        lines.append(f'  "{a}" -> "{b}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# commutation equivalences and the modular law
# ----------------------------------------------------------------------

@dataclasses.dataclass
class CommutationReport:
    commute: bool
    residuals: dict[str, float]


def commutation_equivalences(rho: IdempotentState, mu: IdempotentState,
                             tol: float = DEFAULT_TOL) -> CommutationReport:
    """Three equivalent ways to say the two states commute; they must agree."""
    fr, fm = rho.functional, mu.functional
    rm = convolve(fr, fm)
    r1 = sup(join(rho, mu, tol=tol).coeffs - rm.coeffs)
    r2 = sup(convolve(convolve(fm, fr), fm).coeffs - rm.coeffs)
    r3 = sup(convolve(fm, fr).coeffs - rm.coeffs)
    answers = [r1 < tol, r2 < tol, r3 < tol]
    if len(set(answers)) != 1:
        raise CriteriaDisagree(
            f"commutation criteria disagree: join {r1:.2e}, "
            f"sandwich {r2:.2e}, swap {r3:.2e}")
    return CommutationReport(commute=answers[0],
                             residuals={"join": r1, "sandwich": r2, "swap": r3})


@dataclasses.dataclass
class ModularLawReport:
    hypotheses: dict[str, tuple[bool, float]]
    applicable: bool
    conclusion_distance: float | None
    holds: bool | None


def modular_law_check(omega: IdempotentState, mu: IdempotentState,
                      rho: IdempotentState,
                      tol: float = DEFAULT_TOL) -> ModularLawReport:
    """Conditional modular law for the two lattice operations.

    Hypotheses: rho precedes omega; rho and mu commute (their join is the
    convolution product); the meet coideal of omega and mu is spanned by
    plain products of their coideals.  Under these the two bracketings
    agree: omega meet (mu join rho) equals (omega meet mu) join rho.
    """
    h1_res = sup(convolve(rho.functional, omega.functional).coeffs
                 - omega.coeffs)
    h1 = preceq(rho, omega, tol)

    rm = convolve(rho.functional, mu.functional)
    h2_res = sup(join(rho, mu, tol=tol).coeffs - rm.coeffs)
    h2 = h2_res < tol

    group = omega.home
    products = []
    for i in range(omega.coideal.dim):
        for j in range(mu.coideal.dim):
            products.append(group.multiply(omega.coideal.basis[:, i],
                                           mu.coideal.basis[:, j]))
    from .coideal import coideal_from_span

    span = coideal_from_span(group, np.column_stack(products), tol)
    meet_coideal = generated_subalgebra(omega.coideal, mu.coideal, tol)
    h3_res = subspace_distance(span.gns_basis(), meet_coideal.gns_basis())
    h3 = h3_res < 100 * tol

    hypotheses = {"rho-precedes-omega": (h1, h1_res),
                  "rho-mu-commute": (h2, h2_res),
                  "meet-coideal-is-product-span": (h3, h3_res)}
    applicable = h1 and h2 and h3
    if not applicable:
        return ModularLawReport(hypotheses, False, None, None)
    lhs = meet(omega, join(mu, rho, tol=tol), tol)
    rhs = join(meet(omega, mu, tol), rho, tol=tol)
    dist = sup(lhs.coeffs - rhs.coeffs)
    return ModularLawReport(hypotheses, True, dist, bool(dist < 100 * tol))
