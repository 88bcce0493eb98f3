"""Finite quantum groups given by dense structure-constant tensors.

A finite quantum group is a finite-dimensional Hopf *-algebra whose
underlying algebra is a C*-algebra carrying a faithful two-sided invariant
state.  Everything is stored relative to a fixed linear basis
e_0, ..., e_{n-1}:

    mult[i, j, k]     e_i e_j = sum_k mult[i, j, k] e_k
    unit[i]           coefficients of the algebra unit
    comult[i, j, k]   coproduct(e_i) = sum_{j,k} comult[i, j, k] e_j (x) e_k
    counit[i]         counit applied to e_i
    antipode[:, i]    coefficients of antipode(e_i); acts as a matrix on
                      coefficient columns
    star[:, i]        coefficients of (e_i)*; the involution of an element x
                      is star @ conj(x)
    haar[i]           invariant state evaluated on e_i (may be absent)

Algebra elements are complex coefficient vectors, functionals complex
covectors, and an element of the tensor square A (x) A is an (n, n) matrix
whose [j, k] entry multiplies e_j (x) e_k.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatch,
    NoHaarState,
    NonUniqueHaar,
    NotAGroup,
    NotPositive,
    ParseError,
)
from .linalg import dagger, frob, nullspace

AXIOM_TOL = 1e-12
DERIVED_TOL = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class FiniteQuantumGroup:
    """Immutable structure-constant description of a finite quantum group."""

    dim: int
    mult: np.ndarray
    unit: np.ndarray
    comult: np.ndarray
    counit: np.ndarray
    antipode: np.ndarray
    star: np.ndarray
    haar: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        n = int(self.dim)
        if n < 1:
            raise DimensionMismatch(f"dim must be positive, got {n}")
        object.__setattr__(self, "dim", n)
        shapes = {
            "mult": (n, n, n),
            "unit": (n,),
            "comult": (n, n, n),
            "counit": (n,),
            "antipode": (n, n),
            "star": (n, n),
        }
        for name, shape in shapes.items():
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != shape:
                raise DimensionMismatch(
                    f"{name}: expected shape {shape}, got {arr.shape}")
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.haar is not None:
            h = np.asarray(self.haar, dtype=complex)
            if h.shape != (n,):
                raise DimensionMismatch(f"haar: expected shape ({n},), got {h.shape}")
            h = np.ascontiguousarray(h)
            h.setflags(write=False)
            object.__setattr__(self, "haar", h)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != n:
                raise DimensionMismatch("labels: wrong length")
            object.__setattr__(self, "labels", labels)

    # ------------------------------------------------------------------
    # algebra operations on coefficient vectors
    # ------------------------------------------------------------------
    def multiply(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", np.asarray(a, complex),
                         np.asarray(b, complex), self.mult)

    def adjoint(self, a) -> np.ndarray:
        """The *-involution."""
        return self.star @ np.conj(np.asarray(a, complex))

    def coproduct(self, a) -> np.ndarray:
        return np.einsum("i,ijk->jk", np.asarray(a, complex), self.comult)

    def counit_of(self, a) -> complex:
        return complex(np.dot(self.counit, np.asarray(a, complex)))

    def antipode_of(self, a) -> np.ndarray:
        return self.antipode @ np.asarray(a, complex)

    def haar_of(self, a) -> complex:
        if self.haar is None:
            raise NoHaarState("group carries no invariant state; "
                              "call compute_haar/with_haar first")
        return complex(np.dot(self.haar, np.asarray(a, complex)))

    def left_mult_matrix(self, a) -> np.ndarray:
        """Matrix of x -> a x on coefficient columns."""
        return np.einsum("i,ijk->kj", np.asarray(a, complex), self.mult)

    def right_mult_matrix(self, a) -> np.ndarray:
        """Matrix of x -> x a on coefficient columns."""
        return np.einsum("j,ijk->ki", np.asarray(a, complex), self.mult)

    # tensor-square helpers; X, Y are (n, n) coefficient matrices
    def tensor_multiply(self, x, y) -> np.ndarray:
        return np.einsum("jk,ab,jap,kbq->pq", np.asarray(x, complex),
                         np.asarray(y, complex), self.mult, self.mult)

    def tensor_adjoint(self, x) -> np.ndarray:
        return self.star @ np.conj(np.asarray(x, complex)) @ self.star.T


# ----------------------------------------------------------------------
# cached derived tensors
# ----------------------------------------------------------------------

@lru_cache(maxsize=128)
def star_mult_tensor(group: FiniteQuantumGroup) -> np.ndarray:
    """sm[i, j, k] so that (e_i)* e_j = sum_k sm[i, j, k] e_k."""
    return np.einsum("ai,ajk->ijk", group.star, group.mult)


def sesquilinear_matrix(group: FiniteQuantumGroup, phi) -> np.ndarray:
    """The matrix [phi((e_i)* e_j)] of a functional phi."""
    return np.einsum("ijk,k->ij", star_mult_tensor(group),
                     np.asarray(phi, complex))


@lru_cache(maxsize=128)
def group_hash(group: FiniteQuantumGroup) -> str:
    """Content hash of the canonical JSON serialization."""
    digest = hashlib.sha256(save(group).encode("utf-8")).hexdigest()
    return f"sha256:{digest}"


# ----------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------

@dataclasses.dataclass
class AxiomCheck:
    name: str
    residual: float
    passed: bool


@dataclasses.dataclass
class ValidationReport:
    tol: float
    checks: list[AxiomCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __str__(self) -> str:
        lines = [f"{'axiom':<28}{'residual':>14}  ok"]
        for c in self.checks:
            lines.append(f"{c.name:<28}{c.residual:>14.3e}  {'yes' if c.passed else 'NO'}")
        verdict = "pass" if self.passed else f"FAIL ({', '.join(self.failing())})"
        lines.append(f"overall: {verdict} at tol {self.tol:g}")
        return "\n".join(lines)


def validate(group: FiniteQuantumGroup, tol: float = AXIOM_TOL,
             fail_fast: bool = False) -> ValidationReport:
    """Check every defining axiom numerically and report residuals.

    With fail_fast=True the report stops at the first failing axiom,
    which keeps perturbation scans cheap.
    """
    n = group.dim
    m, d = group.mult, group.comult
    u, eps = group.unit, group.counit
    s, sig = group.antipode, group.star
    eye = np.eye(n)
    psi = group.haar

    checks: list[AxiomCheck] = []

    def stop(name: str, residual: float) -> bool:
        ok = bool(residual < tol)
        checks.append(AxiomCheck(name, float(residual), ok))
        return fail_fast and not ok

    while True:  # single pass; `break` after the last check or an early failure
        r = max(frob(np.einsum("i,ijk->jk", u, m) - eye),
                frob(np.einsum("j,ijk->ik", u, m) - eye))
        if stop("unit-law", r):
            break
        r = max(frob(np.einsum("ijk,j->ik", d, eps) - eye),
                frob(np.einsum("ijk,k->ij", d, eps) - eye))
        if stop("counit-law", r):
            break
        if psi is not None:
            if stop("haar-normalized", abs(np.dot(psi, u) - 1.0)):
                break
            r = frob(np.einsum("ijk,k->ij", d, psi) - np.outer(psi, u))
            if stop("haar-right-invariant", r):
                break
            r = frob(np.einsum("ijk,j->ik", d, psi) - np.outer(psi, u))
            if stop("haar-left-invariant", r):
                break
            if stop("kac-haar-antipode", frob(psi @ s - psi)):
                break
            bil = np.einsum("ijk,k->ij", m, psi)
            if stop("kac-haar-tracial", frob(bil - bil.T)):
                break
        if stop("star-involution", frob(sig @ np.conj(sig) - eye)):
            break
        if stop("kac-antipode-involutive", frob(s @ s - eye)):
            break
        if stop("kac-antipode-star", frob(s @ sig - sig @ np.conj(s))):
            break
        r = max(frob(np.einsum("ijk,aj,akq->iq", d, s, m) - np.outer(eps, u)),
                frob(np.einsum("ijk,ak,jaq->iq", d, s, m) - np.outer(eps, u)))
        if stop("antipode-axiom", r):
            break
        r = frob(np.einsum("ijp,pkq->ijkq", m, m)
                 - np.einsum("jkp,ipq->ijkq", m, m))
        if stop("associativity", r):
            break
        lhs = np.einsum("ijk,ak->ija", np.conj(m), sig)
        rhs = np.einsum("pj,qi,pqa->ija", sig, sig, m)
        if stop("star-antimultiplicative", frob(lhs - rhs)):
            break
        r = frob(np.einsum("ipr,pab->iabr", d, d)
                 - np.einsum("iap,pbr->iabr", d, d))
        if stop("coassociativity", r):
            break
        if stop("comult-unital", frob(np.einsum("i,ijk->jk", u, d) - np.outer(u, u))):
            break
        lhs = np.einsum("ai,ajk->ijk", sig, d)
        rhs = np.einsum("ijk,pj,qk->ipq", np.conj(d), sig, sig)
        if stop("comult-star", frob(lhs - rhs)):
            break
        lhs = np.einsum("ijk,kab->ijab", m, d)
        rhs = np.einsum("iab,jce,acp,beq->ijpq", d, d, m, m)
        if stop("comult-multiplicative", frob(lhs - rhs)):
            break
        if psi is not None:
            gram = sesquilinear_matrix(group, psi)
            herm = frob(gram - dagger(gram))
            lam_min = float(np.linalg.eigvalsh((gram + dagger(gram)) / 2.0)[0])
            if stop("gram-positive", max(herm, -min(lam_min, 0.0))):
                break
        break

    return ValidationReport(tol=tol, checks=checks)


# ----------------------------------------------------------------------
# invariant state
# ----------------------------------------------------------------------

def compute_haar(group: FiniteQuantumGroup, tol: float = DERIVED_TOL) -> np.ndarray:
    """Solve the invariance equations for the unique invariant state.

    The linear system encodes (id (x) h)(coproduct(x)) = h(x) 1 for every
    basis element, plus the normalization h(1) = 1.  The solution is checked
    to be invariant on the other side as well (finite quantum groups are
    unimodular; a one-sided solution signals bad input).
    """
    n = group.dim
    d, u = group.comult, group.unit
    system = d - np.einsum("ik,j->ijk", np.eye(n), u)
    kernel = nullspace(system.reshape(n * n, n), rel_tol=tol)
    if kernel.shape[1] == 0:
        raise NoHaarState("the invariance equations have no solution")
    if kernel.shape[1] > 1:
        raise NonUniqueHaar(
            f"invariant functionals form a space of dimension {kernel.shape[1]}")
    h = kernel[:, 0]
    mass = complex(np.dot(h, u))
    if abs(mass) < tol:
        raise NoHaarState("invariant functional kills the unit; not normalizable")
    h = h / mass
    left = frob(np.einsum("ijk,j->ik", d, h) - np.outer(h, u))
    if left >= tol:
        raise NoHaarState(
            f"right-invariant solution is not left-invariant (residual {left:.2e})")
    return h


def with_haar(group: FiniteQuantumGroup, tol: float = DERIVED_TOL) -> FiniteQuantumGroup:
    """Return the group itself, or a copy with the computed invariant state."""
    if group.haar is not None:
        return group
    return dataclasses.replace(group, haar=compute_haar(group, tol))


# ----------------------------------------------------------------------
# GNS construction
# ----------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class GnsSpace:
    """L2 completion of the algebra in the invariant state.

    orthonormal_basis maps algebra coordinates to L2 coordinates; left_mult
    stacks the images of the basis elements under the left regular
    *-representation on L2.
    """

    group: FiniteQuantumGroup
    gram: np.ndarray
    orthonormal_basis: np.ndarray
    inverse_basis: np.ndarray
    left_mult: np.ndarray

    def embed(self, a) -> np.ndarray:
        return self.orthonormal_basis @ np.asarray(a, complex)

    def unembed(self, v) -> np.ndarray:
        return self.inverse_basis @ np.asarray(v, complex)

    def represent(self, x) -> np.ndarray:
        return np.einsum("i,iab->ab", np.asarray(x, complex), self.left_mult)


@lru_cache(maxsize=64)
def gns(group: FiniteQuantumGroup, tol: float = DERIVED_TOL) -> GnsSpace:
    """Orthonormalize the invariant inner product and represent the algebra.

    Uses a Hermitian eigendecomposition of the Gram matrix so that a
    near-singular inner product produces an informative error instead of a
    Cholesky failure.
    """
    group = with_haar(group, tol)
    gram = sesquilinear_matrix(group, group.haar)
    gram = (gram + dagger(gram)) / 2.0
    evals, vecs = np.linalg.eigh(gram)
    if evals[0] < -tol:
        raise NotPositive(
            f"gram matrix has negative eigenvalue {evals[0]:.3e}; "
            "the invariant functional is not a state")
    if evals[0] <= tol:
        raise NotPositive(
            f"gram matrix is numerically singular (min eigenvalue {evals[0]:.3e}); "
            "the invariant state is not faithful")
    roots = np.sqrt(evals)
    to_l2 = roots[:, None] * dagger(vecs)
    from_l2 = vecs * (1.0 / roots)[None, :]
    left_alg = group.mult.transpose(0, 2, 1)
    left_l2 = np.einsum("ab,ibc,cd->iad", to_l2, left_alg, from_l2)
    return GnsSpace(group=group, gram=gram, orthonormal_basis=to_l2,
                    inverse_basis=from_l2, left_mult=left_l2)


# ----------------------------------------------------------------------
# classical constructions
# ----------------------------------------------------------------------

def _check_group_table(table) -> tuple[int, int, list[int]]:
    """Validate a multiplication table; return (order, identity, inverses)."""
    rows = [list(map(int, row)) for row in table]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise NotAGroup("table is not square")
    if any(x < 0 or x >= n for r in rows for x in r):
        raise NotAGroup("table entries out of range")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if rows[rows[i][j]][k] != rows[i][rows[j][k]]:
                    raise NotAGroup(f"not associative at ({i}, {j}, {k})")
    identity = None
    for e in range(n):
        if all(rows[e][j] == j and rows[j][e] == j for j in range(n)):
            identity = e
            break
    if identity is None:
        raise NotAGroup("no identity element")
    inverses = []
    for g in range(n):
        inv = [h for h in range(n) if rows[g][h] == identity]
        if len(inv) != 1:
            raise NotAGroup(f"element {g} has no unique inverse")
        inverses.append(inv[0])
    return n, identity, inverses


def function_algebra(table, labels=None) -> FiniteQuantumGroup:
    """The commutative algebra of functions on a finite group.

    Indicator basis, pointwise product, coproduct dual to group
    multiplication, uniform invariant state.
    """
    n, identity, inverses = _check_group_table(table)
    rows = np.asarray(table, dtype=int)
    mult = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        mult[i, i, i] = 1.0
    comult = np.zeros((n, n, n), dtype=complex)
    for s in range(n):
        for t in range(n):
            comult[rows[s, t], s, t] = 1.0
    counit = np.zeros(n, dtype=complex)
    counit[identity] = 1.0
    antipode = np.zeros((n, n), dtype=complex)
    for g in range(n):
        antipode[inverses[g], g] = 1.0
    star = np.eye(n, dtype=complex)
    haar = np.full(n, 1.0 / n, dtype=complex)
    if labels is None:
        labels = [str(i) for i in range(n)]
    return FiniteQuantumGroup(
        dim=n, mult=mult, unit=np.ones(n, dtype=complex), comult=comult,
        counit=counit, antipode=antipode, star=star, haar=haar,
        labels=tuple(f"delta_{x}" for x in labels))


def group_algebra(table, labels=None) -> FiniteQuantumGroup:
    """The group algebra of a finite group.

    Group-like basis, convolution product, point mass at the identity as
    the invariant state.
    """
    n, identity, inverses = _check_group_table(table)
    rows = np.asarray(table, dtype=int)
    mult = np.zeros((n, n, n), dtype=complex)
    for g in range(n):
        for h in range(n):
            mult[g, h, rows[g, h]] = 1.0
    unit = np.zeros(n, dtype=complex)
    unit[identity] = 1.0
    comult = np.zeros((n, n, n), dtype=complex)
    for g in range(n):
        comult[g, g, g] = 1.0
    counit = np.ones(n, dtype=complex)
    antipode = np.zeros((n, n), dtype=complex)
    star = np.zeros((n, n), dtype=complex)
    for g in range(n):
        antipode[inverses[g], g] = 1.0
        star[inverses[g], g] = 1.0
    haar = np.zeros(n, dtype=complex)
    haar[identity] = 1.0
    if labels is None:
        labels = [str(i) for i in range(n)]
    return FiniteQuantumGroup(
        dim=n, mult=mult, unit=unit, comult=comult, counit=counit,
        antipode=antipode, star=star, haar=haar,
        labels=tuple(f"lam_{x}" for x in labels))


# ----------------------------------------------------------------------
# JSON serialization
# ----------------------------------------------------------------------

def _pair(z: complex) -> list[float]:
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def _pairs(arr: np.ndarray):
    if arr.ndim == 1:
        return [_pair(z) for z in arr]
    return [_pairs(sub) for sub in arr]


def _complex_at(obj, path: str) -> complex:
    if (not isinstance(obj, (list, tuple)) or len(obj) != 2
            or not all(isinstance(x, (int, float)) for x in obj)):
        raise ParseError(f"{path}: expected [re, im] pair")
    return complex(float(obj[0]), float(obj[1]))


def _tensor_at(obj, shape: tuple[int, ...], path: str) -> np.ndarray:
    if not shape:
        return _complex_at(obj, path)
    if not isinstance(obj, list) or len(obj) != shape[0]:
        raise ParseError(f"{path}: expected a list of length {shape[0]}")
    out = np.empty(shape, dtype=complex)
    for i, sub in enumerate(obj):
        out[i] = _tensor_at(sub, shape[1:], f"{path}[{i}]")
    return out


def save_dict(group: FiniteQuantumGroup) -> dict:
    doc = {
        "dim": group.dim,
        "mult": _pairs(group.mult),
        "unit": _pairs(group.unit),
        "comult": _pairs(group.comult),
        "counit": _pairs(group.counit),
        "antipode": _pairs(group.antipode),
        "star": _pairs(group.star),
    }
    if group.haar is not None:
        doc["haar"] = _pairs(group.haar)
    if group.labels is not None:
        doc["labels"] = list(group.labels)
    return doc


def save(group: FiniteQuantumGroup) -> str:
    """Canonical JSON text; stable bytes for hashing and round-trips."""
    return json.dumps(save_dict(group), sort_keys=True, separators=(",", ":"))


def load_dict(doc: dict) -> FiniteQuantumGroup:
    if not isinstance(doc, dict):
        raise ParseError("top level: expected a JSON object")
    if "dim" not in doc:
        raise ParseError("missing field: dim")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ParseError("dim: must be a positive integer")
    n = dim
    fields = {"mult": (n, n, n), "unit": (n,), "comult": (n, n, n),
              "counit": (n,), "antipode": (n, n), "star": (n, n)}
    data = {}
    for name, shape in fields.items():
        if name not in doc:
            raise ParseError(f"missing field: {name}")
        data[name] = _tensor_at(doc[name], shape, name)
    haar = None
    if "haar" in doc and doc["haar"] is not None:
        haar = _tensor_at(doc["haar"], (n,), "haar")
    labels = None
    if "labels" in doc and doc["labels"] is not None:
        if not isinstance(doc["labels"], list) or len(doc["labels"]) != n:
            raise ParseError(f"labels: expected a list of {n} strings")
        labels = tuple(str(x) for x in doc["labels"])
    try:
        return FiniteQuantumGroup(dim=n, haar=haar, labels=labels, **data)
    except DimensionMismatch as exc:
        raise ParseError(str(exc)) from exc


def loads(text: str) -> FiniteQuantumGroup:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return load_dict(doc)


def load_path(path) -> FiniteQuantumGroup:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
