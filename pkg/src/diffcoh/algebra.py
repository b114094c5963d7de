"""Weighted differential algebras and their differential bimodules.

An algebra is given by structure constants ``mult[i, j, k]`` (coefficient of
``e_k`` in ``e_i e_j``), a derivation matrix whose column ``j`` holds the
coordinates of ``d(e_j)``, and a weight ``lam``; the derivation must satisfy

    d(xy) = d(x) y + x d(y) + lam d(x) d(y).

A bimodule is given by stacks of action matrices, ``left[i] @ v = e_i v``
and ``right[i] @ v = v e_i``, and its own operator ``dV``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any

import numpy as np

from diffcoh.errors import InvalidInputError
from diffcoh.linalg import (
    Field,
    Matrix,
    columns_matrix,
    inverse,
    is_zero,
    kernel_basis,
    rank,
    solve,
)
from diffcoh.tensors import (
    bilinear_substitute,
    compose_left,
    compose_right,
    evaluate,
    postcompose,
    substitute,
    tensordot,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Validation reports
# ---------------------------------------------------------------------------


class Identity(str, Enum):
    """Named identities checked by the validators."""

    ASSOCIATIVITY = "associativity"
    LEFT_UNIT = "left unit"
    RIGHT_UNIT = "right unit"
    UNIT_DERIVATION = "derivation kills unit"
    LEIBNIZ = "weighted Leibniz"
    LEFT_ACTION = "left action"
    RIGHT_ACTION = "right action"
    BIMODULE = "bimodule compatibility"
    LEFT_DIFFERENTIAL = "left differential module law"
    RIGHT_DIFFERENTIAL = "right differential module law"
    MULTIPLICATIVE = "multiplicative"
    COMMUTES_WITH_DERIVATION = "commutes with derivation"
    PRESERVES_UNIT = "preserves unit"
    CENTRAL = "central element"
    MODULE_CONSTANT = "killed by module operator"
    HOCHSCHILD_COCYCLE = "Hochschild cocycle"
    OPERATOR_COCYCLE = "operator cocycle"


@dataclass(frozen=True)
class Violation:
    """One failed identity at a tuple of basis indices."""

    identity: Identity
    indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"identity": self.identity.value, "indices": list(self.indices)}


@dataclass
class ValidationReport:
    """Outcome of an axiom check: pass iff no violations were recorded."""

    subject: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def failed_identities(self) -> set[Identity]:
        return {v.identity for v in self.violations}

    def extend(self, identity: Identity, lhs: np.ndarray, rhs: np.ndarray, value_axes: int = 1):
        """Record every index tuple where *lhs* and *rhs* differ."""
        self.violations.extend(_mismatches(identity, lhs, rhs, value_axes))

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations],
        }


def _mismatches(
    identity: Identity, lhs: np.ndarray, rhs: np.ndarray, value_axes: int
) -> list[Violation]:
    if lhs.shape != rhs.shape:
        raise InvalidInputError(f"{identity.value}: shapes {lhs.shape} and {rhs.shape} differ")
    differs = np.asarray(lhs != rhs, dtype=bool)
    index_ndim = differs.ndim - value_axes
    if value_axes and differs.size:
        differs = differs.reshape(differs.shape[:index_ndim] + (-1,)).any(axis=-1)
    elif value_axes:
        differs = np.zeros(differs.shape[:index_ndim], dtype=bool)
    return [
        Violation(identity, tuple(int(i) for i in idx)) for idx in np.argwhere(differs)
    ]


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiffAlgebra:
    """Finite-dimensional associative algebra with a weighted derivation.

    Attributes:
        field: Ground field of every scalar below.
        mult: Structure constants, shape ``(n, n, n)``.
        derivation: ``n x n`` matrix of ``d_A``, images in columns.
        weight: The weight ``lam``.
        unit: Coordinates of the unit, or None for a non-unital algebra.
    """

    field: Field
    mult: np.ndarray
    derivation: np.ndarray
    weight: Any = 0
    unit: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.mult.shape[0] if self.mult.ndim else -1
        if self.mult.shape != (n, n, n):
            raise InvalidInputError(f"structure constants must be n x n x n, got {self.mult.shape}")
        if self.derivation.shape != (n, n):
            raise InvalidInputError(
                f"derivation must be {n} x {n}, got {self.derivation.shape}"
            )
        if self.unit is not None and self.unit.shape != (n,):
            raise InvalidInputError(f"unit must have length {n}, got {self.unit.shape}")
        object.__setattr__(self, "weight", self.field.scalar(self.weight))

    @classmethod
    def build(
        cls,
        field: Field,
        mult: Any,
        derivation: Any,
        weight: Any = 0,
        unit: Any = None,
    ) -> DiffAlgebra:
        """Coerce nested lists (or arrays) of scalars into a DiffAlgebra."""
        mult_arr = field.array(mult)
        n = mult_arr.shape[0] if mult_arr.ndim else 0
        if mult_arr.size == 0:
            mult_arr = field.zeros((n, n, n))
        deriv = field.array(derivation)
        if deriv.size == 0:
            deriv = field.zeros((n, n))
        return cls(
            field,
            mult_arr,
            deriv,
            weight,
            None if unit is None else field.array(unit).reshape(n),
        )

    @property
    def dim(self) -> int:
        return self.mult.shape[0]

    @property
    def unital(self) -> bool:
        return self.unit is not None

    @cached_property
    def left_actions(self) -> np.ndarray:
        """``left_actions[i]`` is the matrix of ``y -> e_i y``."""
        return self.mult.transpose(0, 2, 1).copy()

    @cached_property
    def right_actions(self) -> np.ndarray:
        """``right_actions[j]`` is the matrix of ``x -> x e_j``."""
        return self.mult.transpose(1, 2, 0).copy()

    @property
    def derivation_matrix(self) -> Matrix:
        return Matrix(self.field, self.derivation)

    def multiply(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.field.reduce(evaluate(self.mult, x, y))

    def derive(self, x: np.ndarray) -> np.ndarray:
        return self.derivation_matrix @ x

    def basis_vector(self, i: int) -> np.ndarray:
        vec = self.field.zeros(self.dim)
        vec[i] = 1
        return vec

    def with_unit(self) -> DiffAlgebra:
        """Same data with the unit searched for when none is recorded."""
        if self.unital:
            return self
        return DiffAlgebra(
            self.field,
            self.mult,
            self.derivation,
            self.weight,
            find_unit(self.field, self.mult),
        )


@dataclass(frozen=True, eq=False)
class DiffBimodule:
    """Differential bimodule over some DiffAlgebra of dimension ``n``.

    Attributes:
        left: Shape ``(n, m, m)``; ``left[i] @ v = e_i v``.
        right: Shape ``(n, m, m)``; ``right[i] @ v = v e_i``.
        dV: ``m x m`` matrix of the module operator.
    """

    field: Field
    left: np.ndarray
    right: np.ndarray
    dV: np.ndarray

    def __post_init__(self) -> None:
        if self.left.ndim != 3 or self.left.shape != self.right.shape:
            raise InvalidInputError(
                f"action tensors must share a shape (n, m, m), got "
                f"{self.left.shape} and {self.right.shape}"
            )
        _, m, m2 = self.left.shape
        if m != m2 or self.dV.shape != (m, m):
            raise InvalidInputError(
                f"module operator must be {m} x {m}, got {self.dV.shape}"
            )

    @classmethod
    def build(
        cls, field: Field, algebra_dim: int, dim: int, left: Any, right: Any, dV: Any
    ) -> DiffBimodule:
        shape = (algebra_dim, dim, dim)
        arrays = []
        for name, data, expected in (
            ("left", left, shape),
            ("right", right, shape),
            ("dV", dV, (dim, dim)),
        ):
            arr = field.array(data)
            if arr.size == 0:
                arr = field.zeros(expected)
            if arr.shape != expected:
                raise InvalidInputError(f"{name} must have shape {expected}, got {arr.shape}")
            arrays.append(arr)
        return cls(field, *arrays)

    @property
    def dim(self) -> int:
        return self.dV.shape[0]

    @property
    def algebra_dim(self) -> int:
        return self.left.shape[0]

    def act_left(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.field.reduce(tensordot(tensordot(x, self.left, ([0], [0])), v, ([1], [0])))

    def act_right(self, v: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.field.reduce(tensordot(tensordot(x, self.right, ([0], [0])), v, ([1], [0])))


@dataclass(frozen=True, eq=False)
class DeformedBimodule:
    """The bimodule ``V_lam``: actions twisted through ``x -> x + lam d_A(x)``."""

    base: DiffBimodule
    left: np.ndarray
    right: np.ndarray

    @property
    def field(self) -> Field:
        return self.base.field

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def dV(self) -> np.ndarray:
        return self.base.dV

    def as_bimodule(self) -> DiffBimodule:
        return DiffBimodule(self.base.field, self.left, self.right, self.base.dV)


def _check_pair(A: DiffAlgebra, V: DiffBimodule) -> None:
    if A.field != V.field:
        raise InvalidInputError(f"field mismatch: {A.field.name} vs {V.field.name}")
    if V.algebra_dim != A.dim:
        raise InvalidInputError(
            f"bimodule is over a {V.algebra_dim}-dimensional algebra, expected {A.dim}"
        )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _stack_times(stack: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """``[S_i @ M for i]``."""
    return tensordot(stack, matrix, ([2], [0]))


def _times_stack(matrix: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """``[M @ S_i for i]``."""
    return tensordot(matrix, stack, ([1], [1])).transpose(1, 0, 2)


def _pair_products(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """``out[i, j] = first[i] @ second[j]``."""
    return tensordot(first, second, ([2], [1])).transpose(0, 2, 1, 3)


def _combine(coefficients: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """``out[i] = sum_k coefficients[k, i] * stack[k]``."""
    return tensordot(coefficients, stack, ([0], [0]))


def validate_diff_algebra(A: DiffAlgebra) -> ValidationReport:
    """Check associativity, the unit axioms and the weighted Leibniz rule."""
    f = A.field
    c, D, lam = A.mult, A.derivation, A.weight
    report = ValidationReport("algebra")

    report.extend(
        Identity.ASSOCIATIVITY,
        f.reduce(compose_left(c, c)),
        f.reduce(compose_right(c, c)),
    )

    if A.unital:
        eye = f.identity(A.dim)
        report.extend(Identity.LEFT_UNIT, f.reduce(tensordot(A.unit, c, ([0], [0]))), eye)
        report.extend(Identity.RIGHT_UNIT, f.reduce(tensordot(A.unit, c, ([0], [1]))), eye)
        if not is_zero(A.derive(A.unit)):
            report.violations.append(Violation(Identity.UNIT_DERIVATION, ()))

    lhs = postcompose(c, D)
    rhs = substitute(c, D, 0) + substitute(c, D, 1) + lam * bilinear_substitute(c, D, D)
    report.extend(Identity.LEIBNIZ, f.reduce(lhs), f.reduce(rhs))

    log.debug("validated %d-dim algebra: %d violations", A.dim, len(report.violations))
    return report


def validate_diff_bimodule(A: DiffAlgebra, V: DiffBimodule) -> ValidationReport:
    """Check the bimodule axioms and both weighted Leibniz laws for ``dV``."""
    _check_pair(A, V)
    f = A.field
    c, D, lam = A.mult, A.derivation, A.weight
    L, R, dV = V.left, V.right, V.dV
    report = ValidationReport("bimodule")

    # e_i (e_j v) = (e_i e_j) v
    report.extend(
        Identity.LEFT_ACTION,
        f.reduce(_pair_products(L, L)),
        f.reduce(tensordot(c, L, ([2], [0]))),
        value_axes=2,
    )
    # (v e_i) e_j = v (e_i e_j)
    report.extend(
        Identity.RIGHT_ACTION,
        f.reduce(_pair_products(R, R).transpose(1, 0, 2, 3)),
        f.reduce(tensordot(c, R, ([2], [0]))),
        value_axes=2,
    )
    # (e_i v) e_j = e_i (v e_j)
    report.extend(
        Identity.BIMODULE,
        f.reduce(_pair_products(R, L).transpose(1, 0, 2, 3)),
        f.reduce(_pair_products(L, R)),
        value_axes=2,
    )

    dL = _combine(D, L)
    dR = _combine(D, R)
    report.extend(
        Identity.LEFT_DIFFERENTIAL,
        f.reduce(_times_stack(dV, L)),
        f.reduce(dL + _stack_times(L, dV) + lam * _stack_times(dL, dV)),
        value_axes=2,
    )
    report.extend(
        Identity.RIGHT_DIFFERENTIAL,
        f.reduce(_times_stack(dV, R)),
        f.reduce(dR + _stack_times(R, dV) + lam * _stack_times(dR, dV)),
        value_axes=2,
    )

    log.debug(
        "validated %d-dim bimodule over %d-dim algebra: %d violations",
        V.dim,
        A.dim,
        len(report.violations),
    )
    return report


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def regular_bimodule(A: DiffAlgebra) -> DiffBimodule:
    """``A`` acting on itself by multiplication, with ``dV = d_A``."""
    return DiffBimodule(A.field, A.left_actions, A.right_actions, A.derivation.copy())


def trivial_bimodule(A: DiffAlgebra, dV: Any) -> DiffBimodule:
    """Zero left and right actions on a space carrying the operator *dV*."""
    op = A.field.array(dV)
    m = op.shape[0] if op.ndim == 2 else 0
    if op.size == 0:
        op = A.field.zeros((m, m))
    zeros = A.field.zeros((A.dim, m, m))
    return DiffBimodule(A.field, zeros, zeros.copy(), op)


def deform_bimodule(A: DiffAlgebra, V: DiffBimodule) -> DeformedBimodule:
    """Build ``V_lam`` with ``x |- v = (x + lam d_A x) v`` and the mirrored right action."""
    _check_pair(A, V)
    f = A.field
    twist = f.reduce(f.identity(A.dim) + A.weight * A.derivation)
    return DeformedBimodule(
        V,
        f.reduce(_combine(twist, V.left)),
        f.reduce(_combine(twist, V.right)),
    )


def find_unit(field: Field, mult: np.ndarray) -> np.ndarray | None:
    """Solve for a two-sided unit of the structure constants, if one exists."""
    n = mult.shape[0]
    if n == 0:
        return None
    eye = field.identity(n).reshape(-1)
    system = np.concatenate(
        [mult.transpose(1, 2, 0).reshape(n * n, n), mult.transpose(0, 2, 1).reshape(n * n, n)]
    )
    return solve(Matrix(field, system), np.concatenate([eye, eye]))


def square_zero_extension(
    A: DiffAlgebra,
    V: DiffBimodule,
    psi: np.ndarray | None = None,
    chi: np.ndarray | None = None,
) -> DiffAlgebra:
    """The algebra on ``A (+) V`` with product ``(xy, xv + uy + psi(x, y))``.

    The derivation is ``(x, v) -> (d_A x, chi(x) + dV v)``.  *psi* has shape
    ``(n, n, m)`` and *chi* shape ``(n, m)``, both cochain coefficient
    layouts; omitted they are zero and the result is the semidirect product.
    No axiom is checked here.
    """
    _check_pair(A, V)
    f = A.field
    n, m = A.dim, V.dim
    N = n + m
    mult = f.zeros((N, N, N))
    mult[:n, :n, :n] = A.mult
    mult[:n, n:, n:] = V.left.transpose(0, 2, 1)
    mult[n:, :n, n:] = V.right.transpose(2, 0, 1)
    if psi is not None:
        mult[:n, :n, n:] = psi
    deriv = f.zeros((N, N))
    deriv[:n, :n] = A.derivation
    deriv[n:, n:] = V.dV
    if chi is not None:
        deriv[n:, :n] = chi.T
    return DiffAlgebra(f, mult, deriv, A.weight, find_unit(f, mult))


def semidirect_product(A: DiffAlgebra, V: DiffBimodule) -> DiffAlgebra:
    """``A (x) V`` with ``(x, u)(y, v) = (xy, xv + uy)`` and ``d_A (+) dV``."""
    return square_zero_extension(A, V)


def canonical_projection(field: Field, n: int, m: int) -> Matrix:
    """``A (+) V -> A``, forgetting the module block."""
    return Matrix(field, np.concatenate([field.identity(n), field.zeros((n, m))], axis=1))


def canonical_inclusion(field: Field, n: int, m: int) -> Matrix:
    """``V -> A (+) V``."""
    return Matrix(field, np.concatenate([field.zeros((n, m)), field.identity(m)], axis=0))


def canonical_section(field: Field, n: int, m: int) -> Matrix:
    """``x -> (x, 0)``."""
    return Matrix(field, np.concatenate([field.identity(n), field.zeros((m, n))], axis=0))


# ---------------------------------------------------------------------------
# Homomorphisms, kernels and quotients
# ---------------------------------------------------------------------------


def is_homomorphism(source: DiffAlgebra, target: DiffAlgebra, phi: Matrix) -> ValidationReport:
    """Check that *phi* (``target.dim x source.dim``) is a differential-algebra map.

    When both algebras are unital the unit must be preserved as well.
    """
    if source.field != target.field or phi.field != source.field:
        raise InvalidInputError("field mismatch in homomorphism check")
    if phi.shape != (target.dim, source.dim):
        raise InvalidInputError(
            f"map must be {target.dim} x {source.dim}, got {phi.rows} x {phi.cols}"
        )
    if source.weight != target.weight:
        raise InvalidInputError(
            f"weights differ: {source.weight} vs {target.weight}"
        )
    f = source.field
    M = phi.entries
    report = ValidationReport("homomorphism")
    report.extend(
        Identity.MULTIPLICATIVE,
        f.reduce(postcompose(source.mult, M)),
        f.reduce(bilinear_substitute(target.mult, M, M)),
    )
    report.extend(
        Identity.COMMUTES_WITH_DERIVATION,
        (phi @ source.derivation_matrix).entries.T,
        (target.derivation_matrix @ phi).entries.T,
    )
    if source.unital and target.unital and np.any(phi @ source.unit != target.unit):
        report.violations.append(Violation(Identity.PRESERVES_UNIT, ()))
    return report


def is_isomorphism(source: DiffAlgebra, target: DiffAlgebra, phi: Matrix) -> bool:
    return (
        source.dim == target.dim
        and rank(phi) == source.dim
        and is_homomorphism(source, target, phi).passed
    )


def _coordinates(basis: Matrix, vector: np.ndarray) -> np.ndarray:
    coords = solve(basis, vector)
    if coords is None:
        raise InvalidInputError("vector does not lie in the kernel")
    return coords


def kernel_bimodule(
    hat_A: DiffAlgebra,
    base: DiffAlgebra,
    projection: Matrix,
    section: Matrix | None = None,
) -> DiffBimodule:
    """The bimodule induced on ``ker(projection)`` by a square-zero extension.

    ``base`` acts on the kernel through a linear *section* of the projection;
    when none is given one is computed from echelon-form preimages.  Kernel
    coordinates are with respect to ``kernel_basis(projection)``.
    """
    check = is_homomorphism(hat_A, base, projection)
    if not check.passed:
        first = check.violations[0]
        raise InvalidInputError(
            f"projection is not a homomorphism ({first.identity.value})",
            witness=first.indices,
        )
    f = hat_A.field
    if rank(projection) != base.dim:
        raise InvalidInputError("projection is not surjective")

    K = columns_matrix(f, kernel_basis(projection), hat_A.dim)
    products = f.reduce(bilinear_substitute(hat_A.mult, K.entries, K.entries))
    nonzero = np.argwhere(np.asarray(products != 0, dtype=bool).any(axis=-1))
    if nonzero.size:
        raise InvalidInputError(
            "kernel is not square-zero", witness=tuple(int(i) for i in nonzero[0])
        )

    S = section if section is not None else compute_section(projection)
    if S.shape != (hat_A.dim, base.dim) or not (projection @ S) == Matrix.identity(f, base.dim):
        raise InvalidInputError("section is not a right inverse of the projection")

    m = K.cols
    left = f.zeros((base.dim, m, m))
    right = f.zeros((base.dim, m, m))
    acted_left = f.reduce(bilinear_substitute(hat_A.mult, S.entries, K.entries))
    acted_right = f.reduce(bilinear_substitute(hat_A.mult, K.entries, S.entries))
    for i in range(base.dim):
        for b in range(m):
            left[i, :, b] = _coordinates(K, acted_left[i, b])
            right[i, :, b] = _coordinates(K, acted_right[b, i])
    dV = f.zeros((m, m))
    for b in range(m):
        dV[:, b] = _coordinates(K, hat_A.derive(K.column(b)))
    log.debug("kernel bimodule: dim %d over %d-dim base", m, base.dim)
    return DiffBimodule(f, left, right, dV)


def compute_section(projection: Matrix) -> Matrix:
    """A linear right inverse of a surjective matrix, column by column."""
    f = projection.field
    columns = []
    for i in range(projection.rows):
        target = f.zeros(projection.rows)
        target[i] = 1
        x = solve(projection, target)
        if x is None:
            raise InvalidInputError("projection is not surjective")
        columns.append(x)
    return columns_matrix(f, columns, projection.cols)


def quotient_algebra(hat_A: DiffAlgebra, projection: Matrix, section: Matrix) -> DiffAlgebra:
    """Structure induced on the image of *projection*: ``x * y = p(s(x) s(y))``."""
    f = hat_A.field
    P, S = projection.entries, section.entries
    mult = f.reduce(postcompose(bilinear_substitute(hat_A.mult, S, S), P))
    deriv = (projection @ Matrix(f, hat_A.derivation) @ section).entries
    unit = projection @ hat_A.unit if hat_A.unital else find_unit(f, mult)
    return DiffAlgebra(f, mult, deriv, hat_A.weight, unit)


def change_basis(A: DiffAlgebra, P: Matrix) -> DiffAlgebra:
    """Rewrite *A* in the basis given by the columns of the invertible matrix *P*."""
    f = A.field
    P_inv = inverse(P)
    mult = f.reduce(postcompose(bilinear_substitute(A.mult, P.entries, P.entries), P_inv.entries))
    deriv = (P_inv @ A.derivation_matrix @ P).entries
    unit = P_inv @ A.unit if A.unital else None
    return DiffAlgebra(f, mult, deriv, A.weight, unit)


def change_bimodule_basis(V: DiffBimodule, P: Matrix) -> DiffBimodule:
    """Re-index the actions of *V* after :func:`change_basis` of its algebra by *P*."""
    f = V.field
    return DiffBimodule(
        f,
        f.reduce(_combine(P.entries, V.left)),
        f.reduce(_combine(P.entries, V.right)),
        V.dV.copy(),
    )
