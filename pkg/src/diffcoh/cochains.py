"""Cochains and the four differentials of a weighted differential algebra.

A degree-``n`` cochain ``A^{x n} -> V`` is an object array of shape
``(dim A,)*n + (dim V,)``.  Flattened in C order, basis tuples appear in
lexicographic order with the first argument most significant and the
``V`` coordinate fastest.  A :class:`DiffCochain` pairs an algebra part of
degree ``n`` with an operator part of degree ``n - 1``; its coordinate
vector is the algebra part followed by the operator part.

Every differential has a batched form acting on a stack of cochains with a
leading batch axis; :mod:`diffcoh.complexes` assembles matrices from these.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any

import numpy as np

from diffcoh.algebra import (
    DeformedBimodule,
    DiffAlgebra,
    DiffBimodule,
    Identity,
    ValidationReport,
    Violation,
    _check_pair,
    deform_bimodule,
    regular_bimodule,
)
from diffcoh.config import Budget
from diffcoh.errors import (
    BudgetExceededError,
    InternalConsistencyError,
    InvalidInputError,
    UnsupportedOperationError,
)
from diffcoh.linalg import Field, Matrix, is_zero
from diffcoh.tensors import (
    act_left,
    act_right,
    bilinear_substitute,
    postcompose,
    split_product,
    substitute,
    tensordot,
)

log = logging.getLogger(__name__)


class ModuleMode(str, Enum):
    """Which actions the Hochschild differential uses."""

    PLAIN = "plain"
    DEFORMED = "deformed"


@dataclass(frozen=True, eq=False)
class CochainContext:
    """An algebra, a bimodule over it and the limits for working with them."""

    algebra: DiffAlgebra
    module: DiffBimodule
    budget: Budget = Budget()
    cross_check_delta: bool = False

    def __post_init__(self) -> None:
        _check_pair(self.algebra, self.module)

    @classmethod
    def regular(cls, algebra: DiffAlgebra, **kwargs: Any) -> CochainContext:
        return cls(algebra, regular_bimodule(algebra), **kwargs)

    @cached_property
    def deformed(self) -> DeformedBimodule:
        return deform_bimodule(self.algebra, self.module)

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def weight(self):
        return self.algebra.weight

    @property
    def n(self) -> int:
        return self.algebra.dim

    @property
    def m(self) -> int:
        return self.module.dim

    def shape(self, degree: int) -> tuple[int, ...]:
        return (self.n,) * degree + (self.m,)

    def space_dim(self, degree: int) -> int:
        """Dimension of ``C^degree_alg``, which is also that of ``C^degree_do``."""
        if degree < 0:
            return 0
        return self.m * self.n**degree

    def diff_space_dim(self, degree: int) -> int:
        return self.space_dim(degree) + self.space_dim(degree - 1)

    def actions(self, mode: ModuleMode) -> tuple[np.ndarray, np.ndarray]:
        if mode is ModuleMode.DEFORMED:
            return self.deformed.left, self.deformed.right
        return self.module.left, self.module.right


# ---------------------------------------------------------------------------
# Cochains
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cochain:
    """A multilinear map ``A^{x degree} -> V`` by its values on basis tuples."""

    context: CochainContext
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        degree = self.coeffs.ndim - 1
        if degree < 0 or self.coeffs.shape != self.context.shape(degree):
            raise InvalidInputError(
                f"cochain coefficients have shape {self.coeffs.shape}, "
                f"expected {self.context.shape(max(degree, 0))}"
            )

    @property
    def degree(self) -> int:
        return self.coeffs.ndim - 1

    @classmethod
    def zero(cls, context: CochainContext, degree: int) -> Cochain:
        return cls(context, context.field.zeros(context.shape(degree)))

    @classmethod
    def from_vector(cls, context: CochainContext, degree: int, vector: Any) -> Cochain:
        vec = np.asarray(vector, dtype=object)
        if vec.shape != (context.space_dim(degree),):
            raise InvalidInputError(
                f"degree-{degree} cochain needs {context.space_dim(degree)} coordinates, "
                f"got {vec.shape}"
            )
        return cls(context, vec.reshape(context.shape(degree)).copy())

    @classmethod
    def from_values(cls, context: CochainContext, degree: int, values: Any) -> Cochain:
        """Coerce nested lists of scalars (or strings) into a cochain."""
        arr = context.field.array(values)
        if arr.size == 0:
            arr = context.field.zeros(context.shape(degree))
        if arr.shape != context.shape(degree):
            raise InvalidInputError(
                f"degree-{degree} cochain must have shape {context.shape(degree)}, got {arr.shape}"
            )
        return cls(context, arr)

    @classmethod
    def random(
        cls,
        context: CochainContext,
        degree: int,
        rng: np.random.Generator,
        bound: int = 3,
    ) -> Cochain:
        """Integer coefficients drawn uniformly from ``[-bound, bound]``."""
        raw = rng.integers(-bound, bound + 1, size=context.shape(degree))
        return cls(context, context.field.array(raw))

    @classmethod
    def from_matrix(cls, context: CochainContext, matrix: Matrix) -> Cochain:
        """The degree-1 cochain of a linear map ``A -> V`` (images in columns)."""
        if matrix.shape != (context.m, context.n):
            raise InvalidInputError(
                f"linear map must be {context.m} x {context.n}, got {matrix.rows} x {matrix.cols}"
            )
        return cls(context, matrix.entries.T.copy())

    def to_matrix(self) -> Matrix:
        if self.degree != 1:
            raise UnsupportedOperationError("only degree-1 cochains are linear maps")
        return Matrix(self.context.field, self.coeffs.T.copy())

    def vector(self) -> np.ndarray:
        return self.coeffs.reshape(-1).copy()

    def value(self, *indices: int) -> np.ndarray:
        """Value on the basis tuple ``(e_{i_1}, ..., e_{i_n})``."""
        return self.coeffs[tuple(indices)].copy()

    def is_zero(self) -> bool:
        return is_zero(self.coeffs)

    def _like(self, coeffs: np.ndarray) -> Cochain:
        return Cochain(self.context, self.context.field.reduce(coeffs))

    def _check_other(self, other: Cochain) -> None:
        if other.context is not self.context:
            raise InvalidInputError("cochains belong to different contexts")
        if other.degree != self.degree:
            raise InvalidInputError(f"degrees differ: {self.degree} vs {other.degree}")

    def __add__(self, other: Cochain) -> Cochain:
        self._check_other(other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other: Cochain) -> Cochain:
        self._check_other(other)
        return self._like(self.coeffs - other.coeffs)

    def __neg__(self) -> Cochain:
        return self._like(-self.coeffs)

    def __mul__(self, scalar: Any) -> Cochain:
        return self._like(self.coeffs * self.context.field.scalar(scalar))

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cochain):
            return NotImplemented
        return (
            other.context is self.context
            and other.degree == self.degree
            and bool(np.all(self.coeffs == other.coeffs))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class DiffCochain:
    """``(f, g)`` in ``C^n_alg (+) C^{n-1}_do``; ``g`` is None in degree 0."""

    f: Cochain
    g: Cochain | None = None

    def __post_init__(self) -> None:
        if self.f.degree == 0:
            if self.g is not None:
                raise InvalidInputError("a degree-0 cochain has no operator part")
            return
        if self.g is None:
            object.__setattr__(self, "g", Cochain.zero(self.f.context, self.f.degree - 1))
        elif self.g.context is not self.f.context:
            raise InvalidInputError("algebra and operator parts belong to different contexts")
        elif self.g.degree != self.f.degree - 1:
            raise InvalidInputError(
                f"operator part has degree {self.g.degree}, expected {self.f.degree - 1}"
            )

    @property
    def degree(self) -> int:
        return self.f.degree

    @property
    def context(self) -> CochainContext:
        return self.f.context

    @classmethod
    def zero(cls, context: CochainContext, degree: int) -> DiffCochain:
        g = Cochain.zero(context, degree - 1) if degree else None
        return cls(Cochain.zero(context, degree), g)

    @classmethod
    def from_vector(cls, context: CochainContext, degree: int, vector: Any) -> DiffCochain:
        vec = np.asarray(vector, dtype=object)
        if vec.shape != (context.diff_space_dim(degree),):
            raise InvalidInputError(
                f"degree-{degree} pair needs {context.diff_space_dim(degree)} coordinates, "
                f"got {vec.shape}"
            )
        split = context.space_dim(degree)
        f = Cochain.from_vector(context, degree, vec[:split])
        g = Cochain.from_vector(context, degree - 1, vec[split:]) if degree else None
        return cls(f, g)

    @classmethod
    def random(
        cls, context: CochainContext, degree: int, rng: np.random.Generator, bound: int = 3
    ) -> DiffCochain:
        f = Cochain.random(context, degree, rng, bound)
        g = Cochain.random(context, degree - 1, rng, bound) if degree else None
        return cls(f, g)

    def vector(self) -> np.ndarray:
        if self.g is None:
            return self.f.vector()
        return np.concatenate([self.f.vector(), self.g.vector()])

    def is_zero(self) -> bool:
        return self.f.is_zero() and (self.g is None or self.g.is_zero())

    def _map(self, other: DiffCochain | None, op) -> DiffCochain:
        if other is None:
            return DiffCochain(op(self.f), None if self.g is None else op(self.g))
        if other.degree != self.degree:
            raise InvalidInputError(f"degrees differ: {self.degree} vs {other.degree}")
        g = None if self.g is None else op(self.g, other.g)
        return DiffCochain(op(self.f, other.f), g)

    def __add__(self, other: DiffCochain) -> DiffCochain:
        return self._map(other, lambda a, b: a + b)

    def __sub__(self, other: DiffCochain) -> DiffCochain:
        return self._map(other, lambda a, b: a - b)

    def __neg__(self) -> DiffCochain:
        return self._map(None, lambda a: -a)

    def __mul__(self, scalar: Any) -> DiffCochain:
        return self._map(None, lambda a: a * scalar)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiffCochain):
            return NotImplemented
        return self.f == other.f and (self.g is None) == (other.g is None) and (
            self.g is None or self.g == other.g
        )

    __hash__ = None  # type: ignore[assignment]


# ---------------------------------------------------------------------------
# Batched differentials
# ---------------------------------------------------------------------------


def hochschild_batch(
    context: CochainContext, batch: np.ndarray, mode: ModuleMode = ModuleMode.PLAIN
) -> np.ndarray:
    """Hochschild differential of every cochain in *batch* (leading batch axis).

    ``(df)(x_1..x_{k+1}) = x_1 f(x_2..) + sum_s (-1)^s f(.., x_s x_{s+1}, ..)
    + (-1)^{k+1} f(x_1..x_k) x_{k+1}``.
    """
    k = batch.ndim - 2
    left, right = context.actions(mode)
    mult = context.algebra.mult
    out = act_left(left, batch, 1)
    for s in range(1, k + 1):
        term = split_product(batch, mult, s)
        out = out - term if s % 2 else out + term
    last = act_right(right, batch)
    out = out - last if (k + 1) % 2 else out + last
    return context.field.reduce(out)


def _check_subset_budget(context: CochainContext, degree: int) -> None:
    limit = context.budget.max_subset_degree
    if degree > limit:
        raise BudgetExceededError(
            f"delta in degree {degree} enumerates {2**degree - 1} subsets; "
            f"max_subset_degree is {limit}"
        )


def delta_subset_batch(context: CochainContext, batch: np.ndarray) -> np.ndarray:
    """``sum over nonempty slot sets S of lam^{|S|-1} f(d in S) - dV f``."""
    k = batch.ndim - 2
    _check_subset_budget(context, k)
    field = context.field
    D = context.algebra.derivation
    lam = context.weight
    out = -postcompose(batch, context.module.dV)
    for size in range(1, k + 1):
        weight = field.power(lam, size - 1)
        if weight == 0:
            break
        for slots in itertools.combinations(range(1, k + 1), size):
            term = batch
            for s in slots:
                term = substitute(term, D, s)
            out = out + weight * term
    return field.reduce(out)


def delta_tensor_batch(context: CochainContext, batch: np.ndarray) -> np.ndarray:
    """``lam^{-1} (f o (id + lam d)^{(x) k} - f) - dV f``, one slot at a time."""
    field = context.field
    lam = context.weight
    if lam == 0:
        raise UnsupportedOperationError("the closed form of delta needs a nonzero weight")
    k = batch.ndim - 2
    twist = field.reduce(field.identity(context.n) + lam * context.algebra.derivation)
    moved = batch
    for s in range(1, k + 1):
        moved = field.reduce(substitute(moved, twist, s))
    out = (moved - batch) * field.inverse(lam) - postcompose(batch, context.module.dV)
    return field.reduce(out)


def delta_batch(context: CochainContext, batch: np.ndarray, cross_check: bool | None = None):
    """Subset-sum delta, compared with the closed form when cross-checking."""
    out = delta_subset_batch(context, batch)
    check = context.cross_check_delta if cross_check is None else cross_check
    if check and context.weight != 0:
        other = delta_tensor_batch(context, batch)
        if np.any(out != other):
            raise InternalConsistencyError(
                f"delta implementations disagree in degree {batch.ndim - 2}"
            )
    return out


def _split_pairs(context: CochainContext, vectors: np.ndarray, degree: int):
    batch = vectors.shape[0]
    split = context.space_dim(degree)
    f = vectors[:, :split].reshape((batch,) + context.shape(degree))
    g = vectors[:, split:].reshape((batch,) + context.shape(degree - 1)) if degree else None
    return f, g


def diff_batch(
    context: CochainContext,
    vectors: np.ndarray,
    degree: int,
    cross_check: bool | None = None,
) -> np.ndarray:
    """Combined differential on coordinate vectors, shape ``(B, diff_space_dim)``.

    Degree 0: ``v -> (dv, delta v)``; degree ``n >= 1``:
    ``(f, g) -> (df, d_lam g + (-1)^n delta f)``.
    """
    batch = vectors.shape[0]
    f, g = _split_pairs(context, vectors, degree)
    new_f = hochschild_batch(context, f, ModuleMode.PLAIN)
    delta_f = delta_batch(context, f, cross_check)
    if g is None:
        new_g = delta_f
    else:
        new_g = hochschild_batch(context, g, ModuleMode.DEFORMED)
        new_g = new_g + delta_f if degree % 2 == 0 else new_g - delta_f
    return context.field.reduce(
        np.concatenate([new_f.reshape(batch, -1), new_g.reshape(batch, -1)], axis=1)
    )


# ---------------------------------------------------------------------------
# Single-cochain operations
# ---------------------------------------------------------------------------


def _single(cochain: Cochain) -> np.ndarray:
    return cochain.coeffs[np.newaxis]


def hochschild_d(f: Cochain, mode: ModuleMode = ModuleMode.PLAIN) -> Cochain:
    """``d f`` (plain actions) or ``d_lam f`` (deformed actions)."""
    return Cochain(f.context, hochschild_batch(f.context, _single(f), ModuleMode(mode))[0])


def delta_subset(f: Cochain) -> Cochain:
    return Cochain(f.context, delta_subset_batch(f.context, _single(f))[0])


def delta_tensor(f: Cochain) -> Cochain:
    return Cochain(f.context, delta_tensor_batch(f.context, _single(f))[0])


def delta(f: Cochain, cross_check: bool | None = None) -> Cochain:
    return Cochain(f.context, delta_batch(f.context, _single(f), cross_check)[0])


def diff_d(c: DiffCochain, cross_check: bool | None = None) -> DiffCochain:
    ctx = c.context
    out = diff_batch(ctx, c.vector()[np.newaxis], c.degree, cross_check)[0]
    return DiffCochain.from_vector(ctx, c.degree + 1, out)


def is_reduced_cochain(c: DiffCochain) -> bool:
    """Membership in the subcomplex that is zero in degree 0 and ``(f, 0)`` in degree 1."""
    if c.degree == 0:
        return c.is_zero()
    if c.degree == 1:
        return c.g.is_zero()
    return True


def reduced(f: Cochain) -> DiffCochain:
    """The degree-1 reduced cochain ``(f, 0)``."""
    if f.degree != 1:
        raise InvalidInputError("reduced cochains of degree 1 have a degree-1 algebra part")
    return DiffCochain(f, Cochain.zero(f.context, 0))


# ---------------------------------------------------------------------------
# Explicit low-degree cocycle conditions
# ---------------------------------------------------------------------------


def zero_cocycle_conditions(context: CochainContext, v: np.ndarray) -> ValidationReport:
    """``v`` is a 0-cocycle iff ``x v = v x`` for all ``x`` and ``dV v = 0``."""
    field = context.field
    report = ValidationReport("0-cocycle")
    report.extend(
        Identity.CENTRAL,
        field.reduce(tensordot(context.module.left, v, ([2], [0]))),
        field.reduce(tensordot(context.module.right, v, ([2], [0]))),
    )
    if not is_zero(field.reduce(tensordot(context.module.dV, v, ([1], [0])))):
        report.violations.append(Violation(Identity.MODULE_CONSTANT, ()))
    return report


def one_cocycle_conditions(
    context: CochainContext, f: Cochain, v: np.ndarray
) -> ValidationReport:
    """``(f, v)`` is a 1-cocycle iff ``d f = 0`` and
    ``x |- v - v -| x = f(d_A x) - dV f(x)`` for every basis ``x``.
    """
    field = context.field
    report = ValidationReport("1-cocycle")
    _hochschild_part(report, f)
    left, right = context.actions(ModuleMode.DEFORMED)
    lhs = tensordot(left, v, ([2], [0])) - tensordot(right, v, ([2], [0]))
    D = context.algebra.derivation
    rhs = tensordot(D, f.coeffs, ([0], [0])) - postcompose(f.coeffs, context.module.dV)
    report.extend(Identity.OPERATOR_COCYCLE, field.reduce(lhs), field.reduce(rhs))
    return report


def two_cocycle_conditions(context: CochainContext, f: Cochain, g: Cochain) -> ValidationReport:
    """``(f, g)`` is a 2-cocycle iff ``d f = 0`` and for all basis ``x, y``

    ``x |- g(y) - g(xy) + g(x) -| y
    = -lam f(dx, dy) - f(dx, y) - f(x, dy) + dV f(x, y)``.
    """
    field = context.field
    report = ValidationReport("2-cocycle")
    _hochschild_part(report, f)
    left, right = context.actions(ModuleMode.DEFORMED)
    mult, D = context.algebra.mult, context.algebra.derivation
    lhs = (
        tensordot(left, g.coeffs, ([2], [1])).transpose(0, 2, 1)
        - tensordot(mult, g.coeffs, ([2], [0]))
        + tensordot(right, g.coeffs, ([2], [1])).transpose(2, 0, 1)
    )
    rhs = (
        -context.weight * bilinear_substitute(f.coeffs, D, D)
        - substitute(f.coeffs, D, 0)
        - substitute(f.coeffs, D, 1)
        + postcompose(f.coeffs, context.module.dV)
    )
    report.extend(Identity.OPERATOR_COCYCLE, field.reduce(lhs), field.reduce(rhs))
    return report


def _hochschild_part(report: ValidationReport, f: Cochain) -> None:
    df = hochschild_d(f).coeffs
    report.extend(Identity.HOCHSCHILD_COCYCLE, df, np.zeros(df.shape, dtype=object))


def cocycle_conditions(c: DiffCochain) -> ValidationReport:
    """Cocycle verdict for a pair of any degree, with witnesses.

    Degrees 0 to 2 use the explicit identities above; higher degrees read the
    witnesses off the two components of ``d_Diff c``.
    """
    ctx = c.context
    if c.degree == 0:
        return zero_cocycle_conditions(ctx, c.f.coeffs)
    if c.degree == 1:
        return one_cocycle_conditions(ctx, c.f, c.g.coeffs)
    if c.degree == 2:
        return two_cocycle_conditions(ctx, c.f, c.g)
    report = ValidationReport(f"{c.degree}-cocycle")
    image = diff_d(c)
    for identity, part in (
        (Identity.HOCHSCHILD_COCYCLE, image.f.coeffs),
        (Identity.OPERATOR_COCYCLE, image.g.coeffs),
    ):
        report.extend(identity, part, np.zeros(part.shape, dtype=object))
    return report
