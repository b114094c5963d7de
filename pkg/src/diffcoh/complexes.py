"""Matrix form of the cochain complexes and their cohomology.

Four complexes share one carrier: the Hochschild complex (``alg``), the
operator complex with deformed coefficients (``do``), the combined complex
(``diff``) and its reduced subcomplex (``diff_reduced``).  Differentials are
assembled by applying the batched operators of :mod:`diffcoh.cochains` to an
identity batch, so column ``j`` of a matrix is the image of the ``j``-th
coordinate cochain.
"""

from __future__ import annotations

import logging
import weakref
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from diffcoh.cochains import (
    CochainContext,
    ModuleMode,
    delta_batch,
    diff_batch,
    hochschild_batch,
)
from diffcoh.errors import BudgetExceededError, InternalConsistencyError, InvalidInputError
from diffcoh.linalg import (
    Field,
    Matrix,
    column_space_representatives,
    columns_matrix,
    kernel_basis,
    rank,
    solve,
)

log = logging.getLogger(__name__)


class ComplexKind(str, Enum):
    """The four complexes built from one (algebra, bimodule) pair."""

    ALG = "alg"
    DO = "do"
    DIFF = "diff"
    DIFF_REDUCED = "diff_reduced"

    @property
    def label(self) -> str:
        return {
            ComplexKind.ALG: "HH",
            ComplexKind.DO: "H_do",
            ComplexKind.DIFF: "H_Diff",
            ComplexKind.DIFF_REDUCED: "H~_Diff",
        }[self]


ALL_KINDS = tuple(ComplexKind)


def cochain_dim(context: CochainContext, kind: ComplexKind, degree: int) -> int:
    """Dimension of the degree-*degree* cochain space of *kind*."""
    if degree < 0:
        return 0
    if kind in (ComplexKind.ALG, ComplexKind.DO):
        return context.space_dim(degree)
    if kind is ComplexKind.DIFF:
        return context.diff_space_dim(degree)
    if degree == 0:
        return 0
    if degree == 1:
        return context.space_dim(1)
    return context.diff_space_dim(degree)


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

_matrix_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _check_budget(context: CochainContext, kind: ComplexKind, degree: int) -> None:
    budget = context.budget
    if degree > budget.max_degree:
        raise BudgetExceededError(
            f"degree {degree} exceeds max_degree {budget.max_degree}"
        )
    for d in (degree, degree + 1):
        size = cochain_dim(context, kind, d)
        if size > budget.max_columns:
            raise BudgetExceededError(
                f"{kind.value} cochains of degree {d} have {size} coordinates; "
                f"max_columns is {budget.max_columns}"
            )


def differential_matrix(context: CochainContext, kind: ComplexKind, degree: int) -> Matrix:
    """Matrix of the differential from degree *degree* to *degree* + 1."""
    cache = _matrix_cache.setdefault(context, {})
    key = (kind, degree)
    if key in cache:
        return cache[key]

    field = context.field
    rows = cochain_dim(context, kind, degree + 1)
    cols = cochain_dim(context, kind, degree)
    if cols == 0 or rows == 0:
        matrix = Matrix.zeros(field, rows, cols)
    else:
        eye = field.identity(cols)
        if kind in (ComplexKind.ALG, ComplexKind.DO):
            mode = ModuleMode.PLAIN if kind is ComplexKind.ALG else ModuleMode.DEFORMED
            batch = eye.reshape((cols,) + context.shape(degree))
            images = hochschild_batch(context, batch, mode).reshape(cols, rows)
        elif kind is ComplexKind.DIFF_REDUCED and degree == 1:
            padded = np.concatenate([eye, field.zeros((cols, context.m))], axis=1)
            images = diff_batch(context, padded, 1)
        else:
            images = diff_batch(context, eye, degree)
        matrix = Matrix(field, images.T.copy())

    log.debug("assembled %s d^%d: %dx%d", kind.value, degree, rows, cols)
    cache[key] = matrix
    return matrix


@dataclass(frozen=True, eq=False)
class ComplexSlice:
    """The differentials into and out of one degree of a complex."""

    kind: ComplexKind
    degree: int
    in_matrix: Matrix
    out_matrix: Matrix

    @property
    def dim(self) -> int:
        return self.out_matrix.cols


def assemble(context: CochainContext, kind: ComplexKind, degree: int) -> ComplexSlice:
    """Both differentials around *degree*, with ``out @ in = 0`` verified."""
    kind = ComplexKind(kind)
    if degree < 0:
        raise InvalidInputError(f"negative degree {degree}")
    _check_budget(context, kind, degree)
    d_in = differential_matrix(context, kind, degree - 1)
    d_out = differential_matrix(context, kind, degree)
    if not (d_out @ d_in).is_zero():
        raise InternalConsistencyError(
            f"{kind.value} differential does not square to zero at degree {degree}"
        )
    return ComplexSlice(kind, degree, d_in, d_out)


# ---------------------------------------------------------------------------
# Cohomology groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CohomologyGroup:
    """Cohomology in one degree: dimension, ranks and chosen representatives.

    Representatives are kernel basis vectors of the outgoing differential,
    kept greedily when independent modulo the image of the incoming one.
    """

    slice: ComplexSlice
    rank_in: int
    rank_out: int
    representatives: list[np.ndarray]

    @property
    def kind(self) -> ComplexKind:
        return self.slice.kind

    @property
    def degree(self) -> int:
        return self.slice.degree

    @property
    def field(self) -> Field:
        return self.slice.out_matrix.field

    @property
    def dim(self) -> int:
        return len(self.representatives)

    @property
    def cochain_dim(self) -> int:
        return self.slice.dim

    @cached_property
    def _image_columns(self) -> list[np.ndarray]:
        m = self.slice.in_matrix
        return [m.column(j) for j in range(m.cols)]

    @cached_property
    def _reduction_matrix(self) -> Matrix:
        return columns_matrix(
            self.field, [*self._image_columns, *self.representatives], self.cochain_dim
        )

    def is_cocycle(self, vector: np.ndarray) -> bool:
        return not np.any(self.slice.out_matrix @ vector != 0)

    def coordinates(self, vector: np.ndarray) -> np.ndarray:
        """Coordinates of the class of a cocycle against the representatives."""
        return class_coordinates(self, vector)

    def is_coboundary(self, vector: np.ndarray) -> bool:
        return not np.any(self.coordinates(vector) != 0)

    def preimage(self, vector: np.ndarray) -> np.ndarray | None:
        """Some ``x`` with ``d x = vector``, or None."""
        return coboundary_preimage(self.slice, vector)


def compute_group(context: CochainContext, kind: ComplexKind, degree: int) -> CohomologyGroup:
    sl = assemble(context, kind, degree)
    field = context.field
    rank_in = rank(sl.in_matrix)
    kernel = kernel_basis(sl.out_matrix)
    rank_out = sl.dim - len(kernel)
    image = [sl.in_matrix.column(j) for j in range(sl.in_matrix.cols)]
    chosen = column_space_representatives(field, image, kernel, sl.dim)
    reps = [kernel[i] for i in chosen]
    expected = len(kernel) - rank_in
    if len(reps) != expected:
        raise InternalConsistencyError(
            f"{kind.value} degree {degree}: {len(reps)} representatives, expected {expected}"
        )
    log.debug(
        "%s^%d: dim C=%d, rank in=%d, rank out=%d, dim H=%d",
        kind.label,
        degree,
        sl.dim,
        rank_in,
        rank_out,
        len(reps),
    )
    return CohomologyGroup(sl, rank_in, rank_out, reps)


def class_coordinates(group: CohomologyGroup, cocycle: np.ndarray) -> np.ndarray:
    """Solve ``cocycle = d x + sum a_i rep_i`` and return the ``a_i``."""
    if not group.is_cocycle(cocycle):
        raise InvalidInputError(
            f"vector is not a {group.kind.value} cocycle in degree {group.degree}"
        )
    x = solve(group._reduction_matrix, np.asarray(cocycle, dtype=object))
    if x is None:
        raise InternalConsistencyError(
            f"{group.kind.value} cocycle in degree {group.degree} does not reduce"
        )
    return x[len(group._image_columns) :]


def coboundary_preimage(sl: ComplexSlice, target: np.ndarray) -> np.ndarray | None:
    """Solve ``d x = target`` for the incoming differential of *sl*."""
    return solve(sl.in_matrix, np.asarray(target, dtype=object))


@dataclass(frozen=True)
class EulerCheck:
    """Alternating sums over a window ``0..N`` of one complex.

    ``sum (-1)^n dim H^n = sum (-1)^n dim C^n - (-1)^N rank d^N``; the only
    edge term is the outgoing rank at the top of the window.
    """

    kind: ComplexKind
    cochain_sum: int
    cohomology_sum: int
    edge_rank: int
    top_degree: int

    @property
    def holds(self) -> bool:
        sign = -1 if self.top_degree % 2 else 1
        return self.cohomology_sum == self.cochain_sum - sign * self.edge_rank


def euler_characteristic_check(groups: list[CohomologyGroup]) -> EulerCheck:
    """Check that ranks of adjacent slices agree, via the alternating sums."""
    if not groups:
        raise InvalidInputError("no cohomology groups given")
    ordered = sorted(groups, key=lambda g: g.degree)
    if [g.degree for g in ordered] != list(range(len(ordered))):
        raise InvalidInputError("groups must cover degrees 0..N without gaps")
    sign = lambda n: -1 if n % 2 else 1  # noqa: E731
    return EulerCheck(
        kind=ordered[0].kind,
        cochain_sum=sum(sign(g.degree) * g.cochain_dim for g in ordered),
        cohomology_sum=sum(sign(g.degree) * g.dim for g in ordered),
        edge_rank=ordered[-1].rank_out,
        top_degree=ordered[-1].degree,
    )


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class CohomologyReport:
    """Cohomology of several complexes over the degree window ``0..max_degree``."""

    field: Field
    weight: object
    max_degree: int
    groups: dict[ComplexKind, list[CohomologyGroup]]
    les: LesReport | None = None

    @property
    def heuristic(self) -> bool:
        return self.field.is_prime_field

    def dims(self, kind: ComplexKind) -> list[int]:
        return [g.dim for g in self.groups[ComplexKind(kind)]]

    def dim(self, kind: ComplexKind, degree: int) -> int:
        return self.groups[ComplexKind(kind)][degree].dim

    def group(self, kind: ComplexKind, degree: int) -> CohomologyGroup:
        return self.groups[ComplexKind(kind)][degree]

    def to_dict(self, representatives: bool = False) -> dict:
        fmt = self.field.format
        out: dict = {
            "field": self.field.descriptor(),
            "weight": fmt(self.weight),
            "max_degree": self.max_degree,
            "heuristic": self.heuristic,
            "dims": {kind.value: self.dims(kind) for kind in self.groups},
        }
        if representatives:
            out["representatives"] = {
                kind.value: [
                    [[fmt(x) for x in rep] for rep in g.representatives]
                    for g in groups
                ]
                for kind, groups in self.groups.items()
            }
        if self.les is not None:
            out["les"] = self.les.to_dict()
        return out


def cohomology_dims(
    context: CochainContext,
    max_degree: int,
    kinds: tuple[ComplexKind, ...] = ALL_KINDS,
    les: bool = False,
) -> CohomologyReport:
    """Cohomology of each requested complex in degrees ``0..max_degree``."""
    groups = {}
    for kind in map(ComplexKind, kinds):
        groups[kind] = [compute_group(context, kind, n) for n in range(max_degree + 1)]
    if ComplexKind.DIFF in groups and ComplexKind.DIFF_REDUCED in groups:
        for n in range(3, max_degree + 1):
            full = groups[ComplexKind.DIFF][n].dim
            red = groups[ComplexKind.DIFF_REDUCED][n].dim
            if full != red:
                raise InternalConsistencyError(
                    f"reduced and full cohomology differ in degree {n}: {red} vs {full}"
                )
    report = CohomologyReport(context.field, context.weight, max_degree, groups)
    if les:
        report.les = les_check(context, max_degree, groups)
    return report


# ---------------------------------------------------------------------------
# Long exact sequence
# ---------------------------------------------------------------------------


@dataclass
class LesNode:
    """One group of the long exact sequence with its neighbouring maps."""

    label: str
    degree: int
    dim: int
    rank_in: int
    rank_out: int | None
    compositions_vanish: bool | None

    @property
    def checked(self) -> bool:
        return self.rank_out is not None

    @property
    def exact(self) -> bool | None:
        if not self.checked:
            return None
        return bool(self.compositions_vanish) and self.rank_in + self.rank_out == self.dim

    def to_dict(self) -> dict:
        return {
            "group": self.label,
            "degree": self.degree,
            "dim": self.dim,
            "rank_in": self.rank_in,
            "rank_out": self.rank_out,
            "exact": self.exact,
        }


@dataclass
class LesReport:
    """Exactness verdicts for ``0 -> H^0_Diff -> HH^0 -> H^0_do -> H^1_Diff -> ...``."""

    max_degree: int
    nodes: list[LesNode] = field(default_factory=list)
    connecting_consistent: bool = True
    maps: dict[str, Matrix] = field(default_factory=dict, repr=False)

    @property
    def exact(self) -> bool:
        return self.connecting_consistent and all(
            node.exact for node in self.nodes if node.checked
        )

    def to_dict(self) -> dict:
        return {
            "window": [0, self.max_degree],
            "exact": self.exact,
            "connecting_consistent": self.connecting_consistent,
            "nodes": [node.to_dict() for node in self.nodes],
        }


def _induced(field: Field, source: CohomologyGroup, target: CohomologyGroup, lift) -> Matrix:
    columns = [target.coordinates(lift(rep)) for rep in source.representatives]
    return columns_matrix(field, columns, target.dim)


def les_check(
    context: CochainContext,
    max_degree: int,
    groups: dict[ComplexKind, list[CohomologyGroup]] | None = None,
) -> LesReport:
    """Build the induced maps on representatives and check exactness in the window.

    ``iota(g) = (0, g)``, ``pi(f, g) = f`` and the connecting map is
    ``(-1)^n delta``.  The last operator group ``H^N_do`` would need
    ``H^{N+1}_Diff`` and is reported unchecked.
    """
    groups = dict(groups or {})
    for kind in (ComplexKind.ALG, ComplexKind.DO, ComplexKind.DIFF):
        if kind not in groups or len(groups[kind]) <= max_degree:
            groups[kind] = [compute_group(context, kind, n) for n in range(max_degree + 1)]
    field = context.field
    H_alg, H_do, H_diff = (groups[k] for k in (ComplexKind.ALG, ComplexKind.DO, ComplexKind.DIFF))
    report = LesReport(max_degree)

    def connecting(n: int):
        sign = -1 if n % 2 else 1

        def lift(f: np.ndarray) -> np.ndarray:
            batch = f.reshape((1,) + context.shape(n))
            return field.reduce(sign * delta_batch(context, batch)[0].reshape(-1))

        return lift

    def project(n: int):
        split = context.space_dim(n)
        return lambda v: v[:split]

    def include(n: int):
        split = context.space_dim(n)
        return lambda g: np.concatenate([field.zeros(split), g])

    pis, deltas, iotas = [], [], [None]
    for n in range(max_degree + 1):
        pis.append(_induced(field, H_diff[n], H_alg[n], project(n)))
        deltas.append(_induced(field, H_alg[n], H_do[n], connecting(n)))
        if n >= 1:
            iotas.append(_induced(field, H_do[n - 1], H_diff[n], include(n)))
        report.maps[f"pi^{n}"] = pis[n]
        report.maps[f"delta^{n}"] = deltas[n]
        if n >= 1:
            report.maps[f"iota^{n}"] = iotas[n]

    def vanishes(first: Matrix | None, second: Matrix | None) -> bool:
        if first is None or second is None:
            return True
        return (second @ first).is_zero()

    for n in range(max_degree + 1):
        iota_n = iotas[n]
        report.nodes.append(
            LesNode(
                ComplexKind.DIFF.label,
                n,
                H_diff[n].dim,
                rank(iota_n) if iota_n is not None else 0,
                rank(pis[n]),
                vanishes(iota_n, pis[n]),
            )
        )
        report.nodes.append(
            LesNode(
                ComplexKind.ALG.label,
                n,
                H_alg[n].dim,
                rank(pis[n]),
                rank(deltas[n]),
                vanishes(pis[n], deltas[n]),
            )
        )
        iota_next = iotas[n + 1] if n + 1 <= max_degree else None
        report.nodes.append(
            LesNode(
                ComplexKind.DO.label,
                n,
                H_do[n].dim,
                rank(deltas[n]),
                rank(iota_next) if iota_next is not None else None,
                vanishes(deltas[n], iota_next) if iota_next is not None else None,
            )
        )

    report.connecting_consistent = _connecting_matches_differential(context, H_alg, max_degree)
    log.debug("long exact sequence through degree %d: exact=%s", max_degree, report.exact)
    return report


def _connecting_matches_differential(
    context: CochainContext, H_alg: list[CohomologyGroup], max_degree: int
) -> bool:
    """``d_Diff(f, 0) = (0, (-1)^n delta f)`` for every Hochschild representative."""
    field = context.field
    for n in range(max_degree + 1):
        reps = H_alg[n].representatives
        if not reps:
            continue
        lifted = np.stack(
            [np.concatenate([f, field.zeros(context.space_dim(n - 1))]) for f in reps]
        )
        images = diff_batch(context, lifted, n)
        batch = np.stack(reps).reshape((len(reps),) + context.shape(n))
        sign = -1 if n % 2 else 1
        expected_g = field.reduce(sign * delta_batch(context, batch).reshape(len(reps), -1))
        if np.any(images[:, : context.space_dim(n + 1)] != 0):
            return False
        if np.any(images[:, context.space_dim(n + 1) :] != expected_g):
            return False
    return True
