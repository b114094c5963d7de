"""Abelian extensions of a differential algebra by a differential bimodule.

Extensions live in ``A (+) V`` coordinates: the first ``dim A`` basis vectors
lift a basis of ``A`` and the rest span the square-zero kernel ``V``.  A
2-cocycle ``(psi, chi)`` gives the product
``(x, u)(y, v) = (xy, xv + uy + psi(x, y))`` and the derivation
``(x, v) -> (d x, chi(x) + dV v)``; a section ``s`` gives back
``psi(x, y) = s(x)s(y) - s(xy)`` and ``chi(x) = d(s(x)) - s(d x)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from diffcoh.algebra import (
    DiffAlgebra,
    ValidationReport,
    canonical_inclusion,
    canonical_projection,
    canonical_section,
    change_basis,
    compute_section,
    is_isomorphism,
    kernel_bimodule,
    square_zero_extension,
)
from diffcoh.cochains import Cochain, CochainContext, DiffCochain, diff_d, two_cocycle_conditions
from diffcoh.complexes import ComplexKind, compute_group
from diffcoh.errors import InternalConsistencyError, InvalidInputError
from diffcoh.linalg import Matrix, columns_matrix, kernel_basis
from diffcoh.tensors import bilinear_substitute, postcompose

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TwoCocycle:
    """``psi: A (x) A -> V`` together with ``chi: A -> V``."""

    psi: Cochain
    chi: Cochain

    def __post_init__(self) -> None:
        if self.psi.degree != 2 or self.chi.degree != 1:
            raise InvalidInputError(
                f"a 2-cochain pair needs degrees (2, 1), got ({self.psi.degree}, {self.chi.degree})"
            )
        if self.psi.context is not self.chi.context:
            raise InvalidInputError("psi and chi belong to different contexts")

    @property
    def context(self) -> CochainContext:
        return self.psi.context

    @classmethod
    def zero(cls, context: CochainContext) -> TwoCocycle:
        return cls(Cochain.zero(context, 2), Cochain.zero(context, 1))

    @classmethod
    def from_diff_cochain(cls, c: DiffCochain) -> TwoCocycle:
        if c.degree != 2:
            raise InvalidInputError(f"expected a degree-2 pair, got degree {c.degree}")
        return cls(c.f, c.g)

    @classmethod
    def from_vector(cls, context: CochainContext, vector: np.ndarray) -> TwoCocycle:
        return cls.from_diff_cochain(DiffCochain.from_vector(context, 2, vector))

    def as_diff_cochain(self) -> DiffCochain:
        return DiffCochain(self.psi, self.chi)

    def vector(self) -> np.ndarray:
        return self.as_diff_cochain().vector()

    def __sub__(self, other: TwoCocycle) -> TwoCocycle:
        return TwoCocycle(self.psi - other.psi, self.chi - other.chi)

    def __add__(self, other: TwoCocycle) -> TwoCocycle:
        return TwoCocycle(self.psi + other.psi, self.chi + other.chi)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TwoCocycle):
            return NotImplemented
        return self.psi == other.psi and self.chi == other.chi

    __hash__ = None  # type: ignore[assignment]


def cocycle_violations(c: TwoCocycle) -> ValidationReport:
    """Witnesses for the multiplicative and the differential cocycle identities."""
    return two_cocycle_conditions(c.context, c.psi, c.chi)


def is_cocycle(c: TwoCocycle) -> bool:
    return diff_d(c.as_diff_cochain()).is_zero()


def extension_structure(c: TwoCocycle) -> DiffAlgebra:
    """The raw product and derivation on ``A (+) V``; nothing is checked."""
    ctx = c.context
    return square_zero_extension(ctx.algebra, ctx.module, c.psi.coeffs, c.chi.coeffs)


@dataclass(frozen=True, eq=False)
class AbelianExtension:
    """``0 -> V -> total -> A -> 0`` in ``A (+) V`` coordinates."""

    context: CochainContext
    total: DiffAlgebra
    projection: Matrix
    inclusion: Matrix
    section: Matrix

    @property
    def base_dim(self) -> int:
        return self.context.n

    @property
    def module_dim(self) -> int:
        return self.context.m


def _canonical_extension(context: CochainContext, total: DiffAlgebra) -> AbelianExtension:
    f, n, m = context.field, context.n, context.m
    return AbelianExtension(
        context,
        total,
        canonical_projection(f, n, m),
        canonical_inclusion(f, n, m),
        canonical_section(f, n, m),
    )


def build_extension(c: TwoCocycle) -> AbelianExtension:
    """Extension defined by a 2-cocycle; non-cocycles are refused with a witness."""
    report = cocycle_violations(c)
    if not report.passed:
        first = report.violations[0]
        raise InvalidInputError(
            f"not a 2-cocycle: {first.identity.value} fails", witness=first.indices
        )
    total = extension_structure(c)
    log.debug("built %d-dim extension", total.dim)
    return _canonical_extension(c.context, total)


def _check_section(E: AbelianExtension, section: Matrix) -> None:
    N = E.total.dim
    if section.shape != (N, E.base_dim) or not (
        E.projection @ section == Matrix.identity(E.context.field, E.base_dim)
    ):
        raise InvalidInputError("section is not a right inverse of the projection")


def extract_cocycle(E: AbelianExtension, section: Matrix | None = None) -> TwoCocycle:
    """``psi(x, y) = s(x)s(y) - s(xy)`` and ``chi(x) = d(s(x)) - s(d x)``."""
    S = E.section if section is None else section
    _check_section(E, S)
    ctx = E.context
    f, n = ctx.field, ctx.n
    A = ctx.algebra
    psi_total = f.reduce(
        bilinear_substitute(E.total.mult, S.entries, S.entries) - postcompose(A.mult, S.entries)
    )
    chi_total = f.reduce(
        (Matrix(f, E.total.derivation) @ S).entries - (S @ A.derivation_matrix).entries
    )
    if np.any(psi_total[..., :n] != 0) or np.any(chi_total[:n] != 0):
        raise InternalConsistencyError("section defects do not lie in the kernel")
    psi = Cochain(ctx, psi_total[..., n:].copy())
    chi = Cochain(ctx, chi_total[n:].T.copy())
    return TwoCocycle(psi, chi)


def section_difference(E: AbelianExtension, s1: Matrix, s2: Matrix) -> Cochain:
    """``phi = s1 - s2`` as a degree-1 cochain ``A -> V``."""
    _check_section(E, s1)
    _check_section(E, s2)
    n = E.base_dim
    diff = (s1.entries - s2.entries)[n:]
    return Cochain.from_matrix(E.context, Matrix(E.context.field, E.context.field.reduce(diff)))


def extension_isomorphism(phi: Cochain) -> Matrix:
    """``zeta(x, v) = (x, phi(x) + v)``."""
    ctx = phi.context
    f, n, m = ctx.field, ctx.n, ctx.m
    zeta = f.identity(n + m)
    zeta[n:, :n] = phi.to_matrix().entries
    return Matrix(f, zeta)


def cocycles_equivalent(c1: TwoCocycle, c2: TwoCocycle) -> Cochain | None:
    """Some ``phi`` with ``c1 - c2 = d_Diff(phi, 0)``, or None when inequivalent.

    A returned ``phi`` has been checked to induce an isomorphism of the two
    extensions through ``zeta(x, v) = (x, phi(x) + v)``.
    """
    ctx = c1.context
    if c2.context is not ctx:
        raise InvalidInputError("cocycles belong to different contexts")
    group = compute_group(ctx, ComplexKind.DIFF_REDUCED, 2)
    x = group.preimage((c1 - c2).vector())
    if x is None:
        return None
    phi = Cochain.from_vector(ctx, 1, x)
    zeta = extension_isomorphism(phi)
    if not is_isomorphism(build_extension(c1).total, build_extension(c2).total, zeta):
        raise InternalConsistencyError("equivalence does not induce an isomorphism")
    return phi


@dataclass
class ExtensionClasses:
    """Extension classes through the reduced second cohomology."""

    reduced_dim: int
    full_dim: int
    representatives: list[TwoCocycle]

    def to_dict(self) -> dict:
        return {
            "reduced_dim": self.reduced_dim,
            "full_dim": self.full_dim,
            "representatives": len(self.representatives),
        }


def extension_classes(context: CochainContext) -> ExtensionClasses:
    """Dimension of the reduced ``H^2`` and one cocycle per basis class."""
    reduced = compute_group(context, ComplexKind.DIFF_REDUCED, 2)
    full = compute_group(context, ComplexKind.DIFF, 2)
    reps = [TwoCocycle.from_vector(context, v) for v in reduced.representatives]
    for rep in reps:
        if not cocycle_violations(rep).passed:
            raise InternalConsistencyError("representative fails the cocycle identities")
    return ExtensionClasses(reduced.dim, full.dim, reps)


def extension_from_total(context: CochainContext, total: DiffAlgebra) -> AbelianExtension:
    """Recognize an algebra in ``A (+) V`` coordinates as an extension of the context."""
    n, m = context.n, context.m
    if total.dim != n + m:
        raise InvalidInputError(f"total algebra has dimension {total.dim}, expected {n + m}")
    if total.weight != context.weight:
        raise InvalidInputError("total algebra has a different weight")
    E = _canonical_extension(context, total)
    c = extract_cocycle(E)
    rebuilt = extension_structure(c)
    if np.any(rebuilt.mult != total.mult):
        bad = np.argwhere(np.asarray(rebuilt.mult != total.mult, dtype=bool))[0]
        raise InvalidInputError(
            "product is not of extension form", witness=tuple(int(i) for i in bad[:2])
        )
    if np.any(rebuilt.derivation != total.derivation):
        bad = np.argwhere(np.asarray(rebuilt.derivation != total.derivation, dtype=bool))[0]
        raise InvalidInputError(
            "derivation is not of extension form", witness=(int(bad[1]),)
        )
    return E


def normalize_extension(
    hat_A: DiffAlgebra,
    base: DiffAlgebra,
    projection: Matrix,
    section: Matrix | None = None,
) -> AbelianExtension:
    """Transport an extension given in arbitrary coordinates to ``A (+) V`` coordinates.

    The new basis is the image of the section followed by the kernel basis of
    the projection; the kernel carries the induced bimodule.
    """
    module = kernel_bimodule(hat_A, base, projection, section)
    S = section if section is not None else compute_section(projection)
    K = columns_matrix(hat_A.field, kernel_basis(projection), hat_A.dim)
    basis = S.hstack(K)
    total = change_basis(hat_A, basis)
    context = CochainContext(base, module)
    return extension_from_total(context, total)
