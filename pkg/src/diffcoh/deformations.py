"""Truncated one-parameter formal deformations of a differential algebra.

A deformation of order ``N`` is a pair of polynomial families
``mu_t = mu_0 + mu_1 t + ... + mu_N t^N`` and ``d_t = d_0 + ... + d_N t^N``
with ``(mu_0, d_0)`` the structure of the base algebra; every identity is
read coefficient by coefficient up to ``t^N``.  Products use the structure
constant layout and operators are matrices with images in columns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from diffcoh.algebra import DiffAlgebra, Identity, ValidationReport
from diffcoh.cochains import Cochain, CochainContext, DiffCochain, diff_d
from diffcoh.complexes import ComplexKind, compute_group
from diffcoh.errors import InternalConsistencyError, InvalidInputError
from diffcoh.linalg import Field, Matrix, is_zero
from diffcoh.tensors import (
    bilinear_substitute,
    compose_left,
    compose_right,
    postcompose,
    substitute,
    tensordot,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TruncatedDeformation:
    """``(mu_0..mu_N, d_0..d_N)`` with ``(mu_0, d_0)`` equal to the base structure."""

    base: DiffAlgebra
    mu: list[np.ndarray]
    d: list[np.ndarray]

    def __post_init__(self) -> None:
        n = self.base.dim
        if not self.mu or len(self.mu) != len(self.d):
            raise InvalidInputError(
                f"need equally many products and operators, got {len(self.mu)} and {len(self.d)}"
            )
        for i, (m, op) in enumerate(zip(self.mu, self.d)):
            if m.shape != (n, n, n):
                raise InvalidInputError(f"mu_{i} must have shape {(n, n, n)}, got {m.shape}")
            if op.shape != (n, n):
                raise InvalidInputError(f"d_{i} must have shape {(n, n)}, got {op.shape}")
        if np.any(self.mu[0] != self.base.mult) or np.any(self.d[0] != self.base.derivation):
            raise InvalidInputError("order-0 terms must equal the base product and derivation")

    @property
    def order(self) -> int:
        return len(self.mu) - 1

    @property
    def field(self) -> Field:
        return self.base.field

    @cached_property
    def context(self) -> CochainContext:
        return CochainContext.regular(self.base)

    def term(self, k: int) -> DiffCochain:
        """``(mu_k, d_k)`` as a degree-2 pair with coefficients in the regular bimodule."""
        ctx = self.context
        return DiffCochain(
            Cochain(ctx, self.mu[k].copy()),
            Cochain.from_matrix(ctx, Matrix(self.field, self.d[k])),
        )

    def is_trivial(self) -> bool:
        return all(is_zero(m) and is_zero(op) for m, op in zip(self.mu[1:], self.d[1:]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedDeformation):
            return NotImplemented
        return (
            self.base is other.base
            and self.order == other.order
            and all(np.all(a == b) for a, b in zip(self.mu, other.mu))
            and all(np.all(a == b) for a, b in zip(self.d, other.d))
        )

    __hash__ = None  # type: ignore[assignment]


def trivial_deformation(A: DiffAlgebra, order: int) -> TruncatedDeformation:
    """``mu_t = mu_A`` and ``d_t = d_A``."""
    f, n = A.field, A.dim
    mu = [A.mult.copy()] + [f.zeros((n, n, n)) for _ in range(order)]
    d = [A.derivation.copy()] + [f.zeros((n, n)) for _ in range(order)]
    return TruncatedDeformation(A, mu, d)


def deformation_from_cocycle(A: DiffAlgebra, c: DiffCochain, order: int) -> TruncatedDeformation:
    """``mu_t = mu_A + t mu_1``, ``d_t = d_A + t d_1`` for ``c = (mu_1, d_1)``.

    Only the first-order equations are implied by ``c`` being a cocycle;
    higher orders are the caller's to check.
    """
    if c.degree != 2:
        raise InvalidInputError(f"a deformation is seeded by a degree-2 pair, got {c.degree}")
    if order < 1:
        raise InvalidInputError("a seeded deformation has order at least 1")
    trivial = trivial_deformation(A, order)
    mu = [trivial.mu[0], c.f.coeffs.copy(), *trivial.mu[2:]]
    d = [trivial.d[0], c.g.to_matrix().entries, *trivial.d[2:]]
    return TruncatedDeformation(A, mu, d)


# ---------------------------------------------------------------------------
# Order-by-order verification
# ---------------------------------------------------------------------------


@dataclass
class OrderVerdict:
    order: int
    report: ValidationReport

    @property
    def passed(self) -> bool:
        return self.report.passed

    def to_dict(self) -> dict:
        return {"order": self.order, **self.report.to_dict()}


@dataclass
class DeformationCheck:
    verdicts: list[OrderVerdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def valid_through(self) -> int:
        """Highest ``n`` such that every order up to ``n`` passes, or -1."""
        top = -1
        for v in self.verdicts:
            if not v.passed:
                break
            top = v.order
        return top

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "valid_through": self.valid_through,
            "orders": [v.to_dict() for v in self.verdicts],
        }


def _order_equations(D: TruncatedDeformation, n: int) -> ValidationReport:
    f = D.field
    lam = D.base.weight
    mu, d = D.mu, D.d
    report = ValidationReport(f"order {n}")

    assoc_left = f.zeros(mu[0].shape + (D.base.dim,))
    assoc_right = assoc_left.copy()
    for i in range(n + 1):
        assoc_left = assoc_left + compose_left(mu[i], mu[n - i])
        assoc_right = assoc_right + compose_right(mu[i], mu[n - i])
    report.extend(Identity.ASSOCIATIVITY, f.reduce(assoc_left), f.reduce(assoc_right))

    lhs = f.zeros(mu[0].shape)
    rhs = f.zeros(mu[0].shape)
    for k in range(n + 1):
        l_ = n - k
        lhs = lhs + postcompose(mu[k], d[l_])
        rhs = rhs + substitute(mu[k], d[l_], 0) + substitute(mu[k], d[l_], 1)
        if lam != 0:
            for l2 in range(n - k + 1):
                rhs = rhs + lam * bilinear_substitute(mu[k], d[l2], d[n - k - l2])
    report.extend(Identity.LEIBNIZ, f.reduce(lhs), f.reduce(rhs))
    return report


def check_deformation(D: TruncatedDeformation) -> DeformationCheck:
    """Verdicts for the associativity and weighted Leibniz equations at each order."""
    check = DeformationCheck([OrderVerdict(n, _order_equations(D, n)) for n in range(D.order + 1)])
    log.debug("deformation of order %d valid through %d", D.order, check.valid_through)
    return check


def infinitesimal(D: TruncatedDeformation) -> DiffCochain:
    """``(mu_1, d_1)``, a 2-cocycle of the combined complex with regular coefficients."""
    if D.order < 1:
        raise InvalidInputError("a deformation of order 0 has no infinitesimal")
    if check_deformation(D).valid_through < 1:
        raise InvalidInputError("deformation equations fail below order 2")
    c = D.term(1)
    if not diff_d(c).is_zero():
        raise InternalConsistencyError("infinitesimal is not closed")
    return c


# ---------------------------------------------------------------------------
# Gauges
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TruncatedGauge:
    """``Phi_t = id + phi_1 t + ... + phi_N t^N`` acting on the base space."""

    field: Field
    phi: list[np.ndarray]

    def __post_init__(self) -> None:
        if not self.phi:
            raise InvalidInputError("a gauge needs at least its order-0 term")
        n = self.phi[0].shape[0]
        if any(p.shape != (n, n) for p in self.phi):
            raise InvalidInputError("gauge terms must be square matrices of one size")
        if np.any(self.phi[0] != self.field.identity(n)):
            raise InvalidInputError("the order-0 term of a gauge must be the identity")

    @classmethod
    def identity(cls, field: Field, dim: int, order: int) -> TruncatedGauge:
        return cls(field, [field.identity(dim)] + [field.zeros((dim, dim)) for _ in range(order)])

    @classmethod
    def single(cls, field: Field, phi_k: np.ndarray, k: int, order: int) -> TruncatedGauge:
        """``id + phi_k t^k`` truncated at *order*."""
        terms = cls.identity(field, phi_k.shape[0], order).phi
        terms[k] = field.reduce(phi_k.copy())
        return cls(field, terms)

    @property
    def order(self) -> int:
        return len(self.phi) - 1

    @property
    def dim(self) -> int:
        return self.phi[0].shape[0]

    def is_identity(self) -> bool:
        return all(is_zero(p) for p in self.phi[1:])

    def _product(self, left: list[np.ndarray], right: list[np.ndarray]) -> list[np.ndarray]:
        out = []
        for k in range(self.order + 1):
            acc = self.field.zeros((self.dim, self.dim))
            for i in range(k + 1):
                acc = acc + _matmul(left[i], right[k - i])
            out.append(self.field.reduce(acc))
        return out

    def compose(self, other: TruncatedGauge) -> TruncatedGauge:
        """``self o other`` as a truncated series."""
        if other.order != self.order or other.dim != self.dim:
            raise InvalidInputError("gauges differ in order or dimension")
        return TruncatedGauge(self.field, self._product(self.phi, other.phi))

    def inverse(self) -> TruncatedGauge:
        """Series inverse: ``psi_0 = id``, ``psi_k = -sum_{i>=1} phi_i psi_{k-i}``."""
        psi = [self.field.identity(self.dim)]
        for k in range(1, self.order + 1):
            acc = self.field.zeros((self.dim, self.dim))
            for i in range(1, k + 1):
                acc = acc - _matmul(self.phi[i], psi[k - i])
            psi.append(self.field.reduce(acc))
        return TruncatedGauge(self.field, psi)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncatedGauge):
            return NotImplemented
        return self.order == other.order and all(
            np.all(a == b) for a, b in zip(self.phi, other.phi)
        )

    __hash__ = None  # type: ignore[assignment]


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return tensordot(a, b, ([1], [0]))


def apply_gauge(D: TruncatedDeformation, G: TruncatedGauge) -> TruncatedDeformation:
    """``mu' = Phi^-1 o mu o (Phi x Phi)`` and ``d' = Phi^-1 o d o Phi``, truncated."""
    if G.order != D.order or G.dim != D.base.dim:
        raise InvalidInputError(
            f"gauge of order {G.order} on {G.dim} dims cannot act on a deformation "
            f"of order {D.order} on {D.base.dim} dims"
        )
    f = D.field
    N = D.order
    phi = G.phi
    psi = G.inverse().phi
    shape = D.mu[0].shape

    # inner[k] = sum over b + c + e = k of mu_b(phi_c x, phi_e y)
    inner = [f.zeros(shape) for _ in range(N + 1)]
    for b in range(N + 1):
        for c in range(N + 1 - b):
            for e in range(N + 1 - b - c):
                if is_zero(phi[c]) or is_zero(phi[e]):
                    continue
                inner[b + c + e] = inner[b + c + e] + bilinear_substitute(D.mu[b], phi[c], phi[e])
    mu = []
    for n in range(N + 1):
        acc = f.zeros(shape)
        for a in range(n + 1):
            acc = acc + postcompose(inner[n - a], psi[a])
        mu.append(f.reduce(acc))

    d_phi = G._product(D.d, phi)
    d = G._product(psi, d_phi)
    return TruncatedDeformation(D.base, mu, d)


# ---------------------------------------------------------------------------
# Trivialization
# ---------------------------------------------------------------------------


@dataclass
class TrivializationResult:
    """Outcome of killing a deformation order by order.

    On success ``gauge`` carries the deformation to the trivial one through
    ``order``; otherwise ``obstruction_order`` is the first order whose term
    is not a coboundary and ``obstruction_class`` its coordinates in the
    reduced second cohomology.
    """

    order: int
    gauge: TruncatedGauge | None
    obstruction_order: int | None = None
    obstruction: DiffCochain | None = None
    obstruction_class: np.ndarray | None = None

    @property
    def succeeded(self) -> bool:
        return self.gauge is not None

    def to_dict(self) -> dict:
        if self.gauge is not None:
            fmt = self.gauge.field.format
            return {
                "trivial_through_order": self.order,
                "gauge": [[[fmt(x) for x in row] for row in p] for p in self.gauge.phi],
            }
        fmt = self.obstruction.context.field.format
        return {
            "trivial_through_order": self.obstruction_order - 1,
            "obstruction_order": self.obstruction_order,
            "obstruction": [fmt(x) for x in self.obstruction.vector()],
            "obstruction_class": [fmt(x) for x in self.obstruction_class],
        }


def trivialize(D: TruncatedDeformation) -> TrivializationResult:
    """Gauge away ``(mu_k, d_k)`` for ``k = 1..N`` by solving ``d_Diff(phi_k) = -(mu_k, d_k)``."""
    check = check_deformation(D)
    if not check.passed:
        raise InvalidInputError(
            f"deformation equations fail at order {check.valid_through + 1}"
        )
    ctx = D.context
    f, N = D.field, D.order
    group = compute_group(ctx, ComplexKind.DIFF_REDUCED, 2)
    total = TruncatedGauge.identity(f, D.base.dim, N)
    current = D
    for k in range(1, N + 1):
        term = current.term(k)
        if term.is_zero():
            continue
        vector = term.vector()
        x = group.preimage(f.reduce(-vector))
        if x is None:
            coords = group.coordinates(vector)
            log.debug("obstructed at order %d", k)
            return TrivializationResult(N, None, k, term, coords)
        phi_k = Cochain.from_vector(ctx, 1, x).to_matrix().entries
        step = TruncatedGauge.single(f, phi_k, k, N)
        current = apply_gauge(current, step)
        total = total.compose(step)
        if not current.term(k).is_zero():
            raise InternalConsistencyError(f"gauge step failed to clear order {k}")
    if not current.is_trivial():
        raise InternalConsistencyError("gauged deformation is not trivial")
    log.debug("deformation trivial through order %d", N)
    return TrivializationResult(N, total)
