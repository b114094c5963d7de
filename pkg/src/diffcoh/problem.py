"""Problem files — load and save algebras, bimodules and named data as JSON.

Scalars are written as strings (``"3"``, ``"-1/2"``) so that exactness
survives any JSON reader; integers are accepted on input as well.  A minimal
document::

    {
      "schema": 1,
      "field": {"kind": "rational"},
      "weight": "0",
      "algebra": {"dim": 1, "unital": true, "unit": ["1"], "mult": [[["1"]]]},
      "derivation": [["0"]]
    }

Omitting ``module`` means the regular bimodule.  Optional blocks hold named
``cochains`` (``{"degree", "f", "g"}``), ``sections`` (matrices),
``deformations`` (``{"mu": [...], "d": [...]}``) and ``gauges``
(``{"phi": [...]}``).  An ``extension`` block ``{"base_dim": n}`` marks the
algebra as an extension in ``A (+) V`` coordinates.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np

from diffcoh.algebra import DiffAlgebra, DiffBimodule, regular_bimodule
from diffcoh.cochains import Cochain, CochainContext, DiffCochain
from diffcoh.config import Budget
from diffcoh.deformations import TruncatedDeformation, TruncatedGauge
from diffcoh.errors import InvalidInputError, ProblemFileError
from diffcoh.linalg import Field, Matrix
from diffcoh.report import to_json

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_TOP_LEVEL_KEYS = {
    "schema",
    "name",
    "description",
    "field",
    "weight",
    "algebra",
    "derivation",
    "module",
    "cochains",
    "sections",
    "deformations",
    "gauges",
    "extension",
}


@dataclass
class CochainData:
    """A named pair ``(f, g)`` as read from a file; ``g`` is None in degree 0."""

    degree: int
    f: np.ndarray
    g: np.ndarray | None = None


@dataclass
class ProblemFile:
    """Everything a problem document describes, in exact arrays."""

    algebra: DiffAlgebra
    module: DiffBimodule | None = None
    name: str = ""
    description: str = ""
    cochains: dict[str, CochainData] = field(default_factory=dict)
    sections: dict[str, np.ndarray] = field(default_factory=dict)
    deformations: dict[str, tuple[list[np.ndarray], list[np.ndarray]]] = field(
        default_factory=dict
    )
    gauges: dict[str, list[np.ndarray]] = field(default_factory=dict)
    extension_base_dim: int | None = None

    @property
    def field(self) -> Field:
        return self.algebra.field

    @property
    def weight(self):
        return self.algebra.weight

    @property
    def bimodule(self) -> DiffBimodule:
        return self.module if self.module is not None else regular_bimodule(self.algebra)

    @cached_property
    def context(self) -> CochainContext:
        return CochainContext(self.algebra, self.bimodule)

    def make_context(self, budget: Budget, cross_check_delta: bool = False) -> CochainContext:
        return CochainContext(self.algebra, self.bimodule, budget, cross_check_delta)

    # -- named data --------------------------------------------------------

    def _lookup(self, table: dict, kind: str, name: str):
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise InvalidInputError(f"no {kind} named {name!r} (available: {known})")
        return table[name]

    def cochain(self, name: str, context: CochainContext | None = None) -> DiffCochain:
        data = self._lookup(self.cochains, "cochain", name)
        ctx = context or self.context
        f = Cochain.from_values(ctx, data.degree, data.f)
        g = Cochain.from_values(ctx, data.degree - 1, data.g) if data.degree else None
        return DiffCochain(f, g)

    def section(self, name: str) -> Matrix:
        return Matrix(self.field, self._lookup(self.sections, "section", name))

    def deformation(self, name: str) -> TruncatedDeformation:
        mu, d = self._lookup(self.deformations, "deformation", name)
        return TruncatedDeformation(self.algebra, list(mu), list(d))

    def gauge(self, name: str) -> TruncatedGauge:
        return TruncatedGauge(self.field, list(self._lookup(self.gauges, "gauge", name)))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _scalar(field: Field, value: Any, location: str):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ProblemFileError(f"expected a rational string, got {value!r}", location)
    try:
        return field.scalar(value)
    except InvalidInputError as e:
        raise ProblemFileError(str(e), location) from e


def _array(field: Field, data: Any, shape: tuple[int, ...], location: str) -> np.ndarray:
    """Read a nested list of scalars of exactly *shape*."""
    out = np.empty(shape, dtype=object)

    def walk(node: Any, depth: int, index: tuple[int, ...], loc: str) -> None:
        if depth == len(shape):
            out[index] = _scalar(field, node, loc)
            return
        if not isinstance(node, list) or len(node) != shape[depth]:
            got = len(node) if isinstance(node, list) else type(node).__name__
            raise ProblemFileError(
                f"expected a list of length {shape[depth]}, got {got}", loc
            )
        for i, child in enumerate(node):
            walk(child, depth + 1, index + (i,), f"{loc}[{i}]")

    walk(data, 0, (), location)
    return out


def _require(data: dict, key: str, location: str) -> Any:
    if key not in data:
        raise ProblemFileError(f"missing key {key!r}", location)
    return data[key]


def _dim(data: dict, location: str) -> int:
    dim = _require(data, "dim", location)
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 0:
        raise ProblemFileError(
            f"dim must be a non-negative integer, got {dim!r}", f"{location}.dim"
        )
    return dim


def _parse_field(data: Any) -> Field:
    loc = "$.field"
    if not isinstance(data, dict):
        raise ProblemFileError("field must be an object", loc)
    kind = data.get("kind")
    if kind == "rational":
        return Field.rational()
    if kind == "prime":
        p = data.get("p")
        if isinstance(p, bool) or not isinstance(p, int):
            raise ProblemFileError(f"prime field needs an integer p, got {p!r}", f"{loc}.p")
        try:
            return Field.prime(p)
        except InvalidInputError as e:
            raise ProblemFileError(str(e), f"{loc}.p") from e
    raise ProblemFileError(f"unknown field kind {kind!r}", f"{loc}.kind")


def _named_blocks(data: dict, key: str) -> list[tuple[str, Any]]:
    block = data.get(key, {})
    if not isinstance(block, dict):
        raise ProblemFileError(f"{key} must be an object", f"$.{key}")
    return sorted(block.items())


def _parse_cochains(field: Field, n: int, m: int, data: Any) -> dict[str, CochainData]:
    if not isinstance(data, dict):
        raise ProblemFileError("cochains must be an object", "$.cochains")
    out = {}
    for name, entry in sorted(data.items()):
        loc = f"$.cochains.{name}"
        if not isinstance(entry, dict):
            raise ProblemFileError("cochain must be an object", loc)
        degree = _require(entry, "degree", loc)
        if isinstance(degree, bool) or not isinstance(degree, int) or degree < 0:
            raise ProblemFileError(f"degree must be a non-negative integer, got {degree!r}", loc)
        f = _array(field, _require(entry, "f", loc), (n,) * degree + (m,), f"{loc}.f")
        g = None
        if degree:
            g_data = entry.get("g")
            if g_data is None:
                g = np.zeros((n,) * (degree - 1) + (m,), dtype=object)
            else:
                g = _array(field, g_data, (n,) * (degree - 1) + (m,), f"{loc}.g")
        elif "g" in entry:
            raise ProblemFileError("a degree-0 cochain has no operator part", f"{loc}.g")
        out[name] = CochainData(degree, f, g)
    return out


def _parse_series(field: Field, entry: Any, key: str, shape: tuple[int, ...], loc: str):
    terms = _require(entry, key, loc)
    if not isinstance(terms, list) or not terms:
        raise ProblemFileError(f"{key} must be a non-empty list", f"{loc}.{key}")
    return [_array(field, t, shape, f"{loc}.{key}[{i}]") for i, t in enumerate(terms)]


def parse_problem(data: Any) -> ProblemFile:
    """Build a ProblemFile from a decoded JSON document."""
    if not isinstance(data, dict):
        raise ProblemFileError("document must be a JSON object")
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ProblemFileError(
            f"unsupported schema {schema!r}, expected {SCHEMA_VERSION}", "$.schema"
        )
    unknown = sorted(set(data) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ProblemFileError(f"unknown key {unknown[0]!r}", f"$.{unknown[0]}")

    field = _parse_field(_require(data, "field", "$"))
    weight = _scalar(field, _require(data, "weight", "$"), "$.weight")

    alg = _require(data, "algebra", "$")
    if not isinstance(alg, dict):
        raise ProblemFileError("algebra must be an object", "$.algebra")
    n = _dim(alg, "$.algebra")
    mult = _array(field, _require(alg, "mult", "$.algebra"), (n, n, n), "$.algebra.mult")
    derivation = _array(field, _require(data, "derivation", "$"), (n, n), "$.derivation")
    unit = None
    if alg.get("unital", False):
        unit = _array(field, _require(alg, "unit", "$.algebra"), (n,), "$.algebra.unit")
    elif "unit" in alg:
        raise ProblemFileError("unit given for a non-unital algebra", "$.algebra.unit")
    algebra = DiffAlgebra(field, mult, derivation, weight, unit)

    module = None
    if data.get("module") is not None:
        mod = data["module"]
        if not isinstance(mod, dict):
            raise ProblemFileError("module must be an object", "$.module")
        m = _dim(mod, "$.module")
        module = DiffBimodule(
            field,
            _array(field, _require(mod, "left", "$.module"), (n, m, m), "$.module.left"),
            _array(field, _require(mod, "right", "$.module"), (n, m, m), "$.module.right"),
            _array(field, _require(mod, "dV", "$.module"), (m, m), "$.module.dV"),
        )
    m = module.dim if module is not None else n

    problem = ProblemFile(
        algebra,
        module,
        name=str(data.get("name", "")),
        description=str(data.get("description", "")),
    )

    if "cochains" in data:
        problem.cochains = _parse_cochains(field, n, m, data["cochains"])

    base_dim = None
    if "extension" in data:
        ext = data["extension"]
        base_dim = ext.get("base_dim") if isinstance(ext, dict) else None
        if isinstance(base_dim, bool) or not isinstance(base_dim, int) or not 0 <= base_dim <= n:
            raise ProblemFileError(
                f"base_dim must be an integer in [0, {n}], got {base_dim!r}", "$.extension.base_dim"
            )
        problem.extension_base_dim = base_dim

    for name, matrix in _named_blocks(data, "sections"):
        rows = n
        cols = base_dim if base_dim is not None else n
        problem.sections[name] = _array(field, matrix, (rows, cols), f"$.sections.{name}")

    for name, entry in _named_blocks(data, "deformations"):
        loc = f"$.deformations.{name}"
        if not isinstance(entry, dict):
            raise ProblemFileError("deformation must be an object", loc)
        mu = _parse_series(field, entry, "mu", (n, n, n), loc)
        d = _parse_series(field, entry, "d", (n, n), loc)
        if len(mu) != len(d):
            raise ProblemFileError("mu and d must have the same number of terms", loc)
        problem.deformations[name] = (mu, d)

    for name, entry in _named_blocks(data, "gauges"):
        loc = f"$.gauges.{name}"
        if not isinstance(entry, dict):
            raise ProblemFileError("gauge must be an object", loc)
        problem.gauges[name] = _parse_series(field, entry, "phi", (n, n), loc)

    log.debug("parsed problem %r: dim A=%d, dim V=%d", problem.name, n, m)
    return problem


def load_problem(path: Path, prime: int | None = None) -> ProblemFile:
    """Read and parse a problem file.

    Args:
        path: The JSON document.
        prime: Reinterpret every scalar in GF(prime) instead of the declared field.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e
    except OSError as e:
        raise InvalidInputError(f"cannot read {path}: {e.strerror}") from e
    if prime is not None and isinstance(data, dict):
        log.debug("reading %s over GF(%d)", path, prime)
        data = {**data, "field": {"kind": "prime", "p": prime}}
    return parse_problem(data)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _strings(field: Field, arr: Any) -> Any:
    arr = np.asarray(arr, dtype=object)
    if arr.ndim == 0:
        return field.format(arr[()])
    return [_strings(field, arr[i]) for i in range(arr.shape[0])]


def serialize_problem(problem: ProblemFile) -> dict:
    """Canonical JSON-ready form: lowest-terms strings, only non-default blocks."""
    fld = problem.field
    A = problem.algebra
    out: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "field": fld.descriptor(),
        "weight": fld.format(A.weight),
        "algebra": {"dim": A.dim, "unital": A.unital, "mult": _strings(fld, A.mult)},
        "derivation": _strings(fld, A.derivation),
    }
    if A.unital:
        out["algebra"]["unit"] = _strings(fld, A.unit)
    if problem.name:
        out["name"] = problem.name
    if problem.description:
        out["description"] = problem.description
    if problem.module is not None:
        V = problem.module
        out["module"] = {
            "dim": V.dim,
            "left": _strings(fld, V.left),
            "right": _strings(fld, V.right),
            "dV": _strings(fld, V.dV),
        }
    if problem.cochains:
        out["cochains"] = {}
        for name, c in problem.cochains.items():
            entry: dict[str, Any] = {"degree": c.degree, "f": _strings(fld, c.f)}
            if c.g is not None:
                entry["g"] = _strings(fld, c.g)
            out["cochains"][name] = entry
    if problem.sections:
        out["sections"] = {k: _strings(fld, v) for k, v in problem.sections.items()}
    if problem.deformations:
        out["deformations"] = {
            k: {"mu": [_strings(fld, t) for t in mu], "d": [_strings(fld, t) for t in d]}
            for k, (mu, d) in problem.deformations.items()
        }
    if problem.gauges:
        out["gauges"] = {
            k: {"phi": [_strings(fld, t) for t in v]} for k, v in problem.gauges.items()
        }
    if problem.extension_base_dim is not None:
        out["extension"] = {"base_dim": problem.extension_base_dim}
    return out


def save_problem(problem: ProblemFile, path: Path) -> Path:
    """Write *problem* in canonical form and return the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(serialize_problem(problem)))
    return path
