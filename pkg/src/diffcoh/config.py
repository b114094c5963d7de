"""Configuration management — load and merge diffcoh settings.

Loads settings from ``diffcoh.toml`` with the following precedence:

    CLI flags  >  diffcoh.toml  >  built-in defaults

The config file is discovered by walking up from the current working
directory, similar to how Git finds ``.git``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib  # type: ignore[no-redef]

log = logging.getLogger(__name__)

CONFIG_FILENAME = "diffcoh.toml"

DEFAULT_CONFIG_TEMPLATE = """\
# diffcoh configuration

[budget]
max_degree = 4            # highest cochain degree that may be assembled
max_columns = 100000      # largest cochain space (coordinates) per degree
max_subset_degree = 10    # delta enumerates 2^n - 1 subsets up to this degree

[deformation]
order = 4                 # default truncation order

[checks]
cross_check_delta = false # compare both delta implementations on every evaluation

[report]
format = "json"           # json | markdown | table
"""

DEFAULT_MAX_DEGREE = 4
DEFAULT_MAX_COLUMNS = 100_000
DEFAULT_MAX_SUBSET_DEGREE = 10
DEFAULT_DEFORMATION_ORDER = 4

REPORT_FORMATS = ("json", "markdown", "table")


@dataclass(frozen=True)
class Budget:
    """Resource limits for cochain assembly and delta evaluation."""

    max_degree: int = DEFAULT_MAX_DEGREE
    max_columns: int = DEFAULT_MAX_COLUMNS
    max_subset_degree: int = DEFAULT_MAX_SUBSET_DEGREE


@dataclass
class DiffcohConfig:
    """Merged configuration from defaults, file, and CLI overrides."""

    max_degree: int = DEFAULT_MAX_DEGREE
    max_columns: int = DEFAULT_MAX_COLUMNS
    max_subset_degree: int = DEFAULT_MAX_SUBSET_DEGREE
    deformation_order: int = DEFAULT_DEFORMATION_ORDER
    cross_check_delta: bool = False
    report_format: str = "json"
    config_path: Path | None = field(default=None, repr=False)

    @property
    def budget(self) -> Budget:
        return Budget(
            max_degree=self.max_degree,
            max_columns=self.max_columns,
            max_subset_degree=self.max_subset_degree,
        )


def find_config_file(start: Path | None = None) -> Path | None:
    """Nearest ``diffcoh.toml`` in *start* (default: cwd) or one of its parents."""
    here = (start or Path.cwd()).resolve()
    return next(
        (d / CONFIG_FILENAME for d in (here, *here.parents) if (d / CONFIG_FILENAME).is_file()),
        None,
    )


def _read_toml(path: Path) -> dict:
    with open(path, "rb") as f:
        return tomllib.load(f)


def _positive_int(table: dict, key: str, section: str, default: int) -> int:
    if key not in table:
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        log.warning("Ignoring [%s] %s = %r: expected a non-negative integer", section, key, value)
        return default
    return value


def load_config(config_path: Path | None = None) -> DiffcohConfig:
    """Read ``diffcoh.toml`` into a :class:`DiffcohConfig`.

    Without *config_path* the file is looked up from the working directory.
    A missing file gives the defaults; an unreadable one logs a warning and
    also gives the defaults. Individual bad values are skipped with a warning.
    """
    cfg = DiffcohConfig()

    path = config_path or find_config_file()
    if path is None or not path.is_file():
        return cfg

    log.debug("Reading config %s", path)
    try:
        data = _read_toml(path)
    except (OSError, tomllib.TOMLDecodeError) as e:
        log.warning("Could not read %s, using defaults: %s", path, e)
        return cfg

    cfg.config_path = path

    budget = data.get("budget", {})
    cfg.max_degree = _positive_int(budget, "max_degree", "budget", cfg.max_degree)
    cfg.max_columns = _positive_int(budget, "max_columns", "budget", cfg.max_columns)
    cfg.max_subset_degree = _positive_int(
        budget, "max_subset_degree", "budget", cfg.max_subset_degree
    )

    deformation = data.get("deformation", {})
    cfg.deformation_order = _positive_int(
        deformation, "order", "deformation", cfg.deformation_order
    )

    checks = data.get("checks", {})
    if "cross_check_delta" in checks:
        cfg.cross_check_delta = bool(checks["cross_check_delta"])

    fmt = data.get("report", {}).get("format")
    if fmt in REPORT_FORMATS:
        cfg.report_format = fmt
    elif fmt is not None:
        log.warning("Ignoring [report] format = %r: expected one of %s", fmt, REPORT_FORMATS)

    return cfg


def merge_cli_overrides(
    cfg: DiffcohConfig,
    *,
    max_degree: int | None = None,
    max_columns: int | None = None,
    deformation_order: int | None = None,
    cross_check_delta: bool | None = None,
    fmt: str | None = None,
) -> DiffcohConfig:
    """Layer command-line flags over *cfg* in place and return it.

    ``None`` means the flag was not given, so file and default values win.
    """
    overrides = {
        "max_degree": max_degree,
        "max_columns": max_columns,
        "deformation_order": deformation_order,
        "cross_check_delta": cross_check_delta,
        "report_format": fmt,
    }
    for name, value in overrides.items():
        if value is not None:
            setattr(cfg, name, value)
    return cfg
