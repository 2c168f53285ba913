"""Run configuration: plain-text key=value files with one section per job.

Layout::

    [defaults]
    seed = 20260810          ; optional: experiment seed
    replications = 5000      ; optional: per-job default
    workers = 2              ; optional
    digits = 4               ; optional: pretty-table rendering

    [curves:exp-500]         ; one section per curve experiment
    model = exponential
    n = 500
    estimators = tildeG_p1, tildeG_p0.75, hatGG_p-10
    replications = 1000      ; optional override
    k_min = 1                ; optional k-grid restriction
    k_max = 499

    [tables]                 ; at most one tables job
    models = exponential, weibull(2,1)
    n_grid = 100, 200, 400, 750, 1000, 1500, 2000
    estimators.exponential = tildeG_p1, hatG_p0.25   ; optional per-model
                                                     ; override of the menu

Estimator identifiers follow ``<family>_p<real>`` with family one of
hatG, hatGG, tildeG, tildeGG.  Semantic errors are reported with the file
and line of the offending entry.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

from .core import EstimatorSpec, Family
from .errors import ConfigError, ParameterError
from .models import ModelSpec, get_model

__all__ = [
    "CurvesJob",
    "TablesJob",
    "ParsedConfig",
    "parse_config",
    "parse_estimators",
    "DEFAULT_N_GRID",
    "TABLE_MENU",
    "menu_for",
]

DEFAULT_N_GRID = (100, 200, 400, 750, 1000, 1500, 2000)

# Per-model estimator menus used in the comparison tables: three tilde-G
# exponents, two tilde-GG, two hat-G and one deep-negative hat-GG each.
_MENU_SPECS = {
    "exponential": (
        ("tildeG", (1, 0.75, 1.25)),
        ("tildeGG", (0.25, 1)),
        ("hatG", (0.25, 0.5)),
        ("hatGG", (-10,)),
    ),
    "weibull(2,1)": (
        ("tildeG", (1, 0.75, 1.25)),
        ("tildeGG", (0.25, 0.75)),
        ("hatG", (-0.25, 0.25)),
        ("hatGG", (-20,)),
    ),
    "gamma(0.75,1)": (
        ("tildeG", (1, 1.75, 2)),
        ("tildeGG", (0.25, 0.5)),
        ("hatG", (0.25, -1.75)),
        ("hatGG", (-25,)),
    ),
    "half-normal": (
        ("tildeG", (1, 2, 3.5)),
        ("tildeGG", (0.25, 1)),
        ("hatG", (0.25, 1)),
        ("hatGG", (-2,)),
    ),
    "gumbel": (
        ("tildeG", (1, 0.25, 0.5)),
        ("tildeGG", (0.25, 0.5)),
        ("hatG", (0.25, -2)),
        ("hatGG", (-25,)),
    ),
    "half-logistic": (
        ("tildeG", (1, 0.25, 0.5)),
        ("tildeGG", (0.25, 0.5)),
        ("hatG", (0.25, -2)),
        ("hatGG", (-15,)),
    ),
}

TABLE_MENU: dict[str, tuple[EstimatorSpec, ...]] = {
    model: tuple(
        EstimatorSpec(Family(fam), p) for fam, ps in groups for p in ps
    )
    for model, groups in _MENU_SPECS.items()
}


def menu_for(model: ModelSpec) -> tuple[EstimatorSpec, ...]:
    """Default table menu of a model (tilde-G p=1 baseline if untabulated)."""
    return TABLE_MENU.get(model.id, (EstimatorSpec(Family.TILDE_G, 1.0),))


@dataclass(frozen=True)
class CurvesJob:
    name: str
    model: ModelSpec
    n: int
    estimators: tuple[EstimatorSpec, ...]
    replications: int | None = None
    k_range: tuple[int, int] | None = None


@dataclass(frozen=True)
class TablesJob:
    models: tuple[ModelSpec, ...]
    n_grid: tuple[int, ...]
    menu: dict[str, tuple[EstimatorSpec, ...]]
    replications: int | None = None


@dataclass
class ParsedConfig:
    path: str
    seed: int | None = None
    replications: int | None = None
    workers: int | None = None
    digits: int | None = None
    curves: list[CurvesJob] = field(default_factory=list)
    tables: TablesJob | None = None


class _Anchored:
    """Wraps a parsed ini file and anchors semantic errors to lines."""

    def __init__(self, path: str):
        self.path = str(path)
        text = Path(path).read_text()
        self.lines = text.splitlines()
        self.cp = configparser.ConfigParser(interpolation=None)
        try:
            self.cp.read_string(text, source=self.path)
        except configparser.Error as exc:
            line = getattr(exc, "lineno", None)
            raise ConfigError(str(exc).replace("\n", " "), self.path, line) from exc

    def line_of(self, section: str, key: str | None = None) -> int | None:
        sec_pat = re.compile(r"^\s*\[" + re.escape(section) + r"\]\s*$")
        in_section = False
        for i, raw in enumerate(self.lines, start=1):
            if sec_pat.match(raw):
                if key is None:
                    return i
                in_section = True
                continue
            if in_section:
                if re.match(r"^\s*\[", raw):
                    return None
                if re.match(r"^\s*" + re.escape(key) + r"\s*[=:]", raw, re.IGNORECASE):
                    return i
        return None

    def fail(self, section: str, key: str | None, message: str):
        raise ConfigError(message, self.path, self.line_of(section, key))

    def get_int(self, section: str, key: str, required: bool = False) -> int | None:
        if not self.cp.has_option(section, key):
            if required:
                self.fail(section, None, f"[{section}] is missing required key {key!r}")
            return None
        raw = self.cp.get(section, key)
        try:
            return int(raw)
        except ValueError:
            self.fail(section, key, f"{key!r} must be an integer, got {raw!r}")


def parse_estimators(text: str) -> tuple[EstimatorSpec, ...]:
    """Parse a comma/whitespace separated list of estimator identifiers."""
    tokens = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not tokens:
        raise ParameterError("estimator list is empty")
    return tuple(EstimatorSpec.from_label(tok) for tok in tokens)


def _split_list(text: str) -> list[str]:
    """Split on commas that are not nested inside parentheses.

    Model identifiers such as weibull(2,1) carry commas of their own.
    """
    parts, depth, buf = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


def parse_config(path: str) -> ParsedConfig:
    """Read and validate a configuration file.

    Raises:
        ConfigError: anchored to the offending file line where possible.
    """
    ini = _Anchored(path)
    cp = ini.cp
    out = ParsedConfig(path=str(path))

    for section in cp.sections():
        if section == "defaults":
            out.seed = ini.get_int(section, "seed")
            out.replications = ini.get_int(section, "replications")
            out.workers = ini.get_int(section, "workers")
            out.digits = ini.get_int(section, "digits")
            _reject_unknown(ini, section, {"seed", "replications", "workers", "digits"})
        elif section.startswith("curves:"):
            out.curves.append(_parse_curves_section(ini, section))
        elif section == "tables":
            out.tables = _parse_tables_section(ini, section)
        else:
            ini.fail(
                section, None,
                f"unknown section [{section}]; expected [defaults], [tables] "
                "or [curves:<name>]",
            )

    seen = {}
    for job in out.curves:
        key = (job.model.id, job.n)
        if key in seen:
            raise ConfigError(
                f"duplicate curves experiment for model={job.model.id}, n={job.n} "
                f"(sections [curves:{seen[key]}] and [curves:{job.name}] would "
                "write the same output file)",
                ini.path,
                ini.line_of(f"curves:{job.name}"),
            )
        seen[key] = job.name
    return out


def _reject_unknown(ini: _Anchored, section: str, allowed: set):
    for key in ini.cp.options(section):
        if key not in allowed:
            ini.fail(section, key, f"unknown key {key!r} in [{section}]")


def _parse_curves_section(ini: _Anchored, section: str) -> CurvesJob:
    cp = ini.cp
    _reject_unknown(
        ini, section, {"model", "n", "estimators", "replications", "k_min", "k_max"}
    )
    for req in ("model", "n", "estimators"):
        if not cp.has_option(section, req):
            ini.fail(section, None, f"[{section}] is missing required key {req!r}")
    try:
        model = get_model(cp.get(section, "model"))
    except ParameterError as exc:
        ini.fail(section, "model", str(exc))
    n = ini.get_int(section, "n", required=True)
    if n < 2:
        ini.fail(section, "n", f"n must be >= 2, got {n}")
    try:
        estimators = parse_estimators(cp.get(section, "estimators"))
    except ParameterError as exc:
        ini.fail(section, "estimators", str(exc))
    k_min = ini.get_int(section, "k_min")
    k_max = ini.get_int(section, "k_max")
    k_range = None
    if k_min is not None or k_max is not None:
        k_range = (k_min if k_min is not None else 1,
                   k_max if k_max is not None else n - 1)
        if not (1 <= k_range[0] <= k_range[1] <= n - 1):
            ini.fail(section, "k_min", f"k range {k_range} not within [1, {n - 1}]")
    return CurvesJob(
        name=section.split(":", 1)[1],
        model=model,
        n=n,
        estimators=estimators,
        replications=ini.get_int(section, "replications"),
        k_range=k_range,
    )


def _parse_tables_section(ini: _Anchored, section: str) -> TablesJob:
    cp = ini.cp
    models = []
    if cp.has_option(section, "models"):
        for name in _split_list(cp.get(section, "models")):
            try:
                models.append(get_model(name))
            except ParameterError as exc:
                ini.fail(section, "models", str(exc))
    else:
        models = [get_model(mid) for mid in _MENU_SPECS]
    n_grid = DEFAULT_N_GRID
    if cp.has_option(section, "n_grid"):
        try:
            n_grid = tuple(int(t) for t in _split_list(cp.get(section, "n_grid")))
        except ValueError:
            ini.fail(section, "n_grid", "n_grid must be a comma-separated list of integers")
        if not n_grid or any(n < 2 for n in n_grid):
            ini.fail(section, "n_grid", f"invalid n grid {n_grid}")
    menu = {m.id: menu_for(m) for m in models}
    for key in cp.options(section):
        if not key.startswith("estimators."):
            if key not in ("models", "n_grid", "replications"):
                ini.fail(section, key, f"unknown key {key!r} in [tables]")
            continue
        mid = key.split(".", 1)[1]
        try:
            model = get_model(mid)
        except ParameterError as exc:
            ini.fail(section, key, str(exc))
        if model.id not in menu:
            ini.fail(section, key, f"model {model.id!r} is not in the tables model list")
        try:
            menu[model.id] = parse_estimators(cp.get(section, key))
        except ParameterError as exc:
            ini.fail(section, key, str(exc))
    return TablesJob(
        models=tuple(models),
        n_grid=n_grid,
        menu=menu,
        replications=ini.get_int(section, "replications"),
    )
