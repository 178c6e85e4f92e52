"""Scenario configuration files.

A config is an INI-style text file of ``key = value`` lines under
``[section]`` headers. Section names may contain dots, so every value has a
flat dotted address ``<section>.<key>`` (e.g. ``scenario.pt_qubit.varpi``),
which is also the form accepted by command-line overrides. Lists are
comma-separated. Run manifests use the same format, so a manifest can be fed
back in as a config.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

SCENARIOS = (
    "phase_diagram",
    "amplitude_damping",
    "pt_qubit",
    "xxz",
    "custom_channel",
    "custom_nonhermitian",
)
EMISSIONS = ("qsl", "delta", "delta_normalized", "kappa_min", "entropy_series")

# key prefixes written by a run and skipped when a manifest is read back as a config
RESULT_PREFIXES = ("manifest.", "result.")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case (L, L_A, Delta)
    return cp


def read_flat(text: str) -> dict[str, str]:
    """Parse config text into ``{dotted.key: raw value}``."""
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    flat = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            flat[f"{section}.{key}"] = value.strip()
    return flat


def _split_key(dotted: str, known_sections) -> tuple[str, str]:
    best = max((s for s in known_sections if dotted.startswith(s + ".")), key=len, default=None)
    if best is not None:
        return best, dotted[len(best) + 1:]
    section, _, key = dotted.rpartition(".")
    if not section:
        raise ConfigError(f"key '{dotted}' has no section")
    return section, key


def write_flat(flat: dict[str, str], known_sections=("result.checksums",)) -> str:
    """Inverse of :func:`read_flat`; keys are grouped by section in insertion order.

    A key belongs to the longest section in ``known_sections`` that prefixes
    it, otherwise everything before its last dot is the section. This lets
    keys such as file names contain dots.
    """
    sections: dict[str, list[tuple[str, str]]] = {}
    for dotted, value in flat.items():
        section, key = _split_key(dotted, known_sections)
        sections.setdefault(section, []).append((key, value))
    buf = io.StringIO()
    for section, items in sections.items():
        buf.write(f"[{section}]\n")
        for key, value in items:
            buf.write(f"{key} = {value}\n")
        buf.write("\n")
    return buf.getvalue()


def parse_override(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or "." not in key:
        raise ConfigError(f"override '{text}' must look like section.key=value")
    return key, value.strip()


def as_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got '{raw}'") from None


def as_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got '{raw}'") from None


def as_bool(key: str, raw: str) -> bool:
    low = raw.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ConfigError(f"{key}: expected true/false, got '{raw}'")


def as_float_list(key: str, raw: str) -> list[float]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{key}: list is empty")
    return [as_float(key, s) for s in items]


def as_int_list(key: str, raw: str) -> list[int]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"{key}: list is empty")
    return [as_int(key, s) for s in items]


def fmt_list(xs) -> str:
    return ", ".join(repr(x) for x in xs)


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one scenario run.

    ``params`` holds the raw ``scenario.<name>.*`` values keyed by the last
    path component; the scenario runner converts and validates them.
    """

    scenario: str
    alphas: list[float]
    mus: list[float]
    t_max: float
    n_points: int
    params: dict[str, str] = field(default_factory=dict)
    out_dir: str = "out"
    emit: dict[str, bool] = field(default_factory=lambda: {e: True for e in EMISSIONS})
    strict: bool = False

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario.name: unknown scenario '{self.scenario}'")
        if not self.alphas:
            raise ConfigError("entropy.alpha: list is empty")
        if not self.mus:
            raise ConfigError("entropy.mu: list is empty")
        if any(not a > 0 for a in self.alphas):
            raise ConfigError("entropy.alpha: values must be positive")
        if self.n_points < 2:
            raise ConfigError(f"time.n_points: need at least 2, got {self.n_points}")
        if not self.t_max > 0:
            raise ConfigError(f"time.t_max: must be positive, got {self.t_max}")
        unknown = set(self.emit) - set(EMISSIONS)
        if unknown:
            raise ConfigError(f"emit.{sorted(unknown)[0]}: unknown emission")

    @classmethod
    def from_flat(cls, flat: dict[str, str]) -> "ScenarioConfig":
        flat = {k: v for k, v in flat.items() if not k.startswith(RESULT_PREFIXES)}
        if "scenario.name" not in flat:
            raise ConfigError("scenario.name: missing")
        name = flat["scenario.name"]
        if name not in SCENARIOS:
            raise ConfigError(f"scenario.name: unknown scenario '{name}'")
        prefix = f"scenario.{name}."
        known = {
            "scenario.name",
            "entropy.alpha",
            "entropy.mu",
            "time.t_max",
            "time.n_points",
            "output.dir",
            "run.strict",
        } | {f"emit.{e}" for e in EMISSIONS}
        params = {}
        for key, value in flat.items():
            if key.startswith(prefix) and "." not in key[len(prefix):]:
                params[key[len(prefix):]] = value
            elif key not in known:
                raise ConfigError(f"{key}: unknown key")
        for req in ("entropy.alpha", "entropy.mu", "time.t_max", "time.n_points"):
            if req not in flat:
                raise ConfigError(f"{req}: missing")
        emit = {e: as_bool(f"emit.{e}", flat.get(f"emit.{e}", "true")) for e in EMISSIONS}
        return cls(
            scenario=name,
            alphas=as_float_list("entropy.alpha", flat["entropy.alpha"]),
            mus=as_float_list("entropy.mu", flat["entropy.mu"]),
            t_max=as_float("time.t_max", flat["time.t_max"]),
            n_points=as_int("time.n_points", flat["time.n_points"]),
            params=params,
            out_dir=flat.get("output.dir", "out"),
            emit=emit,
            strict=as_bool("run.strict", flat.get("run.strict", "false")),
        )

    def to_flat(self) -> dict[str, str]:
        flat = {
            "scenario.name": self.scenario,
            "entropy.alpha": fmt_list(self.alphas),
            "entropy.mu": fmt_list(self.mus),
            "time.t_max": repr(self.t_max),
            "time.n_points": str(self.n_points),
            "output.dir": self.out_dir,
            "run.strict": str(self.strict).lower(),
        }
        for e in EMISSIONS:
            flat[f"emit.{e}"] = str(self.emit.get(e, False)).lower()
        for key, value in self.params.items():
            flat[f"scenario.{self.scenario}.{key}"] = value
        return flat

    def param(self, key: str, default: str | None = None) -> str:
        if key in self.params:
            return self.params[key]
        if default is None:
            raise ConfigError(f"scenario.{self.scenario}.{key}: missing")
        return default


def load_config(path: str | Path, overrides: list[str] | None = None) -> ScenarioConfig:
    text = Path(path).read_text(encoding="utf-8")
    flat = read_flat(text)
    for item in overrides or []:
        key, value = parse_override(item)
        flat[key] = value
    return ScenarioConfig.from_flat(flat)
