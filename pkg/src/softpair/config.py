"""Run configuration: a flat dotted-key text format with exact round-trips.

A config file is plain text, one ``key = value`` per line, ``#`` comments and
blank lines ignored.  Keys are dotted (section.field); unknown or duplicate
keys are errors that name the line.  Every field has a default, so the empty
file is a valid minimal run.  Floats are written with ``repr`` and parsed
with ``float``, so serialize -> parse -> serialize is the identity and two
configs compare equal field by field, bit by bit.

Sections and fields
-------------------
emission.alpha .e_total .e_a .m_b .e_min .kappa_rad .kappa_par .k_max
generator.seed .n_events .smear_sigma .max_retries
generator.settings_a  generator.settings_b   unit triplets "x,y,z ; x,y,z"
cut.solid_angle                              steradians, (0, 4*pi]
cut.e_window                                 "lo hi" or empty for none
analysis.correlations                        index pairs "ia:ib ia:ib ..."
analysis.chsh                                "ia ia2 ib ib2" or empty
analysis.violations                          true / false
run.out_dir                                  output directory ("" = unset)
run.log_level                                debug / info / warning / error

Analysis entries reference generator settings by index, never by value, so
estimates always match generated axes exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .analysis import CoincidenceCut
from .errors import ConfigError, ParameterError
from .events import GeneratorConfig
from .emission import EmissionParams
from .quantum import Direction

_LOG_LEVELS = ("debug", "info", "warning", "error")


@dataclass(frozen=True)
class RunConfig:
    """Everything one reproducible run needs: generation, cut, analyses, output."""

    generator: GeneratorConfig
    cut: CoincidenceCut
    correlations: tuple[tuple[int, int], ...] = ((0, 0),)
    chsh: tuple[int, int, int, int] | None = None
    violations: bool = True
    out_dir: str | None = None
    log_level: str = "info"

    def __post_init__(self):
        n_a = len(self.generator.settings_a)
        n_b = len(self.generator.settings_b)
        for ia, ib in self.correlations:
            if not (0 <= ia < n_a and 0 <= ib < n_b):
                raise ParameterError(
                    f"correlations index pair ({ia}, {ib}) out of range for "
                    f"{n_a} x {n_b} settings"
                )
        if self.chsh is not None:
            ia, ia2, ib, ib2 = self.chsh
            if not (0 <= ia < n_a and 0 <= ia2 < n_a and 0 <= ib < n_b and 0 <= ib2 < n_b):
                raise ParameterError(
                    f"chsh indices {self.chsh} out of range for {n_a} x {n_b} settings"
                )
        if self.log_level not in _LOG_LEVELS:
            raise ParameterError(f"log_level must be one of {_LOG_LEVELS}, got {self.log_level!r}")


def default_config() -> RunConfig:
    return RunConfig(generator=GeneratorConfig(), cut=CoincidenceCut())


# ---------------------------------------------------------------- formatting

def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_directions(dirs: tuple[Direction, ...]) -> str:
    return " ; ".join(f"{_fmt_float(d.x)},{_fmt_float(d.y)},{_fmt_float(d.z)}" for d in dirs)


def config_to_items(config: RunConfig) -> list[tuple[str, str]]:
    """The full key/value listing, in canonical order."""
    em = config.generator.emission
    gen = config.generator
    cut = config.cut
    items = [
        ("emission.alpha", _fmt_float(em.alpha)),
        ("emission.e_total", _fmt_float(em.e_total)),
        ("emission.e_a", _fmt_float(em.e_a)),
        ("emission.m_b", _fmt_float(em.m_b)),
        ("emission.e_min", _fmt_float(em.e_min)),
        ("emission.kappa_rad", _fmt_float(em.kappa_rad)),
        ("emission.kappa_par", _fmt_float(em.kappa_par)),
        ("emission.k_max", str(em.k_max)),
        ("generator.seed", str(gen.seed)),
        ("generator.n_events", str(gen.n_events)),
        ("generator.smear_sigma", _fmt_float(gen.smear_sigma)),
        ("generator.max_retries", str(gen.max_retries)),
        ("generator.settings_a", _fmt_directions(gen.settings_a)),
        ("generator.settings_b", _fmt_directions(gen.settings_b)),
        ("cut.solid_angle", _fmt_float(cut.solid_angle)),
        ("cut.e_window", "" if cut.e_window is None
         else f"{_fmt_float(cut.e_window[0])} {_fmt_float(cut.e_window[1])}"),
        ("analysis.correlations", " ".join(f"{ia}:{ib}" for ia, ib in config.correlations)),
        ("analysis.chsh", "" if config.chsh is None else " ".join(str(i) for i in config.chsh)),
        ("analysis.violations", "true" if config.violations else "false"),
        ("run.out_dir", config.out_dir or ""),
        ("run.log_level", config.log_level),
    ]
    return items


def serialize_config(config: RunConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in config_to_items(config))


# ------------------------------------------------------------------- parsing

def _parse_int(raw: str, field: str, line: int | None) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", field, line) from None


def _parse_float(raw: str, field: str, line: int | None) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", field, line) from None


def _parse_bool(raw: str, field: str, line: int | None) -> bool:
    low = raw.strip().lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise ConfigError(f"expected true or false, got {raw!r}", field, line)


def _parse_directions(raw: str, field: str, line: int | None) -> tuple[Direction, ...]:
    dirs = []
    for part in raw.split(";"):
        comps = [c.strip() for c in part.split(",")]
        if len(comps) != 3:
            raise ConfigError(f"expected x,y,z triplets separated by ';', got {part.strip()!r}",
                              field, line)
        x, y, z = (_parse_float(c, field, line) for c in comps)
        try:
            dirs.append(Direction(x, y, z))
        except ParameterError as exc:
            raise ConfigError(str(exc), field, line) from None
    if not dirs:
        raise ConfigError("expected at least one direction", field, line)
    return tuple(dirs)


def _parse_pairs(raw: str, field: str, line: int | None) -> tuple[tuple[int, int], ...]:
    pairs = []
    for tok in raw.split():
        if ":" not in tok:
            raise ConfigError(f"expected ia:ib pairs, got {tok!r}", field, line)
        a, b = tok.split(":", 1)
        pairs.append((_parse_int(a, field, line), _parse_int(b, field, line)))
    if not pairs:
        raise ConfigError("expected at least one ia:ib pair", field, line)
    return tuple(pairs)


_KEYS = {k for k, _ in config_to_items(default_config())}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse config text over ``base`` (package defaults when None)."""
    base = default_config() if base is None else base
    raw = dict(config_to_items(base))
    lines: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", field=key, line=lineno)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})",
                              field=key, line=lineno)
        lines[key] = lineno
        raw[key] = value

    def ln(key: str) -> int | None:
        return lines.get(key)

    def wrap(section: str, build):
        """Build a dataclass, renaming ParameterError to the offending field."""
        try:
            return build()
        except ParameterError as exc:
            name = str(exc).split()[0]
            field = f"{section}.{name}"
            return_line = ln(field) if field in _KEYS else None
            raise ConfigError(str(exc), field if field in _KEYS else section,
                              return_line) from None

    emission = wrap("emission", lambda: EmissionParams(
        alpha=_parse_float(raw["emission.alpha"], "emission.alpha", ln("emission.alpha")),
        e_total=_parse_float(raw["emission.e_total"], "emission.e_total", ln("emission.e_total")),
        e_a=_parse_float(raw["emission.e_a"], "emission.e_a", ln("emission.e_a")),
        m_b=_parse_float(raw["emission.m_b"], "emission.m_b", ln("emission.m_b")),
        e_min=_parse_float(raw["emission.e_min"], "emission.e_min", ln("emission.e_min")),
        kappa_rad=_parse_float(raw["emission.kappa_rad"], "emission.kappa_rad",
                               ln("emission.kappa_rad")),
        kappa_par=_parse_float(raw["emission.kappa_par"], "emission.kappa_par",
                               ln("emission.kappa_par")),
        k_max=_parse_int(raw["emission.k_max"], "emission.k_max", ln("emission.k_max")),
    ))
    generator = wrap("generator", lambda: GeneratorConfig(
        emission=emission,
        settings_a=_parse_directions(raw["generator.settings_a"], "generator.settings_a",
                                     ln("generator.settings_a")),
        settings_b=_parse_directions(raw["generator.settings_b"], "generator.settings_b",
                                     ln("generator.settings_b")),
        seed=_parse_int(raw["generator.seed"], "generator.seed", ln("generator.seed")),
        n_events=_parse_int(raw["generator.n_events"], "generator.n_events",
                            ln("generator.n_events")),
        smear_sigma=_parse_float(raw["generator.smear_sigma"], "generator.smear_sigma",
                                 ln("generator.smear_sigma")),
        max_retries=_parse_int(raw["generator.max_retries"], "generator.max_retries",
                               ln("generator.max_retries")),
    ))
    window_raw = raw["cut.e_window"]
    if window_raw.strip():
        toks = window_raw.split()
        if len(toks) != 2:
            raise ConfigError("expected 'lo hi' or empty", "cut.e_window", ln("cut.e_window"))
        e_window = (_parse_float(toks[0], "cut.e_window", ln("cut.e_window")),
                    _parse_float(toks[1], "cut.e_window", ln("cut.e_window")))
    else:
        e_window = None
    cut = wrap("cut", lambda: CoincidenceCut(
        solid_angle=_parse_float(raw["cut.solid_angle"], "cut.solid_angle",
                                 ln("cut.solid_angle")),
        e_window=e_window,
    ))
    chsh_raw = raw["analysis.chsh"].strip()
    if chsh_raw:
        toks = chsh_raw.split()
        if len(toks) != 4:
            raise ConfigError("expected four indices 'ia ia2 ib ib2' or empty",
                              "analysis.chsh", ln("analysis.chsh"))
        chsh = tuple(_parse_int(t, "analysis.chsh", ln("analysis.chsh")) for t in toks)
    else:
        chsh = None
    correlations = _parse_pairs(raw["analysis.correlations"], "analysis.correlations",
                                ln("analysis.correlations"))
    violations = _parse_bool(raw["analysis.violations"], "analysis.violations",
                             ln("analysis.violations"))
    out_dir = raw["run.out_dir"].strip() or None
    log_level = raw["run.log_level"].strip()
    try:
        return RunConfig(
            generator=generator, cut=cut, correlations=correlations, chsh=chsh,
            violations=violations, out_dir=out_dir, log_level=log_level,
        )
    except ParameterError as exc:
        msg = str(exc)
        field = "analysis.correlations"
        if "chsh" in msg:
            field = "analysis.chsh"
        elif "log_level" in msg:
            field = "run.log_level"
        raise ConfigError(msg, field, ln(field)) from None


def with_value(config: RunConfig, key: str, raw_value: str) -> RunConfig:
    """A copy of ``config`` with one dotted key replaced (sweep machinery)."""
    if key not in _KEYS:
        raise ConfigError(f"unknown key {key!r}", field=key)
    return parse_config(f"{key} = {raw_value}\n", base=config)


def with_seed(config: RunConfig, seed: int) -> RunConfig:
    return replace(config, generator=replace(config.generator, seed=seed))


def with_out_dir(config: RunConfig, out_dir: str) -> RunConfig:
    return replace(config, out_dir=out_dir)


FULL_SOLID_ANGLE = 4.0 * math.pi
