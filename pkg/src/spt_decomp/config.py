"""Experiment configuration files.

INI syntax (``configparser``), all sections optional::

    [market]
    source = gbm               ; gbm | csv
    csv = caps.csv             ; source = csv only, relative to the config file
    n = 5
    variance = 0.04            ; diagonal covariance shortcut
    covariance = 0.04,0;0,0.04 ; full matrix, rows separated by ';'
    drift = 0.0                ; scalar or one value per stock
    initial_caps = 500,400,300,200,100
    horizon = 1.0
    steps = 252

    [portfolio]
    generator = entropy        ; market | geom | entropy | diversity:p=.. | constweight:w=..
    rule = generator           ; generator | market | equal | constant:w1,.. | buyhold:h1,..

    [experiment]
    seeds = 0,1,2
    refinements = 252,504,1008

    [leapfrog]
    caps = 400,300,270,100     ; pre-swap caps
    m = 2                      ; index size; ranks m and m+1 swap

    [output]
    dir = out
    format = both              ; json | csv | both

Lists are comma separated. Lines starting with ``;`` or ``#`` are comments.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .exceptions import ValidationError
from .market import GbmSpec

FORMATS = ("json", "csv", "both")

DEFAULT_CONFIG = """\
[market]
source = gbm
n = 5
variance = 0.04
drift = 0.0
initial_caps = 500,400,300,200,100
horizon = 1.0
steps = 252

[portfolio]
generator = entropy
rule = generator

[experiment]
seeds = 0
refinements = 252,504,1008

[leapfrog]
caps = 400,300,270,100
m = 2

[output]
dir = out
format = both
"""


def _floats(text: str, what: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, what: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated integers, got {text!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    gbm: Optional[GbmSpec]
    csv_path: Optional[Path]
    generator: Optional[str]
    rule: str
    seeds: Tuple[int, ...]
    refinements: Tuple[int, ...]
    leapfrog_caps: Tuple[float, ...]
    leapfrog_m: int
    output: Path
    format: str
    text: str = field(default="", repr=False)

    def __post_init__(self):
        if not self.seeds:
            raise ValidationError("at least one seed is required")
        if any(b <= a for a, b in zip(self.refinements, self.refinements[1:])):
            raise ValidationError("refinements must be strictly increasing")
        if not self.refinements:
            raise ValidationError("at least one refinement level is required")
        if self.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.gbm is None and self.csv_path is None:
            raise ValidationError("market needs either a GBM spec or a CSV path")

    def with_overrides(self, out=None, seeds=None, fmt=None) -> "ExperimentConfig":
        changes = {}
        if out is not None:
            changes["output"] = Path(out)
        if seeds is not None:
            changes["seeds"] = tuple(seeds)
        if fmt is not None:
            changes["format"] = fmt
        return replace(self, **changes) if changes else self

    def gbm_for(self, seed: int, steps: Optional[int] = None) -> GbmSpec:
        changes = {"seed": seed}
        if steps is not None:
            changes["steps"] = steps
        return self.gbm.with_(**changes)

    def resolved_text(self) -> str:
        """Canonical INI text of the effective configuration."""
        cp = configparser.ConfigParser(interpolation=None)
        cp.read_string(self.text or DEFAULT_CONFIG)
        cp.set("experiment", "seeds", ",".join(str(s) for s in self.seeds))
        if not cp.has_section("output"):
            cp.add_section("output")
        # the output directory is where this text is written, not part of it
        cp.remove_option("output", "dir")
        cp.set("output", "format", self.format)
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            for key, value in cp.items(section):
                lines.append(f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)


def _market_section(sec, base_dir: Path):
    source = sec.get("source", "gbm").strip()
    if source == "csv":
        if "csv" not in sec:
            raise ValidationError("[market] source = csv needs a 'csv' path")
        path = Path(sec["csv"].strip())
        if not path.is_absolute():
            path = base_dir / path
        return None, path
    if source != "gbm":
        raise ValidationError(f"[market] source must be gbm or csv, got {source!r}")
    n = int(sec.get("n", "5"))
    if "covariance" in sec:
        rows = [_floats(r, "covariance") for r in sec["covariance"].split(";")]
        cov = np.array(rows)
    else:
        cov = float(sec.get("variance", "0.04")) * np.eye(n)
    drift = _floats(sec.get("drift", "0.0"), "drift")
    if len(drift) == 1:
        drift = drift * n
    caps = _floats(sec.get("initial_caps", ",".join(["100"] * n)), "initial_caps")
    spec = GbmSpec(
        n=n,
        drift=drift,
        covariance=cov.tolist(),
        initial_caps=caps,
        horizon=float(sec.get("horizon", "1.0")),
        steps=int(sec.get("steps", "252")),
        seed=0,
    )
    return spec, None


def parse_config(text: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"malformed config: {exc}") from None
    for name in ("market", "portfolio", "experiment", "leapfrog", "output"):
        if not cp.has_section(name):
            cp.add_section(name)
    try:
        gbm, csv_path = _market_section(cp["market"], base_dir)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"[market]: {exc}") from None
    port = cp["portfolio"]
    generator = port.get("generator", "").strip() or None
    rule = port.get("rule", "generator" if generator else "market").strip()
    if rule == "generator" and generator is None:
        raise ValidationError("[portfolio] rule = generator needs a generator")
    exp = cp["experiment"]
    leap = cp["leapfrog"]
    out = cp["output"]
    return ExperimentConfig(
        gbm=gbm,
        csv_path=csv_path,
        generator=generator,
        rule=rule,
        seeds=tuple(_ints(exp.get("seeds", "0"), "seeds")),
        refinements=tuple(_ints(exp.get("refinements", "252,504,1008"), "refinements")),
        leapfrog_caps=tuple(_floats(leap.get("caps", "400,300,270,100"), "leapfrog caps")),
        leapfrog_m=int(leap.get("m", "2")),
        output=Path(out.get("dir", "out").strip()),
        format=out.get("format", "both").strip(),
        text=_strip_comments(cp),
    )


def _strip_comments(cp: configparser.ConfigParser) -> str:
    lines = []
    for section in cp.sections():
        lines.append(f"[{section}]")
        for key, value in cp.items(section, raw=True):
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def load_config(path=None) -> ExperimentConfig:
    if path is None:
        return parse_config(DEFAULT_CONFIG)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)
