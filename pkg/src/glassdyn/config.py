"""Experiment configuration: flat ``section.key = value`` text."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

DEFAULTS: dict[str, str] = {
    "experiment.name": "",
    "experiment.replicas": "",
    "experiment.seed": "0",
    "experiment.out": "",
    "graph.recipe": "",
    "coupling.descriptor": "",
    "dynamics.horizon": "",
    "dynamics.c": "",
    "dynamics.max_length": "",
    "dynamics.boundary": "",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Empty strings mean "use the experiment's default"."""

    name: str
    replicas: int | None = None
    seed: int = 0
    out: str = ""
    graph: str = ""
    coupling: str = ""
    horizon: float | None = None
    c: float | None = None
    max_length: int | None = None
    boundary: str = ""

    def to_text(self) -> str:
        vals = {
            "experiment.name": self.name,
            "experiment.replicas": "" if self.replicas is None else str(self.replicas),
            "experiment.seed": str(self.seed),
            "experiment.out": self.out,
            "graph.recipe": self.graph,
            "coupling.descriptor": self.coupling,
            "dynamics.horizon": "" if self.horizon is None else repr(self.horizon),
            "dynamics.c": "" if self.c is None else repr(self.c),
            "dynamics.max_length": "" if self.max_length is None else str(self.max_length),
            "dynamics.boundary": self.boundary,
        }
        return "".join(f"{k} = {v}\n" for k, v in vals.items() if v != "")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_config(text: str) -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = val
    vals = {**DEFAULTS, **raw}
    if not vals["experiment.name"]:
        raise ConfigError("experiment.name is required")

    def num(key, conv):
        v = vals[key]
        if v == "":
            return None
        try:
            return conv(v)
        except ValueError:
            raise ConfigError(f"{key}: not a decimal number: {v!r}") from None

    return ExperimentConfig(
        name=vals["experiment.name"],
        replicas=num("experiment.replicas", int),
        seed=num("experiment.seed", int) or 0,
        out=vals["experiment.out"],
        graph=vals["graph.recipe"],
        coupling=vals["coupling.descriptor"],
        horizon=num("dynamics.horizon", float),
        c=num("dynamics.c", float),
        max_length=num("dynamics.max_length", int),
        boundary=vals["dynamics.boundary"],
    )


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
