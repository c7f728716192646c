"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored.  Lists (``marks``) are comma
separated.  Recognised keys are the fields of :class:`ExperimentConfig`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from ..errors import BoundsError

KINDS = ("sle-sample", "ising-connectivity", "fk-connectivity", "resample-chain", "verify-partition", "driver-qv")
OUTPUT_ENV = "GLOBALSLE_OUTPUT_DIR"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "sle-sample"
    kappa: float | None = None
    q: float | None = None
    delta: float = 1.0 / 16
    ell: float = 1.0
    marks: tuple = ()
    pattern: str | None = None
    replicas: int = 10
    sweeps: int | None = None
    method: str = "heat-bath"
    seed: int = 0
    output: str | None = None
    n: int = 2
    trials: int = 1000
    steps: int = 100
    stride: int = 1
    T: float = 1.0
    dt: float = 1e-3
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise BoundsError(f"unknown kind {self.kind!r}")
        if self.kappa is not None and not 0 < self.kappa < 8:
            raise BoundsError("kappa must lie in (0, 8)")
        if self.q is not None and not 1 <= self.q < 4:
            raise BoundsError("q must lie in [1, 4)")
        if not (self.delta > 0 and self.ell > 0):
            raise BoundsError("delta and ell must be positive")
        if self.replicas < 1 or self.trials < 1 or self.workers < 1 or self.stride < 1:
            raise BoundsError("replicas, trials, workers and stride must be positive")
        if self.sweeps is not None and self.sweeps < 1:
            raise BoundsError("sweeps must be positive")
        if self.steps < 0 or self.n < 1:
            raise BoundsError("steps must be nonnegative and n positive")
        if not (self.T > 0 and 0 < self.dt <= self.T):
            raise BoundsError("need 0 < dt <= T")
        if any(not 0 <= m < 1 for m in self.marks) and self.kind in ("ising-connectivity", "fk-connectivity"):
            raise BoundsError("lattice marks are perimeter fractions in [0, 1)")
        return self

    def output_dir(self) -> Path:
        return Path(self.output or os.environ.get(OUTPUT_ENV, "globalsle-output"))

    def updated(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw).validate()


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    raw = raw.strip()
    t = str(_TYPES[key])
    if key == "marks":
        return tuple(float(v) for v in raw.replace(" ", "").split(",") if v)
    if raw.lower() in ("none", ""):
        return None
    if "int" in t:
        return int(raw)
    if "float" in t:
        return float(raw)
    return raw


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ValueError(f"line {n}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
