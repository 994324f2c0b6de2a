"""Experiment configuration: one JSON file with six blocks."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .advisor import Constants, ProblemSpec
from .geometry import TruncatedCone, cone_from_config
from .models import SingularFunction, function_from_config
from .pencil import BCAssignment
from .wavelets import WaveletSystem
from .weighted import WeightParams

BLOCKS = ("geometry", "bc", "weights", "function", "wavelet", "experiment")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WaveletBlock:
    order: int = 4
    levels: int = 6
    grid: int = 64
    side: float | None = None  # cube side; defaults to twice the truncation radius

    def __post_init__(self):
        g = int(self.grid)
        if g < 2 or g & (g - 1):
            raise ConfigError("wavelet grid must be a power of two")
        if not 1 <= self.levels <= int(np.log2(g)):
            raise ConfigError(f"levels {self.levels} exceed log2(grid) = {int(np.log2(g))}")
        if self.order < 1:
            raise ConfigError("wavelet order must be >= 1")


@dataclass
class ExperimentConfig:
    geometry: dict
    bc: dict
    weights: dict = field(default_factory=dict)
    function: dict = field(default_factory=dict)
    wavelet: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)
    name: str = "run"
    source: str | None = None  # path the config was read from
    raw: bytes = b""

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, d: dict, source=None, raw: bytes = b"") -> "ExperimentConfig":
        unknown = set(d) - set(BLOCKS) - {"name"}
        if unknown:
            raise ConfigError(f"unknown config blocks {sorted(unknown)}")
        for b in ("geometry", "bc"):
            if b not in d:
                raise ConfigError(f"missing {b} block")
        name = d.get("name", Path(source).stem if source else "run")
        return cls(**{b: dict(d.get(b, {})) for b in BLOCKS}, name=name, source=source,
                   raw=raw or json.dumps(d, sort_keys=True).encode())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        raw = path.read_bytes()
        try:
            d = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
        return cls.from_dict(d, str(path), raw)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.raw).hexdigest()

    # -- derived objects

    @property
    def truncated_cone(self) -> TruncatedCone:
        return cone_from_config(self.geometry)

    @property
    def cone(self):
        return self.truncated_cone.cone

    @property
    def radius(self) -> float:
        return self.truncated_cone.radius

    @property
    def bc_assignment(self) -> BCAssignment:
        n = self.cone.n
        if "faces" in self.bc:
            return BCAssignment(tuple(self.bc["faces"]))
        return BCAssignment.uniform(self.bc.get("uniform", "D"), n)

    @property
    def weight_params(self) -> WeightParams:
        return WeightParams.from_config(self.weights)

    def problem(self) -> ProblemSpec:
        w = self.weights
        const = Constants(**self.bc.get("constants", {}))
        s = self.bc.get("s")
        return ProblemSpec(self.cone, self.bc_assignment, int(w["l"]), float(w.get("beta", 0.0)),
                           tuple(w["delta"]), self.radius,
                           f_in_L2=bool(self.bc.get("f_in_L2", True)),
                           homogeneous=bool(self.bc.get("homogeneous", True)),
                           s=None if s is None else float(s),
                           mean_zero=bool(self.bc.get("mean_zero", False)), constants=const)

    def singular_function(self) -> SingularFunction:
        if not self.function:
            raise ConfigError("no function block")
        return function_from_config(self.function, self.cone, self.bc_assignment, self.radius)

    @property
    def wavelet_block(self) -> WaveletBlock:
        return WaveletBlock(**self.wavelet)

    @property
    def wavelet_system(self) -> WaveletSystem:
        return WaveletSystem(self.wavelet_block.order)

    def sampling_box(self) -> tuple[tuple[float, float, float], float]:
        """Origin and side of the cube holding the truncated cone."""
        side = self.wavelet_block.side or 2.0 * self.radius
        return (-side / 2,) * 3, float(side)

    def section(self, name: str) -> dict:
        return dict(self.experiment.get(name, {}))

    @property
    def seed(self) -> int:
        return int(self.experiment.get("seed", 0))

    def validate(self) -> None:
        try:
            tk = cone_from_config(self.geometry)
        except (KeyError, TypeError) as e:
            raise ConfigError(f"bad geometry block: {e}") from e
        n = tk.cone.n
        faces = self.bc.get("faces")
        if faces is not None and len(faces) != n:
            raise ConfigError(f"bc block lists {len(faces)} faces, the cone has {n}")
        if self.weights:
            if "l" not in self.weights or "delta" not in self.weights:
                raise ConfigError("weights block needs l and delta")
            if len(self.weights["delta"]) != n:
                raise ConfigError(f"delta has {len(self.weights['delta'])} entries, the cone has {n} edges")
        if self.function.get("kind") == "edge" and "edge" in self.function:
            if not 0 <= int(self.function["edge"]) < n:
                raise ConfigError("function edge index out of range")
        if self.wavelet:
            WaveletBlock(**self.wavelet)
