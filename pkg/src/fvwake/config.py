"""Experiment configuration: strict JSON parsing and case presets.

A configuration document has sections model / scenario / objective /
optimizer plus output_dir and seed. Unknown keys anywhere are rejected.
Presets reproduce the two reference cases: 2D dynamic induction control
and 3D yaw control under a rotating wind direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .control import AdamConfig, EmpcConfig, ObjectiveConfig
from .model import InflowScenario, ModelConfig

CONTROL_NAMES = ("a", "psi")


def control_index(name: str, n_t: int) -> int:
    """Map a control name like 'a0' or 'psi1' to its slot index."""
    for prefix, offset in (("psi", 1), ("a", 0)):
        if name.startswith(prefix):
            t = int(name[len(prefix):])
            if not 0 <= t < n_t:
                raise ValueError(f"turbine index out of range in control name {name!r}")
            return 2 * t + offset
    raise ValueError(f"unknown control name {name!r}")


def _check_keys(section: str, data: dict, known) -> None:
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown {section} config keys: {sorted(unknown)}")


@dataclass
class OptimizerSettings:
    """Adam, receding-horizon loop and run-statistics settings."""

    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    iterations: int = 50
    yaw_scale: float = 1e-2
    total_steps: int = 150
    init_perturbation: float = 0.0
    snapshot_every: int = 25
    spin_up_steps: int | None = None
    spin_up_controls: list | None = None
    track_wind_yaw: bool = True
    stats_window_start: float = 20.0  # time units; summary statistics use t > this
    baseline_power: float | None = None

    KNOWN = (
        "alpha", "beta1", "beta2", "epsilon", "iterations", "yaw_scale",
        "total_steps", "init_perturbation", "snapshot_every", "spin_up_steps",
        "spin_up_controls", "track_wind_yaw", "stats_window_start",
        "baseline_power",
    )

    def adam_config(self) -> AdamConfig:
        return AdamConfig(
            alpha=self.alpha, beta1=self.beta1, beta2=self.beta2,
            epsilon=self.epsilon, iterations=self.iterations,
            yaw_scale=self.yaw_scale,
        )

    def empc_config(self) -> EmpcConfig:
        return EmpcConfig(
            total_steps=self.total_steps, iterations=self.iterations,
            init_perturbation=self.init_perturbation,
            snapshot_every=self.snapshot_every,
        )

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.KNOWN}

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerSettings":
        _check_keys("optimizer", data, cls.KNOWN)
        return cls(**data)


@dataclass
class ObjectiveSettings:
    """Raw objective section; resolved against the model's turbine count."""

    q_weights: list = field(default_factory=lambda: [-1.0, -1.0])
    r_weights: list = field(default_factory=lambda: [[10.0]])
    horizon: int = 100
    free_controls: list = field(default_factory=lambda: ["a0"])

    KNOWN = ("q_weights", "r_weights", "horizon", "free_controls")

    def resolve(self, model_config: ModelConfig) -> ObjectiveConfig:
        free_idx = [control_index(n, model_config.n_t) for n in self.free_controls]
        return ObjectiveConfig(
            q_weights=np.asarray(self.q_weights, dtype=float),
            r_matrix=np.asarray(self.r_weights, dtype=float),
            horizon=self.horizon,
            free_idx=np.asarray(free_idx, dtype=int),
        )

    def to_dict(self) -> dict:
        return {
            "q_weights": list(self.q_weights),
            "r_weights": np.asarray(self.r_weights, dtype=float).tolist(),
            "horizon": self.horizon,
            "free_controls": list(self.free_controls),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObjectiveSettings":
        _check_keys("objective", data, cls.KNOWN)
        return cls(**data)


@dataclass
class ExperimentConfig:
    model: ModelConfig
    scenario: InflowScenario
    objective: ObjectiveSettings
    optimizer: OptimizerSettings
    output_dir: str = "out"
    seed: int = 0

    def spin_up_controls(self) -> np.ndarray:
        if self.optimizer.spin_up_controls is not None:
            m = np.asarray(self.optimizer.spin_up_controls, dtype=float).ravel()
            if m.size != self.model.n_m_full:
                raise ValueError("spin_up_controls length must be n_t * n_c")
            return m
        m = np.zeros(self.model.n_m_full)
        m[0::2] = 0.33  # greedy induction everywhere by default
        return m

    def base_controls(self, k: int) -> np.ndarray:
        """Full control vector at absolute step k: spin-up values, with
        virtual-turbine yaw tracking the wind direction if enabled."""
        m = self.spin_up_controls().copy()
        if self.optimizer.track_wind_yaw:
            theta = self.scenario.direction(k, self.model.h)
            for t in range(self.model.n_t):
                if self.model.turbine_is_virtual[t]:
                    m[2 * t + 1] = theta
        return m

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "scenario": self.scenario.to_dict(),
            "objective": self.objective.to_dict(),
            "optimizer": self.optimizer.to_dict(),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _check_keys(
            "experiment", data,
            ("model", "scenario", "objective", "optimizer", "output_dir", "seed"),
        )
        n_d = data.get("model", {}).get("n_d", 2)
        base = cls.preset_3d_yaw() if n_d == 3 else cls.preset_2d_induction()
        merged = base.to_dict()
        for section in ("model", "scenario", "objective", "optimizer"):
            if section in data:
                merged[section] = {**merged[section], **data[section]}
        for key in ("output_dir", "seed"):
            if key in data:
                merged[key] = data[key]
        return cls(
            model=ModelConfig.from_dict(merged["model"]),
            scenario=InflowScenario.from_dict(merged["scenario"]),
            objective=ObjectiveSettings.from_dict(merged["objective"]),
            optimizer=OptimizerSettings.from_dict(merged["optimizer"]),
            output_dir=merged["output_dir"],
            seed=merged["seed"],
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def to_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def preset_2d_induction(cls) -> "ExperimentConfig":
        """2D dynamic induction control of the upstream turbine."""
        return cls(
            model=ModelConfig.defaults_2d(),
            scenario=InflowScenario(),
            objective=ObjectiveSettings(
                q_weights=[-1.0, -1.0], r_weights=[[10.0]],
                horizon=100, free_controls=["a0"],
            ),
            optimizer=OptimizerSettings(
                iterations=50, total_steps=150,
                spin_up_controls=[0.33, 0.0, 0.33, 0.0],
                stats_window_start=20.0,
            ),
        )

    @classmethod
    def preset_3d_yaw(cls) -> "ExperimentConfig":
        """3D yaw control under a wind direction change from 0 to -20 deg."""
        return cls(
            model=ModelConfig.defaults_3d(),
            scenario=InflowScenario(
                kind="rotating", start_angle=0.0,
                end_angle=np.deg2rad(-20.0), ramp_start=5.0, ramp_duration=10.0,
            ),
            objective=ObjectiveSettings(
                q_weights=[-1.0, -1.0], r_weights=[[0.025]],
                horizon=60, free_controls=["psi0"],
            ),
            optimizer=OptimizerSettings(
                iterations=10, total_steps=110,
                spin_up_controls=[0.33, np.deg2rad(30.0), 0.33, 0.0],
                stats_window_start=15.0,
            ),
        )
