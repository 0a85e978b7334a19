"""Experiment configuration: JSON-backed specs for games, analysis, training.

A spec file is a single JSON object with a ``game`` section and optional
``analysis`` and ``training`` sections. Every bundled preset round-trips
through this format losslessly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .engine import SkewRule, TrainSettings
from .learning import LearningRateSchedule
from .market import ArrivalModel, InventoryPenalty, SpreadGrid

__all__ = [
    "ConfigError",
    "GameConfig",
    "AnalysisConfig",
    "TrainingConfig",
    "ExperimentSpec",
    "load_spec",
    "save_spec",
]


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class GameConfig:
    """Market game definition; drives both tensors and simulation."""

    levels: tuple[float, ...]
    weights: tuple[float, ...]
    sigma: float = 0.1
    n_agents: int = 2
    xi: float = 0.0
    two_sided: bool = True
    explicit_side_payoff: tuple[tuple[float, ...], ...] | None = None

    def grid(self) -> SpreadGrid:
        return SpreadGrid(self.levels)

    def arrival_model(self) -> ArrivalModel:
        return ArrivalModel(self.weights, self.sigma, self.n_agents)

    def penalty(self) -> InventoryPenalty:
        return InventoryPenalty(self.xi)

    def validate(self) -> None:
        try:
            self.grid()
            self.arrival_model()
            self.penalty()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if len(self.levels) != len(self.weights):
            raise ConfigError("levels and weights must have the same length")
        if not self.two_sided and self.xi != 0.0:
            raise ConfigError("inventory penalty requires two-sided quoting")
        if self.explicit_side_payoff is not None:
            z = self.explicit_side_payoff
            if len(z) != len(self.levels) or any(len(r) != len(self.levels) for r in z):
                raise ConfigError("explicit payoff matrix must be MxM")
            if self.two_sided:
                raise ConfigError("explicit payoff overrides are one-side only")


@dataclass(frozen=True)
class AnalysisConfig:
    temperature: float = 0.1
    gamma: float = 0.0
    xi_values: tuple[float, ...] | None = None
    u: float | None = None
    continuation_from: float | None = None
    tol: float = 1e-12
    damping: float = 0.5
    max_iter: int = 1_000_000

    def validate(self) -> None:
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must lie in [0, 1)")
        if self.xi_values is not None and any(x < 0 for x in self.xi_values):
            raise ConfigError("xi values must be non-negative")


@dataclass(frozen=True)
class TrainingConfig:
    temperature: float = 0.1
    gamma: float = 0.0
    schedule_kind: str = "harmonic"
    schedule_value: float = 1e4
    q0: tuple[float, ...] | float = 0.0
    memory: bool = False
    instances: int = 10
    budget: int = 2_000_000
    stability_window: int | None = 1_000_000
    snapshot_every: int = 10_000
    last_window: int = 1_000
    skew_enabled: bool = False
    skew_upper: float = 100.0
    skew_lower: float = -100.0
    update_on_override: bool = True
    seed: int = 1234567

    def settings(self, game: GameConfig) -> TrainSettings:
        skew = (
            SkewRule.for_grid(len(game.levels), self.skew_upper, self.skew_lower)
            if self.skew_enabled
            else SkewRule()
        )
        return TrainSettings(
            temperature=self.temperature,
            gamma=self.gamma,
            schedule=LearningRateSchedule(self.schedule_kind, self.schedule_value),
            q0=self.q0,
            memory=self.memory,
            budget=self.budget,
            stability_window=self.stability_window,
            snapshot_every=self.snapshot_every,
            last_window=self.last_window,
            skew=skew,
            update_on_override=self.update_on_override,
        )

    def validate(self, game: GameConfig) -> None:
        if game.explicit_side_payoff is not None:
            raise ConfigError("cannot train on an explicit payoff override; "
                              "training needs market mechanics")
        if self.instances < 1:
            raise ConfigError("need at least one instance")
        try:
            LearningRateSchedule(self.schedule_kind, self.schedule_value)
            self.settings(game)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        n_actions = len(game.levels) ** 2 if game.two_sided else len(game.levels)
        if not isinstance(self.q0, (int, float)) and len(self.q0) != n_actions:
            raise ConfigError("q0 vector length must match the action count")
        if self.skew_enabled and not game.two_sided:
            raise ConfigError("skew rule requires two-sided quoting")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    game: GameConfig
    analysis: AnalysisConfig | None = None
    training: TrainingConfig | None = None

    def validate(self) -> None:
        if not self.name:
            raise ConfigError("experiment needs a name")
        self.game.validate()
        if self.analysis is not None:
            self.analysis.validate()
        if self.training is not None:
            self.training.validate(self.game)

    def to_dict(self) -> dict:
        out = {"name": self.name, "game": asdict(self.game)}
        if self.analysis is not None:
            out["analysis"] = asdict(self.analysis)
        if self.training is not None:
            out["training"] = asdict(self.training)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        try:
            game_data = dict(data["game"])
            if game_data.get("explicit_side_payoff") is not None:
                game_data["explicit_side_payoff"] = tuple(
                    tuple(float(x) for x in row) for row in game_data["explicit_side_payoff"]
                )
            game_data["levels"] = tuple(game_data["levels"])
            game_data["weights"] = tuple(game_data["weights"])
            game = GameConfig(**game_data)
            analysis = None
            if data.get("analysis") is not None:
                adata = dict(data["analysis"])
                if adata.get("xi_values") is not None:
                    adata["xi_values"] = tuple(adata["xi_values"])
                analysis = AnalysisConfig(**adata)
            training = None
            if data.get("training") is not None:
                tdata = dict(data["training"])
                if isinstance(tdata.get("q0"), (list, tuple)):
                    tdata["q0"] = tuple(tdata["q0"])
                training = TrainingConfig(**tdata)
            spec = cls(name=data["name"], game=game, analysis=analysis, training=training)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed experiment spec: {exc}") from exc
        spec.validate()
        return spec


def load_spec(path: str | Path) -> ExperimentSpec:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read spec {path}: {exc}") from exc
    return ExperimentSpec.from_dict(data)


def save_spec(spec: ExperimentSpec, path: str | Path) -> None:
    Path(path).write_text(spec.to_json() + "\n")
