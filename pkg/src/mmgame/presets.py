"""Built-in experiment presets.

Each preset is a self-contained :class:`~mmgame.config.ExperimentSpec`; given
only a seed it regenerates its documented CSV outputs. ``table*``/``figure*``
names identify the bundled reference datasets: two-spread stag-hunt and
prisoner's-dilemma games, the ten-spread one-side game, the four-spread
two-sided game with inventory aversion, and the memory-agent comparison.
"""

from __future__ import annotations

from .config import AnalysisConfig, ExperimentSpec, GameConfig, TrainingConfig

__all__ = ["PRESETS", "PRESET_GROUPS", "get_preset", "preset_names"]

_SH_SIDE = GameConfig(levels=(0.1, 0.8), weights=(0.0, 0.0), sigma=0.1, two_sided=False)
_PD_SIDE = GameConfig(levels=(0.41, 0.8), weights=(0.0, 0.0), sigma=0.1, two_sided=False)
_SH_BOTH = GameConfig(levels=(0.1, 0.8), weights=(0.0, 0.0), sigma=0.1, two_sided=True)
_TEN_SPREADS = GameConfig(
    levels=tuple((i + 1) / 10 for i in range(10)),
    weights=tuple(i / 90 for i in range(10)),
    sigma=0.1,
    two_sided=False,
)
_FOUR_SPREADS = GameConfig(
    levels=(3 / 30, 7 / 30, 11 / 30, 15 / 30),
    weights=(0.0, 1 / 30, 2 / 30, 3 / 30),
    sigma=0.1,
    xi=0.1,
    two_sided=True,
)

_TABLE3_COMMON = dict(instances=10, budget=2_000_000, stability_window=1_000_000, seed=14)


def _spec(name: str, game: GameConfig, analysis=None, training=None) -> ExperimentSpec:
    return ExperimentSpec(name=name, game=game, analysis=analysis, training=training)


PRESETS: dict[str, ExperimentSpec] = {
    # two-spread games: equilibria, crossings, fixed points
    "table1": _spec("table1", _SH_SIDE, AnalysisConfig(temperature=0.1)),
    "table1-lowtemp": _spec("table1-lowtemp", _SH_SIDE, AnalysisConfig(temperature=0.01, continuation_from=0.1)),
    "table2": _spec("table2", _PD_SIDE, AnalysisConfig(temperature=0.1)),
    "table2-lowtemp": _spec("table2-lowtemp", _PD_SIDE, AnalysisConfig(temperature=0.01, continuation_from=0.1)),
    # learning outcomes in the two-spread games
    "table3-row1": _spec(
        "table3-row1",
        _SH_SIDE,
        training=TrainingConfig(temperature=0.1, schedule_value=1e4, **_TABLE3_COMMON),
    ),
    "table3-row2": _spec(
        "table3-row2",
        _SH_SIDE,
        training=TrainingConfig(temperature=0.01, schedule_value=1e4, **_TABLE3_COMMON),
    ),
    "table3-row3": _spec(
        "table3-row3",
        _SH_SIDE,
        training=TrainingConfig(
            temperature=0.01, schedule_value=100.0, q0=(0.02, 0.0), **_TABLE3_COMMON
        ),
    ),
    "table3-row4": _spec(
        "table3-row4",
        _PD_SIDE,
        training=TrainingConfig(temperature=0.01, schedule_value=1e4, **_TABLE3_COMMON),
    ),
    "table3-row5": _spec(
        "table3-row5",
        _PD_SIDE,
        training=TrainingConfig(
            temperature=0.01, schedule_value=1e4, q0=(0.0, 0.02), **_TABLE3_COMMON
        ),
    ),
    # ten one-side spreads
    "table4": _spec("table4", _TEN_SPREADS, AnalysisConfig(temperature=0.1)),
    # inventory-aversion sweeps of the two-spread games, quoted on both sides
    "table5-sh": _spec(
        "table5-sh",
        _SH_BOTH,
        AnalysisConfig(temperature=0.1, xi_values=(0.0, 0.1, 0.2)),
    ),
    "table5-pd": _spec(
        "table5-pd",
        GameConfig(levels=(0.41, 0.8), weights=(0.0, 0.0), sigma=0.1, two_sided=True),
        AnalysisConfig(temperature=0.1, xi_values=(0.0, 0.1, 0.2)),
    ),
    # four spreads per side with inventory aversion
    "table6": _spec("table6", _FOUR_SPREADS, AnalysisConfig(temperature=0.1)),
    "table6-lowtemp": _spec(
        "table6-lowtemp", _FOUR_SPREADS, AnalysisConfig(temperature=0.01, continuation_from=0.1)
    ),
    # many-agent limit profiles
    "theorem2": _spec("theorem2", _TEN_SPREADS, AnalysisConfig(temperature=0.1, u=1.0)),
    # training experiments
    "figure2": _spec(
        "figure2",
        GameConfig(levels=(0.1, 0.8), weights=(0.0, 0.0), sigma=0.1, xi=0.1, two_sided=True),
        AnalysisConfig(temperature=0.1),
        TrainingConfig(
            temperature=0.1,
            schedule_value=1e4,
            instances=10,
            budget=2_000_000,
            stability_window=None,
            seed=14,
        ),
    ),
    "figure4": _spec(
        "figure4",
        _SH_BOTH,
        training=TrainingConfig(
            temperature=0.1,
            schedule_value=1e4,
            instances=10,
            budget=2_000_000,
            stability_window=None,
            seed=14,
            skew_enabled=True,
            skew_upper=100.0,
            skew_lower=-100.0,
        ),
    ),
    "figure5": _spec(
        "figure5",
        _TEN_SPREADS,
        AnalysisConfig(temperature=0.1),
        TrainingConfig(
            temperature=0.1,
            schedule_value=1e5,
            instances=10,
            budget=4_000_000,
            stability_window=None,
            seed=14,
        ),
    ),
    "figure6": _spec(
        "figure6",
        _FOUR_SPREADS,
        AnalysisConfig(temperature=0.1),
        TrainingConfig(
            temperature=0.1,
            schedule_value=1e5,
            instances=10,
            budget=4_000_000,
            stability_window=None,
            seed=14,
        ),
    ),
    # memory-agent comparison, four spreads per side, low temperature
    "table7-myopic-stateless": _spec(
        "table7-myopic-stateless",
        _FOUR_SPREADS,
        training=TrainingConfig(
            temperature=0.01,
            gamma=0.0,
            schedule_value=1e5,
            memory=False,
            instances=10,
            budget=4_000_000,
            stability_window=None,
            seed=20,
        ),
    ),
    "table7-myopic-memory": _spec(
        "table7-myopic-memory",
        _FOUR_SPREADS,
        training=TrainingConfig(
            temperature=0.01,
            gamma=0.0,
            schedule_value=1e5,
            memory=True,
            instances=10,
            budget=4_000_000,
            stability_window=None,
            seed=20,
        ),
    ),
    "table7-farsighted-stateless": _spec(
        "table7-farsighted-stateless",
        _FOUR_SPREADS,
        training=TrainingConfig(
            temperature=0.01,
            gamma=0.9,
            schedule_value=1e5,
            memory=False,
            instances=10,
            budget=4_000_000,
            stability_window=None,
            seed=20,
        ),
    ),
    "table7-farsighted-memory": _spec(
        "table7-farsighted-memory",
        _FOUR_SPREADS,
        training=TrainingConfig(
            temperature=0.01,
            gamma=0.9,
            schedule_value=1e5,
            memory=True,
            instances=10,
            budget=4_000_000,
            stability_window=None,
            seed=20,
        ),
    ),
}

# aliases: the payoff matrices behind table4/table6 under their figure names
PRESETS["figure3"] = PRESETS["table4"]
PRESETS["figure8"] = PRESETS["table6"]
PRESETS["table5"] = PRESETS["table5-sh"]

PRESET_GROUPS: dict[str, tuple[str, ...]] = {
    "table7": (
        "table7-myopic-stateless",
        "table7-myopic-memory",
        "table7-farsighted-stateless",
        "table7-farsighted-memory",
    ),
}


def preset_names() -> list[str]:
    return sorted(set(PRESETS) | set(PRESET_GROUPS))


def get_preset(name: str) -> ExperimentSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
