"""Staged objective scheduling with plateau-triggered transitions.

A schedule is an ordered list of stages, each pinning the loss weights plus a
stop rule (patience on relative validation-loss improvement, capped by a
maximum epoch count). The standard three-stage ramp moves alpha from 1
(relative terms only) through 0.5 to a small final value that emphasizes the
window composite; the anti-curriculum runs the same stages in reverse, and
fixed mode holds a single stage for ablation baselines.

The scheduler sees nothing but the validation-loss sequence, so replaying a
recorded sequence reproduces the exact same transitions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .loss import LossWeights

DEFAULT_ALPHAS = (1.0, 0.5, 0.1)
MODES = ("curriculum", "anti-curriculum", "fixed")


class TrainingCompleteError(RuntimeError):
    """current_weights was asked for weights after the last stage finished."""


@dataclass(frozen=True)
class Stage:
    weights: LossWeights
    max_epochs: int = 200
    patience: int = 5
    min_delta: float = 1e-4  # relative improvement threshold

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.min_delta < 0:
            raise ValueError("min_delta must be >= 0")


@dataclass(frozen=True)
class CurriculumSchedule:
    stages: tuple[Stage, ...]
    mode: str = "curriculum"

    def __post_init__(self):
        if not self.stages:
            raise ValueError("a schedule needs at least one stage")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "fixed" and any(
            s.weights != self.stages[0].weights for s in self.stages
        ):
            raise ValueError("fixed mode holds one weight setting across all stages")
        object.__setattr__(self, "stages", tuple(self.stages))

    def alphas(self) -> tuple[float, ...]:
        return tuple(stage.weights.alpha for stage in self.stages)


@dataclass(frozen=True)
class StageProgress:
    stage_index: int = 0
    epochs_in_stage: int = 0
    best_loss: float | None = None
    epochs_since_improvement: int = 0
    complete: bool = False


def advance(
    progress: StageProgress, validation_loss: float, schedule: CurriculumSchedule
) -> tuple[StageProgress, bool]:
    """Consume one epoch's validation loss; maybe step to the next stage.

    Relative improvement over the stage best beyond min_delta resets the
    patience counter; exhausting patience or the stage epoch cap triggers a
    transition. Stepping past the last stage marks training complete.
    """
    if progress.complete:
        return progress, False
    stage = schedule.stages[progress.stage_index]
    epochs = progress.epochs_in_stage + 1
    best = progress.best_loss
    if best is None or (best - validation_loss) / max(abs(best), 1e-12) > stage.min_delta:
        best = validation_loss
        stalled = 0
    else:
        stalled = progress.epochs_since_improvement + 1
    if stalled >= stage.patience or epochs >= stage.max_epochs:
        next_index = progress.stage_index + 1
        done = next_index >= len(schedule.stages)
        return StageProgress(stage_index=next_index, complete=done), True
    return replace(
        progress, epochs_in_stage=epochs, best_loss=best, epochs_since_improvement=stalled
    ), False


def current_weights(progress: StageProgress, schedule: CurriculumSchedule) -> LossWeights:
    if progress.complete:
        raise TrainingCompleteError("all stages have finished")
    return schedule.stages[progress.stage_index].weights


def _stages(alphas, delta, zeta, window, max_epochs, patience, min_delta):
    return tuple(
        Stage(
            weights=LossWeights(alpha=a, delta=delta, zeta=zeta, window=window),
            max_epochs=max_epochs,
            patience=patience,
            min_delta=min_delta,
        )
        for a in alphas
    )


def curriculum_schedule(
    alphas=DEFAULT_ALPHAS,
    *,
    delta=1.0,
    zeta=1.0,
    window=2,
    max_epochs=200,
    patience=5,
    min_delta=1e-4,
) -> CurriculumSchedule:
    """The staged ramp: alpha decreasing across stages (default 1, 0.5, 0.1)."""
    return CurriculumSchedule(
        stages=_stages(alphas, delta, zeta, window, max_epochs, patience, min_delta),
        mode="curriculum",
    )


def anti_curriculum_schedule(alphas=DEFAULT_ALPHAS, **kwargs) -> CurriculumSchedule:
    """The exact stage reversal of the corresponding curriculum."""
    forward = curriculum_schedule(alphas, **kwargs)
    return CurriculumSchedule(stages=tuple(reversed(forward.stages)), mode="anti-curriculum")


def fixed_schedule(
    alpha,
    *,
    delta=1.0,
    zeta=1.0,
    window=2,
    max_epochs=200,
    patience=5,
    min_delta=1e-4,
    repeats=1,
) -> CurriculumSchedule:
    """The no-curriculum baseline: one weight setting throughout.

    ``repeats`` splits the run into that many identical stages so a fixed
    baseline can share the stage structure (and epoch budget) of a staged
    schedule in controlled comparisons.
    """
    return CurriculumSchedule(
        stages=_stages((alpha,) * repeats, delta, zeta, window, max_epochs, patience, min_delta),
        mode="fixed",
    )
