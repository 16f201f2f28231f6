import pytest

from curvo import curriculum as cur
from curvo.loss import LossWeights


def run_schedule(losses, schedule):
    """Feed a loss sequence through advance; return per-epoch stage indices."""
    progress = cur.StageProgress()
    stages, transitions = [], []
    for epoch, value in enumerate(losses, start=1):
        if progress.complete:
            break
        stages.append(progress.stage_index)
        progress, moved = cur.advance(progress, value, schedule)
        if moved:
            transitions.append(epoch)
    return stages, transitions, progress


class TestAdvance:
    def test_decreasing_losses_run_to_epoch_cap(self):
        schedule = cur.fixed_schedule(1.0, max_epochs=10, patience=3)
        losses = [1.0 / (k + 1) for k in range(20)]
        stages, transitions, progress = run_schedule(losses, schedule)
        assert transitions == [10]
        assert progress.complete

    def test_constant_loss_exhausts_patience(self):
        schedule = cur.fixed_schedule(1.0, max_epochs=200, patience=5)
        losses = [0.5] * 20
        stages, transitions, progress = run_schedule(losses, schedule)
        # first epoch sets the best, then exactly 5 non-improving epochs
        assert transitions == [6]
        assert progress.complete

    def test_min_delta_filters_tiny_improvements(self):
        schedule = cur.fixed_schedule(1.0, max_epochs=200, patience=2, min_delta=1e-3)
        losses = [1.0, 0.9, 0.9001, 0.89999, 0.89]
        stages, transitions, _ = run_schedule(losses, schedule)
        # 0.9 improves; the next two stay within min_delta of 0.9, so the
        # transition fires after exactly 2 stagnant epochs
        assert transitions == [4]

    def test_three_stage_walkthrough(self):
        schedule = cur.curriculum_schedule(max_epochs=50, patience=2)
        losses = [1.0] + [1.0] * 2 + [0.8] + [0.8] * 2 + [0.1] + [0.1] * 2
        stages, transitions, progress = run_schedule(losses, schedule)
        assert stages == [0, 0, 0, 1, 1, 1, 2, 2, 2]
        assert len(transitions) == 3
        assert progress.complete

    def test_counters_reset_on_transition(self):
        schedule = cur.curriculum_schedule(max_epochs=50, patience=3)
        progress = cur.StageProgress()
        for value in [1.0, 1.0, 1.0, 1.0]:
            progress, moved = cur.advance(progress, value, schedule)
        assert moved and progress.stage_index == 1
        assert progress.epochs_in_stage == 0
        assert progress.best_loss is None
        assert progress.epochs_since_improvement == 0

    def test_patience_never_exceeded_before_transition(self):
        schedule = cur.fixed_schedule(1.0, max_epochs=100, patience=4)
        progress = cur.StageProgress()
        for value in [0.5] * 50:
            if progress.complete:
                break
            assert progress.epochs_since_improvement <= 4
            progress, _ = cur.advance(progress, value, schedule)

    def test_replay_reproduces_transitions(self):
        schedule = cur.curriculum_schedule(max_epochs=30, patience=3)
        losses = [1.0, 0.7, 0.69, 0.69, 0.69, 0.5, 0.5, 0.5, 0.4, 0.4, 0.4, 0.4]
        first = run_schedule(losses, schedule)
        second = run_schedule(losses, schedule)
        assert first[:2] == second[:2]


class TestCurrentWeights:
    def test_stage_alphas(self):
        schedule = cur.curriculum_schedule()
        assert cur.current_weights(cur.StageProgress(stage_index=0), schedule).alpha == 1.0
        assert cur.current_weights(cur.StageProgress(stage_index=1), schedule).alpha == 0.5
        assert cur.current_weights(cur.StageProgress(stage_index=2), schedule).alpha == 0.1

    def test_anti_curriculum_first_stage(self):
        schedule = cur.anti_curriculum_schedule()
        assert cur.current_weights(cur.StageProgress(stage_index=0), schedule).alpha == 0.1

    def test_complete_raises(self):
        schedule = cur.fixed_schedule(0.5)
        with pytest.raises(cur.TrainingCompleteError):
            cur.current_weights(cur.StageProgress(stage_index=1, complete=True), schedule)


class TestScheduleConstruction:
    def test_anti_is_exact_reverse(self):
        forward = cur.curriculum_schedule(delta=2.0, zeta=3.0, window=3)
        backward = cur.anti_curriculum_schedule(delta=2.0, zeta=3.0, window=3)
        assert backward.alphas() == tuple(reversed(forward.alphas()))
        for a, b in zip(forward.stages, reversed(backward.stages)):
            assert a.weights == b.weights

    def test_fixed_has_one_stage(self):
        schedule = cur.fixed_schedule(0.5, window=2)
        assert len(schedule.stages) == 1
        assert schedule.mode == "fixed"
        with pytest.raises(ValueError):
            cur.CurriculumSchedule(
                stages=cur.curriculum_schedule().stages, mode="fixed"
            )

    def test_defaults(self):
        schedule = cur.curriculum_schedule()
        assert schedule.alphas() == (1.0, 0.5, 0.1)
        assert all(s.max_epochs == 200 for s in schedule.stages)

    def test_stage_validation(self):
        with pytest.raises(ValueError):
            cur.Stage(weights=LossWeights(), max_epochs=0)
        with pytest.raises(ValueError):
            cur.Stage(weights=LossWeights(), patience=0)
        with pytest.raises(ValueError):
            cur.CurriculumSchedule(stages=(), mode="curriculum")
        with pytest.raises(ValueError):
            cur.CurriculumSchedule(stages=cur.fixed_schedule(1.0).stages, mode="bogus")
