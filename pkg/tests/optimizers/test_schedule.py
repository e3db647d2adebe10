import pytest
from pydantic import ValidationError

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.optimizers.schedule import Schedule, check_theorem_schedule, schedule_value


class TestScheduleValue:

    def test_constant(self):
        assert schedule_value(Schedule.constant(0.3), 17) == 0.3

    def test_multistep(self):
        s = Schedule(kind="multistep", base=0.15, milestones=[4, 2], gamma=0.1, steps_per_epoch=10)
        assert schedule_value(s, 10) == 0.15
        assert schedule_value(s, 15) == pytest.approx(0.015)
        assert schedule_value(s, 31) == pytest.approx(0.0015)
        assert s.milestones == [2, 4]

    def test_power_decay(self):
        s = Schedule(kind="power_decay", base=0.5, power=0.7)
        assert schedule_value(s, 1) == 0.5
        assert schedule_value(s, 4) == pytest.approx(0.5 * 4.0 ** -0.7)

    def test_cosine_warmup(self):
        s = Schedule(kind="cosine_warmup", base=1.0, warmup=10)
        assert schedule_value(s, 5, 110) == pytest.approx(0.5)
        assert schedule_value(s, 10, 110) == pytest.approx(1.0)
        assert schedule_value(s, 60, 110) == pytest.approx(0.5)
        assert schedule_value(s, 110, 110) == pytest.approx(0.0, abs=1e-15)

    def test_polynomial(self):
        s = Schedule(kind="polynomial", base=2.0, power=2.0)
        assert schedule_value(s, 50, 100) == pytest.approx(0.5)
        assert schedule_value(s, 100, 100) == 0.0

    def test_step_index_checked(self):
        with pytest.raises(PreconditionError):
            schedule_value(Schedule.constant(1.0), 0)

    def test_total_steps_required(self):
        with pytest.raises(PreconditionError):
            schedule_value(Schedule(kind="cosine_warmup", base=1.0, warmup=2), 3)

    def test_invalid_parameters(self):
        with pytest.raises(ValidationError):
            Schedule(kind="constant", base=-1.0)
        with pytest.raises(ValidationError):
            Schedule(kind="multistep", base=1.0, gamma=0.0)
        with pytest.raises(ValidationError):
            Schedule(kind="power_decay", base=1.0, power=-0.5)


class TestCheckTheoremSchedule:

    def test_admissible(self):
        check = check_theorem_schedule(0.7, 0.4)
        assert check.ok
        assert check.diagnostic == "all series conditions hold"

    def test_square_summability_fails(self):
        check = check_theorem_schedule(0.5, 0.5)
        assert not check.ok
        assert not check.lr_square_converges
        assert check.lr_sum_diverges

    def test_summable_step_sizes_fail(self):
        check = check_theorem_schedule(1.2, 0.0)
        assert not check.ok
        assert not check.lr_sum_diverges

    def test_radius_term_fails(self):
        check = check_theorem_schedule(0.6, 0.1)
        assert not check.ok
        assert not check.radius_term_converges
        assert "p+2q" in check.diagnostic

    def test_boundary_p_equal_one(self):
        assert check_theorem_schedule(1.0, 0.1).ok
        assert not check_theorem_schedule(1.0, 0.0).ok

    def test_negative_exponent(self):
        assert not check_theorem_schedule(-0.1, 0.5).ok
