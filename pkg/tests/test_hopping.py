"""Cyclic shift algebra and exhaustive drift-property checks."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from skolemhop.hopping import (
    ALL_CHANNELS,
    ChannelSchedule,
    DriftedView,
    HopFrame,
    canonical_drift,
    check_channel_map,
    check_slot_counts,
    delivery_channels,
    delivery_slots,
    drift_channel_table,
    predicted_delivery_channel,
    shift,
)
from skolemhop.skolem import EssSequence, ess_for_channel_count

ESS4 = EssSequence(order=3, values=(0, 0, 3, 1, 2, 1, 3, 2))


class TestShift:
    def test_identity(self):
        assert shift(ESS4, 0) == (0, 0, 3, 1, 2, 1, 3, 2)

    def test_by_four(self):
        assert shift(ESS4, 4) == (2, 1, 3, 2, 0, 0, 3, 1)

    def test_case2_inverse_relation(self):
        assert shift((2, 1, 3, 2, 0, 0, 3, 1), 4) == ESS4.values

    def test_full_period_is_identity(self):
        for n_eff in (4, 5, 8):
            ess = ess_for_channel_count(n_eff)
            assert shift(ess, ess.period) == ess.values

    @given(st.integers(-50, 50), st.integers(-50, 50))
    def test_group_action(self, a, b):
        assert shift(shift(ESS4, a), b) == shift(ESS4, a + b)

    @given(st.integers(-50, 50))
    def test_offset_reduced_mod_period(self, a):
        assert shift(ESS4, a) == shift(ESS4, a % 8)


class TestDeliverySets:
    def test_shift1_channel0(self):
        assert delivery_channels(shift(ESS4, 1), ESS4.values) == {0}

    def test_shift5_channel2(self):
        assert delivery_channels(shift(ESS4, 5), ESS4.values) == {2}

    def test_zero_drift_all_channels(self):
        assert delivery_channels(ESS4.values, ESS4.values) == {0, 1, 2, 3}

    def test_slots_zero_drift(self):
        assert delivery_slots(ESS4.values, ESS4.values) == set(range(8))

    def test_slots_half_period_two(self):
        assert len(delivery_slots(shift(ESS4, 4), ESS4.values)) == 2

    @pytest.mark.parametrize("g", [1, 2, 3, 5, 6, 7])
    def test_slots_single(self, g):
        assert len(delivery_slots(shift(ESS4, g), ESS4.values)) == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            delivery_channels((1, 2), (1, 2, 3))
        with pytest.raises(ValueError):
            delivery_slots((1, 2), (1, 2, 3))

    @given(st.integers(0, 7), st.integers(0, 7))
    def test_symmetry(self, a, b):
        u, v = shift(ESS4, a), shift(ESS4, b)
        assert delivery_channels(u, v) == delivery_channels(v, u)
        assert delivery_slots(u, v) == delivery_slots(v, u)


class TestCanonicalDrift:
    @pytest.mark.parametrize(
        "raw,period,expected", [(5, 8, -3), (0, 8, 0), (12, 8, 4), (4, 8, 4), (-4, 8, 4)]
    )
    def test_examples(self, raw, period, expected):
        assert canonical_drift(raw, period) == expected

    @given(st.integers(-200, 200), st.sampled_from([8, 10, 16, 18, 26]))
    def test_properties(self, raw, period):
        g = canonical_drift(raw, period)
        assert abs(g) <= period // 2
        assert (g - raw) % period == 0
        if raw % period == period // 2:
            assert g == period // 2

    def test_bad_period(self):
        with pytest.raises(ValueError):
            canonical_drift(3, 7)


class TestPrediction:
    def test_values(self):
        assert predicted_delivery_channel(1) == 0
        assert predicted_delivery_channel(-3) == 2
        assert predicted_delivery_channel(4) == 3
        assert predicted_delivery_channel(0) == ALL_CHANNELS

    @pytest.mark.parametrize("n_eff", [4, 5])
    def test_matches_brute_force_every_drift(self, n_eff):
        ess = ess_for_channel_count(n_eff)
        for g in range(-n_eff, n_eff + 1):
            got = delivery_channels(shift(ess, g), ess.values)
            if g == 0:
                assert got == set(range(n_eff))
            else:
                assert got == {predicted_delivery_channel(g)}


class TestExhaustiveChecks:
    def test_drift_table_n4(self):
        assert drift_channel_table(ESS4) == [ALL_CHANNELS, 0, 1, 2, 3, 2, 1, 0]

    @pytest.mark.parametrize("n_eff", [4, 5])
    def test_channel_map_holds(self, n_eff):
        assert check_channel_map(ess_for_channel_count(n_eff)) == []

    @pytest.mark.parametrize("n_eff", [4, 5])
    def test_slot_counts_hold(self, n_eff):
        assert check_slot_counts(ess_for_channel_count(n_eff)) == []


class TestSchedules:
    def test_hop_frame(self):
        frame = HopFrame(ESS4, offset=4)
        assert frame.sequence() == (2, 1, 3, 2, 0, 0, 3, 1)
        assert [frame.channel_at(t) for t in range(8)] == list(frame.sequence())

    def test_searching_schedule(self):
        sched = ChannelSchedule(ESS4, offset_for_frame=lambda n: n)
        assert [sched.channel_at(t) for t in range(8)] == list(ESS4.values)
        assert [sched.channel_at(8 + t) for t in range(8)] == list(shift(ESS4, 1))

    def test_constant_schedule_periodic(self):
        sched = ChannelSchedule(ESS4, offset_for_frame=lambda n: 0)
        assert sched.channel_at(0) == sched.channel_at(8) == sched.channel_at(800)

    def test_drifted_view(self):
        sched = ChannelSchedule(ESS4, offset_for_frame=lambda n: 0)
        view = DriftedView(sched, drift=3)
        assert view.channel_at(3) == ESS4.values[0]
        with pytest.raises(ValueError):
            view.channel_at(2)

    def test_negative_slot_rejected(self):
        sched = ChannelSchedule(ESS4, offset_for_frame=lambda n: 0)
        with pytest.raises(ValueError):
            sched.channel_at(-1)
