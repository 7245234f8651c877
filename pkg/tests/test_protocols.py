import math

import numpy as np
import pytest

from nv_deer_sim.errors import InvalidArgumentError, ValidationError
from nv_deer_sim.pulses.engine import PairSystem, run_sequence
from nv_deer_sim.pulses.protocols import (
    deer_point,
    deer_rabi_trace,
    deer_sequence,
    echo_from_population,
    hahn_echo_sequence,
    nearest_orientation,
    pair_for_frequency,
    rabi_trace,
)
from nv_deer_sim.pulses.sequence import Delay, RfPulse
from nv_deer_sim.spectrum import AXIS_TIME
from nv_deer_sim.spin.hamiltonians import p1_species
from nv_deer_sim.spin.transitions import group_centers, stick_spectrum

F_NV = 2652.0
OMEGA_MW = 10.0 / 3.0
OMEGA_RF = 1000.0 / 120.0
FAST = 1e10


def _bare(coupling=0.0, omega_mw=OMEGA_MW):
    return PairSystem(F_NV, bath="bare", coupling_mhz=coupling, omega_mw_mhz=omega_mw)


def _line(system):
    return float(system.bath_lines()[0])


def _first_minimum(trace):
    return float(trace.axis[int(np.argmin(trace.signal))])


def test_rabi_trace_follows_cos_squared():
    trace = rabi_trace(_bare(), OMEGA_MW, F_NV, 600.0, 601)
    assert trace.axis_name == AXIS_TIME
    expected = np.cos(np.pi * OMEGA_MW * trace.axis / 1000.0) ** 2
    np.testing.assert_allclose(trace.signal, expected, atol=1e-9)


def test_rabi_first_minimum_at_150_ns():
    trace = rabi_trace(_bare(), OMEGA_MW, F_NV, 300.0, 301)
    assert _first_minimum(trace) == pytest.approx(150.0, abs=1.0)


def test_rabi_half_power_scales_by_sqrt_two():
    trace = rabi_trace(_bare(), OMEGA_MW / math.sqrt(2.0), F_NV, 400.0, 401)
    assert _first_minimum(trace) == pytest.approx(150.0 * math.sqrt(2.0), abs=1.0)


def test_rabi_generalized_two_pi_rotation():
    detuning = math.sqrt(3.0) * OMEGA_MW
    trace = rabi_trace(_bare(), OMEGA_MW, F_NV - detuning, 300.0, 3)
    assert trace.axis[1] == pytest.approx(150.0)
    assert trace.signal[1] == pytest.approx(1.0, abs=1e-9)


def test_deer_sequence_layout():
    seq = deer_sequence(F_NV, OMEGA_MW, 1400.0, 160.0, OMEGA_RF, 60.0)
    assert len(seq.blocks) == 7
    assert isinstance(seq.blocks[3], RfPulse)
    no_rf = deer_sequence(F_NV, OMEGA_MW, 1400.0, 160.0, 0.0, 60.0)
    assert no_rf.blocks == hahn_echo_sequence(F_NV, OMEGA_MW, 1400.0).blocks
    offset = deer_sequence(F_NV, OMEGA_MW, 1400.0, 160.0, OMEGA_RF, 60.0, rf_offset_ns=400.0)
    assert offset.blocks[3] == Delay(400.0)
    assert offset.blocks[5] == Delay(1000.0)


def test_deer_rejects_long_rf_pulse_and_bad_offset():
    with pytest.raises(ValidationError):
        deer_point(_bare(0.25), 220.0, 2801.0, OMEGA_RF, tau_ns=1400.0)
    with pytest.raises(InvalidArgumentError):
        deer_sequence(F_NV, OMEGA_MW, 100.0, 160.0, OMEGA_RF, 60.0, rf_offset_ns=150.0)


def test_no_rf_echo_is_one():
    system = _bare(coupling=0.7, omega_mw=FAST)
    assert deer_point(system, _line(system), 60.0, 0.0) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("d", [0.2, 1.0, 3.0])
def test_ideal_flip_echo_is_cosine(d):
    system = _bare(coupling=d, omega_mw=FAST)
    line = _line(system)
    t_flip = 1000.0 / (2.0 * FAST)
    for tau in np.linspace(t_flip / 2.0, 2000.0, 9):
        echo = deer_point(system, line, t_flip, FAST, tau_ns=float(tau))
        assert echo == pytest.approx(math.cos(2 * math.pi * d * tau / 1000.0), abs=1e-8)


def test_zero_tau_allows_only_the_no_rf_echo():
    system = _bare(coupling=1.0, omega_mw=FAST)
    line = _line(system)
    assert deer_point(system, line, 0.0, FAST, tau_ns=0.0) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValidationError):
        deer_point(system, line, 1000.0 / (2.0 * FAST), FAST, tau_ns=0.0)


def test_ideal_flip_examples():
    system = _bare(coupling=1.0, omega_mw=FAST)
    line = _line(system)
    t_flip = 1000.0 / (2.0 * FAST)
    assert deer_point(system, line, t_flip, FAST, tau_ns=250.0) == pytest.approx(0.0, abs=1e-8)
    assert deer_point(system, line, t_flip, FAST, tau_ns=500.0) == pytest.approx(-1.0, abs=1e-8)


def test_rf_offset_moves_the_flip():
    d, tau = 0.4, 900.0
    system = _bare(coupling=d, omega_mw=FAST)
    line = _line(system)
    t_flip = 1000.0 / (2.0 * FAST)
    for offset in (0.0, 200.0, 650.0):
        echo = deer_point(system, line, t_flip, FAST, tau_ns=tau, rf_offset_ns=offset)
        assert echo == pytest.approx(math.cos(2 * math.pi * d * (tau - offset) / 1000.0), abs=1e-8)

    uncoupled = _bare(coupling=0.0)
    echoes = [deer_point(uncoupled, line, 60.0, OMEGA_RF, tau_ns=tau, rf_offset_ns=a) for a in (0.0, 300.0, 800.0)]
    np.testing.assert_allclose(echoes, echoes[0], atol=1e-12)


def test_uncoupled_deer_equals_hahn_echo():
    system = _bare(coupling=0.0)
    hahn = run_sequence(hahn_echo_sequence(F_NV, OMEGA_MW, 1400.0), system).nv_population
    deer = deer_point(system, _line(system), 60.0, OMEGA_RF, tau_ns=1400.0)
    assert deer == pytest.approx(echo_from_population(hahn), abs=1e-12)


def test_far_detuned_rf_leaves_echo(field_111):
    centers = group_centers(stick_spectrum(p1_species(), field_111))
    system = pair_for_frequency(PairSystem(F_NV, bath="p1", coupling_mhz=0.1, field=field_111), centers["II"])
    reference = deer_point(system, centers["II"], 60.0, 0.0)
    detuned = deer_point(system, centers["II"] + 100.0 * OMEGA_RF, 60.0, OMEGA_RF)
    assert detuned == pytest.approx(reference, abs=1e-3)


def test_echo_magnitude_independent_of_coupling_sign():
    plus = _bare(coupling=0.3)
    minus = _bare(coupling=-0.3)
    line = _line(plus)
    assert abs(deer_point(plus, line, 60.0, OMEGA_RF)) == pytest.approx(
        abs(deer_point(minus, line, 60.0, OMEGA_RF)), abs=1e-10
    )


def test_deer_rabi_first_extremum_at_pi_time():
    system = _bare(coupling=0.25)
    trace = deer_rabi_trace(system, _line(system), OMEGA_RF, 200.0, tau_ns=1400.0, n_points=101)
    window = trace.axis < 120.0
    assert float(trace.axis[window][np.argmin(trace.signal[window])]) == pytest.approx(60.0, abs=2.0)
    assert trace.signal[0] == pytest.approx(deer_point(system, _line(system), 0.0, 0.0), abs=1e-12)


def test_deer_rabi_half_power():
    system = _bare(coupling=0.25)
    trace = deer_rabi_trace(system, _line(system), OMEGA_RF / math.sqrt(2.0), 200.0, n_points=101)
    window = trace.axis < 160.0
    assert float(trace.axis[window][np.argmin(trace.signal[window])]) == pytest.approx(84.85, abs=2.0)


def _p1_group_ii(field):
    centers = group_centers(stick_spectrum(p1_species(), field))
    system = pair_for_frequency(PairSystem(F_NV, bath="p1", coupling_mhz=0.25, field=field), centers["II"])
    return system, centers["II"]


@pytest.mark.parametrize("omega, expected, window", [
    (OMEGA_RF, 60.0, 120.0),
    (OMEGA_RF / math.sqrt(2.0), 84.85, 160.0),
])
def test_p1_deer_rabi_nutates_at_rf_amplitude(field_111, omega, expected, window):
    system, f_rf = _p1_group_ii(field_111)
    trace = deer_rabi_trace(system, f_rf, omega, 200.0, tau_ns=1400.0, n_points=101)
    step = float(trace.axis[1] - trace.axis[0])
    inside = trace.axis < window
    first = float(trace.axis[inside][np.argmin(trace.signal[inside])])
    assert first == pytest.approx(expected, abs=step)


def test_rf_drive_normalized_to_addressed_line(field_111):
    system, f_rf = _p1_group_ii(field_111)
    element = system.bath_model.addressed_element(f_rf)
    assert 0.0 < abs(element) < 0.5
    assert abs(_bare().bath_model.addressed_element(_line(_bare()))) == pytest.approx(0.5)


def test_nearest_orientation(field_111):
    centers = group_centers(stick_spectrum(p1_species(), field_111))
    cls, line = nearest_orientation(p1_species(), field_111, centers["II"])
    assert cls.multiplicity == 3 and not cls.axial
    cls, line = nearest_orientation(p1_species(), field_111, centers["I"])
    assert cls.multiplicity == 1 and cls.axial
    assert abs(line.frequency_mhz - centers["I"]) < 1.0
