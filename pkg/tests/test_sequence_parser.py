import math

import pytest

from nv_deer_sim.errors import SequenceSyntaxError, UnresolvedNameError, ValidationError
from nv_deer_sim.pulses.parser import parse_sequence, serialize_sequence
from nv_deer_sim.pulses.sequence import (
    Delay,
    MwPulse,
    PulseSequence,
    Readout,
    RfPulse,
    pulse_duration,
)

FREQS = {"f2": 2652.0, "II": 160.0}

DEER_TEXT = "mw pi/2 @f2; delay 1400 ns; mw pi @f2; rf 60 ns @160 mhz; delay 1400 ns; mw pi/2 @f2; read"


def test_deer_sequence_parses_to_seven_blocks():
    seq = parse_sequence(DEER_TEXT, FREQS)
    assert len(seq.blocks) == 7
    kinds = [type(b) for b in seq.blocks]
    assert kinds == [MwPulse, Delay, MwPulse, RfPulse, Delay, MwPulse, Readout]
    assert seq.blocks[0].duration_ns == pytest.approx(75.0)
    assert seq.blocks[2].duration_ns == pytest.approx(150.0)
    assert seq.blocks[3].frequency_mhz == 160.0
    assert seq.blocks[3].duration_ns == 60.0
    assert seq.blocks[0].frequency_mhz == 2652.0


def test_read_only():
    seq = parse_sequence("read")
    assert seq.blocks == (Readout(),)


def test_case_whitespace_and_comments():
    text = """
    # echo
    MW  PI/2 @ F2 ;   DELAY 10 NS;
    mw 180 deg @ 2652 MHz;   # refocus
    Read;
    """
    seq = parse_sequence(text, FREQS)
    assert len(seq.blocks) == 4
    assert seq.blocks[2].duration_ns == pytest.approx(150.0)


def test_unresolved_name_is_reported():
    with pytest.raises(UnresolvedNameError) as excinfo:
        parse_sequence("mw pi @f9; read", FREQS)
    assert excinfo.value.name == "f9"
    assert "f9" in str(excinfo.value)


def test_missing_read():
    with pytest.raises(SequenceSyntaxError, match="read"):
        parse_sequence("mw pi @f2", FREQS)


def test_read_must_be_last():
    with pytest.raises(SequenceSyntaxError):
        parse_sequence("read; delay 10 ns", FREQS)


@pytest.mark.parametrize("text, line, column", [
    ("mw pi @f2;\ndelay 10 us; read", 2, 10),
    ("mw pi/3 @f2; read", 1, 7),
    ("zap; read", 1, 1),
    ("mw pi @f2; read $", 1, 17),
])
def test_syntax_error_positions(text, line, column):
    with pytest.raises(SequenceSyntaxError) as excinfo:
        parse_sequence(text, FREQS)
    assert (excinfo.value.line, excinfo.value.column) == (line, column)


def test_sequence_needs_terminal_readout():
    with pytest.raises(ValidationError):
        PulseSequence((Delay(10.0),))
    with pytest.raises(ValidationError):
        PulseSequence((Readout(), Readout()))


def test_block_validation():
    with pytest.raises(ValidationError):
        Delay(-1.0)
    with pytest.raises(ValidationError):
        MwPulse(2652.0, -1.0, 10.0)


def test_pulse_duration_scaling():
    pi_mw = pulse_duration(math.pi, 10.0 / 3.0)
    assert pi_mw == pytest.approx(150.0, rel=1e-12)
    assert pulse_duration(math.pi, 10.0 / 3.0 / math.sqrt(2.0)) / pi_mw == pytest.approx(math.sqrt(2.0), rel=1e-6)
    pi_rf = pulse_duration(math.pi, 1000.0 / 120.0)
    assert pi_rf == pytest.approx(60.0)
    half_power = pulse_duration(math.pi, 1000.0 / 120.0 / math.sqrt(2.0))
    assert half_power == pytest.approx(84.85, abs=0.01)
    # Observed 80 ns at half RF power is within 15 % of the sqrt(2) law
    assert abs(80.0 - half_power) / half_power < 0.15


def test_serialize_round_trip():
    seq = parse_sequence(DEER_TEXT + ";", FREQS)
    text = serialize_sequence(seq)
    again = parse_sequence(text)
    assert again.blocks == seq.blocks


def test_serialize_odd_angle():
    seq = PulseSequence.of([MwPulse(2652.0, 10.0 / 3.0, 50.0), Readout()])
    again = parse_sequence(serialize_sequence(seq))
    assert again.blocks[0].duration_ns == pytest.approx(50.0, rel=1e-12)


def test_carriers():
    seq = parse_sequence(DEER_TEXT, FREQS)
    assert seq.carriers(MwPulse) == (2652.0,)
    assert seq.carriers(RfPulse) == (160.0,)
    assert seq.total_duration_ns == pytest.approx(75 + 1400 + 150 + 60 + 1400 + 75)
