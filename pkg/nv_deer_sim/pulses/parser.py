"""Text mini-language for pulse sequences.

    seq   := stmt (';' stmt)* ';'?
    stmt  := mw | rf | delay | read
    mw    := 'mw' angle '@' freq
    rf    := 'rf' dur '@' freq
    delay := 'delay' dur
    read  := 'read'
    angle := 'pi' | 'pi/2' | FLOAT 'deg'
    dur   := FLOAT 'ns'
    freq  := FLOAT 'mhz' | NAME

Keywords are case-insensitive, whitespace is insignificant and '#' starts a
comment running to the end of the line. NAMEs resolve against the named
frequencies passed in (e.g. f2, II); MW angles become durations with the MW
Rabi amplitude.
"""

import math
import re
from dataclasses import dataclass
from typing import List, Mapping, Optional

from ..errors import SequenceSyntaxError, UnresolvedNameError, ValidationError
from .sequence import Delay, MwPulse, PulseSequence, Readout, RfPulse, pulse_duration

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
    |(?P<float>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    |(?P<name>[A-Za-z_][A-Za-z0-9_\-]*)
    |(?P<sym>[;@/])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"mw", "rf", "delay", "read", "pi", "deg", "ns", "mhz"}


@dataclass(frozen=True)
class _Token:
    kind: str  # 'float', 'name', 'kw', 'sym', 'end'
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if match is None:
            raise SequenceSyntaxError(f"unexpected character {text[pos]!r}", line, column)
        kind = match.lastgroup
        chunk = match.group()
        if kind != "ws":
            if kind == "name" and chunk.lower() in _KEYWORDS:
                tokens.append(_Token("kw", chunk.lower(), line, column))
            else:
                tokens.append(_Token(kind, chunk, line, column))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = match.end()
    tokens.append(_Token("end", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, frequencies: Mapping[str, float], omega_mw_mhz: float, omega_rf_mhz: float):
        self.tokens = _tokenize(text)
        self.index = 0
        self.frequencies = frequencies
        self.omega_mw = omega_mw_mhz
        self.omega_rf = omega_rf_mhz

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _fail(self, message: str, token: Optional[_Token] = None):
        token = token or self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise SequenceSyntaxError(f"{message}, found {found}", token.line, token.column)

    def _accept(self, kind: str, text: Optional[str] = None) -> Optional[_Token]:
        token = self.current
        if token.kind == kind and (text is None or token.text == text):
            self.index += 1
            return token
        return None

    def _expect(self, kind: str, text: Optional[str] = None, what: str = "") -> _Token:
        token = self._accept(kind, text)
        if token is None:
            self._fail(f"expected {what or text or kind}")
        return token

    def parse(self) -> PulseSequence:
        blocks = [self._statement()]
        while self._accept("sym", ";"):
            if self.current.kind == "end":
                break
            blocks.append(self._statement())
        if self.current.kind != "end":
            self._fail("expected ';'")
        if not any(isinstance(b, Readout) for b in blocks):
            end = self.current
            raise SequenceSyntaxError("sequence has no 'read'", end.line, end.column)
        try:
            return PulseSequence(tuple(blocks))
        except ValidationError as exc:
            end = self.current
            raise SequenceSyntaxError(str(exc), end.line, end.column) from exc

    def _statement(self):
        token = self.current
        if self._accept("kw", "mw"):
            angle = self._angle()
            freq = self._at_frequency()
            return MwPulse(freq, self.omega_mw, pulse_duration(angle, self.omega_mw))
        if self._accept("kw", "rf"):
            duration = self._duration()
            freq = self._at_frequency()
            return RfPulse(freq, self.omega_rf, duration)
        if self._accept("kw", "delay"):
            return Delay(self._duration())
        if self._accept("kw", "read"):
            return Readout()
        self._fail("expected 'mw', 'rf', 'delay' or 'read'", token)

    def _angle(self) -> float:
        if self._accept("kw", "pi"):
            if self._accept("sym", "/"):
                two = self._expect("float", what="'2' after 'pi/'")
                if float(two.text) != 2.0:
                    self._fail("only 'pi' and 'pi/2' are supported", two)
                return math.pi / 2
            return math.pi
        number = self._accept("float")
        if number is None:
            self._fail("expected an angle ('pi', 'pi/2' or '<number> deg')")
        self._expect("kw", "deg", what="'deg'")
        value = float(number.text)
        if value < 0:
            self._fail("angle must be non-negative", number)
        return math.radians(value)

    def _duration(self) -> float:
        number = self._accept("float")
        if number is None:
            self._fail("expected a duration ('<number> ns')")
        self._expect("kw", "ns", what="'ns'")
        value = float(number.text)
        if not math.isfinite(value) or value < 0:
            self._fail("duration must be finite and non-negative", number)
        return value

    def _at_frequency(self) -> float:
        self._expect("sym", "@", what="'@'")
        number = self._accept("float")
        if number is not None:
            self._expect("kw", "mhz", what="'mhz'")
            return float(number.text)
        name = self._accept("name")
        if name is None:
            self._fail("expected a frequency ('<number> mhz' or a name)")
        return _resolve(name, self.frequencies)


def _resolve(token: _Token, frequencies: Mapping[str, float]) -> float:
    if token.text in frequencies:
        return float(frequencies[token.text])
    folded = {k.lower(): v for k, v in frequencies.items()}
    if token.text.lower() in folded:
        return float(folded[token.text.lower()])
    raise UnresolvedNameError(token.text, token.line, token.column)


def parse_sequence(
    text: str,
    frequencies: Optional[Mapping[str, float]] = None,
    omega_mw_mhz: float = 10.0 / 3.0,
    omega_rf_mhz: float = 25.0 / 3.0,
) -> PulseSequence:
    """Parse the mini-language into a validated PulseSequence."""
    return _Parser(text, frequencies or {}, omega_mw_mhz, omega_rf_mhz).parse()


def _format_number(value: float) -> str:
    return repr(float(value))


def serialize_sequence(seq: PulseSequence) -> str:
    """Inverse of :func:`parse_sequence` (frequencies written in MHz)."""
    parts = []
    for block in seq.blocks:
        if isinstance(block, MwPulse):
            if block.duration_ns == pulse_duration(math.pi, block.omega_mhz):
                angle = "pi"
            elif block.duration_ns == pulse_duration(math.pi / 2, block.omega_mhz):
                angle = "pi/2"
            else:
                angle = f"{_format_number(math.degrees(block.angle))} deg"
            parts.append(f"mw {angle} @{_format_number(block.frequency_mhz)} mhz")
        elif isinstance(block, RfPulse):
            parts.append(f"rf {_format_number(block.duration_ns)} ns @{_format_number(block.frequency_mhz)} mhz")
        elif isinstance(block, Delay):
            parts.append(f"delay {_format_number(block.duration_ns)} ns")
        else:
            parts.append("read")
    return ";\n".join(parts) + "\n"
