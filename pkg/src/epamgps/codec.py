"""Syllables and the letter feature table used as EPAM's input code.

Each letter maps to nine binary features:

    f0..f4  bits of the 0-based alphabet index, f0 least significant
    f5      vowel (A E I O U; Y counts as a consonant)
    f6      glyph has a curved stroke
    f7      glyph has a closed loop
    f8      glyph has a vertical stroke

The index bits make the vector injective over A-Z; the glyph bits add
redundancy so most letter pairs differ in more than one feature.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Optional, Tuple

LETTERS = string.ascii_uppercase
VOWELS = frozenset("AEIOU")
N_FEATURES = 9
N_POSITIONS = 3
# positions are 1-based; first, third, then the middle letter
NOTICING_ORDER = (1, 3, 2)

CURVED = frozenset("BCDGJOPQRSU")
CLOSED_LOOP = frozenset("ABDOPQR")
VERTICAL = frozenset("BDEFHIJKLMNPRTUY")

FeatureVector = Tuple[bool, ...]


def _letter_vector(letter: str) -> FeatureVector:
    index = LETTERS.index(letter)
    bits = tuple(bool(index >> k & 1) for k in range(5))
    return bits + (
        letter in VOWELS,
        letter in CURVED,
        letter in CLOSED_LOOP,
        letter in VERTICAL,
    )


FEATURE_TABLE: dict[str, FeatureVector] = {c: _letter_vector(c) for c in LETTERS}
_BY_VECTOR: dict[FeatureVector, str] = {v: c for c, v in FEATURE_TABLE.items()}


def letter_for(vector: FeatureVector) -> str:
    """Invert the feature table. Raises KeyError for a vector no letter has."""
    return _BY_VECTOR[tuple(vector)]


def is_vowel(letter: str) -> bool:
    return letter in VOWELS


@dataclass(frozen=True)
class Syllable:
    """A consonant-vowel-consonant nonsense trigram such as ``DAX``."""

    letters: str

    def __post_init__(self):
        s = self.letters
        if not isinstance(s, str) or len(s) != 3 or any(c not in LETTERS for c in s):
            raise ValueError(f"syllable must be 3 uppercase letters: {s!r}")
        if is_vowel(s[0]) or is_vowel(s[2]) or not is_vowel(s[1]):
            raise ValueError(f"syllable must be consonant-vowel-consonant: {s!r}")

    def __str__(self):
        return self.letters

    def letter(self, pos: int) -> str:
        return self.letters[pos - 1]


def syllable(text: str) -> Syllable:
    return Syllable(text.strip().upper())


def _check_pos(pos: int) -> None:
    if not 1 <= pos <= N_POSITIONS:
        raise ValueError(f"position out of range 1..3: {pos}")


@dataclass(frozen=True)
class InputCode:
    """Three per-letter feature vectors; ``None`` marks an unknown position."""

    positions: Tuple[Optional[FeatureVector], ...]

    def __post_init__(self):
        if len(self.positions) != N_POSITIONS:
            raise ValueError("input code needs exactly 3 positions")
        for v in self.positions:
            if v is not None and tuple(v) not in _BY_VECTOR:
                raise ValueError(f"not a letter feature vector: {v!r}")

    def known(self, pos: int) -> bool:
        _check_pos(pos)
        return self.positions[pos - 1] is not None

    @property
    def known_positions(self) -> Tuple[int, ...]:
        return tuple(p for p in (1, 2, 3) if self.positions[p - 1] is not None)

    @property
    def complete(self) -> bool:
        return all(v is not None for v in self.positions)

    def letters(self) -> str:
        """Letters with ``_`` for unknown positions, e.g. ``D_X``."""
        return "".join("_" if v is None else letter_for(v) for v in self.positions)

    def to_syllable(self) -> Syllable:
        if not self.complete:
            raise ValueError(f"incomplete code {self.letters()} has no syllable")
        return Syllable(self.letters())

    def agrees_with(self, s: Syllable) -> bool:
        """True when every known position matches the letters of ``s``."""
        return all(
            v is None or v == FEATURE_TABLE[c] for v, c in zip(self.positions, s.letters)
        )

    def with_position(self, pos: int, vector: Optional[FeatureVector]) -> "InputCode":
        _check_pos(pos)
        ps = list(self.positions)
        ps[pos - 1] = vector
        return InputCode(tuple(ps))


def encode(s: Syllable) -> InputCode:
    return InputCode(tuple(FEATURE_TABLE[c] for c in s.letters))


def partial_code(s: Syllable, known: int) -> InputCode:
    """Code of ``s`` knowing only the first ``known`` positions in noticing order."""
    if not 1 <= known <= N_POSITIONS:
        raise ValueError(f"known count out of range 1..3: {known}")
    keep = set(NOTICING_ORDER[:known])
    return InputCode(
        tuple(FEATURE_TABLE[c] if p in keep else None for p, c in enumerate(s.letters, 1))
    )


def code_from_letters(pattern: str) -> InputCode:
    """Build a code from a letter pattern using ``_`` for unknown, e.g. ``D__``."""
    if len(pattern) != N_POSITIONS:
        raise ValueError(f"pattern must have 3 characters: {pattern!r}")
    out = []
    for c in pattern:
        if c == "_":
            out.append(None)
        elif c in FEATURE_TABLE:
            out.append(FEATURE_TABLE[c])
        else:
            raise ValueError(f"bad letter {c!r} in pattern {pattern!r}")
    return InputCode(tuple(out))


def feature_at(code: InputCode, pos: int, feature: int) -> Optional[bool]:
    """Feature value at a position; ``None`` if that position is unknown."""
    _check_pos(pos)
    if not 0 <= feature < N_FEATURES:
        raise ValueError(f"feature out of range 0..8: {feature}")
    v = code.positions[pos - 1]
    return None if v is None else v[feature]


def feature_table_csv() -> str:
    lines = ["letter," + ",".join(f"f{k}" for k in range(N_FEATURES))]
    for c in LETTERS:
        lines.append(c + "," + ",".join(str(int(b)) for b in FEATURE_TABLE[c]))
    return "\n".join(lines) + "\n"
