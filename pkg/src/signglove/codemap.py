"""Static-alphabet gesture code map.

24 letters (A-Z without J and Z, whose gestures involve motion and go
through the word pipeline). U originally shared V's code; it is signed
with ring and little finger relaxed to half bend instead, giving the
collision-free 311220.
"""

from __future__ import annotations

import re

_CODE_PATTERN = re.compile(r"^[123]{5}[01]$")

ALPHABET_CODES: dict[str, str] = {
    "A": "233330",
    "B": "311110",
    "C": "122220",
    "D": "313330",
    "E": "322220",
    "F": "231110",
    "G": "213331",
    "H": "211331",
    "I": "333310",
    "K": "211330",
    "L": "113330",
    "M": "333230",
    "N": "332330",
    "O": "222220",
    "P": "112331",
    "Q": "123331",
    "R": "321330",
    "S": "333330",
    "T": "223330",
    "U": "311220",
    "V": "311330",
    "W": "311130",
    "X": "323330",
    "Y": "133310",
}

STATIC_LETTERS = tuple(ALPHABET_CODES)


def build_code_map() -> dict[str, str]:
    """Return the gesture-code -> letter lookup, checked for well-formedness."""
    assert len(ALPHABET_CODES) == 24
    code_map: dict[str, str] = {}
    for letter, code in ALPHABET_CODES.items():
        if not _CODE_PATTERN.match(code):
            raise ValueError(f"bad code for {letter}: {code}")
        if code in code_map:
            raise ValueError(f"code collision: {code} ({code_map[code]} vs {letter})")
        code_map[code] = letter
    return code_map
