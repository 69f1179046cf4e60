"""Shared corpus: ten criterion-passing and ten criterion-failing families.

Every family satisfies the standing assumptions on any horizon used in the
suite: a_n never vanishes, the consecutive ratios stay in a fixed band, and
the trailing tail ratios |b_n/a_{n+1}| stay below one.  Failing families use
bounded alternating sequences rather than geometric growth so they remain
representable in doubles at horizon 1024 and beyond.
"""

from __future__ import annotations

from dataclasses import dataclass

from trishift import CoefficientSpec, SequencePair, materialize, parse_sequence_expr


@dataclass(frozen=True)
class Family:
    name: str
    a: str
    b: str
    expected: str  # "holds" or "fails"


PASSING = [
    Family("szego", "1", "0", "holds"),
    Family("bergman", "sqrt(n+1)", "0", "holds"),
    Family("dirichlet", "1/sqrt(n+1)", "0", "holds"),
    Family("const-half-b", "1", "0.5", "holds"),
    Family("harmonic-b", "1", "1/(n+1)", "holds"),
    Family("bergman-const-b", "sqrt(n+1)", "0.5", "holds"),
    Family("rational-a", "(n+2)/(n+1)", "1/(n+2)", "holds"),
    Family("drifting-b", "1", "(n+1)/(n+3)", "holds"),
    Family("shifted-a", "2 + 1/(n+1)", "0.25", "holds"),
    Family("high-const-b", "1", "0.9", "holds"),
]

FAILING = [
    Family("alt-a-2", "2^((-1)^n)", "0", "fails"),
    Family("alt-b-half", "1", "0.5*(-1)^n", "fails"),
    Family("alt-b-04", "1", "0.4*(-1)^n", "fails"),
    Family("alt-a-const-b", "2^((-1)^n)", "0.25", "fails"),
    Family("pulsed-b", "1", "0.25 + 0.25*(-1)^n", "fails"),
    Family("alt-a-3", "3^((-1)^n)", "0", "fails"),
    Family("alt-b-drift", "1", "0.5*(-1)^n + 1/(n+3)", "fails"),
    Family("alt-both", "2^((-1)^n)", "0.3*(-1)^n", "fails"),
    Family("alt-b-swell", "1", "(-1)^n * (0.4 + 1/(n+2))", "fails"),
    Family("alt-a-15", "1 + 0.5*(-1)^n", "0", "fails"),
]

CORPUS = PASSING + FAILING

_PAIR_CACHE: dict[tuple[str, int], SequencePair] = {}


def family_spec(fam: Family) -> CoefficientSpec:
    return CoefficientSpec(
        parse_sequence_expr(fam.a), parse_sequence_expr(fam.b), fam.name
    )


def family_pair(fam: Family, horizon: int) -> SequencePair:
    key = (fam.name, horizon)
    if key not in _PAIR_CACHE:
        _PAIR_CACHE[key] = materialize(family_spec(fam), horizon)
    return _PAIR_CACHE[key]
