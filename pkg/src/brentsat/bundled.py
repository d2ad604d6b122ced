"""Bundled reference schemes.

strassen(): the classical 7-product 2x2 scheme with coefficients reduced
mod 2.  neighbor_scheme_a()/neighbor_scheme_b(): two 23-product 3x3
schemes that share 19 summands and differ in the remaining four; B lies in
the neighborhood of A, which makes the pair a convenient fixture for the
neighborhood search and for regression tests.

The 3x3 source text was published with unstated gamma index order, so the
importer resolves the convention empirically: parse the c-factors as
flipped indices, and if the result fails verification, transpose gamma and
retry.  Both bundled schemes resolve to "flipped" (asserted in tests and
recorded in the README).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .formats import parse_scheme
from .schemes import Scheme, verify

STRASSEN_TEXT = """\
# 2x2 product with 7 multiplications, coefficients mod 2.
scheme n=2 m=7
1: (a11 + a22)(b11 + b22)(c11 + c22)
2: (a21 + a22)(b11)(c12 + c22)
3: (a11)(b12 + b22)(c21 + c22)
4: (a22)(b11 + b21)(c11 + c12)
5: (a11 + a12)(b22)(c11 + c21)
6: (a11 + a21)(b11 + b12)(c22)
7: (a12 + a22)(b21 + b22)(c11)
"""

_SHARED_19 = """\
1: (a11 + a13 + a21 + a22 + a23)(b13)(c22 + c32)
2: (a11 + a13 + a23)(b13 + b32)(c11 + c22 + c31 + c32)
3: (a11 + a13)(b32)(c21 + c22 + c31 + c32)
4: (a11 + a31)(b11 + b12 + b13)(c23)
5: (a11 + a33)(b11 + b13 + b32)(c11 + c23)
6: (a12 + a13 + a23)(b13 + b33)(c11 + c31)
7: (a12 + a22 + a32)(b21 + b22 + b23)(c33)
8: (a12 + a31 + a32 + a33)(b22)(c23 + c33)
9: (a12 + a33)(b13 + b21 + b33)(c11 + c33)
10: (a12)(b13 + b23 + b33)(c31 + c33)
11: (a21 + a31 + a33)(b11)(c12 + c22)
12: (a21)(b11 + b12 + b13)(c22)
13: (a22 + a31 + a33)(b13 + b22)(c12 + c13 + c22 + c33)
14: (a22 + a32 + a33)(b21)(c13 + c33)
15: (a22)(b13 + b21 + b22)(c12 + c13)
16: (a22)(b13 + b23)(c32 + c33)
17: (a23)(b31)(c11 + c12 + c31 + c32)
18: (a31 + a33)(b11 + b13 + b22)(c12 + c13 + c22 + c23)
19: (a33)(b11 + b21 + b31)(c11 + c13)
"""

NEIGHBOR_A_TEXT = (
    "scheme n=3 m=23\n"
    + _SHARED_19
    + """\
20: (a12)(b22)(c21 + c23)
21: (a11)(b12 + b32)(c21 + c23)
22: (a13 + a33)(b31 + b32 + b33)(c11)
23: (a23)(b31 + b32 + b33)(c11 + c31 + c32)
"""
)

NEIGHBOR_B_TEXT = (
    "scheme n=3 m=23\n"
    + _SHARED_19
    + """\
20: (a11 + a12)(b22)(c21 + c23)
21: (a11)(b12 + b22 + b32)(c21 + c23)
22: (a13 + a33)(b31 + b32 + b33)(c31 + c32)
23: (a13 + a23 + a33)(b31 + b32 + b33)(c11 + c31 + c32)
"""
)


def import_scheme_text(text: str, label: str | None = None) -> tuple[Scheme, str]:
    """Parse scheme text whose gamma convention is unknown.

    Returns (scheme, convention): reads c-indices as flipped first; if that
    fails to verify, transposes gamma.  Raises ValueError when neither
    interpretation yields a valid scheme.
    """
    s = parse_scheme(text, label=label)
    if verify(s):
        return s, "flipped"
    t = Scheme(
        s.alpha,
        s.beta,
        np.ascontiguousarray(s.gamma.transpose(0, 2, 1)),
        label=label,
    )
    if verify(t):
        return t, "application"
    raise ValueError("scheme text verifies under neither gamma convention")


@lru_cache(maxsize=None)
def strassen() -> Scheme:
    return parse_scheme(STRASSEN_TEXT, label="strassen")


@lru_cache(maxsize=None)
def _neighbor_pair() -> tuple[Scheme, Scheme, str]:
    a, conv_a = import_scheme_text(NEIGHBOR_A_TEXT, label="neighbor-a")
    b, conv_b = import_scheme_text(NEIGHBOR_B_TEXT, label="neighbor-b")
    if conv_a != conv_b:
        raise AssertionError("bundled neighbor pair resolved to different conventions")
    return a, b, conv_a


def neighbor_scheme_a() -> Scheme:
    """First of the bundled neighboring 23-product schemes."""
    return _neighbor_pair()[0]


def neighbor_scheme_b() -> Scheme:
    """Second bundled scheme; shares 19 summands with neighbor_scheme_a()."""
    return _neighbor_pair()[1]


def neighbor_gamma_convention() -> str:
    """Convention the bundled 3x3 text resolved to ('flipped')."""
    return _neighbor_pair()[2]


def bundled_schemes() -> dict[str, Scheme]:
    """Name -> scheme map used by the CLI for builtin scheme arguments."""
    from .schemes import naive_scheme

    return {
        "strassen": strassen(),
        "neighbor_a": neighbor_scheme_a(),
        "neighbor_b": neighbor_scheme_b(),
        "naive1": naive_scheme(1),
        "naive2": naive_scheme(2),
        "naive3": naive_scheme(3),
    }
