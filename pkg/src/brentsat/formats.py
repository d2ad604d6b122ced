"""Text and JSON serialization for schemes and pairings.

Human format, one scheme per file::

    # optional comments
    scheme n=3 m=23
    1: (a11 + a13)(b32)(c21 + c22 + c31 + c32)
    ...

Each line gives one summand as three parenthesized factors (a-, b-, c-
coefficients); an all-zero factor renders as ``(0)``.  Whitespace is
insignificant, ``#`` starts a comment.  The c-indices are written in the
flipped gamma convention used throughout this package.

Machine format: JSON with fields ``n``, ``m``, ``gamma_convention``
(``"flipped"`` or ``"application"``) and per-summand flat row-major 0/1
arrays.  Loading an application-convention file transposes gamma.
"""

from __future__ import annotations

import json
import re
from typing import Iterable

import numpy as np

from .schemes import Scheme, TermIndex, term_type

_SUMMAND_RE = re.compile(r"^(\d+)\s*:\s*\(([^()]*)\)\s*\(([^()]*)\)\s*\(([^()]*)\)$")
_ENTRY_RE = re.compile(r"^([abc])(\d)(\d)$")
_TERM_RE = re.compile(r"^a(\d)(\d)b(\d)(\d)c(\d)(\d)$")


class SchemeParseError(ValueError):
    """Malformed scheme or pairing text; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_scheme(text: str, label: str | None = None) -> Scheme:
    """Parse the human scheme format.  Raises SchemeParseError with line info."""
    n = m = None
    rows: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    header_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            hm = re.match(r"^scheme\s+n\s*=\s*(\d+)\s+m\s*=\s*(\d+)$", line)
            if not hm:
                raise SchemeParseError("expected header 'scheme n=<n> m=<m>'", lineno)
            n, m = int(hm.group(1)), int(hm.group(2))
            if not 1 <= n <= 9:
                raise SchemeParseError("n must be in 1..9 for the text format", lineno)
            if m < 1:
                raise SchemeParseError("m must be positive", lineno)
            header_line = lineno
            continue
        sm = _SUMMAND_RE.match(line.replace(" ", "").replace("\t", ""))
        if not sm:
            # retry with original spacing for a better error message
            raise SchemeParseError(f"cannot parse summand line {line!r}", lineno)
        ell = int(sm.group(1))
        if not 1 <= ell <= m:
            raise SchemeParseError(f"summand index {ell} out of range 1..{m}", lineno)
        if ell in rows:
            raise SchemeParseError(f"duplicate summand {ell}", lineno)
        mats = []
        for role, letter in zip(range(3), "abc"):
            mats.append(_parse_factor(sm.group(role + 2), letter, n, lineno))
        rows[ell] = tuple(mats)
    if n is None:
        raise SchemeParseError("empty input: missing scheme header", max(1, header_line))
    missing = [ell for ell in range(1, m + 1) if ell not in rows]
    if missing:
        raise SchemeParseError(f"missing summands: {missing}", header_line)
    alpha = np.stack([rows[ell][0] for ell in range(1, m + 1)])
    beta = np.stack([rows[ell][1] for ell in range(1, m + 1)])
    gamma = np.stack([rows[ell][2] for ell in range(1, m + 1)])
    return Scheme(alpha, beta, gamma, label=label)


def _parse_factor(text: str, letter: str, n: int, lineno: int) -> np.ndarray:
    mat = np.zeros((n, n), dtype=np.uint8)
    if text == "0":
        return mat
    if not text:
        raise SchemeParseError(f"empty {letter}-factor (use '(0)')", lineno)
    for entry in text.split("+"):
        em = _ENTRY_RE.match(entry)
        if not em:
            raise SchemeParseError(f"malformed entry {entry!r}", lineno)
        if em.group(1) != letter:
            raise SchemeParseError(
                f"entry {entry!r} in the {letter}-factor", lineno
            )
        r, c = int(em.group(2)), int(em.group(3))
        if not (1 <= r <= n and 1 <= c <= n):
            raise SchemeParseError(f"index out of range in {entry!r}", lineno)
        if mat[r - 1, c - 1]:
            raise SchemeParseError(f"repeated entry {entry!r}", lineno)
        mat[r - 1, c - 1] = 1
    return mat


def render_scheme(s: Scheme, comment: str | None = None) -> str:
    """Render to the human format (entries in row-major order per factor)."""
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"scheme n={s.n} m={s.m}")
    width = len(str(s.m))
    for ell in range(1, s.m + 1):
        sm = s.summand(ell)
        factors = "".join(
            "(" + _render_factor(mat, letter) + ")"
            for mat, letter in zip(sm, "abc")
        )
        lines.append(f"{ell:>{width}}: {factors}")
    return "\n".join(lines) + "\n"


def _render_factor(mat: np.ndarray, letter: str) -> str:
    entries = [
        f"{letter}{i + 1}{j + 1}"
        for i in range(mat.shape[0])
        for j in range(mat.shape[1])
        if mat[i, j]
    ]
    return " + ".join(entries) if entries else "0"


def scheme_to_json(s: Scheme) -> dict:
    """Machine format dict; gamma is always written in flipped convention."""
    doc = {
        "n": s.n,
        "m": s.m,
        "gamma_convention": "flipped",
        "summands": [
            {
                "alpha": s.alpha[i].ravel().tolist(),
                "beta": s.beta[i].ravel().tolist(),
                "gamma": s.gamma[i].ravel().tolist(),
            }
            for i in range(s.m)
        ],
    }
    if s.label:
        doc["label"] = s.label
    return doc


def scheme_from_json(doc: dict) -> Scheme:
    """Load the machine format; application-convention gamma is transposed."""
    n = int(doc["n"])
    m = int(doc["m"])
    conv = doc.get("gamma_convention", "flipped")
    if conv not in ("flipped", "application"):
        raise ValueError(f"unknown gamma_convention {conv!r}")
    summands = doc["summands"]
    if len(summands) != m:
        raise ValueError(f"expected {m} summands, got {len(summands)}")

    def mat(row, key):
        flat = np.asarray(row[key], dtype=np.uint8)
        if flat.size != n * n:
            raise ValueError(f"{key} must have {n * n} entries")
        return flat.reshape(n, n)

    alpha = np.stack([mat(r, "alpha") for r in summands])
    beta = np.stack([mat(r, "beta") for r in summands])
    gamma = np.stack([mat(r, "gamma") for r in summands])
    if conv == "application":
        gamma = np.ascontiguousarray(gamma.transpose(0, 2, 1))
    return Scheme(alpha, beta, gamma, label=doc.get("label"))


def dump_scheme_json(s: Scheme) -> str:
    return json.dumps(scheme_to_json(s), indent=1)


def load_scheme_json(text: str) -> Scheme:
    return scheme_from_json(json.loads(text))


def load_scheme_file(path) -> Scheme:
    """Load either format, sniffing JSON by the leading brace."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return load_scheme_json(text)
    return parse_scheme(text)


def term_from_text(text: str) -> TermIndex:
    tm = _TERM_RE.match(text)
    if not tm:
        raise ValueError(f"malformed term {text!r} (expected e.g. a13b31c11)")
    return TermIndex(*(int(g) for g in tm.groups()))


def pairing_to_text(assignment: list[frozenset[TermIndex]]) -> str:
    """One line per summand: '<ell>: term [term]'."""
    lines = []
    for ell, terms in enumerate(assignment, start=1):
        names = " ".join(t.name() for t in sorted(terms))
        lines.append(f"{ell}: {names}".rstrip())
    return "\n".join(lines) + "\n"


def pairing_from_text(text: str, n: int) -> list[frozenset[TermIndex]]:
    rows: dict[int, frozenset[TermIndex]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(":")
        try:
            ell = int(head)
        except ValueError:
            raise SchemeParseError(f"expected '<ell>: terms', got {line!r}", lineno)
        terms = []
        for tok in rest.split():
            t = term_from_text(tok)
            if term_type(t, n) != 3:
                raise SchemeParseError(f"{tok} is not a type-3 term", lineno)
            terms.append(t)
        if ell in rows:
            raise SchemeParseError(f"duplicate summand {ell}", lineno)
        rows[ell] = frozenset(terms)
    if not rows:
        raise SchemeParseError("empty pairing", 1)
    m = max(rows)
    return [rows.get(ell, frozenset()) for ell in range(1, m + 1)]
