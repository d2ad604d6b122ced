"""Matrix multiplication schemes over GF(2) and the Brent-equation verifier.

A scheme computes the product of two n x n matrices with m elementwise
products, each product being (sum of a-entries) * (sum of b-entries) with
0/1 coefficients, and each c-entry a 0/1 combination of the products.
Validity is equivalent to the n^6 cubic Brent equations holding over GF(2).

Gamma coefficients are stored with flipped indices throughout: the target
of equation (i1,i2,j1,j2,k1,k2) is 1 exactly when i2=j1, j2=k1 and k2=i1,
so a "type 3" monomial has the shape a_ij b_jk c_ki.  Importers for data
in the application convention (gamma indexed by the c-entry it feeds) must
transpose gamma, see formats.scheme_from_json.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np


class TermIndex(NamedTuple):
    """One monomial a_{i1 i2} b_{j1 j2} c_{k1 k2}, indices 1-based."""

    i1: int
    i2: int
    j1: int
    j2: int
    k1: int
    k2: int

    def name(self) -> str:
        return "a%d%db%d%dc%d%d" % self


class Summand(NamedTuple):
    """Coefficient matrices of one product (gamma in flipped convention)."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


ROLES = ("alpha", "beta", "gamma")


def term_type(t: TermIndex, n: int | None = None) -> int:
    """Number of matching index pairs (i2=j1, j2=k1, k2=i1), in {0,1,2,3}.

    Type-3 terms are exactly those that survive in a valid expansion; all
    others must cancel over GF(2).
    """
    lo = min(t)
    hi = max(t)
    if lo < 1 or (n is not None and hi > n):
        raise ValueError(f"term index out of range: {t}")
    return int(t.i2 == t.j1) + int(t.j2 == t.k1) + int(t.k2 == t.i1)


def enumerate_type3(n: int) -> list[TermIndex]:
    """All n^3 type-3 terms a_ij b_jk c_ki, in lexicographic (i,j,k) order."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = range(1, n + 1)
    return [TermIndex(i, j, j, k, k, i) for i in rng for j in rng for k in rng]


class Scheme:
    """An (n, m) scheme candidate: stacked (m, n, n) 0/1 coefficient arrays.

    Instances are immutable value objects; the arrays are read-only views.
    Validity (all Brent equations) is a property checked by verify(), not a
    construction invariant: the search pipeline manipulates raw candidates.
    """

    __slots__ = ("n", "m", "alpha", "beta", "gamma", "label")

    def __init__(self, alpha, beta, gamma, label: str | None = None):
        a = _coerce_coeffs(alpha, "alpha")
        b = _coerce_coeffs(beta, "beta")
        g = _coerce_coeffs(gamma, "gamma")
        if not (a.shape == b.shape == g.shape):
            raise ValueError("alpha/beta/gamma shapes differ")
        m, n, n2 = a.shape
        if n != n2:
            raise ValueError("coefficient matrices must be square")
        self.n = n
        self.m = m
        self.alpha = a
        self.beta = b
        self.gamma = g
        self.label = label

    @classmethod
    def from_summands(cls, summands: Iterable[Summand], label: str | None = None) -> "Scheme":
        summands = list(summands)
        return cls(
            np.stack([s.alpha for s in summands]),
            np.stack([s.beta for s in summands]),
            np.stack([s.gamma for s in summands]),
            label=label,
        )

    def summand(self, ell: int) -> Summand:
        """Summand by 1-based index."""
        if not 1 <= ell <= self.m:
            raise ValueError(f"summand index {ell} out of range 1..{self.m}")
        i = ell - 1
        return Summand(self.alpha[i], self.beta[i], self.gamma[i])

    @property
    def summands(self) -> list[Summand]:
        return [self.summand(ell) for ell in range(1, self.m + 1)]

    def base_bits(self) -> np.ndarray:
        """Flat 0/1 vector of all 3*m*n^2 coefficients, role-major."""
        return np.concatenate(
            [self.alpha.ravel(), self.beta.ravel(), self.gamma.ravel()]
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scheme):
            return NotImplemented
        return (
            self.n == other.n
            and self.m == other.m
            and bool(np.array_equal(self.alpha, other.alpha))
            and bool(np.array_equal(self.beta, other.beta))
            and bool(np.array_equal(self.gamma, other.gamma))
        )

    def __hash__(self) -> int:
        return hash((self.n, self.m, self.alpha.tobytes(), self.beta.tobytes(), self.gamma.tobytes()))

    def __repr__(self) -> str:
        tag = f" label={self.label!r}" if self.label else ""
        return f"<Scheme n={self.n} m={self.m}{tag}>"


def _coerce_coeffs(arr, name: str) -> np.ndarray:
    a = np.asarray(arr, dtype=np.uint8)
    if a.ndim != 3:
        raise ValueError(f"{name} must be a stacked (m, n, n) array")
    if a.size and a.max() > 1:
        raise ValueError(f"{name} entries must be 0 or 1")
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def brent_residual(s: Scheme) -> list[tuple[TermIndex, int, int]]:
    """All violated Brent equations as (term, lhs_bit, rhs_bit) triples.

    Empty result is equivalent to validity; this is the project-wide oracle.
    """
    lhs, rhs = _brent_sides(s)
    bad = np.argwhere(lhs != rhs)
    out = []
    for idx in bad:
        t = TermIndex(*(int(x) + 1 for x in idx))
        out.append((t, int(lhs[tuple(idx)]), int(rhs[tuple(idx)])))
    return out


def verify(s: Scheme) -> bool:
    """True iff every Brent equation holds over GF(2)."""
    lhs, rhs = _brent_sides(s)
    return bool(np.array_equal(lhs, rhs))


def _brent_sides(s: Scheme) -> tuple[np.ndarray, np.ndarray]:
    a = s.alpha.astype(np.int64)
    b = s.beta.astype(np.int64)
    g = s.gamma.astype(np.int64)
    lhs = np.einsum("lab,lcd,lef->abcdef", a, b, g) & 1
    eye = np.eye(s.n, dtype=np.int64)
    rhs = np.einsum("bc,de,fa->abcdef", eye, eye, eye)
    return lhs, rhs


def support(s: Scheme) -> int:
    """Number of coefficients set to 1 across all three roles."""
    return int(s.alpha.sum()) + int(s.beta.sum()) + int(s.gamma.sum())


def core(s: Scheme) -> list[set[TermIndex]]:
    """Per-summand sets of type-3 terms fully produced by that summand."""
    out: list[set[TermIndex]] = []
    terms = enumerate_type3(s.n)
    for ell in range(s.m):
        produced = {
            t
            for t in terms
            if s.alpha[ell, t.i1 - 1, t.i2 - 1]
            and s.beta[ell, t.j1 - 1, t.j2 - 1]
            and s.gamma[ell, t.k1 - 1, t.k2 - 1]
        }
        out.append(produced)
    return out


def core_signature(s: Scheme) -> list[int]:
    """Sorted sizes >= 2 of the per-summand type-3 groups."""
    return sorted(len(c) for c in core(s) if len(c) >= 2)


class SchemeStats(NamedTuple):
    support: int
    core: list[set[TermIndex]]
    core_signature: list[int]


def scheme_stats(s: Scheme) -> SchemeStats:
    c = core(s)
    return SchemeStats(support(s), c, sorted(len(x) for x in c if len(x) >= 2))


def canonical_key(s: Scheme) -> bytes:
    """Summand-order-invariant fingerprint.

    Each summand becomes a fixed-width 3*n^2 bit string (alpha row-major,
    then beta, then gamma); the m strings are sorted lexicographically and
    concatenated.  Equal keys mean identical up to summand reordering; no
    deeper equivalence is folded in.
    """
    rows = np.concatenate(
        [
            s.alpha.reshape(s.m, -1),
            s.beta.reshape(s.m, -1),
            s.gamma.reshape(s.m, -1),
        ],
        axis=1,
    )
    packed = np.packbits(rows, axis=1)
    return b"".join(sorted(row.tobytes() for row in packed))


def naive_scheme(n: int) -> Scheme:
    """The n^3-product schoolbook scheme; summand (i,j,k) computes a_ij*b_jk."""
    if n < 1:
        raise ValueError("n must be positive")
    m = n**3
    alpha = np.zeros((m, n, n), dtype=np.uint8)
    beta = np.zeros((m, n, n), dtype=np.uint8)
    gamma = np.zeros((m, n, n), dtype=np.uint8)
    ell = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                alpha[ell, i, j] = 1
                beta[ell, j, k] = 1
                gamma[ell, k, i] = 1
                ell += 1
    return Scheme(alpha, beta, gamma, label=f"naive-{n}x{n}")


def scheme_from_bits(n: int, m: int, bits: np.ndarray, label: str | None = None) -> Scheme:
    """Inverse of Scheme.base_bits for a role-major flat 0/1 vector."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    block = m * n * n
    if bits.size != 3 * block:
        raise ValueError(f"expected {3 * block} bits, got {bits.size}")
    shape = (m, n, n)
    return Scheme(
        bits[:block].reshape(shape),
        bits[block : 2 * block].reshape(shape),
        bits[2 * block :].reshape(shape),
        label=label,
    )
