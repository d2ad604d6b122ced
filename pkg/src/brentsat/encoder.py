"""Brent equations for (n, m) compiled to CNF.

One parity constraint per 6-index combination (n^6 of them): the XOR over
ell of the cube alpha*beta*gamma equals 1 iff the term has type 3.  Cubes
are encoded with two-input AND gates, u <-> (alpha & beta) and
v <-> (u & gamma); u is shared by the n^2 equations with the same
(ell, a-cell, b-cell).  Long XORs are chunked three at a time:
w <-> (x1 ^ x2 ^ x3), with w appended at the tail of the remaining sum.

Variable numbering is stable: base variables first (role-major, then ell,
then row-major cell), then u in first-use order, then v, then w.  No
clause-level simplification is performed, so clause counts stay auditable
against an independent tally.
"""

from __future__ import annotations

from itertools import product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .schemes import Scheme, TermIndex, scheme_from_bits, term_type

ROLE_INDEX = {"alpha": 0, "beta": 1, "gamma": 2}
ROLE_NAMES = ("alpha", "beta", "gamma")


class BaseVar(NamedTuple):
    role: str
    ell: int
    row: int
    col: int


class BaseVarMap:
    """Bijection between CNF ids 1..3*m*n^2 and (role, ell, row, col)."""

    __slots__ = ("n", "m")

    def __init__(self, n: int, m: int):
        if n < 1 or m < 1:
            raise ValueError("n and m must be positive")
        self.n = n
        self.m = m

    @property
    def count(self) -> int:
        return 3 * self.m * self.n * self.n

    def var(self, role: str, ell: int, row: int, col: int) -> int:
        n, m = self.n, self.m
        if not (1 <= ell <= m and 1 <= row <= n and 1 <= col <= n):
            raise ValueError(f"base variable ({role},{ell},{row},{col}) out of range")
        r = ROLE_INDEX[role]
        return r * m * n * n + (ell - 1) * n * n + (row - 1) * n + (col - 1) + 1

    def lookup(self, var: int) -> BaseVar:
        n, m = self.n, self.m
        if not 1 <= var <= self.count:
            raise ValueError(f"{var} is not a base variable id")
        idx = var - 1
        r, idx = divmod(idx, m * n * n)
        ell, idx = divmod(idx, n * n)
        row, col = divmod(idx, n)
        return BaseVar(ROLE_NAMES[r], ell + 1, row + 1, col + 1)

    def __iter__(self):
        return ((v, self.lookup(v)) for v in range(1, self.count + 1))


def build_base_map(n: int, m: int) -> BaseVarMap:
    return BaseVarMap(n, m)


class ModelIntegrityError(RuntimeError):
    """A model handed to decode() violates the formula it claims to satisfy."""


class CnfFormula:
    """Clause database plus base-variable map and gate bookkeeping.

    Treated as immutable after construction; the extension operations
    (assume_base, hardcode_pairing, ...) return new formulas.  Gate lists
    record, in id order, how each auxiliary variable is defined, which is
    what the definitional-extension tests and the challenge tooling need.
    and_gates entries are (out, in1, in2); xor_gates are (out, x1, x2, x3);
    parity_terminals are (vars, rhs_bit), one per equation.
    """

    def __init__(
        self,
        n: int,
        m: int,
        var_count: int,
        clauses: list[list[int]],
        assumptions: Sequence[int] = (),
        and_gates: Sequence[tuple[int, int, int]] = (),
        xor_gates: Sequence[tuple[int, int, int, int]] = (),
        parity_terminals: Sequence[tuple[tuple[int, ...], int]] = (),
        num_u_vars: int = 0,
        num_v_vars: int = 0,
        selector_vars: Sequence[int] = (),
    ):
        self.base = BaseVarMap(n, m)
        self.n = n
        self.m = m
        self.var_count = var_count
        self.clauses = clauses
        self.assumptions = list(assumptions)
        self.and_gates = list(and_gates)
        self.xor_gates = list(xor_gates)
        self.parity_terminals = list(parity_terminals)
        self.num_u_vars = num_u_vars
        self.num_v_vars = num_v_vars
        self.selector_vars = list(selector_vars)
        self._occ = None
        for lit in self.assumptions:
            if lit == 0 or abs(lit) > var_count:
                raise ValueError(f"assumption literal {lit} out of range")

    @property
    def num_equations(self) -> int:
        return len(self.parity_terminals)

    def replaced(self, **kw) -> "CnfFormula":
        args = dict(
            n=self.n,
            m=self.m,
            var_count=self.var_count,
            clauses=self.clauses,
            assumptions=self.assumptions,
            and_gates=self.and_gates,
            xor_gates=self.xor_gates,
            parity_terminals=self.parity_terminals,
            num_u_vars=self.num_u_vars,
            num_v_vars=self.num_v_vars,
            selector_vars=self.selector_vars,
        )
        args.update(kw)
        return CnfFormula(**args)

    def occurrences(self) -> list[list[int]]:
        """var -> clause indices, cached (formulas are immutable)."""
        if self._occ is None:
            occ: list[list[int]] = [[] for _ in range(self.var_count + 1)]
            for ci, clause in enumerate(self.clauses):
                for lit in clause:
                    occ[abs(lit)].append(ci)
            self._occ = occ
        return self._occ


def _parity_clauses(lits: Sequence[int], rhs: int) -> list[list[int]]:
    """Direct encoding of xor(lits) = rhs: the 2^(k-1) forbidden patterns."""
    k = len(lits)
    out = []
    for bits in range(1 << k):
        if bin(bits).count("1") % 2 == rhs:
            continue
        out.append([-lits[i] if (bits >> i) & 1 else lits[i] for i in range(k)])
    return out


def _and_gate_clauses(out: int, x: int, y: int) -> list[list[int]]:
    return [[-out, x], [-out, y], [out, -x, -y]]


def encode(n: int, m: int) -> CnfFormula:
    """Compile the (n, m) Brent system to CNF."""
    base = BaseVarMap(n, m)
    nn = n * n
    n_base = base.count
    cells = [(r, c) for r in range(1, n + 1) for c in range(1, n + 1)]

    # u ids: first-use order is (a-cell, b-cell) lexicographic, ell ascending,
    # because the equation loop below keeps the c-cell innermost.
    def u_id(ell: int, ai: int, bi: int) -> int:
        return n_base + (ai * nn + bi) * m + (ell - 1) + 1

    num_u = m * nn * nn
    v_base = n_base + num_u
    num_v = m * nn * nn * nn
    w_base = v_base + num_v

    and_gates: list[tuple[int, int, int]] = []
    for ai in range(nn):
        arow, acol = cells[ai]
        for bi in range(nn):
            brow, bcol = cells[bi]
            for ell in range(1, m + 1):
                and_gates.append(
                    (
                        u_id(ell, ai, bi),
                        base.var("alpha", ell, arow, acol),
                        base.var("beta", ell, brow, bcol),
                    )
                )

    clauses: list[list[int]] = []
    for out, x, y in and_gates:
        clauses.extend(_and_gate_clauses(out, x, y))

    # v ids and defining clauses: equation-major, ell ascending.
    eq_cells = list(product(range(nn), repeat=3))
    vid = v_base
    v_gates: list[tuple[int, int, int]] = []
    for ai, bi, ci in eq_cells:
        grow, gcol = cells[ci]
        for ell in range(1, m + 1):
            vid += 1
            v_gates.append((vid, u_id(ell, ai, bi), base.var("gamma", ell, grow, gcol)))
    for out, x, y in v_gates:
        clauses.extend(_and_gate_clauses(out, x, y))
    and_gates.extend(v_gates)

    # XOR chunking per equation, carry appended at the tail.
    xor_gates: list[tuple[int, int, int, int]] = []
    terminals: list[tuple[tuple[int, ...], int]] = []
    wid = w_base
    for eq_index, (ai, bi, ci) in enumerate(eq_cells):
        items = [v_base + eq_index * m + j + 1 for j in range(m)]
        chunk_clauses: list[list[int]] = []
        while len(items) > 3:
            wid += 1
            x1, x2, x3 = items[0], items[1], items[2]
            xor_gates.append((wid, x1, x2, x3))
            chunk_clauses.extend(_parity_clauses([wid, x1, x2, x3], 0))
            items = items[3:] + [wid]
        i1, i2 = cells[ai]
        j1, j2 = cells[bi]
        k1, k2 = cells[ci]
        rhs = 1 if term_type(TermIndex(i1, i2, j1, j2, k1, k2)) == 3 else 0
        clauses.extend(chunk_clauses)
        clauses.extend(_parity_clauses(items, rhs))
        terminals.append((tuple(items), rhs))

    return CnfFormula(
        n=n,
        m=m,
        var_count=wid,
        clauses=clauses,
        and_gates=and_gates,
        xor_gates=xor_gates,
        parity_terminals=terminals,
        num_u_vars=num_u,
        num_v_vars=num_v,
    )


def assume_base(f: CnfFormula, literals: Iterable[int]) -> CnfFormula:
    """Add unit assumptions over base variables only."""
    lits = list(literals)
    for lit in lits:
        if lit == 0 or abs(lit) > f.base.count:
            raise ValueError(f"literal {lit} is not a base variable literal")
    return f.replaced(assumptions=f.assumptions + lits)


def fix_from_scheme(
    f: CnfFormula, s: Scheme, fraction: float, rng_seed: int
) -> CnfFormula:
    """Fix floor(fraction * 3mn^2) base variables to their values in s.

    Variables are drawn uniformly without replacement; the assumption list
    is sorted by variable id so identical (scheme, fraction, seed) inputs
    produce identical formulas.
    """
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must be in [0, 1]")
    if s.n != f.n or s.m != f.m:
        raise ValueError("scheme dimensions do not match the formula")
    count = f.base.count
    k = int(fraction * count)
    rng = np.random.RandomState(rng_seed)
    chosen = np.sort(rng.permutation(count)[:k])
    bits = s.base_bits()
    lits = [int(v) + 1 if bits[v] else -(int(v) + 1) for v in chosen]
    return assume_base(f, lits)


def scheme_assumptions(f: CnfFormula, s: Scheme) -> list[int]:
    """Unit literals pinning every base variable to its value in s."""
    bits = s.base_bits()
    return [i + 1 if bits[i] else -(i + 1) for i in range(f.base.count)]


def decode(f: CnfFormula, model) -> Scheme:
    """Read base variables of a full model back into a Scheme.

    The model must satisfy every clause and assumption; a violation raises
    ModelIntegrityError instead of silently returning a bogus scheme.
    """
    assign = as_assignment(f, model)
    bad = check_assignment(f, assign)
    if bad is not None:
        raise ModelIntegrityError(f"model violates {bad}")
    bits = assign[1 : f.base.count + 1]
    return scheme_from_bits(f.n, f.m, bits)


def as_assignment(f: CnfFormula, model) -> np.ndarray:
    """Normalize a model (dict or array-like) to a 0/1 vector indexed by var."""
    if isinstance(model, dict):
        assign = np.zeros(f.var_count + 1, dtype=np.uint8)
        seen = np.zeros(f.var_count + 1, dtype=bool)
        for var, val in model.items():
            v = int(var)
            if not 1 <= v <= f.var_count:
                raise ValueError(f"model variable {v} out of range")
            assign[v] = 1 if val else 0
            seen[v] = True
        if not seen[1:].all():
            missing = int(np.flatnonzero(~seen[1:])[0]) + 1
            raise ValueError(f"model is partial: variable {missing} unassigned")
        return assign
    arr = np.asarray(model)
    if arr.shape == (f.var_count,):
        arr = np.concatenate([[0], arr])
    if arr.shape != (f.var_count + 1,):
        raise ValueError(
            f"model must have {f.var_count} entries, got shape {arr.shape}"
        )
    return (arr != 0).astype(np.uint8)


def check_assignment(f: CnfFormula, assign: np.ndarray):
    """First violated clause/assumption, or None if all satisfied."""
    for lit in f.assumptions:
        if _lit_true(assign, lit) != 1:
            return f"assumption {lit}"
    for ci, clause in enumerate(f.clauses):
        if not any(_lit_true(assign, lit) for lit in clause):
            return f"clause {ci}: {clause}"
    return None


def _lit_true(assign: np.ndarray, lit: int) -> int:
    val = assign[abs(lit)]
    return int(val) if lit > 0 else 1 - int(val)


def extend_definitions(f: CnfFormula, base_bits: np.ndarray) -> np.ndarray:
    """The unique auxiliary extension of a total base-variable assignment.

    Evaluates the AND and XOR gates in id order; gate inputs always carry
    smaller ids, so a single pass suffices.
    """
    base_bits = np.asarray(base_bits, dtype=np.uint8).ravel()
    if base_bits.size != f.base.count:
        raise ValueError(f"expected {f.base.count} base bits")
    assign = np.zeros(f.var_count + 1, dtype=np.uint8)
    assign[1 : f.base.count + 1] = base_bits
    for out, x, y in f.and_gates:
        assign[out] = assign[x] & assign[y]
    for out, x1, x2, x3 in f.xor_gates:
        assign[out] = assign[x1] ^ assign[x2] ^ assign[x3]
    return assign


def to_dimacs(f: CnfFormula, comments: Sequence[str] = ()) -> str:
    """Standard DIMACS CNF; assumptions are emitted as trailing unit clauses."""
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.var_count} {len(f.clauses) + len(f.assumptions)}")
    for clause in f.clauses:
        lines.append(" ".join(map(str, clause)) + " 0")
    for lit in f.assumptions:
        lines.append(f"{lit} 0")
    return "\n".join(lines) + "\n"


def varmap_lines(f: CnfFormula) -> str:
    """Sidecar text mapping base variable ids to (role, ell, row, col)."""
    lines = [
        f"{var} {bv.role} {bv.ell} {bv.row} {bv.col}" for var, bv in f.base
    ]
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> dict[int, bool]:
    """Read a solver model from 'v ...' lines (DIMACS output convention)."""
    model: dict[int, bool] = {}
    saw_v = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line.startswith("v"):
            continue
        saw_v = True
        for tok in line[1:].split():
            try:
                lit = int(tok)
            except ValueError:
                raise ValueError(f"malformed literal {tok!r} in model line")
            if lit == 0:
                continue
            model[abs(lit)] = lit > 0
    if not saw_v:
        raise ValueError("no 'v' model lines found")
    return model


def from_dimacs(text: str, n: int, m: int) -> CnfFormula:
    """Load a DIMACS file produced by this package (clauses + base map).

    Gate bookkeeping is not reconstructed; the result supports solving,
    model checking and decode().
    """
    var_count = None
    clauses: list[list[int]] = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad DIMACS header")
            var_count, declared = int(parts[2]), int(parts[3])
            continue
        if var_count is None:
            raise ValueError(f"line {lineno}: clause before header")
        lits = [int(t) for t in line.split()]
        if not lits or lits[-1] != 0:
            raise ValueError(f"line {lineno}: clause must be 0-terminated")
        clause = lits[:-1]
        if any(l == 0 or abs(l) > var_count for l in clause):
            raise ValueError(f"line {lineno}: literal out of range")
        clauses.append(clause)
    if var_count is None:
        raise ValueError("missing DIMACS header")
    if declared is not None and declared != len(clauses):
        raise ValueError(
            f"header declares {declared} clauses, found {len(clauses)}"
        )
    return CnfFormula(n=n, m=m, var_count=var_count, clauses=clauses)
