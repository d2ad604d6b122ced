"""Stochastic local-search SAT solving on CnfFormula.

solve() is the embedded engine: assumption-level unit propagation, then a
probSAT-style flip loop (break-only exponential weighting, restarts with a
doubling cutoff) on the reduced formula.  Assumed and propagated literals
are frozen and never flipped.  A sat outcome is always re-checked against
the original clauses before being returned, so a buggy kernel can only
lose solutions, never fabricate them.

solve_external() shells out to a user-supplied DIMACS solver command and
runs the same final check.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .encoder import CnfFormula, to_dimacs, parse_model, as_assignment

_WEIGHT_TABLE_SIZE = 32


class SolverError(RuntimeError):
    """Internal inconsistency: the engine produced a non-model."""


@dataclass(frozen=True)
class SolverConfig:
    """Engine parameters; all budgets must be positive.

    max_flips is the first-try cutoff; with restart_doubling each retry
    doubles it.  total_flip_budget caps flips across tries (deterministic
    budgeting); timeout_s is wall-clock and makes runs nondeterministic.
    init_hint, when set, seeds the first try with the given full
    assignment instead of random values.
    """

    seed: int = 0
    max_flips: int = 100_000
    tries: int = 24
    restart_doubling: bool = True
    cb: float = 2.3
    timeout_s: float | None = None
    total_flip_budget: int | None = None
    init_hint: np.ndarray | None = None
    chunk: int = 262_144

    def __post_init__(self):
        if self.max_flips <= 0 or self.tries <= 0 or self.chunk <= 0:
            raise ValueError("budgets must be positive")
        if not 1.0 < self.cb < 100.0:
            raise ValueError("cb out of range")
        if self.total_flip_budget is not None and self.total_flip_budget <= 0:
            raise ValueError("total_flip_budget must be positive")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")


@dataclass
class SolveOutcome:
    status: str  # "sat" | "unknown"
    model: np.ndarray | None
    flips: int
    tries: int
    wall_time: float

    @property
    def flips_per_sec(self) -> float:
        return self.flips / self.wall_time if self.wall_time > 0 else 0.0


def _formula_arrays(f: CnfFormula):
    """Coded CSR clause arrays + per-variable occurrence CSR, cached."""
    cache = getattr(f, "_kernel_cache", None)
    if cache is not None:
        return cache
    n_clauses = len(f.clauses)
    sizes = np.fromiter((len(c) for c in f.clauses), dtype=np.int64, count=n_clauses)
    total = int(sizes.sum())
    flat = np.fromiter(
        (lit for c in f.clauses for lit in c), dtype=np.int64, count=total
    )
    if total and (np.any(flat == 0) or np.abs(flat).max() > f.var_count):
        raise ValueError("clause literal out of range")
    coded = (2 * np.abs(flat) + (flat < 0)).astype(np.int32)
    start = np.zeros(n_clauses + 1, dtype=np.int32)
    np.cumsum(sizes, out=start[1:])
    # variable -> clause indices (for propagation)
    cvars = np.abs(flat)
    clause_ids = np.repeat(np.arange(n_clauses, dtype=np.int32), sizes)
    order = np.argsort(cvars, kind="stable")
    occ = clause_ids[order].astype(np.int32)
    occ_start = np.zeros(f.var_count + 2, dtype=np.int32)
    np.cumsum(np.bincount(cvars, minlength=f.var_count + 1), out=occ_start[1:])
    arrays = (coded, start, occ, occ_start.astype(np.int32), total)
    f._kernel_cache = arrays
    return arrays


def _code_literals(lits) -> np.ndarray:
    arr = np.asarray(list(lits), dtype=np.int64)
    return (2 * np.abs(arr) + (arr < 0)).astype(np.int32)


def check_model(f: CnfFormula, model, extra_assumptions=()) -> bool:
    """True iff every clause and assumption holds; independent of the engine."""
    assign = as_assignment(f, model)
    for lit in list(f.assumptions) + list(extra_assumptions):
        val = assign[abs(lit)]
        if (val == 1) != (lit > 0):
            return False
    if not f.clauses:
        return True
    coded, start, _, _, total = _formula_arrays(f)
    if total == 0:
        return False  # an empty clause is unsatisfiable
    lit_true = assign[coded >> 1] == (1 - (coded & 1))
    clause_sat = np.logical_or.reduceat(lit_true, start[:-1])
    return bool(clause_sat.all())


def _weights(cb: float) -> np.ndarray:
    return cb ** -np.arange(_WEIGHT_TABLE_SIZE, dtype=np.float64)


def solve(
    f: CnfFormula, cfg: SolverConfig = SolverConfig(), extra_assumptions=()
) -> SolveOutcome:
    """Search for a model; returns status 'unknown' on budget exhaustion.

    Assumption conflicts detected by propagation also yield 'unknown': the
    engine is incomplete and never claims unsatisfiability.
    """
    t0 = time.perf_counter()
    if not f.clauses and not f.assumptions:
        raise ValueError("refusing to solve an empty formula")
    assumptions = list(f.assumptions) + list(extra_assumptions)
    coded, start, var_occ, var_occ_start, total_lits = _formula_arrays(f)
    nv = f.var_count

    values = np.full(nv + 1, -1, dtype=np.int8)
    values[0] = 0
    trail = np.zeros(nv + 1, dtype=np.int32)
    units = _code_literals(assumptions) if assumptions else np.zeros(0, np.int32)
    ok, _ = kernels.propagate(
        coded, start, var_occ, var_occ_start, values, trail, units, units.size
    )
    if not ok:
        return SolveOutcome("unknown", None, 0, 0, time.perf_counter() - t0)

    red_lits = np.empty(max(total_lits, 1), dtype=np.int32)
    red_start = np.empty(len(f.clauses) + 1, dtype=np.int32)
    n_red = kernels.reduce_formula(coded, start, values, red_lits, red_start)

    assign = np.where(values > 0, 1, 0).astype(np.uint8)
    flippable = (values < 0).astype(np.uint8)

    if n_red == 0:
        model = assign.copy()
        _assert_model(f, model, extra_assumptions)
        return SolveOutcome("sat", model, 0, 0, time.perf_counter() - t0)

    occ = np.empty(int(red_start[n_red]), dtype=np.int32)
    occ_start = np.empty(2 * (nv + 1) + 1, dtype=np.int32)
    counts = np.empty(2 * (nv + 1), dtype=np.int32)
    kernels.build_occ(red_lits, red_start, n_red, occ, occ_start, counts)

    num_true = np.zeros(n_red, dtype=np.int32)
    unsat_stack = np.zeros(n_red, dtype=np.int32)
    unsat_pos = np.zeros(n_red, dtype=np.int32)
    max_len = int(np.diff(red_start[: n_red + 1]).max())
    cand_v = np.zeros(max_len, dtype=np.int32)
    cand_w = np.zeros(max_len, dtype=np.float64)
    weights = _weights(cfg.cb)

    seed_rng = np.random.RandomState(cfg.seed & 0x7FFFFFFF)
    total_flips = 0
    tries_used = 0
    solved = False
    for try_idx in range(cfg.tries):
        if cfg.timeout_s is not None and time.perf_counter() - t0 > cfg.timeout_s:
            break
        if cfg.total_flip_budget is not None and total_flips >= cfg.total_flip_budget:
            break
        tries_used += 1
        cutoff = cfg.max_flips << min(try_idx, 20) if cfg.restart_doubling else cfg.max_flips
        if cfg.total_flip_budget is not None:
            cutoff = min(cutoff, cfg.total_flip_budget - total_flips)
        rng = int(seed_rng.randint(1, 2**31))
        use_hint = cfg.init_hint is not None and try_idx == 0
        if use_hint:
            hint = as_assignment(f, cfg.init_hint)
            assign[flippable == 1] = hint[flippable == 1]
        unsat_count, rng = kernels.sls_init(
            red_lits,
            red_start,
            n_red,
            assign,
            flippable,
            num_true,
            unsat_stack,
            unsat_pos,
            rng,
            0 if use_hint else 1,
        )
        done = 0
        while done < cutoff:
            step = min(cfg.chunk, cutoff - done)
            found, used, unsat_count, rng = kernels.sls_run(
                red_lits,
                red_start,
                assign,
                flippable,
                num_true,
                unsat_stack,
                unsat_pos,
                occ,
                occ_start,
                weights,
                unsat_count,
                step,
                rng,
                cand_v,
                cand_w,
            )
            done += used
            total_flips += used
            if found:
                solved = True
                break
            if cfg.timeout_s is not None and time.perf_counter() - t0 > cfg.timeout_s:
                break
        if solved:
            break

    wall = time.perf_counter() - t0
    if not solved:
        return SolveOutcome("unknown", None, total_flips, tries_used, wall)
    model = assign.copy()
    _assert_model(f, model, extra_assumptions)
    return SolveOutcome("sat", model, total_flips, tries_used, wall)


def _assert_model(f: CnfFormula, model: np.ndarray, extra_assumptions=()):
    if not check_model(f, model, extra_assumptions):
        raise SolverError("engine returned an assignment that fails check_model")


def solve_external(
    f: CnfFormula, command: str, extra_assumptions=(), keep_file: str | None = None
) -> SolveOutcome:
    """Run an external DIMACS solver command and check its model.

    The command is split shell-style; '{cnf}' is replaced by the instance
    path (appended when absent).  Any output without 'v' lines, and any
    model failing check_model, yields status 'unknown'.
    """
    t0 = time.perf_counter()
    if extra_assumptions:
        f = f.replaced(assumptions=f.assumptions + list(extra_assumptions))
    text = to_dimacs(f)
    if keep_file:
        path = Path(keep_file)
        path.write_text(text)
        tmp = None
    else:
        tmp = tempfile.NamedTemporaryFile(
            "w", suffix=".cnf", prefix="brentsat_", delete=False
        )
        tmp.write(text)
        tmp.close()
        path = Path(tmp.name)
    try:
        argv = [a.replace("{cnf}", str(path)) for a in shlex.split(command)]
        if not any("{cnf}" in a for a in shlex.split(command)):
            argv.append(str(path))
        proc = subprocess.run(argv, capture_output=True, text=True)
        try:
            model = parse_model(proc.stdout)
        except ValueError:
            return SolveOutcome("unknown", None, 0, 1, time.perf_counter() - t0)
        assign = np.zeros(f.var_count + 1, dtype=np.uint8)
        for var, val in model.items():
            if 1 <= var <= f.var_count:
                assign[var] = 1 if val else 0
        if not check_model(f, assign):
            return SolveOutcome("unknown", None, 0, 1, time.perf_counter() - t0)
        return SolveOutcome("sat", assign, 0, 1, time.perf_counter() - t0)
    finally:
        if tmp is not None:
            path.unlink(missing_ok=True)


def with_seed(cfg: SolverConfig, seed: int) -> SolverConfig:
    return replace(cfg, seed=seed)
