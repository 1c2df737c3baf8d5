"""Incremental CDCL SAT solver with assumptions and unsat cores.

The solving discipline is monotone: clauses are permanent once added, and
per-query constraints enter only as assumption literals. An Unsat answer
carries a core that is a subset of the assumptions. Results are
deterministic given the same clause set, assumptions, and seed.

Solver internals are MiniSat-shaped: two watched literals, first-UIP clause
learning with local minimization, EVSIDS variable activity, phase saving,
Luby restarts, and activity-based learnt-clause reduction.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cnf import (
    Clause,
    Cube,
    FAnd,
    FIff,
    FNot,
    FOr,
    Formula,
    FVar,
    var_of,
)

TRUE = 1
FALSE = -1
UNDEF = 0


class SolverTimeout(Exception):
    """Raised when a solve call exceeds its deadline."""


class SatResult:
    __slots__ = ("sat", "_assigns", "core")

    def __init__(self, sat: bool, assigns: list[int] | None, core: frozenset[int] | None):
        self.sat = sat
        self._assigns = assigns  # index by var, values TRUE/FALSE
        self.core = core  # subset of the assumptions passed to solve

    def __bool__(self) -> bool:
        return self.sat

    def value(self, lit: int) -> bool:
        if not self.sat:
            raise ValueError("no model: result is unsat")
        a = self._assigns[var_of(lit)]
        if a == UNDEF:
            raise ValueError(f"variable {var_of(lit)} unassigned in model")
        return (a == TRUE) == (lit > 0)

    def cube(self, variables: Iterable[int]) -> Cube:
        return model_cube(self, variables)


def model_cube(result: SatResult, variables: Iterable[int]) -> Cube:
    """Total cube over the given variables, read off the model."""
    return Cube(v if result.value(v) else -v for v in variables)


class VarPool:
    """Allocates variable ids for building systems away from any solver."""

    __slots__ = ("n",)

    def __init__(self, n: int = 0):
        self.n = n

    def fresh_var(self) -> int:
        self.n += 1
        return self.n

    def fresh_vars(self, count: int) -> list[int]:
        return [self.fresh_var() for _ in range(count)]


class Solver:
    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = random.Random(seed)
        self.nvars = 0
        self.ok = True
        # per-variable state, index 0 unused
        self.assigns: list[int] = [UNDEF]
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[bool] = [False]
        self._seen = bytearray(1)
        # watches indexed by literal: 2*v for v, 2*v+1 for -v
        self.watches: list[list[list[int]]] = [[], []]
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self._learnt_meta: dict[int, list] = {}  # id(clause) -> [activity, seq]
        self._learnt_seq = 0
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.var_inc = 1.0
        self.var_decay = 0.95
        self.cla_inc = 1.0
        self.cla_decay = 0.999
        self._heap: list[tuple[float, int]] = []
        self.max_learnts = 4000.0
        # counters
        self.n_solves = 0
        self.n_conflicts = 0
        self.n_propagations = 0
        self.solve_time_s = 0.0
        self._true_lit: int | None = None

    # --- variables and clauses ----------------------------------------------

    def fresh_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.assigns.append(UNDEF)
        self.level.append(0)
        self.reason.append(None)
        jitter = self._rng.random() * 1e-9
        self.activity.append(jitter)
        self.phase.append(False)
        self._seen.append(0)
        self.watches.append([])
        self.watches.append([])
        self._heap.append((-self.activity[v], v))
        return v

    def fresh_vars(self, count: int) -> list[int]:
        return [self.fresh_var() for _ in range(count)]

    def true_lit(self) -> int:
        """A literal constrained true; handy for constant subformulas."""
        if self._true_lit is None:
            v = self.fresh_var()
            self.add_clause([v])
            self._true_lit = v
        return self._true_lit

    def _lit_idx(self, lit: int) -> int:
        return 2 * lit if lit > 0 else -2 * lit + 1

    def _value(self, lit: int) -> int:
        return self.assigns[lit] if lit > 0 else -self.assigns[-lit]

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a permanent clause. Returns False iff the clause set became
        unsatisfiable outright. Clauses may only be added at decision level
        zero (between solve calls)."""
        assert not self.trail_lim, "clauses may only be added between solves"
        if not self.ok:
            return False
        simplified: list[int] = []
        seen_here: dict[int, int] = {}
        for lit in lits:
            lit = int(lit)
            v = var_of(lit)
            if v <= 0 or v > self.nvars:
                raise ValueError(f"literal {lit} uses an unallocated variable")
            if v in seen_here:
                if seen_here[v] != lit:
                    return True  # tautology: x and -x together
                continue
            val = self._value(lit)
            if val == TRUE:
                return True  # satisfied forever at level 0
            if val == FALSE:
                continue  # falsified forever, drop literal
            seen_here[v] = lit
            simplified.append(lit)
        if not simplified:
            self.ok = False
            return False
        if len(simplified) == 1:
            self._unchecked_enqueue(simplified[0], None)
            if self._propagate() is not None:
                self.ok = False
                return False
            return True
        clause = simplified
        self.clauses.append(clause)
        self._watch(clause)
        return True

    def _watch(self, clause: list[int]) -> None:
        self.watches[self._lit_idx(clause[0])].append(clause)
        self.watches[self._lit_idx(clause[1])].append(clause)

    def _unwatch(self, clause: list[int]) -> None:
        for lit in (clause[0], clause[1]):
            wl = self.watches[self._lit_idx(lit)]
            for i, c in enumerate(wl):
                if c is clause:
                    wl.pop(i)
                    break

    # --- trail ---------------------------------------------------------------

    def _unchecked_enqueue(self, lit: int, reason: list[int] | None) -> None:
        v = var_of(lit)
        self.assigns[v] = TRUE if lit > 0 else FALSE
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _new_decision_level(self) -> None:
        self.trail_lim.append(len(self.trail))

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        assigns = self.assigns
        phase = self.phase
        heap = self._heap
        activity = self.activity
        push = heapq.heappush
        for i in range(len(self.trail) - 1, bound - 1, -1):
            lit = self.trail[i]
            v = var_of(lit)
            phase[v] = lit > 0
            assigns[v] = UNDEF
            self.reason[v] = None
            push(heap, (-activity[v], v))
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = bound
        if len(heap) > 4 * self.nvars + 64:
            self._rebuild_heap()

    def _rebuild_heap(self) -> None:
        self._heap = [
            (-self.activity[v], v) for v in range(1, self.nvars + 1) if self.assigns[v] == UNDEF
        ]
        heapq.heapify(self._heap)

    # --- activity --------------------------------------------------------------

    def _var_bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for i in range(1, self.nvars + 1):
                self.activity[i] *= 1e-100
            self.var_inc *= 1e-100
            self._rebuild_heap()
        elif self.assigns[v] == UNDEF:
            heapq.heappush(self._heap, (-self.activity[v], v))

    def _var_decay_apply(self) -> None:
        self.var_inc /= self.var_decay

    def _cla_bump(self, clause: list[int]) -> None:
        meta = self._learnt_meta.get(id(clause))
        if meta is None:
            return
        meta[0] += self.cla_inc
        if meta[0] > 1e20:
            for m in self._learnt_meta.values():
                m[0] *= 1e-20
            self.cla_inc *= 1e-20

    # --- propagation -----------------------------------------------------------

    def _propagate(self) -> list[int] | None:
        """Unit propagation; returns a conflicting clause or None."""
        assigns = self.assigns
        watches = self.watches
        trail = self.trail
        confl: list[int] | None = None
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.n_propagations += 1
            neg_p = -p
            wl = watches[2 * neg_p if neg_p > 0 else -2 * neg_p + 1]
            i = 0
            j = 0
            n = len(wl)
            while i < n:
                clause = wl[i]
                i += 1
                # make sure the false literal sits at position 1
                if clause[0] == neg_p:
                    clause[0] = clause[1]
                    clause[1] = neg_p
                first = clause[0]
                val = assigns[first] if first > 0 else -assigns[-first]
                if val == TRUE:
                    wl[j] = clause
                    j += 1
                    continue
                found = False
                for k in range(2, len(clause)):
                    lk = clause[k]
                    vk = assigns[lk] if lk > 0 else -assigns[-lk]
                    if vk != FALSE:
                        clause[1] = lk
                        clause[k] = neg_p
                        watches[2 * lk if lk > 0 else -2 * lk + 1].append(clause)
                        found = True
                        break
                if found:
                    continue
                # unit or conflict
                wl[j] = clause
                j += 1
                if val == FALSE:
                    # conflict: keep the rest of the watch list
                    while i < n:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    confl = clause
                    break
                self._unchecked_enqueue(first, clause)
            del wl[j:]
            if confl is not None:
                return confl
        return None

    # --- conflict analysis -------------------------------------------------------

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        learnt: list[int] = [0]
        seen = self._seen
        level = self.level
        reason = self.reason
        cur_level = len(self.trail_lim)
        path_c = 0
        p: int | None = None
        idx = len(self.trail) - 1
        c: list[int] | None = confl
        while True:
            assert c is not None
            self._cla_bump(c)
            start = 0 if p is None else 1
            for q in c[start:]:
                v = var_of(q)
                if not seen[v] and level[v] > 0:
                    seen[v] = 1
                    self._var_bump(v)
                    if level[v] >= cur_level:
                        path_c += 1
                    else:
                        learnt.append(q)
            while not seen[var_of(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = var_of(p)
            c = reason[v]
            seen[v] = 0
            path_c -= 1
            if path_c == 0:
                break
        learnt[0] = -p
        # local minimization: drop literals whose whole reason is already seen
        for q in learnt[1:]:
            seen[var_of(q)] = 1
        kept = [learnt[0]]
        for q in learnt[1:]:
            r = reason[var_of(q)]
            if r is None:
                kept.append(q)
                continue
            for other in r[1:]:
                ov = var_of(other)
                if not seen[ov] and level[ov] > 0:
                    kept.append(q)
                    break
        for q in learnt[1:]:
            seen[var_of(q)] = 0
        learnt = kept
        if len(learnt) == 1:
            bt = 0
        else:
            # move the highest-level tail literal to position 1
            max_i = 1
            for i in range(2, len(learnt)):
                if level[var_of(learnt[i])] > level[var_of(learnt[max_i])]:
                    max_i = i
            learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
            bt = level[var_of(learnt[1])]
        return learnt, bt

    def _analyze_final(self, failed: int) -> frozenset[int]:
        """Core of assumption literals implying the failure of `failed`."""
        core = {failed}
        if not self.trail_lim:
            return frozenset(core)
        seen = self._seen
        seen[var_of(failed)] = 1
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            v = var_of(lit)
            if not seen[v]:
                continue
            r = self.reason[v]
            if r is None:
                # a decision below the failed assumption: an assumption itself
                core.add(lit)
            else:
                for q in r[1:]:
                    if self.level[var_of(q)] > 0:
                        seen[var_of(q)] = 1
            seen[v] = 0
        seen[var_of(failed)] = 0
        return frozenset(core)

    # --- learnt clause management --------------------------------------------

    def _record_learnt(self, clause: list[int]) -> None:
        if len(clause) > 1:
            self.learnts.append(clause)
            self._learnt_seq += 1
            self._learnt_meta[id(clause)] = [self.cla_inc, self._learnt_seq]
            self._watch(clause)
        self._unchecked_enqueue(clause[0], clause if len(clause) > 1 else None)

    def _reduce_db(self) -> None:
        locked: set[int] = set()
        for v in range(1, self.nvars + 1):
            r = self.reason[v]
            if r is not None:
                locked.add(id(r))
        meta = self._learnt_meta
        candidates = [c for c in self.learnts if len(c) > 2 and id(c) not in locked]
        candidates.sort(key=lambda c: (meta[id(c)][0], -meta[id(c)][1]))
        drop = set()
        for c in candidates[: len(candidates) // 2]:
            drop.add(id(c))
            self._unwatch(c)
            del meta[id(c)]
        self.learnts = [c for c in self.learnts if id(c) not in drop]

    # --- main search -----------------------------------------------------------

    def solve(
        self,
        assumptions: Sequence[int] = (),
        deadline: float | None = None,
    ) -> SatResult:
        t0 = time.perf_counter()
        self.n_solves += 1
        try:
            return self._solve(list(assumptions), deadline)
        finally:
            self._cancel_until(0)
            self.solve_time_s += time.perf_counter() - t0

    def _solve(self, assumptions: list[int], deadline: float | None) -> SatResult:
        for lit in assumptions:
            v = var_of(lit)
            if v <= 0 or v > self.nvars:
                raise ValueError(f"assumption {lit} uses an unallocated variable")
        if not self.ok:
            return SatResult(False, None, frozenset())
        confl = self._propagate()
        if confl is not None:
            self.ok = False
            return SatResult(False, None, frozenset())
        heap = self._heap
        conflicts_here = 0
        decisions_here = 0
        restart_idx = 1
        restart_budget = 100 * _luby(restart_idx)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.n_conflicts += 1
                conflicts_here += 1
                if deadline is not None and conflicts_here % 256 == 0:
                    if time.perf_counter() > deadline:
                        raise SolverTimeout()
                if not self.trail_lim:
                    self.ok = False
                    return SatResult(False, None, frozenset())
                learnt, bt = self._analyze(confl)
                # never backjump into the middle of unfinished assumption
                # pushing: the decide loop re-pushes what got popped
                self._cancel_until(bt)
                self._record_learnt(learnt)
                self._var_decay_apply()
                self.cla_inc /= self.cla_decay
                if len(self.learnts) >= self.max_learnts:
                    self._reduce_db()
                    self.max_learnts *= 1.3
                if conflicts_here >= restart_budget:
                    conflicts_here = 0
                    restart_idx += 1
                    restart_budget = 100 * _luby(restart_idx)
                    self._cancel_until(0)
                continue
            if len(self.trail_lim) < len(assumptions):
                p = assumptions[len(self.trail_lim)]
                val = self._value(p)
                if val == TRUE:
                    self._new_decision_level()
                    continue
                if val == FALSE:
                    core = self._analyze_final(p)
                    return SatResult(False, None, core)
                self._new_decision_level()
                self._unchecked_enqueue(p, None)
                continue
            # pick a branching variable
            v = 0
            while heap:
                negact, cand = heapq.heappop(heap)
                if self.assigns[cand] == UNDEF and -negact == self.activity[cand]:
                    v = cand
                    break
            if v == 0:
                # double-check nothing unassigned is hiding behind stale entries
                for cand in range(1, self.nvars + 1):
                    if self.assigns[cand] == UNDEF:
                        v = cand
                        break
            if v == 0:
                assigns = list(self.assigns)
                return SatResult(True, assigns, None)
            decisions_here += 1
            if deadline is not None and decisions_here % 1024 == 0:
                if time.perf_counter() > deadline:
                    raise SolverTimeout()
            self._new_decision_level()
            self._unchecked_enqueue(v if self.phase[v] else -v, None)


def _luby(i: int) -> int:
    # Luby restart sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    k = 1
    while (1 << (k + 1)) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i = i - (1 << (k - 1)) + 1
        k = 1
        while (1 << (k + 1)) - 1 < i:
            k += 1


# --- Tseitin encoding ---------------------------------------------------------


def tseitin_clauses(alloc, formula: Formula) -> tuple[int, list[Clause]]:
    """Encode `formula` into defining clauses over fresh variables from
    `alloc` (anything with fresh_var). Returns (root literal, clauses).

    Plain variables and negations pass through without fresh variables. For
    every total assignment of the original variables there is exactly one
    extension to the fresh variables satisfying the clauses, and it assigns
    the root literal the truth value of the formula.
    """
    out: list[Clause] = []
    cache: dict[Formula, int] = {}

    def emit(lits: list[int]) -> None:
        seen: set[int] = set(lits)
        if any(-l in seen for l in seen):
            return  # tautological defining clause constrains nothing
        out.append(Clause(lits))

    def enc(f: Formula) -> int:
        if f in cache:
            return cache[f]
        lit = _enc(f)
        cache[f] = lit
        return lit

    def _enc(f: Formula) -> int:
        match f:
            case FVar(lit):
                return lit
            case FNot(child):
                return -enc(child)
            case FAnd(children):
                if not children:
                    z = alloc.fresh_var()
                    out.append(Clause([z]))
                    return z
                lits = [enc(c) for c in children]
                if len(lits) == 1:
                    return lits[0]
                z = alloc.fresh_var()
                for l in lits:
                    emit([-z, l])
                emit([z] + [-l for l in lits])
                return z
            case FOr(children):
                if not children:
                    z = alloc.fresh_var()
                    out.append(Clause([-z]))
                    return z
                lits = [enc(c) for c in children]
                if len(lits) == 1:
                    return lits[0]
                z = alloc.fresh_var()
                for l in lits:
                    emit([z, -l])
                emit([-z] + lits)
                return z
            case FIff(left, right):
                a = enc(left)
                b = enc(right)
                z = alloc.fresh_var()
                emit([-z, -a, b])
                emit([-z, a, -b])
                emit([z, a, b])
                emit([z, -a, -b])
                return z
        raise TypeError(f"not a formula: {f!r}")

    root = enc(formula)
    return root, out


def tseitin_encode(solver: Solver, formula: Formula) -> int:
    """Encode directly into a solver; returns the root literal."""
    root, clauses = tseitin_clauses(solver, formula)
    for c in clauses:
        solver.add_clause(c.lits)
    return root


# --- sequential counter ladder -------------------------------------------------


@dataclass(frozen=True)
class CountingLadder:
    """Unary counting outputs over a fixed literal list: outputs[j-1] is
    true iff at least j of the counted literals are true. Bounds are imposed
    per query by assuming output negations; nothing is asserted here."""

    counted: tuple[int, ...]
    outputs: tuple[int, ...]

    def at_most_assumptions(self, bound: int) -> tuple[int, ...]:
        """Assumption literals imposing count <= bound (release-style: all
        outputs above the bound are negated; ladder monotonicity makes the
        first one sufficient, the rest are then implied)."""
        if bound < 0:
            raise ValueError("bound must be >= 0")
        return tuple(-o for o in self.outputs[bound:])

    def at_least_assumptions(self, bound: int) -> tuple[int, ...]:
        if bound <= 0:
            return ()
        if bound > len(self.outputs):
            raise ValueError("bound exceeds the number of counted literals")
        return (self.outputs[bound - 1],)


def ladder_clauses(alloc, lits: Sequence[int]) -> tuple[CountingLadder, list[Clause]]:
    """Sequential-counter ladder with both implication directions, so the
    count variables are functionally determined by the counted literals."""
    n = len(lits)
    out: list[Clause] = []
    # s[i][j] (1-based) is true iff at least j of the first i literals hold
    prev: list[int] = []  # s[i-1][1..i-1]
    for i in range(1, n + 1):
        x = lits[i - 1]
        cur = [alloc.fresh_var() for _ in range(i)]
        for j in range(1, i + 1):
            s = cur[j - 1]
            above = prev[j - 1] if j <= i - 1 else None  # s[i-1][j]
            diag = prev[j - 2] if j >= 2 else None  # s[i-1][j-1]; None means true for j=1
            if above is not None:
                out.append(Clause([-above, s]))
            if j == 1:
                out.append(Clause([-x, s]))
            elif diag is not None:
                out.append(Clause([-diag, -x, s]))
            # downward direction: s -> above OR (diag AND x)
            if above is None and j == 1:
                out.append(Clause([-s, x]))
            elif above is None:
                # j == i: s[i][i] -> diag and x
                out.append(Clause([-s, diag]))
                out.append(Clause([-s, x]))
            elif j == 1:
                out.append(Clause([-s, above, x]))
            else:
                out.append(Clause([-s, above, diag]))
                out.append(Clause([-s, above, x]))
        prev = cur
    ladder = CountingLadder(tuple(lits), tuple(prev))
    return ladder, out


def encode_at_most(solver: Solver, lits: Sequence[int]) -> CountingLadder:
    """Encode the counting ladder directly into a solver."""
    ladder, clauses = ladder_clauses(solver, lits)
    for c in clauses:
        solver.add_clause(c.lits)
    return ladder
