"""Property directed reachability over clause-encoded transition systems.

Frames are delta encoded: deltas[i] holds exactly the clauses whose highest
frame is i, so the clause set of frame F_i is the union of deltas[j] for
j >= i. Level 0 is the initial constraint and has no delta; deltas normally
run 1..k+1 for frontier k, but levels above k+1 may hold preloaded clauses
after a frame repair (they are dormant until the frontier reaches them).

All SAT work goes through a frame-solver object so the engine is indifferent
to whether one incremental context serves every frame (the default; frame
clauses sit behind per-level activation literals and retired clauses are
never deleted, they just stop being assumed) or each frame keeps a context
of its own.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .cnf import Clause, Cube, FAnd, FOr, FVar, clause_blocks
from .solver import SatResult, Solver, SolverTimeout, tseitin_clauses
from .system import Instance, State, TransitionSystem, full_assumptions


class EngineError(Exception):
    """Internal inconsistency: a result failed its own certificate check."""


class InvariantViolation(EngineError):
    """A frame or obligation invariant failed during a debug sweep."""


class BudgetExceeded(Exception):
    """The frontier cap was reached without a verdict."""


class UsageError(Exception):
    """Caller error: arguments outside what the interface supports."""


@dataclass
class PdrConfig:
    seed: int = 0
    max_k: int | None = None
    timeout_s: float | None = None
    ctg_depth: int = 1
    max_ctgs: int = 5
    debug_invariants: bool = False
    multi_context: bool = False


@dataclass(frozen=True)
class Invariant:
    """Inductive strengthening: clauses of F_level, closed under the step
    relation and implying the property."""

    level: int
    clauses: tuple[Clause, ...]


@dataclass(frozen=True)
class Trace:
    """Counterexample execution from an initial state to a property
    violation; length 0 means a bad initial state."""

    states: tuple[State, ...]

    def __len__(self) -> int:
        return len(self.states) - 1


Verdict = Invariant | Trace


@dataclass(order=True)
class Obligation:
    level: int
    order: int
    cube: Cube = field(compare=False)
    parent: "Obligation | None" = field(compare=False, default=None)


class FrameSeq:
    """Delta-encoded frame clauses. Insertion-ordered dicts keep every
    iteration deterministic across processes."""

    def __init__(self):
        self.k = 0
        self.deltas: list[dict[Clause, None]] = [{}]  # index 0 unused

    @property
    def max_level(self) -> int:
        return len(self.deltas) - 1

    def ensure_level(self, i: int) -> None:
        while len(self.deltas) <= i:
            self.deltas.append({})

    def frame_clauses(self, i: int) -> list[Clause]:
        out: list[Clause] = []
        for j in range(max(i, 1), len(self.deltas)):
            out.extend(self.deltas[j])
        return out


@dataclass
class EngineCounters:
    cti: int = 0
    obligations: int = 0


# --- frame solvers ------------------------------------------------------------------


class FrameSolver:
    """Query layer shared by the engine and the incremental drivers.

    Contract: nothing asserted is ever retracted. Temporary clauses (the
    negation of a cube in a relative-induction query) ride behind one-shot
    guard literals that are permanently falsified after the query.
    """

    def __init__(self, system: TransitionSystem, config: PdrConfig):
        self.system = system
        self.config = config
        self.gamma: tuple[int, ...] = ()
        self.deadline: float | None = None

    # -- binding and bookkeeping

    def bind_instance(self, inst: Instance) -> None:
        self.gamma = full_assumptions(inst)
        self._on_bind(inst)

    def _on_bind(self, inst: Instance) -> None:  # pragma: no cover - interface
        raise NotImplementedError

    def ensure_level(self, level: int) -> None:
        raise NotImplementedError

    def note_clause(self, clause: Clause, level: int) -> None:
        raise NotImplementedError

    def reset_frames(self) -> None:
        raise NotImplementedError

    # -- queries

    def sat_init(self, cube: Cube) -> SatResult:
        """SAT(I and cube)."""
        raise NotImplementedError

    def sat_init_bad(self) -> SatResult:
        """SAT(I and not P)."""
        raise NotImplementedError

    def sat_cube_bad(self, cube: Cube) -> bool:
        """SAT(cube and not P) with no frames or step relation."""
        raise NotImplementedError

    def bad_cube_at(self, level: int) -> Cube | None:
        """Model of F_level and not P, as a total state cube. Level 0 is the
        initial constraint."""
        raise NotImplementedError

    def sat_frame_cube(self, level: int, cube: Cube) -> bool:
        """SAT(F_level and P and cube), no step relation."""
        raise NotImplementedError

    def rel_ind(self, level: int, cube: Cube) -> tuple[bool, Cube]:
        """Relative induction: SAT(F_level and P and not cube and step and
        cube'). Returns (True, core subcube) when blocked, else (False,
        predecessor state cube)."""
        raise NotImplementedError

    def step_holds(self, level: int, clause: Clause, with_prop: bool = True) -> bool:
        """UNSAT(F_level [and P] and step and not clause')."""
        raise NotImplementedError

    def sat_step(self, pre: Cube, post: Cube) -> bool:
        """SAT(pre and step and post'), no frames, no property."""
        raise NotImplementedError

    # -- counters

    @property
    def sat_calls(self) -> int:
        raise NotImplementedError

    @property
    def sat_time_s(self) -> float:
        raise NotImplementedError

    # -- shared helpers

    def _core_subcube(self, cube: Cube, core: frozenset[int]) -> Cube:
        sys_ = self.system
        kept = [l for l in cube if sys_.prime_lit(l) in core]
        return Cube(kept) if kept else cube


def _assert_neg_prop(solver: Solver, prop: tuple[Clause, ...]) -> int:
    """Define a literal equivalent to the property's negation."""
    if not prop:
        return -solver.true_lit()
    f = FOr(*[FAnd(*[FVar(-l) for l in c]) for c in prop])
    root, clauses = tseitin_clauses(solver, f)
    for c in clauses:
        solver.add_clause(c.lits)
    return root


class SingleContextSolver(FrameSolver):
    """One incremental solver for everything. Step constraints are guarded
    by a step literal so initial-state queries are not distorted by deadlock
    states, frame clauses by per-level activation literals, and initial
    constraints by a per-binding activation literal."""

    def __init__(self, system: TransitionSystem, config: PdrConfig):
        super().__init__(system, config)
        s = Solver(seed=config.seed)
        self.solver = s
        while s.nvars < system.nvars:
            s.fresh_var()
        for c in system.defs:
            s.add_clause(c.lits)
        self.step_act = s.fresh_var()
        for c in system.trans:
            s.add_clause([-self.step_act, *c.lits])
        self.prop_act = s.fresh_var()
        for c in system.prop:
            s.add_clause([-self.prop_act, *c.lits])
        self.neg_prop = _assert_neg_prop(s, system.prop)
        self.init_act: int | None = None
        self.acts: list[int] = []  # activation per delta level, index 0 unused
        self._asserted: set[tuple[Clause, int]] = set()

    def _on_bind(self, inst: Instance) -> None:
        self.init_act = self.solver.fresh_var()
        for c in self.system.init:
            self.solver.add_clause([-self.init_act, *c.lits])

    def ensure_level(self, level: int) -> None:
        while len(self.acts) <= level:
            self.acts.append(self.solver.fresh_var())

    def note_clause(self, clause: Clause, level: int) -> None:
        self.ensure_level(level)
        act = self.acts[level]
        key = (clause, act)
        if key in self._asserted:
            return
        self._asserted.add(key)
        self.solver.add_clause([-act, *clause.lits])

    def reset_frames(self) -> None:
        # a fresh activation generation; clauses behind the old literals are
        # never assumed again
        self.acts = []

    def _frame_assumptions(self, level: int) -> list[int]:
        return self.acts[max(level, 1):]

    def _solve(self, assumptions: list[int]) -> SatResult:
        return self.solver.solve(assumptions, deadline=self.deadline)

    def sat_init(self, cube: Cube) -> SatResult:
        return self._solve([self.init_act, *self.gamma, *cube.lits])

    def sat_init_bad(self) -> SatResult:
        return self._solve([self.init_act, self.neg_prop, *self.gamma])

    def sat_cube_bad(self, cube: Cube) -> bool:
        return self._solve([self.neg_prop, *self.gamma, *cube.lits]).sat

    def bad_cube_at(self, level: int) -> Cube | None:
        base = [self.init_act] if level == 0 else self._frame_assumptions(level)
        r = self._solve([*base, self.neg_prop, *self.gamma])
        return r.cube(self.system.state_vars) if r.sat else None

    def sat_frame_cube(self, level: int, cube: Cube) -> bool:
        base = [self.init_act] if level == 0 else self._frame_assumptions(level)
        return self._solve([*base, self.prop_act, *self.gamma, *cube.lits]).sat

    def _one_shot(self, clause_lits: list[int]) -> int:
        g = self.solver.fresh_var()
        self.solver.add_clause([-g, *clause_lits])
        return g

    def rel_ind(self, level: int, cube: Cube) -> tuple[bool, Cube]:
        sys_ = self.system
        g = self._one_shot([-l for l in cube])
        base = [self.init_act] if level == 0 else self._frame_assumptions(level)
        assumptions = [
            *base,
            self.prop_act,
            self.step_act,
            g,
            *self.gamma,
            *(sys_.prime_lit(l) for l in cube),
        ]
        r = self._solve(assumptions)
        self.solver.add_clause([-g])
        if r.sat:
            return False, r.cube(sys_.state_vars)
        return True, self._core_subcube(cube, r.core)

    def step_holds(self, level: int, clause: Clause, with_prop: bool = True) -> bool:
        sys_ = self.system
        base = [self.init_act] if level == 0 else self._frame_assumptions(level)
        assumptions = [*base, self.step_act, *self.gamma]
        if with_prop:
            assumptions.append(self.prop_act)
        assumptions.extend(sys_.prime_lit(-l) for l in clause)
        return not self._solve(assumptions).sat

    def sat_step(self, pre: Cube, post: Cube) -> bool:
        sys_ = self.system
        assumptions = [
            self.step_act,
            *self.gamma,
            *pre.lits,
            *(sys_.prime_lit(l) for l in post),
        ]
        return self._solve(assumptions).sat

    @property
    def sat_calls(self) -> int:
        return self.solver.n_solves

    @property
    def sat_time_s(self) -> float:
        return self.solver.solve_time_s


class _Context:
    """One solver with the system skeleton loaded and its control literals."""

    def __init__(self, system: TransitionSystem, seed: int, with_init: bool):
        s = Solver(seed=seed)
        while s.nvars < system.nvars:
            s.fresh_var()
        for c in system.defs:
            s.add_clause(c.lits)
        self.step_act = s.fresh_var()
        for c in system.trans:
            s.add_clause([-self.step_act, *c.lits])
        self.prop_act = s.fresh_var()
        for c in system.prop:
            s.add_clause([-self.prop_act, *c.lits])
        self.neg_prop = _assert_neg_prop(s, system.prop)
        if with_init:
            for c in system.init:
                s.add_clause(c.lits)
        self.solver = s
        self.loaded: set[Clause] = set()

    def add_frame_clause(self, clause: Clause) -> None:
        if clause not in self.loaded:
            self.solver.add_clause(clause.lits)
            self.loaded.add(clause)


class MultiContextSolver(FrameSolver):
    """A solver per frame level, plus one for the initial constraint and one
    pristine stepper for trace replay. Frame clauses are asserted plainly in
    every context at or below their level; a frame repair drops the per-level
    contexts and rebuilds them lazily from the new frame sequence."""

    def __init__(self, system: TransitionSystem, config: PdrConfig, frames: "FrameSeq"):
        super().__init__(system, config)
        self.frames = frames
        self._retired_calls = 0
        self._retired_time = 0.0
        self.ictx = _Context(system, config.seed, with_init=True)
        self.rctx = _Context(system, config.seed, with_init=False)
        self.mctx: dict[int, _Context] = {}

    def _on_bind(self, inst: Instance) -> None:
        pass  # initial clauses are raw; instances differ by assumptions only

    def _at(self, level: int) -> _Context:
        if level == 0:
            return self.ictx
        c = self.mctx.get(level)
        if c is None:
            c = _Context(self.system, self.config.seed, with_init=False)
            for cl in self.frames.frame_clauses(level):
                c.add_frame_clause(cl)
            self.mctx[level] = c
        return c

    def ensure_level(self, level: int) -> None:
        pass  # contexts are built on first query

    def note_clause(self, clause: Clause, level: int) -> None:
        for lvl, c in self.mctx.items():
            if lvl <= level:
                c.add_frame_clause(clause)

    def reset_frames(self) -> None:
        for c in self.mctx.values():
            self._retired_calls += c.solver.n_solves
            self._retired_time += c.solver.solve_time_s
        self.mctx.clear()

    def _solve(self, c: _Context, assumptions: list[int]) -> SatResult:
        return c.solver.solve(assumptions, deadline=self.deadline)

    def sat_init(self, cube: Cube) -> SatResult:
        return self._solve(self.ictx, [*self.gamma, *cube.lits])

    def sat_init_bad(self) -> SatResult:
        return self._solve(self.ictx, [self.ictx.neg_prop, *self.gamma])

    def sat_cube_bad(self, cube: Cube) -> bool:
        c = self.rctx
        return self._solve(c, [c.neg_prop, *self.gamma, *cube.lits]).sat

    def bad_cube_at(self, level: int) -> Cube | None:
        c = self._at(level)
        r = self._solve(c, [c.neg_prop, *self.gamma])
        return r.cube(self.system.state_vars) if r.sat else None

    def sat_frame_cube(self, level: int, cube: Cube) -> bool:
        c = self._at(level)
        return self._solve(c, [c.prop_act, *self.gamma, *cube.lits]).sat

    def rel_ind(self, level: int, cube: Cube) -> tuple[bool, Cube]:
        sys_ = self.system
        c = self._at(level)
        g = c.solver.fresh_var()
        c.solver.add_clause([-g, *(-l for l in cube)])
        assumptions = [
            c.prop_act,
            c.step_act,
            g,
            *self.gamma,
            *(sys_.prime_lit(l) for l in cube),
        ]
        r = self._solve(c, assumptions)
        c.solver.add_clause([-g])
        if r.sat:
            return False, r.cube(sys_.state_vars)
        return True, self._core_subcube(cube, r.core)

    def step_holds(self, level: int, clause: Clause, with_prop: bool = True) -> bool:
        sys_ = self.system
        c = self._at(level)
        assumptions = [c.step_act, *self.gamma]
        if with_prop:
            assumptions.append(c.prop_act)
        assumptions.extend(sys_.prime_lit(-l) for l in clause)
        return not self._solve(c, assumptions).sat

    def sat_step(self, pre: Cube, post: Cube) -> bool:
        sys_ = self.system
        c = self.rctx
        assumptions = [
            c.step_act,
            *self.gamma,
            *pre.lits,
            *(sys_.prime_lit(l) for l in post),
        ]
        return self._solve(c, assumptions).sat

    @property
    def sat_calls(self) -> int:
        live = self.ictx.solver.n_solves + self.rctx.solver.n_solves
        live += sum(c.solver.n_solves for c in self.mctx.values())
        return self._retired_calls + live

    @property
    def sat_time_s(self) -> float:
        live = self.ictx.solver.solve_time_s + self.rctx.solver.solve_time_s
        live += sum(c.solver.solve_time_s for c in self.mctx.values())
        return self._retired_time + live


# --- engine state -------------------------------------------------------------------


class PdrCtx:
    """Resumable engine state: frames, the obligation queue, and the solver
    context. The same object is rebound across a family's instances."""

    def __init__(self, instance: Instance, config: PdrConfig | None = None):
        self.config = config or PdrConfig()
        self.system = instance.system
        self.instance = instance
        self.frames = FrameSeq()
        self.frames.ensure_level(1)
        if self.config.multi_context:
            self.fs: FrameSolver = MultiContextSolver(self.system, self.config, self.frames)
        else:
            self.fs = SingleContextSolver(self.system, self.config)
        self.fs.bind_instance(instance)
        self.queue: list[Obligation] = []
        self._order = 0
        self.counters = EngineCounters()

    def push(self, level: int, cube: Cube, parent: Obligation | None) -> None:
        self._order += 1
        heapq.heappush(self.queue, Obligation(level, self._order, cube, parent))

    def rebind(self, instance: Instance) -> None:
        if instance.system is not self.system:
            raise ValueError("rebinding requires the shared family system")
        self.instance = instance
        self.fs.bind_instance(instance)
        if isinstance(self.fs, MultiContextSolver):
            self.fs.frames = self.frames


# --- main loop ----------------------------------------------------------------------


def _check_deadline(fs: FrameSolver) -> None:
    if fs.deadline is not None and time.perf_counter() > fs.deadline:
        raise SolverTimeout("engine deadline exceeded")


def pdr_init(instance: Instance, config: PdrConfig | None = None) -> PdrCtx:
    """Fresh engine state for an instance: frontier 0, no clauses, no
    obligations."""
    return PdrCtx(instance, config)


def pdr_main(ctx: PdrCtx) -> Verdict:
    """Run to a verdict from whatever state the context is in. A context
    with frontier 0 (fresh or just repaired) first checks its initial states
    against the property."""
    fs, frames, cfg = ctx.fs, ctx.frames, ctx.config
    if cfg.timeout_s is not None and fs.deadline is None:
        fs.deadline = time.perf_counter() + cfg.timeout_s
    _check_deadline(fs)
    if frames.k == 0:
        s0 = fs.bad_cube_at(0)
        if s0 is not None:
            return Trace((State.from_cube(ctx.system, s0),))
        if cfg.max_k is not None and cfg.max_k < 1:
            raise BudgetExceeded(f"frontier cap {cfg.max_k} reached")
        frames.k = 1
        frames.ensure_level(2)
        fs.ensure_level(2)
    while True:
        _check_deadline(fs)
        trace = _process_queue(ctx)
        if trace is not None:
            return trace
        s = fs.bad_cube_at(frames.k)
        if s is not None:
            ctx.counters.cti += 1
            ctx.push(frames.k, s, None)
            continue
        inv_level = propagate(ctx)
        if cfg.debug_invariants:
            violations = validate_ctx(ctx)
            if violations:
                raise InvariantViolation("; ".join(violations))
        if inv_level is not None:
            clauses = tuple(
                sorted(frames.frame_clauses(inv_level), key=lambda c: (len(c), c.lits))
            )
            return Invariant(inv_level, clauses)
        if cfg.max_k is not None and frames.k + 1 > cfg.max_k:
            raise BudgetExceeded(f"frontier cap {cfg.max_k} reached")
        frames.k += 1
        frames.ensure_level(frames.k + 1)
        fs.ensure_level(frames.k + 1)


def _process_queue(ctx: PdrCtx) -> Trace | None:
    fs, frames = ctx.fs, ctx.frames
    while ctx.queue:
        _check_deadline(fs)
        ob = heapq.heappop(ctx.queue)
        ctx.counters.obligations += 1
        s, lvl = ob.cube, ob.level
        if any(clause_blocks(c, s) for c in frames.frame_clauses(lvl + 1)):
            if lvl + 1 <= frames.k:
                ctx.push(lvl + 1, s, ob.parent)
            continue
        blocked, payload = fs.rel_ind(lvl, s)
        if blocked:
            q = generalize(ctx, lvl + 1, s, seed=payload)
            add_blocked(ctx, q.negate(), lvl + 1)
            if lvl + 1 <= frames.k:
                ctx.push(lvl + 1, s, ob.parent)
        elif lvl == 0:
            return extract_trace(ctx, payload, ob)
        elif fs.sat_init(payload).sat:
            # the predecessor is itself initial; enqueueing it would let a
            # later blocking step exclude an initial state
            return extract_trace(ctx, payload, ob)
        else:
            ctx.push(lvl - 1, payload, ob)
            heapq.heappush(ctx.queue, ob)  # retry once the predecessor falls
    return None


# --- blocking and generalization ------------------------------------------------------


def _repair_init(ctx: PdrCtx, sub: Cube, full: Cube) -> Cube:
    """Grow sub within full until it excludes every initial state. Terminates
    because full itself does."""
    lits = list(sub.lits)
    have = set(lits)
    while True:
        r = ctx.fs.sat_init(Cube(lits))
        if not r.sat:
            return Cube(lits)
        grown = False
        for l in full.lits:
            if l not in have and not r.value(l):
                lits.append(l)
                have.add(l)
                grown = True
                break
        if not grown:
            raise EngineError("initial-state repair failed to make progress")


def generalize(ctx: PdrCtx, level: int, cube: Cube, seed: Cube | None = None, depth: int = 0) -> Cube:
    """Shrink a blocked cube to a strong subcube that is still excluded by
    the initial states and still inductive relative to F_{level-1}."""
    q = cube
    if seed is not None and len(seed.lits) < len(cube.lits):
        q = _repair_init(ctx, seed, cube)
    for lit in cube.lits:
        current = set(q.lits)
        if lit not in current or len(q.lits) <= 1:
            continue
        cand = Cube([l for l in q.lits if l != lit])
        ok, shrunk = _ctg_down(ctx, cand, level, depth)
        if ok:
            q = shrunk
    return q


def _ctg_down(ctx: PdrCtx, q: Cube, level: int, depth: int) -> tuple[bool, Cube]:
    """Try to establish a candidate subcube, strengthening frames against
    counterexamples to generalization and otherwise joining with them."""
    fs, cfg, frames = ctx.fs, ctx.config, ctx.frames
    ctgs = 0
    while True:
        if not q.lits:
            return False, q
        if fs.sat_init(q).sat:
            return False, q
        blocked, payload = fs.rel_ind(level - 1, q)
        if blocked:
            sub = payload if payload.lits else q
            return True, _repair_init(ctx, sub, q)
        m = payload
        if (
            depth < cfg.ctg_depth
            and ctgs < cfg.max_ctgs
            and level > 1
            and not fs.sat_init(m).sat
        ):
            m_blocked, _ = fs.rel_ind(level - 1, m)
            if m_blocked:
                j = level
                while j <= frames.k and fs.rel_ind(j, m)[0]:
                    j += 1
                cg = generalize(ctx, j, m, depth=depth + 1)
                add_blocked(ctx, cg.negate(), j)
                ctgs += 1
                continue
        ctgs = 0
        keep = set(m.lits)
        q = Cube([l for l in q.lits if l in keep])


def add_blocked(ctx: PdrCtx, clause: Clause, target: int) -> None:
    """Record a blocking clause at min(target, k+1). A clause subsumed by a
    stronger one at or above the level is skipped; clauses it subsumes at or
    below the level are erased (their solver entries are implied, so they
    merely stop being tracked)."""
    frames, fs = ctx.frames, ctx.fs
    lvl = min(target, frames.k + 1)
    frames.ensure_level(lvl)
    fs.ensure_level(lvl)
    for j in range(lvl, frames.max_level + 1):
        for d in frames.deltas[j]:
            if d.subsumes(clause):
                return
    for j in range(1, lvl + 1):
        for d in [x for x in frames.deltas[j] if clause.subsumes(x)]:
            del frames.deltas[j][d]
    frames.deltas[lvl][clause] = None
    fs.note_clause(clause, lvl)


def propagate(ctx: PdrCtx) -> int | None:
    """Push clauses outward: a clause of delta_i moves to delta_{i+1} when it
    holds after every step from F_i. Returns the lowest level at or below the
    frontier whose delta emptied, i.e. a level whose frame is closed under the
    step relation, or None."""
    frames, fs = ctx.frames, ctx.fs
    for i in range(1, frames.k):
        for c in list(frames.deltas[i]):
            if c not in frames.deltas[i]:
                continue  # erased by subsumption while moving a predecessor
            if fs.step_holds(i, c):
                add_blocked(ctx, c, i + 1)
                if c in frames.deltas[i] and c in frames.deltas[i + 1]:
                    del frames.deltas[i][c]
    for i in range(1, frames.k + 1):
        if not frames.deltas[i]:
            return i
    return None


# --- traces and validation -------------------------------------------------------------


def extract_trace(ctx: PdrCtx, init_cube: Cube, ob: Obligation) -> Trace:
    """Assemble the counterexample from the obligation chain and replay every
    step against the raw step relation before reporting it."""
    fs, sys_ = ctx.fs, ctx.system
    cubes = [init_cube]
    cur: Obligation | None = ob
    while cur is not None:
        cubes.append(cur.cube)
        cur = cur.parent
    if not fs.sat_init(cubes[0]).sat:
        raise EngineError("trace head is not an initial state")
    for pre, post in zip(cubes, cubes[1:]):
        if not fs.sat_step(pre, post):
            raise EngineError("trace step does not satisfy the step relation")
    if not fs.sat_cube_bad(cubes[-1]):
        raise EngineError("trace tail does not violate the property")
    return Trace(tuple(State.from_cube(sys_, c) for c in cubes))


def validate_ctx(ctx: PdrCtx, frontier_clear: bool = True) -> list[str]:
    """Check the frame and obligation well-formedness properties, returning
    one entry per violation; an empty list means the state is sound to
    resume from.

    Frame checks: every stored clause excludes the initial states (so the
    frames nest above the initial frame); every frame at or below the
    frontier excludes property violations; and consecution holds, i.e. a
    step from frame i cannot leave a clause of frame i+1, for i below the
    frontier. Obligation checks: the level lies in [0, k] (arithmetic); the
    parent chain ends at a property violation (walked syntactically, the
    root checked by one SAT query); and the cube is excluded from its own
    frame under the property. Pass frontier_clear=False for a context
    captured mid-run, where an unhandled frontier violation is the normal
    resumption entry point rather than a defect.
    """
    frames, fs = ctx.frames, ctx.fs
    out: list[str] = []
    for ob in ctx.queue:
        if not (0 <= ob.level <= frames.k):
            out.append(f"obligation-level: {ob.level} outside [0, {frames.k}]")
        root = ob
        while root.parent is not None:
            root = root.parent
        if not fs.sat_cube_bad(root.cube):
            out.append("obligation-chain: chain root does not violate the property")
        if ob.level == 0:
            excluded = not fs.sat_init(ob.cube).sat
        else:
            excluded = not fs.sat_frame_cube(ob.level, ob.cube)
        if not excluded:
            out.append(f"obligation-cube: cube not excluded at level {ob.level}")
    for j in range(1, frames.max_level + 1):
        for c in frames.deltas[j]:
            if fs.sat_init(c.negate()).sat:
                out.append(f"init-containment: level {j} clause blocks an initial state")
    top = frames.k if frontier_clear else frames.k - 1
    for i in range(0, top + 1):
        if fs.bad_cube_at(i) is not None:
            out.append(f"frame-safety: frame {i} admits a property violation")
    for i in range(0, frames.k):
        for c in frames.frame_clauses(i + 1):
            if not fs.step_holds(i, c, with_prop=False):
                out.append(f"consecution: a step from frame {i} leaves a frame {i + 1} clause")
    return out
