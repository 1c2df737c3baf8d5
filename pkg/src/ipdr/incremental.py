"""Engine-state reuse across a family of instances.

A context that just finished one instance is repaired rather than discarded:
when the next instance is more constrained the frames stay sound as they are
(every stored clause over-approximates a reachable set that only shrinks),
so repair is a rebind plus one propagation pass; when it is more relaxed,
each stored clause is re-established from scratch against the new semantics
before being copied into a fresh frame sequence. The linear drivers sweep a
family in order, the binary driver keeps one reusable context per verdict
side and probes midpoints from the nearer side.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .cnf import Clause
from .engine import (
    FrameSeq,
    Invariant,
    InvariantViolation,
    MultiContextSolver,
    PdrConfig,
    PdrCtx,
    Trace,
    UsageError,
    Verdict,
    _assert_neg_prop,
    pdr_init,
    pdr_main,
    propagate,
    validate_ctx,
)
from .solver import Solver
from .stats import RunStats
from .system import Instance, InstanceFamily, State, full_assumptions

__all__ = [
    "IpdrOutcome",
    "OptimizationResult",
    "constrain",
    "relax",
    "trace_valid_in",
    "ipdr_constrain",
    "ipdr_relax",
    "ipdr_binary",
    "naive_driver",
]


@dataclass(frozen=True)
class IpdrOutcome:
    """Final verdict of a family sweep plus one stats row per instance
    visited (skipped instances get a row with zeroed engine counters).
    `last_trace` keeps the most recent counterexample even when the sweep
    ends on an invariant, so a constraining sweep still yields a witness
    for the last violated instance."""

    verdict: Verdict
    final_parameter: str
    per_instance_stats: tuple[RunStats, ...]
    last_trace: Trace | None = None


@dataclass(frozen=True)
class OptimizationResult:
    """Boundary found by binary search: the least parameter whose instance
    admits a counterexample. No impossibility invariant exists when the
    optimum is the family minimum; no optimum exists when even the most
    relaxed instance is safe (the invariant is reported as evidence)."""

    optimum: int | None
    witness_trace: Trace | None
    impossibility_invariant: Invariant | None
    per_instance_stats: tuple[RunStats, ...] = ()


# --- context repair ---------------------------------------------------------------


def constrain(ctx: PdrCtx, nxt: Instance) -> None:
    """Repair a context for a more constrained instance. Frame clauses stay
    sound unchanged, so the repair is: rebind the assumptions and the initial
    constraint, drop pending obligations (their counterexamples need not
    survive the shrink), and run one propagation pass so clause positions
    reflect the new step relation. The frontier is preserved; a frontier
    violation left by a previous trace verdict is legitimate resumption
    state, not a defect."""
    ctx.rebind(nxt)
    ctx.queue.clear()
    propagate(ctx)


def relax(ctx: PdrCtx, nxt: Instance) -> tuple[int, int]:
    """Repair a context for a more relaxed instance and return the copy
    counters (attempts, copied).

    Nothing learned under the old semantics is trusted: every stored clause
    is re-established against the new instance before reuse. A clause is
    attempted once at its first target; it must exclude no new initial state
    and pass consecution against the clauses confirmed so far (a subset of
    the final frame, so the certificate is if anything stronger). A clause
    re-proved after every step from frame i is stored at i+1, climbing one
    target per pass up to one past its old level; a first-target failure
    drops it, a later failure leaves it at the last level it passed. The
    frontier restarts at 0 with the survivors preloaded dormant above it.
    """
    if ctx.queue:
        raise UsageError("relax requires a settled context with no obligations")
    if ctx.instance is not nxt:
        ctx.rebind(nxt)
    old = ctx.frames
    k_old = old.k
    fresh = FrameSeq()
    fresh.ensure_level(max(k_old, 1))
    ctx.frames = fresh
    fs = ctx.fs
    fs.reset_frames()
    if isinstance(fs, MultiContextSolver):
        fs.frames = fresh
    attempts = 0
    if k_old < 2:
        return 0, 0  # no frame below the frontier to copy from
    survivors: list[Clause] = []
    cap: dict[Clause, int] = {}
    for j in range(1, old.max_level + 1):
        for c in old.deltas[j]:
            if c in cap:
                continue
            cap[c] = min(j + 1, k_old)
            attempts += 1
            if not fs.sat_init(c.negate()).sat:
                survivors.append(c)
    placed: dict[Clause, int] = {}
    live = survivors
    for t in range(2, k_old + 1):
        batch, live = [c for c in live if cap[c] >= t], []
        for c in batch:
            if not fs.step_holds(t - 1, c, with_prop=False):
                continue
            prev = placed.get(c)
            if prev is not None:
                del fresh.deltas[prev][c]
            fresh.deltas[t][c] = None
            fs.note_clause(c, t)
            placed[c] = t
            live.append(c)
    return attempts, len(placed)


def trace_valid_in(trace: Trace, inst: Instance) -> bool:
    """Replay a counterexample against another instance: the head must be an
    initial state, every consecutive pair one step, and the tail a property
    violation, each its own query on a fresh solver. A length-0 trace is
    valid exactly when its single state is initial and violates the
    property."""
    sys_ = inst.system
    s = Solver()
    while s.nvars < sys_.nvars:
        s.fresh_var()
    for c in sys_.defs:
        s.add_clause(c.lits)
    gi = s.fresh_var()
    for c in sys_.init:
        s.add_clause([-gi, *c.lits])
    gt = s.fresh_var()
    for c in sys_.trans:
        s.add_clause([-gt, *c.lits])
    neg_prop = _assert_neg_prop(s, sys_.prop)
    gamma = full_assumptions(inst)
    cubes = [sys_.state_cube(st) for st in trace.states]
    if not s.solve([gi, *gamma, *cubes[0].lits]).sat:
        return False
    for pre, post in zip(cubes, cubes[1:]):
        primed = [sys_.prime_lit(l) for l in post]
        if not s.solve([gt, *gamma, *pre.lits, *primed]).sat:
            return False
    return s.solve([neg_prop, *gamma, *cubes[-1].lits]).sat


# --- stats plumbing ---------------------------------------------------------------


@dataclass
class _Snap:
    cti: int
    obligations: int
    calls: int
    time: float


def _snap(ctx: PdrCtx) -> _Snap:
    return _Snap(ctx.counters.cti, ctx.counters.obligations, ctx.fs.sat_calls, ctx.fs.sat_time_s)


def _row(
    ctx: PdrCtx,
    before: _Snap,
    inst: Instance,
    verdict: Verdict,
    strategy: str,
    seed: int,
    prep_s: float,
    attempts: int,
    copied: int,
    total_s: float,
) -> RunStats:
    return RunStats(
        instance_label=inst.label,
        verdict_kind="invariant" if isinstance(verdict, Invariant) else "trace",
        cti_count=ctx.counters.cti - before.cti,
        obligations_handled=ctx.counters.obligations - before.obligations,
        sat_calls=ctx.fs.sat_calls - before.calls,
        sat_time=ctx.fs.sat_time_s - before.time,
        copy_attempts=attempts,
        copied_clauses=copied,
        incr_prep_time=prep_s,
        total_time=total_s,
        strategy=strategy,
        seed=seed,
    )


def _check(ctx: PdrCtx, frontier_clear: bool) -> None:
    bad = validate_ctx(ctx, frontier_clear=frontier_clear)
    if bad:
        raise InvariantViolation("; ".join(bad))


# --- linear drivers ---------------------------------------------------------------


def ipdr_constrain(family: InstanceFamily, config: PdrConfig | None = None) -> IpdrOutcome:
    """Sweep a constraining family with one reused context, stopping at the
    first invariant. After a trace verdict the trace is replayed against each
    later instance first and every instance where it stays valid is skipped
    outright; the skipped instance's row keeps the trace verdict with zeroed
    engine counters and the replay cost under preparation time."""
    if family.direction != "constraining":
        raise UsageError("ipdr_constrain needs a constraining family")
    cfg = config or PdrConfig()
    rows: list[RunStats] = []
    ctx: PdrCtx | None = None
    verdict: Verdict | None = None
    trace: Trace | None = None
    label = ""
    for inst in family.instances:
        label = inst.label
        t0 = time.perf_counter()
        if trace is not None and trace_valid_in(trace, inst):
            dt = time.perf_counter() - t0
            rows.append(
                RunStats(
                    instance_label=inst.label,
                    verdict_kind="trace",
                    incr_prep_time=dt,
                    total_time=dt,
                    strategy="constrain",
                    seed=cfg.seed,
                )
            )
            verdict = trace
            continue
        if ctx is None:
            ctx = pdr_init(inst, cfg)
            before = _snap(ctx)
            prep = 0.0
        else:
            before = _snap(ctx)
            constrain(ctx, inst)
            if cfg.debug_invariants:
                _check(ctx, frontier_clear=False)
            prep = time.perf_counter() - t0
        verdict = pdr_main(ctx)
        total = time.perf_counter() - t0
        rows.append(_row(ctx, before, inst, verdict, "constrain", cfg.seed, prep, 0, 0, total))
        if isinstance(verdict, Invariant):
            return IpdrOutcome(verdict, inst.label, tuple(rows), trace)
        trace = verdict
    assert verdict is not None
    return IpdrOutcome(verdict, label, tuple(rows), trace)


def ipdr_relax(family: InstanceFamily, config: PdrConfig | None = None) -> IpdrOutcome:
    """Sweep a relaxing family with one reused context, stopping at the
    first trace. Before each repair the relaxed instance's initial states
    are checked against the property directly; a violation is returned as a
    length-0 trace without touching the frames."""
    if family.direction != "relaxing":
        raise UsageError("ipdr_relax needs a relaxing family")
    cfg = config or PdrConfig()
    rows: list[RunStats] = []
    ctx: PdrCtx | None = None
    verdict: Verdict | None = None
    label = ""
    for inst in family.instances:
        label = inst.label
        t0 = time.perf_counter()
        attempts = copied = 0
        if ctx is None:
            ctx = pdr_init(inst, cfg)
            before = _snap(ctx)
            prep = 0.0
        else:
            before = _snap(ctx)
            ctx.rebind(inst)
            r = ctx.fs.sat_init_bad()
            if r.sat:
                state = State.from_cube(ctx.system, r.cube(ctx.system.state_vars))
                verdict = Trace((state,))
                dt = time.perf_counter() - t0
                rows.append(_row(ctx, before, inst, verdict, "relax", cfg.seed, dt, 0, 0, dt))
                return IpdrOutcome(verdict, inst.label, tuple(rows), verdict)
            attempts, copied = relax(ctx, inst)
            if cfg.debug_invariants:
                _check(ctx, frontier_clear=True)
            prep = time.perf_counter() - t0
        verdict = pdr_main(ctx)
        total = time.perf_counter() - t0
        rows.append(
            _row(ctx, before, inst, verdict, "relax", cfg.seed, prep, attempts, copied, total)
        )
        if isinstance(verdict, Trace):
            return IpdrOutcome(verdict, inst.label, tuple(rows), verdict)
    assert verdict is not None
    return IpdrOutcome(verdict, label, tuple(rows))


def naive_driver(
    family: InstanceFamily,
    config: PdrConfig | None = None,
    stop_rule: str | None = None,
) -> IpdrOutcome:
    """Reference sweep: a fresh engine per instance, same order and the same
    stopping rule as the incremental driver it is compared against (first
    invariant for a constraining family, first trace for a relaxing one),
    and no trace replay shortcut."""
    rule = stop_rule or (
        "invariant" if family.direction == "constraining" else "trace"
    )
    if rule not in ("invariant", "trace"):
        raise UsageError(f"unknown stop rule {rule!r}")
    cfg = config or PdrConfig()
    rows: list[RunStats] = []
    verdict: Verdict | None = None
    trace: Trace | None = None
    label = ""
    for inst in family.instances:
        label = inst.label
        t0 = time.perf_counter()
        ctx = pdr_init(inst, cfg)
        before = _snap(ctx)
        verdict = pdr_main(ctx)
        total = time.perf_counter() - t0
        rows.append(_row(ctx, before, inst, verdict, "naive", cfg.seed, 0.0, 0, 0, total))
        if isinstance(verdict, Trace):
            trace = verdict
        kind = "invariant" if isinstance(verdict, Invariant) else "trace"
        if kind == rule:
            return IpdrOutcome(verdict, inst.label, tuple(rows), trace)
    assert verdict is not None
    return IpdrOutcome(verdict, label, tuple(rows), trace)


# --- binary search ----------------------------------------------------------------


def ipdr_binary(family: InstanceFamily, config: PdrConfig | None = None) -> OptimizationResult:
    """Find the least parameter whose instance admits a counterexample.

    The family must carry strictly increasing integer parameters in its
    relaxing order. Two contexts are cached, the most recent invariant
    verdict and the most recent trace verdict; a midpoint probe reuses
    whichever lies nearer by parameter distance (ties prefer the invariant
    side), relaxing up from the invariant side or constraining down from the
    trace side. Reuse consumes the cached entry, so at most two engine
    states are ever alive."""
    cfg = config or PdrConfig()
    insts = list(family.instances)
    if family.direction == "constraining":
        insts.reverse()
    params = [i.param for i in insts]
    if any(p is None for p in params):
        raise UsageError("binary search needs integer instance parameters")
    if any(b <= a for a, b in zip(params, params[1:])):
        raise UsageError("binary search needs strictly increasing parameters")
    rows: list[RunStats] = []
    inv_side: tuple[int, PdrCtx] | None = None
    tr_side: tuple[int, PdrCtx] | None = None
    verdicts: dict[int, Verdict] = {}

    def probe(i: int) -> Verdict:
        nonlocal inv_side, tr_side
        inst = insts[i]
        t0 = time.perf_counter()
        attempts = copied = 0
        ctx: PdrCtx | None = None
        lower = inv_side is not None and inv_side[0] < i
        upper = tr_side is not None and tr_side[0] > i
        if lower and upper:
            d_lo = inst.param - insts[inv_side[0]].param
            d_hi = insts[tr_side[0]].param - inst.param
            if d_hi < d_lo:
                lower = False
            else:
                upper = False
        if lower:
            _, ctx = inv_side
            inv_side = None
            before = _snap(ctx)
            ctx.rebind(inst)
            r = ctx.fs.sat_init_bad()
            if r.sat:
                # the relaxed instance is violated at depth 0; the stale
                # frames were never repaired, so the context is dropped
                state = State.from_cube(ctx.system, r.cube(ctx.system.state_vars))
                verdict: Verdict = Trace((state,))
                dt = time.perf_counter() - t0
                rows.append(_row(ctx, before, inst, verdict, "binary", cfg.seed, dt, 0, 0, dt))
                verdicts[i] = verdict
                return verdict
            attempts, copied = relax(ctx, inst)
            if cfg.debug_invariants:
                _check(ctx, frontier_clear=True)
            prep = time.perf_counter() - t0
        elif upper:
            _, ctx = tr_side
            tr_side = None
            before = _snap(ctx)
            constrain(ctx, inst)
            if cfg.debug_invariants:
                _check(ctx, frontier_clear=False)
            prep = time.perf_counter() - t0
        else:
            ctx = pdr_init(inst, cfg)
            before = _snap(ctx)
            prep = 0.0
        verdict = pdr_main(ctx)
        total = time.perf_counter() - t0
        rows.append(
            _row(ctx, before, inst, verdict, "binary", cfg.seed, prep, attempts, copied, total)
        )
        verdicts[i] = verdict
        if isinstance(verdict, Invariant):
            inv_side = (i, ctx)
        else:
            tr_side = (i, ctx)
        return verdict

    hi = len(insts) - 1
    v_hi = probe(hi)
    if isinstance(v_hi, Invariant):
        return OptimizationResult(None, None, v_hi, tuple(rows))
    if hi == 0:
        return OptimizationResult(insts[0].param, v_hi, None, tuple(rows))
    v_lo = probe(0)
    if isinstance(v_lo, Trace):
        return OptimizationResult(insts[0].param, v_lo, None, tuple(rows))
    a, b = 0, hi
    while b - a > 1:
        mid = (a + b) // 2
        if isinstance(probe(mid), Invariant):
            a = mid
        else:
            b = mid
    witness = verdicts[b]
    blocker = verdicts[a]
    assert isinstance(witness, Trace) and isinstance(blocker, Invariant)
    return OptimizationResult(insts[b].param, witness, blocker, tuple(rows))
