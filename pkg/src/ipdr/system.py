"""Symbolic transition systems as clause sets over current/next-state
variables, instance families sharing one encoding, and explicit-state
reachability oracles for cross-checking.

A system's clauses split three ways: `defs` are definitional (Tseitin and
counter variables, functionally determined by the variables they mention and
therefore always safe to assert), `init`/`trans`/`prop` are constraints.
Instances of a family never change the clause set; they select behaviour
purely through assumption literals (selector guards and counter bounds), so
one incremental solver context serves a whole family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cnf import Clause, Cube, FAnd, FOr, FVar, Formula, var_of
from .solver import Solver, VarPool, tseitin_clauses


class TransitionSystem:
    def __init__(
        self,
        var_names: Sequence[str],
        state_vars: Sequence[int],
        primed_vars: Sequence[int],
        nvars: int,
        init: Iterable[Clause],
        trans: Iterable[Clause],
        prop: Iterable[Clause],
        defs: Iterable[Clause] = (),
        guards: Iterable[int] = (),
    ):
        if len(state_vars) != len(primed_vars) or len(var_names) != len(state_vars):
            raise ValueError("state/primed/name lists must align")
        self.var_names = tuple(var_names)
        self.state_vars = tuple(state_vars)
        self.primed_vars = tuple(primed_vars)
        self.nvars = nvars
        self.init = tuple(init)
        self.trans = tuple(trans)
        self.prop = tuple(prop)
        self.defs = tuple(defs)
        self.guards = frozenset(guards)
        self._prime = dict(zip(self.state_vars, self.primed_vars))
        self._unprime = dict(zip(self.primed_vars, self.state_vars))
        overlap = set(self.state_vars) & set(self.primed_vars)
        if overlap:
            raise ValueError(f"variables both current and primed: {overlap}")

    # --- priming -------------------------------------------------------------

    def prime_lit(self, lit: int) -> int:
        v = var_of(lit)
        pv = self._prime.get(v)
        if pv is None:
            raise ValueError(f"variable {v} is not a state variable")
        return pv if lit > 0 else -pv

    def unprime_lit(self, lit: int) -> int:
        v = var_of(lit)
        uv = self._unprime.get(v)
        if uv is None:
            raise ValueError(f"variable {v} is not a primed variable")
        return uv if lit > 0 else -uv

    def prime_cube(self, cube: Cube) -> Cube:
        return Cube(self.prime_lit(l) for l in cube)

    def prime_clause(self, clause: Clause) -> Clause:
        return Clause(self.prime_lit(l) for l in clause)

    def unprime_cube(self, cube: Cube) -> Cube:
        return Cube(self.unprime_lit(l) for l in cube)

    def is_state_lit(self, lit: int) -> bool:
        return var_of(lit) in self._prime

    def state_cube(self, state: "State") -> Cube:
        return Cube(
            v if b else -v for v, b in zip(self.state_vars, state.values)
        )


@dataclass(frozen=True)
class State:
    """Total assignment to the state variables, in declaration order."""

    values: tuple[bool, ...]

    @property
    def bits(self) -> str:
        return "".join("1" if b else "0" for b in self.values)

    @staticmethod
    def from_bits(bits: str) -> "State":
        if any(c not in "01" for c in bits):
            raise ValueError(f"bad state bits {bits!r}")
        return State(tuple(c == "1" for c in bits))

    @staticmethod
    def from_cube(system: TransitionSystem, cube: Cube) -> "State":
        asg = cube.as_assignment()
        try:
            return State(tuple(asg[v] for v in system.state_vars))
        except KeyError as e:
            raise ValueError(f"cube is not total over state variables: {e}")

    def __str__(self) -> str:
        return self.bits


@dataclass(frozen=True)
class Instance:
    """One member of a family: the shared system plus assumption literals
    that activate this member's initial states and step relation."""

    system: TransitionSystem
    label: str
    assumptions: tuple[int, ...] = ()
    param: int | None = None

    def __post_init__(self):
        sv = set(self.system.state_vars) | set(self.system.primed_vars)
        for lit in self.assumptions:
            if var_of(lit) in sv:
                raise ValueError(
                    f"instance assumption {lit} names a state variable"
                )


@dataclass(frozen=True)
class InstanceFamily:
    """Instances in processing order. For a constraining family each next
    instance refines the previous one; for a relaxing family each previous
    instance refines the next."""

    system: TransitionSystem
    instances: tuple[Instance, ...]
    direction: str  # "constraining" | "relaxing"

    def __post_init__(self):
        if self.direction not in ("constraining", "relaxing"):
            raise ValueError(f"bad direction {self.direction!r}")
        if not self.instances:
            raise ValueError("family is empty")
        for inst in self.instances:
            if inst.system is not self.system:
                raise ValueError("family instances must share one system")


# --- guard reduction -----------------------------------------------------------


def _guard_assignment(system: TransitionSystem, inst: Instance) -> dict[int, bool]:
    """Guards assumed positively are on; every other guard is off."""
    gamma = {g: False for g in system.guards}
    for lit in inst.assumptions:
        v = var_of(lit)
        if v in system.guards:
            gamma[v] = lit > 0
    return gamma


def full_assumptions(inst: Instance) -> tuple[int, ...]:
    """Assumption literals for symbolic queries: the instance's own literals
    plus negative defaults for every guard it leaves unmentioned, matching
    the guard reduction the explicit oracle applies."""
    mentioned = {var_of(l) for l in inst.assumptions}
    defaults = tuple(
        -g for g in sorted(inst.system.guards) if g not in mentioned
    )
    return tuple(inst.assumptions) + defaults


def _reduce(clauses: Iterable[Clause], gamma: dict[int, bool]) -> list[Clause]:
    """Drop satisfied clauses and falsified guard literals."""
    out = []
    for c in clauses:
        lits = []
        satisfied = False
        for l in c:
            v = var_of(l)
            if v in gamma:
                if gamma[v] == (l > 0):
                    satisfied = True
                    break
            else:
                lits.append(l)
        if satisfied:
            continue
        out.append(Clause(lits))
    return out


def effective_init(inst: Instance) -> list[Clause]:
    return _reduce(inst.system.init, _guard_assignment(inst.system, inst))


def effective_trans(inst: Instance) -> list[Clause]:
    """Guard-reduced step constraints plus unit clauses for the non-guard
    assumption literals (counter bounds constrain the step relation)."""
    sys_ = inst.system
    gamma = _guard_assignment(sys_, inst)
    out = _reduce(sys_.trans, gamma)
    for lit in inst.assumptions:
        if var_of(lit) not in sys_.guards:
            out.append(Clause([lit]))
    return out


# --- refinement ------------------------------------------------------------------


def _load_system(solver: Solver, system: TransitionSystem, shift: bool) -> dict[int, int]:
    """Allocate this system's variables in `solver`. When shift is False the
    system's own ids are used (solver must be fresh); when True, every
    variable is remapped to a fresh id (for loading a second system whose
    state variables coincide with the first's)."""
    if not shift:
        while solver.nvars < system.nvars:
            solver.fresh_var()
        return {v: v for v in range(1, system.nvars + 1)}
    mapping: dict[int, int] = {}
    for v in list(system.state_vars) + list(system.primed_vars):
        mapping[v] = v  # shared vocabulary
    for v in range(1, system.nvars + 1):
        if v not in mapping:
            mapping[v] = solver.fresh_var()
    return mapping


def _map_clause(clause: Clause, mapping: dict[int, int]) -> Clause:
    return Clause((mapping[var_of(l)] if l > 0 else -mapping[var_of(l)]) for l in clause)


def check_refines(inst1: Instance, inst2: Instance) -> bool:
    """True iff instance 1 refines instance 2: I1 implies I2 and the step
    relation of 1 is contained in that of 2. Both checks are SAT queries; the
    negated side's clause conjunction is Tseitin-negated with its
    definitional clauses asserted (the counter and Tseitin variables are
    functionally determined, so the negation commutes with projection)."""
    s1, s2 = inst1.system, inst2.system
    if s1.state_vars != s2.state_vars or s1.primed_vars != s2.primed_vars:
        raise ValueError("refinement needs a shared state vocabulary")

    def entails(pos_defs, pos_clauses, neg_defs, neg_clauses, solver, m2) -> bool:
        # UNSAT(pos AND NOT neg)?
        for c in pos_defs:
            solver.add_clause(c.lits)
        for c in pos_clauses:
            solver.add_clause(c.lits)
        for c in neg_defs:
            solver.add_clause(_map_clause(c, m2).lits)
        if not neg_clauses:
            return True  # negation of an empty conjunction is false
        disjuncts = [
            FAnd(*[FVar(-l) for l in _map_clause(c, m2)]) for c in neg_clauses
        ]
        root, tclauses = tseitin_clauses(solver, FOr(*disjuncts))
        for c in tclauses:
            solver.add_clause(c.lits)
        return not solver.solve([root]).sat

    solver_i = Solver()
    m1 = _load_system(solver_i, s1, shift=False)
    m2 = _load_system(solver_i, s2, shift=s2 is not s1)
    if not entails(s1.defs, effective_init(inst1), s2.defs, effective_init(inst2), solver_i, m2):
        return False
    solver_t = Solver()
    m1 = _load_system(solver_t, s1, shift=False)
    m2 = _load_system(solver_t, s2, shift=s2 is not s1)
    return entails(s1.defs, effective_trans(inst1), s2.defs, effective_trans(inst2), solver_t, m2)


# --- explicit-state oracle ---------------------------------------------------------


_ORACLE_MAX_VARS = 16


def _oracle_solver(inst: Instance) -> Solver:
    sys_ = inst.system
    solver = Solver()
    _load_system(solver, sys_, shift=False)
    for c in sys_.defs:
        solver.add_clause(c.lits)
    for c in effective_trans(inst):
        solver.add_clause(c.lits)
    return solver


def enumerate_init_states(inst: Instance) -> list[State]:
    sys_ = inst.system
    solver = Solver()
    _load_system(solver, sys_, shift=False)
    for c in sys_.defs:
        solver.add_clause(c.lits)
    for c in effective_init(inst):
        solver.add_clause(c.lits)
    out = []
    while True:
        r = solver.solve([])
        if not r.sat:
            break
        cube = r.cube(sys_.state_vars)
        out.append(State.from_cube(sys_, cube))
        solver.add_clause([-l for l in cube])
    return sorted(out, key=lambda s: s.bits)


def successors(solver: Solver, inst: Instance, state: State) -> list[State]:
    """Enumerate one-step successors by repeated models with per-source
    blocking clauses behind a one-shot guard (the context stays monotone)."""
    sys_ = inst.system
    g = solver.fresh_var()
    src = sys_.state_cube(state)
    out = []
    while True:
        r = solver.solve(list(src.lits) + [g])
        if not r.sat:
            break
        nxt = r.cube(sys_.primed_vars)
        out.append(State.from_cube(sys_, sys_.unprime_cube(nxt)))
        solver.add_clause([-g] + [-l for l in nxt])
    solver.add_clause([-g])
    return sorted(out, key=lambda s: s.bits)


def explicit_reachable(inst: Instance) -> frozenset[State]:
    """BFS over the encoded semantics; model enumeration with blocking
    clauses. Only for small vocabularies."""
    sys_ = inst.system
    if len(sys_.state_vars) > _ORACLE_MAX_VARS:
        raise ValueError(
            f"explicit oracle capped at {_ORACLE_MAX_VARS} state variables"
        )
    solver = _oracle_solver(inst)
    seen: set[State] = set(enumerate_init_states(inst))
    frontier = sorted(seen, key=lambda s: s.bits)
    while frontier:
        nxt = []
        for s in frontier:
            for t in successors(solver, inst, s):
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = sorted(nxt, key=lambda s: s.bits)
    return frozenset(seen)


def state_satisfies(sys_: TransitionSystem, state: State, clauses: Iterable[Clause]) -> bool:
    asg = dict(zip(sys_.state_vars, state.values))
    for c in clauses:
        if not any(asg.get(var_of(l)) == (l > 0) for l in c):
            return False
    return True


def holds_invariant_explicit(inst: Instance) -> tuple[bool, list[State] | None]:
    """BFS safety check; on violation returns a shortest trace (length 0 is
    a bad initial state)."""
    sys_ = inst.system
    if len(sys_.state_vars) > _ORACLE_MAX_VARS:
        raise ValueError(
            f"explicit oracle capped at {_ORACLE_MAX_VARS} state variables"
        )
    inits = enumerate_init_states(inst)
    parents: dict[State, State | None] = {s: None for s in inits}
    solver = _oracle_solver(inst)

    def bad(s: State) -> bool:
        return not state_satisfies(sys_, s, sys_.prop)

    def path_to(s: State) -> list[State]:
        path = [s]
        while parents[path[-1]] is not None:
            path.append(parents[path[-1]])
        path.reverse()
        return path

    for s in inits:
        if bad(s):
            return False, [s]
    frontier = list(inits)
    while frontier:
        nxt = []
        for s in frontier:
            for t in successors(solver, inst, s):
                if t in parents:
                    continue
                parents[t] = s
                if bad(t):
                    return False, path_to(t)
                nxt.append(t)
        frontier = nxt
    return True, None


# --- explicit construction and text format -------------------------------------------


def build_explicit(
    var_names: Sequence[str],
    init_states: Sequence[str],
    edges: Sequence[tuple[str, str]],
    bad_states: Sequence[str] = (),
) -> Instance:
    """Build a system from an explicit edge list over bit-vector states.
    The step relation is the Tseitin-encoded disjunction of edge cubes; the
    property is the conjunction of the bad states' negations."""
    n = len(var_names)
    if n == 0:
        raise ValueError("need at least one state variable")
    for bits in list(init_states) + [b for e in edges for b in e] + list(bad_states):
        if len(bits) != n or any(c not in "01" for c in bits):
            raise ValueError(f"bad state bits {bits!r}")
    if not init_states:
        raise ValueError("need at least one initial state")
    pool = VarPool()
    xs = pool.fresh_vars(n)
    xps = pool.fresh_vars(n)

    def cube_of(bits: str, primed: bool) -> list[int]:
        base = xps if primed else xs
        return [v if c == "1" else -v for v, c in zip(base, bits)]

    defs: list[Clause] = []
    # initial states: cube disjunction, Tseitin when more than one
    init_clauses: list[Clause]
    uniq_inits = sorted(set(init_states))
    if len(uniq_inits) == 1:
        init_clauses = [Clause([l]) for l in cube_of(uniq_inits[0], False)]
    else:
        f = FOr(*[FAnd(*[FVar(l) for l in cube_of(b, False)]) for b in uniq_inits])
        root, tcl = tseitin_clauses(pool, f)
        defs.extend(tcl)
        init_clauses = [Clause([root])]
    # step relation: disjunction of edge cubes over current and next vars
    uniq_edges = sorted(set(edges))
    if not uniq_edges:
        # empty relation; a contradictory pair of units would poison the
        # solver's level 0, so falsity goes through a defined-false variable
        fv = pool.fresh_var()
        defs.append(Clause([-fv]))
        trans_clauses = [Clause([fv])]
    else:
        disjuncts = [
            FAnd(*[FVar(l) for l in cube_of(s, False) + cube_of(t, True)])
            for s, t in uniq_edges
        ]
        root, tcl = tseitin_clauses(pool, FOr(*disjuncts))
        defs.extend(tcl)
        trans_clauses = [Clause([root])]
    prop_clauses = [
        Clause([-l for l in cube_of(b, False)]) for b in sorted(set(bad_states))
    ]
    system = TransitionSystem(
        var_names=var_names,
        state_vars=xs,
        primed_vars=xps,
        nvars=pool.n,
        init=init_clauses,
        trans=trans_clauses,
        prop=prop_clauses,
        defs=defs,
    )
    return Instance(system=system, label="explicit", assumptions=())


def build_explicit_family(
    var_names: Sequence[str],
    init_states: Sequence[str],
    edges: Sequence[tuple[str, str]],
    groups: Sequence[Sequence[tuple[str, str]]],
    bad_states: Sequence[str] = (),
    direction: str = "constraining",
) -> InstanceFamily:
    """Explicit-state family: `edges` are always on, each group of extra
    edges sits behind one guard variable. Instance j enables the first j
    groups, so enabling order is relaxing and disabling order constraining;
    `direction` picks which way the family is listed. Each edge var gets a
    definitional equivalence with its cube, and the guard appears only in a
    plain (guard or not-edge) clause so the guard reduction the explicit
    oracle applies stays exact."""
    n = len(var_names)
    if n == 0:
        raise ValueError("need at least one state variable")
    all_edges = list(edges) + [e for g in groups for e in g]
    for bits in list(init_states) + [b for e in all_edges for b in e] + list(bad_states):
        if len(bits) != n or any(c not in "01" for c in bits):
            raise ValueError(f"bad state bits {bits!r}")
    if not init_states:
        raise ValueError("need at least one initial state")
    if len(set(all_edges)) != len(all_edges):
        raise ValueError("an edge may appear in at most one group")
    pool = VarPool()
    xs = pool.fresh_vars(n)
    xps = pool.fresh_vars(n)

    def cube_of(bits: str, primed: bool) -> list[int]:
        base = xps if primed else xs
        return [v if c == "1" else -v for v, c in zip(base, bits)]

    defs: list[Clause] = []
    uniq_inits = sorted(set(init_states))
    if len(uniq_inits) == 1:
        init_clauses = [Clause([l]) for l in cube_of(uniq_inits[0], False)]
    else:
        f = FOr(*[FAnd(*[FVar(l) for l in cube_of(b, False)]) for b in uniq_inits])
        root, tcl = tseitin_clauses(pool, f)
        defs.extend(tcl)
        init_clauses = [Clause([root])]

    def edge_var(s: str, t: str) -> int:
        ev = pool.fresh_var()
        lits = cube_of(s, False) + cube_of(t, True)
        for l in lits:
            defs.append(Clause([-ev, l]))
        defs.append(Clause([ev, *(-l for l in lits)]))
        return ev

    base_vars = [edge_var(s, t) for s, t in sorted(set(edges))]
    group_vars = [[edge_var(s, t) for s, t in sorted(set(g))] for g in groups]
    every = base_vars + [ev for g in group_vars for ev in g]
    trans_clauses: list[Clause]
    if not every:
        fv = pool.fresh_var()
        defs.append(Clause([-fv]))
        trans_clauses = [Clause([fv])]
    else:
        rv = pool.fresh_var()
        defs.append(Clause([-rv, *every]))
        for ev in every:
            defs.append(Clause([rv, -ev]))
        trans_clauses = [Clause([rv])]
    guards = [pool.fresh_var() for _ in groups]
    for g, evs in zip(guards, group_vars):
        for ev in evs:
            trans_clauses.append(Clause([g, -ev]))
    prop_clauses = [
        Clause([-l for l in cube_of(b, False)]) for b in sorted(set(bad_states))
    ]
    system = TransitionSystem(
        var_names=var_names,
        state_vars=xs,
        primed_vars=xps,
        nvars=pool.n,
        init=init_clauses,
        trans=trans_clauses,
        prop=prop_clauses,
        defs=defs,
        guards=guards,
    )
    members = []
    for j in range(len(groups) + 1):
        assumptions = tuple(g if i < j else -g for i, g in enumerate(guards))
        members.append(
            Instance(system=system, label=str(j), assumptions=assumptions, param=j)
        )
    if direction == "constraining":
        members.reverse()
    return InstanceFamily(
        system=system, instances=tuple(members), direction=direction
    )


def parse_explicit_family(text: str) -> InstanceFamily:
    """Text format: `var <name>` lines declare variables in order, then
    `init <bits>`, `edge <bits> <bits>`, `bad <bits>` lines; `#` comments.
    `group <k> <bits> <bits>` puts an edge in guard group k (1-based, so
    instance j enables groups 1..j) and `direction constraining|relaxing`
    sets the family order; without groups the family has one instance."""
    names: list[str] = []
    inits: list[str] = []
    edges: list[tuple[str, str]] = []
    grouped: dict[int, list[tuple[str, str]]] = {}
    bads: list[str] = []
    direction = "constraining"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        try:
            if kind == "var":
                (name,) = args
                names.append(name)
            elif kind == "init":
                (bits,) = args
                inits.append(bits)
            elif kind == "edge":
                src, dst = args
                edges.append((src, dst))
            elif kind == "group":
                idx, src, dst = args
                grouped.setdefault(int(idx), []).append((src, dst))
            elif kind == "bad":
                (bits,) = args
                bads.append(bits)
            elif kind == "direction":
                (direction,) = args
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    if grouped and sorted(grouped) != list(range(1, len(grouped) + 1)):
        raise ValueError(f"group indices must be 1..{len(grouped)}: {sorted(grouped)}")
    groups = [grouped[i] for i in sorted(grouped)]
    return build_explicit_family(names, inits, edges, groups, bads, direction)


def parse_explicit_system(text: str) -> Instance:
    """Single-instance form of parse_explicit_family."""
    fam = parse_explicit_family(text)
    if len(fam.instances) != 1:
        raise ValueError("file declares a family, not a single system")
    return fam.instances[0]
