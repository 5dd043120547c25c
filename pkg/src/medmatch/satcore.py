"""Incremental CDCL satisfiability solver with a brute-force oracle.

Conflict-driven clause learning in the Chaff lineage: two watched
literals per clause, first-UIP conflict analysis, exponentially decayed
variable activities, Luby restarts, and phase saving.  Solving under
assumptions reports a failed-assumption subset on UNSAT, and learned
clauses persist across calls.  `dpll_oracle` is an independent
reference decision procedure for differential testing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

VAR_DECAY = 0.95
CLAUSE_DECAY = 0.999
LUBY_BASE = 64
MAX_LEARNTS = 10_000
ACTIVITY_RESCALE = 1e100


@dataclass
class SolverStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    restarts: int = 0
    learned: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "decisions": self.decisions,
            "propagations": self.propagations,
            "conflicts": self.conflicts,
            "restarts": self.restarts,
            "learned": self.learned,
        }


@dataclass
class SolveOutcome:
    sat: bool
    model: dict[int, bool] | None
    failed_assumptions: list[int]
    stats: SolverStats

    @property
    def verdict(self) -> str:
        return "SAT" if self.sat else "UNSAT"


class Clause:
    __slots__ = ("lits", "learnt", "activity")

    def __init__(self, lits: list[int], learnt: bool = False):
        self.lits = lits
        self.learnt = learnt
        self.activity = 0.0

    def __repr__(self) -> str:
        return f"Clause({self.lits})"


class _VarOrder:
    """Indexed max-heap over variable activity."""

    def __init__(self, activity: list[float]):
        self.activity = activity
        self.heap: list[int] = []
        self.pos: dict[int, int] = {}

    def __contains__(self, var: int) -> bool:
        return var in self.pos

    def insert(self, var: int) -> None:
        if var in self.pos:
            return
        self.heap.append(var)
        self.pos[var] = len(self.heap) - 1
        self._up(len(self.heap) - 1)

    def bumped(self, var: int) -> None:
        if var in self.pos:
            self._up(self.pos[var])

    def pop(self) -> int | None:
        if not self.heap:
            return None
        top = self.heap[0]
        last = self.heap.pop()
        del self.pos[top]
        if self.heap:
            self.heap[0] = last
            self.pos[last] = 0
            self._down(0)
        return top

    def _up(self, i: int) -> None:
        heap, act = self.heap, self.activity
        var = heap[i]
        while i > 0:
            parent = (i - 1) >> 1
            if act[heap[parent]] >= act[var]:
                break
            heap[i] = heap[parent]
            self.pos[heap[i]] = i
            i = parent
        heap[i] = var
        self.pos[var] = i

    def _down(self, i: int) -> None:
        heap, act = self.heap, self.activity
        size = len(heap)
        var = heap[i]
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            child = left
            right = left + 1
            if right < size and act[heap[right]] > act[heap[left]]:
                child = right
            if act[heap[child]] <= act[var]:
                break
            heap[i] = heap[child]
            self.pos[heap[i]] = i
            i = child
        heap[i] = var
        self.pos[var] = i


def _widx(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class Solver:
    """CDCL solver over variables 1..num_vars; literals are signed ints."""

    def __init__(self, num_vars: int = 0):
        self.num_vars = 0
        self.clauses: list[Clause] = []
        self.learnts: list[Clause] = []
        self.watches: list[list[Clause]] = [[], []]
        self.assign: list[int] = [0]  # 0 unassigned, 1 true, -1 false
        self.level: list[int] = [0]
        self.reason: list[Clause | None] = [None]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity: list[float] = [0.0]
        self.phase: list[bool] = [False]
        self.seen = bytearray(1)
        self.order = _VarOrder(self.activity)
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.unsat = False
        self.stats = SolverStats()
        self.max_learnts = MAX_LEARNTS
        for _ in range(num_vars):
            self.new_var()

    # -- variables ------------------------------------------------------

    def new_var(self) -> int:
        self.num_vars += 1
        self.assign.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(False)
        self.seen.append(0)
        self.watches.append([])
        self.watches.append([])
        self.order.insert(self.num_vars)
        return self.num_vars

    def add_vars(self, count: int) -> None:
        for _ in range(count):
            self.new_var()

    def _check_lit(self, lit: int) -> None:
        if lit == 0 or abs(lit) > self.num_vars:
            raise ValueError(f"literal {lit} references an unallocated variable")

    def _value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    # -- clause management ---------------------------------------------

    def add_clause(self, lits) -> None:
        """Add a problem clause; tautologies dropped, duplicates merged.

        Must be called between solves (the solver sits at decision
        level 0).  An empty clause makes the solver permanently UNSAT.
        """
        assert not self.trail_lim, "add_clause mid-solve"
        out: list[int] = []
        seen: set[int] = set()
        for lit in lits:
            self._check_lit(lit)
            if -lit in seen:
                return  # tautology
            if lit not in seen:
                seen.add(lit)
                out.append(lit)
        if self.unsat:
            return
        simplified: list[int] = []
        for lit in out:
            value = self._value(lit)
            if value == 1:
                return  # already satisfied at ground level
            if value == 0:
                simplified.append(lit)
        if not simplified:
            self.unsat = True
            return
        if len(simplified) == 1:
            self._enqueue(simplified[0], None)
            if self._propagate() is not None:
                self.unsat = True
            return
        clause = Clause(simplified)
        self.clauses.append(clause)
        self.watches[_widx(simplified[0])].append(clause)
        self.watches[_widx(simplified[1])].append(clause)

    def _attach_learnt(self, lits: list[int]) -> Clause:
        clause = Clause(lits, learnt=True)
        self.learnts.append(clause)
        self.watches[_widx(lits[0])].append(clause)
        self.watches[_widx(lits[1])].append(clause)
        clause.activity = self.cla_inc
        return clause

    # -- trail ----------------------------------------------------------

    def _decision_level(self) -> int:
        return len(self.trail_lim)

    def _enqueue(self, lit: int, reason: Clause | None) -> None:
        var = abs(lit)
        self.assign[var] = 1 if lit > 0 else -1
        self.level[var] = self._decision_level()
        self.reason[var] = reason
        self.trail.append(lit)
        if reason is not None:
            self.stats.propagations += 1

    def _cancel_until(self, target: int) -> None:
        if self._decision_level() <= target:
            return
        bound = self.trail_lim[target]
        for i in range(len(self.trail) - 1, bound - 1, -1):
            lit = self.trail[i]
            var = abs(lit)
            self.phase[var] = lit > 0
            self.assign[var] = 0
            self.reason[var] = None
            self.order.insert(var)
        del self.trail[bound:]
        del self.trail_lim[target:]
        self.qhead = len(self.trail)

    # -- propagation ----------------------------------------------------

    def _propagate(self) -> Clause | None:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            watchers = self.watches[_widx(-p)]
            i = j = 0
            n = len(watchers)
            while i < n:
                clause = watchers[i]
                i += 1
                lits = clause.lits
                if lits[0] == -p:
                    lits[0], lits[1] = lits[1], lits[0]
                first = lits[0]
                if self._value(first) == 1:
                    watchers[j] = clause
                    j += 1
                    continue
                moved = False
                for k in range(2, len(lits)):
                    if self._value(lits[k]) != -1:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches[_widx(lits[1])].append(clause)
                        moved = True
                        break
                if moved:
                    continue
                watchers[j] = clause
                j += 1
                if self._value(first) == -1:
                    while i < n:
                        watchers[j] = watchers[i]
                        j += 1
                        i += 1
                    del watchers[j:]
                    self.qhead = len(self.trail)
                    return clause
                self._enqueue(first, clause)
            del watchers[j:]
        return None

    # -- activities -----------------------------------------------------

    def _bump_var(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > ACTIVITY_RESCALE:
            for v in range(1, self.num_vars + 1):
                self.activity[v] *= 1.0 / ACTIVITY_RESCALE
            self.var_inc *= 1.0 / ACTIVITY_RESCALE
        self.order.bumped(var)

    def _bump_clause(self, clause: Clause) -> None:
        clause.activity += self.cla_inc
        if clause.activity > 1e20:
            for c in self.learnts:
                c.activity *= 1e-20
            self.cla_inc *= 1e-20

    def _decay(self) -> None:
        self.var_inc /= VAR_DECAY
        self.cla_inc /= CLAUSE_DECAY

    # -- conflict analysis ----------------------------------------------

    def _analyze(self, conflict: Clause) -> tuple[list[int], int]:
        """First-UIP learning; returns (learnt clause, backtrack level)."""
        learnt: list[int] = [0]
        seen = self.seen
        path = 0
        p = 0
        index = len(self.trail)
        current = self._decision_level()
        clause = conflict
        while True:
            if clause.learnt:
                self._bump_clause(clause)
            for q in clause.lits:
                if q == p:
                    continue
                var = abs(q)
                if not seen[var] and self.level[var] > 0:
                    seen[var] = 1
                    self._bump_var(var)
                    if self.level[var] == current:
                        path += 1
                    else:
                        learnt.append(q)
            while True:
                index -= 1
                if seen[abs(self.trail[index])]:
                    break
            p = self.trail[index]
            var = abs(p)
            reason = self.reason[var]
            seen[var] = 0
            path -= 1
            if path == 0:
                break
            assert reason is not None
            clause = reason
        learnt[0] = -p
        if len(learnt) == 1:
            bt_level = 0
        else:
            max_i = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
            learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
            bt_level = self.level[abs(learnt[1])]
        for q in learnt[1:]:
            seen[abs(q)] = 0
        return learnt, bt_level

    def _analyze_final(self, failed_lit: int) -> list[int]:
        """Assumptions whose implications falsify `failed_lit`."""
        out = [failed_lit]
        if self._decision_level() == 0 or self.level[abs(failed_lit)] == 0:
            return out
        seen: set[int] = {abs(failed_lit)}
        for i in range(len(self.trail) - 1, self.trail_lim[0] - 1, -1):
            lit = self.trail[i]
            var = abs(lit)
            if var not in seen:
                continue
            seen.discard(var)
            reason = self.reason[var]
            if reason is None:
                out.append(lit)
            else:
                for q in reason.lits:
                    if self.level[abs(q)] > 0:
                        seen.add(abs(q))
        return out

    # -- learned clause deletion -----------------------------------------

    def _locked(self, clause: Clause) -> bool:
        lit = clause.lits[0]
        return self._value(lit) == 1 and self.reason[abs(lit)] is clause

    def _reduce_db(self) -> None:
        """Drop the less active half of the learned clauses."""
        remove_count = len(self.learnts) // 2
        by_activity = sorted(self.learnts, key=lambda c: c.activity)
        removed = set()
        for clause in by_activity[:remove_count]:
            if not self._locked(clause):
                removed.add(id(clause))
        if not removed:
            return
        self.learnts = [c for c in self.learnts if id(c) not in removed]
        for clause in by_activity[:remove_count]:
            if id(clause) in removed:
                self.watches[_widx(clause.lits[0])].remove(clause)
                self.watches[_widx(clause.lits[1])].remove(clause)

    # -- search -----------------------------------------------------------

    def _pick_branch(self) -> int | None:
        while True:
            var = self.order.pop()
            if var is None:
                return None
            if self.assign[var] == 0:
                return var if self.phase[var] else -var

    def solve(self, assumptions=()) -> SolveOutcome:
        """Decide satisfiability under the given assumption literals.

        Deterministic for identical clause insertion order; learned
        clauses are kept, so subsequent calls are incremental.
        """
        assumptions = list(assumptions)
        for lit in assumptions:
            self._check_lit(lit)
        if self.unsat:
            return self._outcome(False, failed=[])
        if self._propagate() is not None:
            self.unsat = True
            return self._outcome(False, failed=[])

        restarts = 0
        conflicts_here = 0
        limit = _luby(restarts + 1) * LUBY_BASE
        while True:
            conflict = self._propagate()
            if conflict is not None:
                self.stats.conflicts += 1
                conflicts_here += 1
                if self._decision_level() == 0:
                    self.unsat = True
                    return self._outcome(False, failed=[])
                learnt, bt_level = self._analyze(conflict)
                self._cancel_until(bt_level)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    clause = self._attach_learnt(learnt)
                    self._enqueue(learnt[0], clause)
                self.stats.learned += 1
                self._decay()
                continue

            if conflicts_here >= limit:
                restarts += 1
                conflicts_here = 0
                limit = _luby(restarts + 1) * LUBY_BASE
                self.stats.restarts += 1
                self._cancel_until(0)
                continue
            if len(self.learnts) >= self.max_learnts:
                self._reduce_db()

            next_lit = None
            while self._decision_level() < len(assumptions):
                p = assumptions[self._decision_level()]
                value = self._value(p)
                if value == 1:
                    self.trail_lim.append(len(self.trail))
                elif value == -1:
                    failed = self._analyze_final(p)
                    self._cancel_until(0)
                    return self._outcome(False, failed=failed)
                else:
                    next_lit = p
                    break
            if next_lit is None:
                if len(self.trail) == self.num_vars:
                    model = {v: self.assign[v] == 1 for v in range(1, self.num_vars + 1)}
                    self._cancel_until(0)
                    return self._outcome(True, model=model)
                next_lit = self._pick_branch()
                if next_lit is None:
                    model = {v: self.assign[v] == 1 for v in range(1, self.num_vars + 1)}
                    self._cancel_until(0)
                    return self._outcome(True, model=model)
                self.stats.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(next_lit, None)

    def _outcome(
        self, sat: bool, model: dict[int, bool] | None = None, failed: list[int] | None = None
    ) -> SolveOutcome:
        return SolveOutcome(sat, model, failed or [], replace(self.stats))

    def enumerate_models(self, projection: list[int], limit: int) -> list[dict[int, bool]]:
        """All distinct models projected onto `projection`, up to `limit`.

        Each found projection is excluded with a blocking clause, so the
        solver is progressively constrained by enumeration.
        """
        if limit < 1:
            raise ValueError("limit must be >= 1")
        for var in projection:
            if var < 1 or var > self.num_vars:
                raise ValueError(f"projection variable {var} not allocated")
        models: list[dict[int, bool]] = []
        while len(models) < limit:
            outcome = self.solve()
            if not outcome.sat:
                break
            assert outcome.model is not None
            projected = {v: outcome.model[v] for v in projection}
            models.append(projected)
            blocking = [-v if value else v for v, value in projected.items()]
            if not blocking:
                break
            self.add_clause(blocking)
        return models


def _luby(i: int) -> int:
    """Luby restart sequence (1-indexed): 1, 1, 2, 1, 1, 2, 4, ..."""
    while True:
        k = i.bit_length()
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


def check_model(clauses, model: dict[int, bool]) -> bool:
    """True iff the assignment satisfies every clause."""
    for clause in clauses:
        if not any(model.get(abs(lit), False) == (lit > 0) for lit in clause):
            return False
    return True


# -- reference oracle ----------------------------------------------------


def dpll_oracle(clauses, num_vars: int) -> tuple[bool, dict[int, bool] | None]:
    """Plain DPLL decision procedure for differential testing.

    Exhaustive backtracking over clause copies; guarded to 30 variables.
    """
    if num_vars > 30:
        raise ValueError("dpll_oracle limited to 30 variables")

    def reduce_by(cls: list[list[int]], lit: int) -> list[list[int]] | None:
        out = []
        for clause in cls:
            if lit in clause:
                continue
            filtered = [l for l in clause if l != -lit]
            if not filtered:
                return None
            out.append(filtered)
        return out

    def search(cls: list[list[int]], assign: dict[int, bool]) -> dict[int, bool] | None:
        while True:
            unit = next((c[0] for c in cls if len(c) == 1), None)
            if unit is None:
                break
            assign = {**assign, abs(unit): unit > 0}
            reduced = reduce_by(cls, unit)
            if reduced is None:
                return None
            cls = reduced
        if not cls:
            return assign
        lit = cls[0][0]
        for choice in (lit, -lit):
            reduced = reduce_by(cls, choice)
            if reduced is not None:
                result = search(reduced, {**assign, abs(choice): choice > 0})
                if result is not None:
                    return result
        return None

    start: list[list[int]] = []
    for clause in clauses:
        lits = sorted(set(clause), key=abs)
        if any(-lit in lits for lit in lits):
            continue  # tautology
        if not lits:
            return False, None
        start.append(list(lits))
    model = search(start, {})
    if model is None:
        return False, None
    for v in range(1, num_vars + 1):
        model.setdefault(v, False)
    return True, model


# -- DIMACS ---------------------------------------------------------------


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    """Parse DIMACS CNF text into (num_vars, clauses)."""
    num_vars = None
    declared_clauses = None
    clauses: list[list[int]] = []
    pending: list[int] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {line_no}: bad DIMACS header {line!r}")
            num_vars, declared_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValueError(f"line {line_no}: clause before header")
        for token in line.split():
            lit = int(token)
            if lit == 0:
                clauses.append(pending)
                pending = []
            else:
                if abs(lit) > num_vars:
                    raise ValueError(f"line {line_no}: literal {lit} beyond header")
                pending.append(lit)
    if pending:
        raise ValueError("unterminated clause at end of file")
    if num_vars is None:
        raise ValueError("missing DIMACS header")
    if declared_clauses is not None and declared_clauses != len(clauses):
        raise ValueError(
            f"header declares {declared_clauses} clauses, file has {len(clauses)}"
        )
    return num_vars, clauses


def solve_dimacs(text: str) -> tuple[SolveOutcome, int]:
    num_vars, clauses = parse_dimacs(text)
    solver = Solver(num_vars)
    for clause in clauses:
        solver.add_clause(clause)
    return solver.solve(), num_vars


def result_lines(outcome: SolveOutcome, num_vars: int) -> list[str]:
    """Solver verdict in DIMACS output conventions (s / v lines)."""
    if not outcome.sat:
        return ["s UNSATISFIABLE"]
    assert outcome.model is not None
    lits = [v if outcome.model[v] else -v for v in range(1, num_vars + 1)]
    lines = ["s SATISFIABLE"]
    for start in range(0, len(lits), 12):
        chunk = lits[start : start + 12]
        end = " 0" if start + 12 >= len(lits) else ""
        lines.append("v " + " ".join(str(l) for l in chunk) + end)
    if not lits:
        lines.append("v 0")
    return lines
