"""Unit propagation engine and brute-force SAT oracle.

Literals are nonzero ints in the DIMACS convention: variable v is the positive
literal v, its negation is -v.  Clauses are sequences of literals; a formula is
a sequence of clauses plus a variable count (variables are 1..nvars).

The engine keeps one counter pair per clause (number of false literals, number
of true literals) and an occurrence list per literal, so asserting a literal
touches only the clauses that mention it and every assertion is undoable
through the trail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import BudgetExceededError, InputError

DEFAULT_SAT_VAR_BUDGET = 24


@dataclass(frozen=True)
class UpResult:
    """Outcome of unit propagation: a closed literal set or a conflict.

    ``literals`` is None exactly when ``conflict`` is True.  The fixpoint
    contains the seed assignment and is closed under unit resolution.
    ``trace`` (optional) lists (literal, clause_index) pairs in derivation
    order, clause_index -1 marking seed literals.
    """

    conflict: bool
    literals: Optional[frozenset[int]]
    trace: Optional[tuple[tuple[int, int], ...]] = None


def check_partial_assignment(lits: Iterable[int], nvars: Optional[int] = None) -> tuple[int, ...]:
    """Validate that ``lits`` is a partial assignment (no complementary pair)."""
    seen: dict[int, int] = {}
    out = []
    for lit in lits:
        if lit == 0:
            raise InputError("literal 0 is not allowed")
        v = abs(lit)
        if nvars is not None and v > nvars:
            raise InputError(f"literal {lit} outside variable universe 1..{nvars}")
        if v in seen:
            if seen[v] != lit:
                raise InputError(f"assignment contains complementary pair {v}/-{v}")
            continue
        seen[v] = lit
        out.append(lit)
    return tuple(out)


class PropEngine:
    """Counter-based unit propagation with an undo trail."""

    def __init__(self, clauses: Sequence[Sequence[int]], nvars: int,
                 trace: Optional[list[tuple[int, int]]] = None):
        self.nvars = nvars
        self.clauses = [tuple(c) for c in clauses]
        self.sizes = [len(c) for c in self.clauses]
        # occ[2v] lists clauses containing v, occ[2v+1] those containing -v
        occ: list[list[int]] = [[] for _ in range(2 * nvars + 2)]
        for ci, clause in enumerate(self.clauses):
            for lit in clause:
                v = abs(lit)
                if v < 1 or v > nvars:
                    raise InputError(f"literal {lit} outside variable universe 1..{nvars}")
                occ[2 * v if lit > 0 else 2 * v + 1].append(ci)
        self.occ = occ
        self.nfalse = [0] * len(self.clauses)
        self.ntrue = [0] * len(self.clauses)
        self.val = [0] * (nvars + 1)  # 0 unassigned, 1 true, -1 false
        self.trail: list[int] = []
        self.base_conflict = any(s == 0 for s in self.sizes)
        # propagate the formula's own unit clauses once; this base trail sits
        # below every caller mark and is never backtracked
        if not self.base_conflict:
            units = [c[0] for c in self.clauses if len(c) == 1]
            if units and not self.assert_lits(units, trace=trace):
                self.base_conflict = True

    def mark(self) -> int:
        return len(self.trail)

    def backtrack(self, mark: int) -> None:
        val, ntrue, nfalse, occ = self.val, self.ntrue, self.nfalse, self.occ
        while len(self.trail) > mark:
            lit = self.trail.pop()
            v = abs(lit)
            val[v] = 0
            if lit > 0:
                for ci in occ[2 * v]:
                    ntrue[ci] -= 1
                for ci in occ[2 * v + 1]:
                    nfalse[ci] -= 1
            else:
                for ci in occ[2 * v + 1]:
                    ntrue[ci] -= 1
                for ci in occ[2 * v]:
                    nfalse[ci] -= 1

    def assert_lits(self, lits: Iterable[int], trace: Optional[list[tuple[int, int]]] = None) -> bool:
        """Assert literals and propagate to fixpoint.  False means conflict.

        On conflict the trail holds everything assigned so far; the caller is
        responsible for backtracking to its mark.
        """
        if self.base_conflict:
            return False
        val, ntrue, nfalse, occ = self.val, self.ntrue, self.nfalse, self.occ
        clauses, sizes, trail = self.clauses, self.sizes, self.trail
        queue: list[int] = list(lits)
        reasons = [-1] * len(queue) if trace is not None else None
        qi = 0
        while qi < len(queue):
            lit = queue[qi]
            reason = reasons[qi] if reasons is not None else -1
            qi += 1
            v = abs(lit)
            s = 1 if lit > 0 else -1
            cur = val[v]
            if cur == s:
                continue
            if cur == -s:
                return False
            val[v] = s
            trail.append(lit)
            if trace is not None:
                trace.append((lit, reason))
            for ci in occ[2 * v if s > 0 else 2 * v + 1]:
                ntrue[ci] += 1
            conflict = False
            # counter updates must complete even on conflict so that
            # backtrack() stays the exact inverse of this loop
            for ci in occ[2 * v + 1 if s > 0 else 2 * v]:
                nfalse[ci] += 1
                if not conflict and ntrue[ci] == 0:
                    left = sizes[ci] - nfalse[ci]
                    if left == 1:
                        for other in clauses[ci]:
                            if val[abs(other)] == 0:
                                queue.append(other)
                                if reasons is not None:
                                    reasons.append(ci)
                                break
                    elif left == 0:
                        conflict = True
            if conflict:
                return False
        return True

    def value(self, var: int) -> int:
        return self.val[var]


def unit_propagate(
    clauses: Sequence[Sequence[int]],
    nvars: int,
    alpha: Iterable[int] = (),
    record_trace: bool = False,
) -> UpResult:
    """Least fixpoint of unit resolution on ``clauses`` seeded with ``alpha``."""
    seeds = check_partial_assignment(alpha, nvars)
    trace: Optional[list[tuple[int, int]]] = [] if record_trace else None
    eng = PropEngine(clauses, nvars, trace=trace)
    ok = not eng.base_conflict and eng.assert_lits(seeds, trace=trace)
    if not ok:
        return UpResult(True, None, tuple(trace) if trace is not None else None)
    return UpResult(False, frozenset(eng.trail), tuple(trace) if trace is not None else None)


def unit_closure(clauses: Sequence[Sequence[int]], alpha: Iterable[int] = ()) -> tuple[frozenset[int], bool]:
    """Exact unit-resolution closure: all derivable unit clauses, plus a bot flag.

    Unlike the assignment-based engine this keeps deriving after complementary
    units appear, matching the clause-derivation reading of phi |-1 l.  Meant
    for small formulas (quadratic loop).
    """
    units = set(alpha)
    clauses = [tuple(dict.fromkeys(c)) for c in clauses]
    bot = any(not c for c in clauses)
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            # {l} is derivable from C iff every other literal's negation is;
            # the empty clause is derivable iff all of them are
            if not bot and all(-e in units for e in clause):
                bot = True
                changed = True
            for l in clause:
                if l not in units and all(-e in units for e in clause if e != l):
                    units.add(l)
                    changed = True
    if any(-l in units for l in units):
        bot = True
    return frozenset(units), bot


def brute_sat(
    clauses: Sequence[Sequence[int]],
    nvars: int,
    alpha: Iterable[int] = (),
    var_budget: Optional[int] = DEFAULT_SAT_VAR_BUDGET,
) -> Optional[tuple[int, ...]]:
    """Backtracking SAT with unit propagation.  Returns a full model or None.

    The model is a tuple of nvars signed literals (position v-1 holds v or -v).
    Deterministic: branches on the lowest unassigned variable, positive first.
    ``var_budget`` guards accidental huge instances; pass None to lift it.
    """
    if var_budget is not None and nvars > var_budget:
        raise BudgetExceededError(
            f"formula has {nvars} variables, exceeding the SAT oracle budget of {var_budget};"
            " raise var_budget to proceed"
        )
    seeds = check_partial_assignment(alpha, nvars)
    eng = PropEngine(clauses, nvars)
    if not eng.assert_lits(seeds):
        return None
    return _search(eng, 1)


def _search(eng: PropEngine, from_var: int) -> Optional[tuple[int, ...]]:
    val = eng.val
    v = from_var
    nvars = eng.nvars
    while v <= nvars and val[v] != 0:
        v += 1
    if v > nvars:
        return tuple(u if val[u] > 0 else -u for u in range(1, nvars + 1))
    for lit in (v, -v):
        mark = eng.mark()
        if eng.assert_lits((lit,)):
            model = _search(eng, v + 1)
            if model is not None:
                return model
        eng.backtrack(mark)
    return None


def all_scope_models(
    clauses: Sequence[Sequence[int]],
    nvars: int,
    scope: Sequence[int],
) -> list[int]:
    """Projections onto ``scope`` of the models of the formula, as bitmasks.

    Bit i of a mask is the value of scope[i].  Enumerated by DFS over scope
    variables with unit propagation, checking extendability of each complete
    scope assignment, so each projection appears exactly once.
    """
    scope = list(scope)
    eng = PropEngine(clauses, nvars)
    if not eng.assert_lits(()):
        return []
    masks: list[int] = []
    k = len(scope)

    def rec(idx: int, mask: int) -> None:
        while idx < k and eng.val[scope[idx]] != 0:
            if eng.val[scope[idx]] > 0:
                mask |= 1 << idx
            idx += 1
        if idx == k:
            if _extendable(eng):
                masks.append(mask)
            return
        v = scope[idx]
        for lit, bit in ((v, 1 << idx), (-v, 0)):
            m = eng.mark()
            if eng.assert_lits((lit,)):
                rec(idx + 1, mask | bit)
            eng.backtrack(m)

    rec(0, 0)
    return sorted(masks)


def _extendable(eng: PropEngine) -> bool:
    mark = eng.mark()
    ok = _search(eng, 1) is not None
    eng.backtrack(mark)
    return ok
