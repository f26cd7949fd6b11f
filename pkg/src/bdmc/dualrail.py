"""Dual-rail (DR) and extended dual-rail (DR+) encodings of leaf formulas.

DR rewrites a CNF over meta-variables so that unit propagation in the original
formula is simulated by Horn propagation over variables standing for "literal
l was derived" plus one variable standing for "contradiction derived".  DR+
adds clauses making the contradiction variable propagate every literal, and
totality clauses [[x]] v [[-x]].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Clause, CnfFormula, LeafEncoding, make_clause
from .errors import InputError, PreconditionError

BOT = 0  # pseudo-literal for the contradiction marker


@dataclass(frozen=True)
class MetaVarSpace:
    """Injective map (leaf index, literal-or-bot) -> solver variable.

    Variables are handed out per leaf: for each leaf's variables in ascending
    order, the positive meta before the negative one, with the bot marker
    last.  Leaves own pairwise disjoint blocks.
    """

    first_id: int
    leaf_index: tuple[int, ...]
    _meta: dict
    _bot: dict

    @staticmethod
    def for_leaves(leaves: Sequence[LeafEncoding], first_id: int) -> "MetaVarSpace":
        meta: dict[tuple[int, int], int] = {}
        bot: dict[int, int] = {}
        nxt = first_id
        for leaf in leaves:
            for v in sorted(set(leaf.input_vars) | set(leaf.aux_vars)):
                meta[(leaf.index, v)] = nxt
                meta[(leaf.index, -v)] = nxt + 1
                nxt += 2
            bot[leaf.index] = nxt
            nxt += 1
        return MetaVarSpace(first_id, tuple(lf.index for lf in leaves), meta, bot)

    def meta(self, i: int, lit: int) -> int:
        """Solver variable for [[lit]]^i."""
        try:
            return self._meta[(i, lit)]
        except KeyError:
            raise InputError(f"no meta-variable for literal {lit} in leaf {i}") from None

    def bot(self, i: int) -> int:
        """Solver variable for [[bot]]^i."""
        return self._bot[i]

    def vars_of(self, i: int) -> tuple[int, ...]:
        """z_i: all meta-variables of leaf i, bot included, ascending."""
        out = [var for (j, _lit), var in self._meta.items() if j == i]
        out.append(self._bot[i])
        return tuple(sorted(out))

    def source_vars_of(self, i: int) -> tuple[int, ...]:
        return tuple(sorted({abs(lit) for (j, lit) in self._meta if j == i}))

    @property
    def next_id(self) -> int:
        return self.first_id + len(self._meta) + len(self._bot)

    def all_vars(self) -> tuple[int, ...]:
        """z: the union of all leaves' meta-variables."""
        return tuple(range(self.first_id, self.next_id))


def dual_rail(phi: CnfFormula, space: MetaVarSpace, i: int) -> CnfFormula:
    """DR(phi) over the meta-variables of leaf i.

    A formula containing the empty clause collapses to the unit [[bot]].
    Otherwise every clause C and every l in C contribute the definite Horn
    clause (AND_{e in C-l} [[-e]]) -> [[l]], and every variable contributes
    [[x]] & [[-x]] -> [[bot]].  Unit clauses of phi become unit meta clauses.
    """
    leaf_vars = set(space.source_vars_of(i))
    alien = set(phi.variables) - leaf_vars
    if alien:
        raise InputError(
            f"dual rail for leaf {i}: formula mentions variables {sorted(alien)}"
            " outside the leaf's inputs and aux"
        )
    bot = space.bot(i)
    if any(len(c) == 0 for c in phi.clauses):
        return CnfFormula((make_clause([bot]),), frozenset(space.vars_of(i)))
    out: list[Clause] = []
    for clause in phi.clauses:
        for l in clause:
            body = [-space.meta(i, -e) for e in clause if e != l]
            out.append(make_clause(body + [space.meta(i, l)]))
    for v in sorted(phi.variables):
        out.append(make_clause([-space.meta(i, v), -space.meta(i, -v), bot]))
    return CnfFormula(tuple(out), frozenset(space.vars_of(i)))


def extended_dual_rail(phi: CnfFormula, space: MetaVarSpace, i: int) -> CnfFormula:
    """DR+(phi): DR plus [[bot]] -> [[l]] for every literal and the totality
    clauses [[x]] v [[-x]].  Clause count is exactly ||phi|| + 4|vars|."""
    if any(len(c) == 0 for c in phi.clauses):
        raise PreconditionError(
            f"leaf {i}: extended dual rail is undefined on formulas containing the"
            " empty clause; simplify the leaf to a constant-false leaf first"
        )
    base = dual_rail(phi, space, i)
    bot = space.bot(i)
    out = list(base.clauses)
    for v in sorted(phi.variables):
        out.append(make_clause([-bot, space.meta(i, v)]))
        out.append(make_clause([-bot, space.meta(i, -v)]))
    for v in sorted(phi.variables):
        out.append(make_clause([space.meta(i, v), space.meta(i, -v)]))
    return CnfFormula(tuple(out), base.variables)


def meta_assignment(space: MetaVarSpace, i: int, alpha) -> list[int]:
    """[[alpha]]^i: the positive meta literals for a set of source literals."""
    return [space.meta(i, l) for l in alpha]
