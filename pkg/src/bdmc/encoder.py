"""Clause-group assembly: compile a BDMC into one of the target encodings.

Clause groups:
    N1   or-node v -> v1 | ... | vk
    N2   and-node v -> vi, one clause per child
    N3   non-root v -> p1 | ... | pk over its parents
    N5   at-most-one over every separator (canonical pairs, or Sinz ladders
         for the urc-seq target)
    N6   exactly-one over every separator
    E1   extended dual rail of every leaf formula (plain dual rail with lean cc)
    E2   l -> [[l]]^i for every input literal of every leaf
    E3   (AND_i [[l]]^i) -> l for every input literal
    ROOT the unit clause asserting the root

Targets: cc = N1,N2,E1,E2,ROOT; dc adds N3,E3; urc = cc + N3,N5; urc-seq is
urc with sequential at-most-one; pc = dc + N6.  A leaf node's variable is the
negation of its dual-rail contradiction marker throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (
    BdmcGraph,
    CLASS_SATISFIES,
    Clause,
    VarScopeMap,
    compute_scopes,
    make_clause,
    require_valid,
    topo_order,
    validate,
)
from .dualrail import MetaVarSpace, dual_rail, extended_dual_rail
from .errors import InputError, PreconditionError
from .transform import SeparatorCover, is_strictly_leveled, level, separator_cover, smooth

TARGETS = ("cc", "dc", "urc", "urc-seq", "pc")
GROUP_ORDER = ("N1", "N2", "N3", "N5", "N6", "E1", "E2", "E3", "ROOT")

_TARGET_GROUPS = {
    "cc": ("N1", "N2", "E1", "E2", "ROOT"),
    "dc": ("N1", "N2", "N3", "E1", "E2", "E3", "ROOT"),
    "urc": ("N1", "N2", "N3", "N5", "E1", "E2", "ROOT"),
    "urc-seq": ("N1", "N2", "N3", "N5", "E1", "E2", "ROOT"),
    "pc": ("N1", "N2", "N3", "N6", "E1", "E2", "E3", "ROOT"),
}
_TARGET_LEAF_CLASS = {"cc": "cc", "dc": "dc", "urc": "urc", "urc-seq": "urc", "pc": "pc"}
_TARGET_ASSUMPTION = {
    "cc": "a CC-BDMC",
    "dc": "a smooth DC-BDMC",
    "urc": "a smooth URC-BDMC covered by separators",
    "urc-seq": "a smooth URC-BDMC covered by separators",
    "pc": "a smooth PC-BDMC covered by separators",
}


class VarMap:
    """Solver-variable numbering and the varmap sidecar entries.

    Inputs take ids 1..n, then meta-variables leaf by leaf (variable
    ascending, positive before negative, bot last), then inner nodes in
    topological order, then cardinality auxiliaries.
    """

    def __init__(self, graph: BdmcGraph):
        self.graph = graph
        n = graph.num_inputs
        self.space = MetaVarSpace.for_leaves(graph.leaves, n + 1)
        self.entries: list[dict] = []
        for v in range(1, n + 1):
            self.entries.append({"id": v, "role": "input", "name": graph.input_names[v - 1]})
        for leaf in graph.leaves:
            for v in sorted(set(leaf.input_vars) | set(leaf.aux_vars)):
                base = graph.var_name(v)
                for lit, txt in ((v, base), (-v, "-" + base)):
                    self.entries.append({
                        "id": self.space.meta(leaf.index, lit),
                        "role": "meta",
                        "name": f"[[{txt}]]@{leaf.index}",
                        "leaf": leaf.index,
                        "literal": txt,
                    })
            self.entries.append({
                "id": self.space.bot(leaf.index),
                "role": "meta",
                "name": f"[[bot]]@{leaf.index}",
                "leaf": leaf.index,
                "literal": "bot",
            })
        self.node_vars: dict[int, int] = {}
        nxt = self.space.next_id
        for nid in topo_order(graph):
            if graph.nodes[nid].kind != "leaf":
                self.node_vars[nid] = nxt
                self.entries.append({"id": nxt, "role": "node", "name": f"n{nid}", "node": nid})
                nxt += 1
        for nid, nd in enumerate(graph.nodes):  # unreachable inner nodes, if any
            if nd.kind != "leaf" and nid not in self.node_vars:
                self.node_vars[nid] = nxt
                self.entries.append({"id": nxt, "role": "node", "name": f"n{nid}", "node": nid})
                nxt += 1
        self.num_vars = nxt - 1
        self.num_card_aux = 0

    def node_literal(self, nid: int) -> int:
        """The literal standing for node nid: its own variable for inner
        nodes, -[[bot]]^i for the leaf carrying formula i."""
        nd = self.graph.nodes[nid]
        if nd.kind == "leaf":
            return -self.space.bot(nd.leaf)
        return self.node_vars[nid]

    def add_card_aux(self, separator_idx: int, position: int) -> int:
        self.num_vars += 1
        self.num_card_aux += 1
        self.entries.append({
            "id": self.num_vars,
            "role": "card-aux",
            "name": f"s{separator_idx}.{position}",
            "separator": separator_idx,
            "position": position,
        })
        return self.num_vars


def build_varmap(graph: BdmcGraph) -> VarMap:
    return VarMap(graph)


# ---------------------------------------------------------------------------
# clause-group builders


def circuit_clauses(graph: BdmcGraph, varmap: VarMap) -> dict[str, list[Clause]]:
    """Groups N1 (or), N2 (and) and N3 (parents) over node literals."""
    n1: list[Clause] = []
    n2: list[Clause] = []
    n3: list[Clause] = []
    lit = varmap.node_literal
    for nid, nd in enumerate(graph.nodes):
        if nd.kind == "or":
            n1.append(make_clause([-lit(nid)] + [lit(ch) for ch in nd.children]))
        elif nd.kind == "and":
            for ch in nd.children:
                n2.append(make_clause([-lit(nid), lit(ch)]))
    for nid in range(graph.num_nodes):
        if nid == graph.root or not graph.parents[nid]:
            continue
        n3.append(make_clause([-lit(nid)] + [lit(p) for p in graph.parents[nid]]))
    return {"N1": n1, "N2": n2, "N3": n3}


AMO_CANONICAL = "AMO_CANONICAL"
EO_CANONICAL = "EO_CANONICAL"
AMO_SEQUENTIAL = "AMO_SEQUENTIAL"


def cardinality(kind: str, lits: Sequence[int], first_aux: Optional[int] = None):
    """Cardinality constraint over the given literals.

    Returns (clauses, aux_vars).  AMO_CANONICAL emits all prime implicates
    (the pairwise negative binaries); EO_CANONICAL adds the at-least-one
    clause; AMO_SEQUENTIAL is the Sinz ladder with len(lits)-1 fresh
    auxiliaries starting at first_aux and at most 3*len(lits)-4 clauses.
    """
    lits = list(lits)
    if not lits:
        raise InputError("cardinality constraint over an empty list")
    if kind in (AMO_CANONICAL, EO_CANONICAL):
        out = []
        for i in range(len(lits)):
            for j in range(i + 1, len(lits)):
                out.append(make_clause([-lits[i], -lits[j]]))
        if kind == EO_CANONICAL:
            out.append(make_clause(lits))
        return out, []
    if kind != AMO_SEQUENTIAL:
        raise InputError(f"unknown cardinality kind {kind!r}")
    k = len(lits)
    if k == 1:
        return [], []
    if first_aux is None:
        raise InputError("sequential encoding needs a first_aux variable id")
    aux = list(range(first_aux, first_aux + k - 1))
    out = [make_clause([-lits[0], aux[0]])]
    for i in range(1, k - 1):
        out.append(make_clause([-lits[i], aux[i]]))
        out.append(make_clause([-aux[i - 1], aux[i]]))
        out.append(make_clause([-lits[i], -aux[i - 1]]))
    out.append(make_clause([-lits[k - 1], -aux[k - 2]]))
    return out, aux


def separator_clauses(cover: SeparatorCover, varmap: VarMap, kind: str) -> list[Clause]:
    """Group N5 (amo) or N6 (exactly-one) over the merged separator family."""
    if kind not in ("N5", "N6"):
        raise InputError("kind must be 'N5' or 'N6'")
    out: dict[Clause, None] = {}
    for sep in cover.merged:
        lits = [varmap.node_literal(nid) for nid in sorted(sep)]
        clauses, _ = cardinality(EO_CANONICAL if kind == "N6" else AMO_CANONICAL, lits)
        for c in clauses:
            out.setdefault(c)
    return list(out)


def seq_separator_clauses(cover: SeparatorCover, varmap: VarMap) -> list[Clause]:
    """N5 variant for urc-seq: Sinz ladders for separators of size >= 3,
    canonical pairs below that (same clause count, no auxiliaries)."""
    out: dict[Clause, None] = {}
    for idx, sep in enumerate(cover.merged):
        lits = [varmap.node_literal(nid) for nid in sorted(sep)]
        if len(lits) <= 2:
            clauses, _ = cardinality(AMO_CANONICAL, lits)
        else:
            first = varmap.num_vars + 1
            clauses, aux = cardinality(AMO_SEQUENTIAL, lits, first_aux=first)
            for pos in range(len(aux)):
                varmap.add_card_aux(idx, pos + 1)
        for c in clauses:
            out.setdefault(c)
    return list(out)


def leaf_clauses(
    graph: BdmcGraph,
    varmap: VarMap,
    which: str,
    scopes: Optional[VarScopeMap] = None,
    lean: bool = False,
) -> list[Clause]:
    """Groups E1 (dual-rail encodings), E2 (input consistency), E3 (smooth
    converse; requires a smooth graph)."""
    space = varmap.space
    out: list[Clause] = []
    if which == "E1":
        build = dual_rail if lean else extended_dual_rail
        for leaf in graph.leaves:
            out.extend(build(leaf.formula(), space, leaf.index).clauses)
        return out
    if which == "E2":
        for leaf in graph.leaves:
            for v in leaf.input_vars:
                out.append(make_clause([-v, space.meta(leaf.index, v)]))
                out.append(make_clause([v, space.meta(leaf.index, -v)]))
        return out
    if which == "E3":
        if not validate(graph).smooth:
            raise PreconditionError("E3 clauses require a smooth graph")
        if scopes is None:
            scopes = compute_scopes(graph)
        for v in graph.input_vars:
            rng = scopes.range_of(v)
            out.append(make_clause([-space.meta(i, v) for i in rng] + [v]))
            out.append(make_clause([-space.meta(i, -v) for i in rng] + [-v]))
        return out
    raise InputError("which must be one of 'E1', 'E2', 'E3'")


# ---------------------------------------------------------------------------
# whole-target compilation


@dataclass
class EncodingOutput:
    target: str
    groups: dict[str, list[Clause]]
    varmap: VarMap
    num_vars: int
    graph: BdmcGraph
    cover: Optional[SeparatorCover]
    lean_cc: bool = False
    stats: Optional["SizeStats"] = None

    def all_clauses(self) -> list[Clause]:
        out: list[Clause] = []
        for tag in GROUP_ORDER:
            out.extend(self.groups.get(tag, ()))
        return out

    @property
    def num_inputs(self) -> int:
        return self.graph.num_inputs


def normalize_target(target: str) -> str:
    t = target.lower().replace("_", "-")
    if t not in TARGETS:
        raise InputError(f"unknown target {target!r}; expected one of {', '.join(TARGETS)}")
    return t


def compile_graph(
    graph: BdmcGraph,
    target: str,
    auto_smooth: bool = False,
    auto_level: bool = False,
    lean_cc: bool = False,
) -> EncodingOutput:
    """Compile to the requested target, checking its assumption column.

    Transformations are never applied silently: a target needing smoothness
    or separator covers fails on a graph lacking them unless the matching
    auto flag is set.
    """
    target = normalize_target(target)
    if lean_cc and target != "cc":
        raise InputError("--lean-cc only applies to the cc target")
    report = require_valid(graph)
    needed = _TARGET_LEAF_CLASS[target]
    for leaf in graph.leaves:
        if needed not in CLASS_SATISFIES[leaf.claimed_class]:
            raise PreconditionError(
                f"target {target} assumes {_TARGET_ASSUMPTION[target]}: leaf {leaf.index}"
                f" claims class {leaf.claimed_class}, which does not cover {needed};"
                " certify or relabel the leaf first"
            )
        if leaf.is_constant_false:
            raise PreconditionError(
                f"leaf {leaf.index} contains the empty clause; the dual-rail groups"
                " are only defined for satisfiable-shaped leaf formulas"
            )
    needs_smooth = target in ("dc", "urc", "urc-seq", "pc")
    needs_cover = target in ("urc", "urc-seq", "pc")
    if needs_smooth and not report.smooth:
        if not auto_smooth:
            raise PreconditionError(
                f"target {target} assumes {_TARGET_ASSUMPTION[target]}, but the graph is"
                f" not smooth (witness or-node/child/missing: {report.smooth_witness});"
                " pass auto_smooth or run smooth() first"
            )
        graph = smooth(graph)
    cover = None
    if needs_cover:
        if not is_strictly_leveled(graph):
            if not auto_level:
                raise PreconditionError(
                    f"target {target} assumes {_TARGET_ASSUMPTION[target]}, but the graph"
                    " is not strictly leveled; pass auto_level or run level() first"
                )
            graph = level(graph)
        cover = separator_cover(graph)
    scopes = compute_scopes(graph)
    varmap = build_varmap(graph)
    circuit = circuit_clauses(graph, varmap)
    groups: dict[str, list[Clause]] = {}
    want = _TARGET_GROUPS[target]
    for tag in ("N1", "N2", "N3"):
        if tag in want:
            groups[tag] = circuit[tag]
    if "N5" in want:
        if target == "urc-seq":
            groups["N5"] = seq_separator_clauses(cover, varmap)
        else:
            groups["N5"] = separator_clauses(cover, varmap, "N5")
    if "N6" in want:
        groups["N6"] = separator_clauses(cover, varmap, "N6")
    groups["E1"] = leaf_clauses(graph, varmap, "E1", lean=lean_cc)
    groups["E2"] = leaf_clauses(graph, varmap, "E2")
    if "E3" in want:
        groups["E3"] = leaf_clauses(graph, varmap, "E3", scopes=scopes)
    groups["ROOT"] = [make_clause([varmap.node_literal(graph.root)])]
    output = EncodingOutput(
        target=target,
        groups=groups,
        varmap=varmap,
        num_vars=varmap.num_vars,
        graph=graph,
        cover=cover,
        lean_cc=lean_cc,
    )
    output.stats = size_report(output)
    return output


# ---------------------------------------------------------------------------
# size accounting


@dataclass(frozen=True)
class Bound:
    name: str
    value: int
    limit: int
    exact: bool = False

    @property
    def ok(self) -> bool:
        return self.value == self.limit if self.exact else self.value <= self.limit


@dataclass(frozen=True)
class SizeStats:
    target: str
    n: int
    s: int
    e: int
    m: int
    r: int
    ell: int
    t: Optional[int]
    num_vars: int
    num_card_aux: int
    group_counts: dict[str, int]
    total_clauses: int
    bounds: tuple[Bound, ...] = field(default=())

    @property
    def violations(self) -> list[Bound]:
        return [b for b in self.bounds if not b.ok]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "params": {"n": self.n, "s": self.s, "e": self.e, "m": self.m,
                       "r": self.r, "leaves": self.ell, "t": self.t},
            "variables": self.num_vars,
            "card_aux_variables": self.num_card_aux,
            "groups": dict(self.group_counts),
            "clauses": self.total_clauses,
            "bounds": [
                {"name": b.name, "value": b.value, "limit": b.limit,
                 "exact": b.exact, "ok": b.ok}
                for b in self.bounds
            ],
            "ok": not self.violations,
        }


def size_report(output: EncodingOutput) -> SizeStats:
    """Exact per-group counts checked against the size bounds.

    E1 = r+4m exactly (r+m with lean cc), E3 = 2n exactly, N1+N2 <= e,
    N3 <= s, N5 <= s^2 (<= 3t for the sequential variant), N6 <= s^2+ns,
    variables <= n+2m+s (+t extra auxiliaries for urc-seq).
    """
    graph = output.graph
    n = graph.num_inputs
    s = graph.num_nodes
    e = graph.num_edges
    m = sum(leaf.num_vars for leaf in graph.leaves)
    r = sum(len(c) for leaf in graph.leaves for c in leaf.clauses)
    t = output.cover.total_size if output.cover is not None else None
    counts = {tag: len(cl) for tag, cl in output.groups.items()}
    total = sum(counts.values())
    bounds = []
    e1_limit = r + m if output.lean_cc else r + 4 * m
    bounds.append(Bound("E1 = r+m (lean)" if output.lean_cc else "E1 = r+4m",
                        counts.get("E1", 0), e1_limit, exact=True))
    bounds.append(Bound("E2 <= 2m", counts.get("E2", 0), 2 * m))
    if "E3" in counts:
        bounds.append(Bound("E3 = 2n", counts["E3"], 2 * n, exact=True))
    bounds.append(Bound("N1+N2 <= e", counts.get("N1", 0) + counts.get("N2", 0), e))
    if "N3" in counts:
        bounds.append(Bound("N3 <= s", counts["N3"], s))
    if "N5" in counts:
        if output.target == "urc-seq":
            bounds.append(Bound("N5 <= 3t (sequential)", counts["N5"], 3 * (t or 0)))
        else:
            bounds.append(Bound("N5 <= s^2", counts["N5"], s * s))
    if "N6" in counts:
        bounds.append(Bound("N6 <= s^2+ns", counts["N6"], s * s + n * s))
    if output.target == "urc-seq":
        bounds.append(Bound("vars <= n+2m+s+t", output.num_vars, n + 2 * m + s + (t or 0)))
        bounds.append(Bound("clauses <= e+s+r+8m+3t", total, e + s + r + 8 * m + 3 * (t or 0)))
    else:
        bounds.append(Bound("vars <= n+2m+s", output.num_vars, n + 2 * m + s))
        if output.target in ("urc", "pc"):
            bounds.append(Bound("clauses <= e+s+r+8m+s^2+ns", total,
                                e + s + r + 8 * m + s * s + n * s))
        else:
            bounds.append(Bound("clauses <= e+s+r+8m", total, e + s + r + 8 * m))
    return SizeStats(
        target=output.target,
        n=n, s=s, e=e, m=m, r=r,
        ell=graph.num_leaves,
        t=t,
        num_vars=output.num_vars,
        num_card_aux=output.varmap.num_card_aux,
        group_counts=counts,
        total_clauses=total,
        bounds=tuple(bounds),
    )
