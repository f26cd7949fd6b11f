"""Data model for BDMC sentences and their ground-truth semantics.

A BDMC is a rooted DAG of and/or nodes whose leaves carry CNF encodings over
subsets of the global input variables plus private auxiliary variables.  This
module owns the graph representation, structural validation (acyclicity,
decomposability, smoothness), input-variable scopes, and brute-force semantic
evaluation used as the oracle by every checker.

Variable ids ("source space"): inputs are 1..n, auxiliaries of the leaves get
ids above n, assigned leaf by leaf.  Literals are signed ints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import engine
from .errors import BudgetExceededError, InputError, StructureError

Clause = tuple[int, ...]

CLASS_CC = "cc"
CLASS_DC = "dc"
CLASS_URC = "urc"
CLASS_PC = "pc"
CLASS_LITERAL = "literal"
CLASS_TRUE = "true"
LEAF_CLASSES = (CLASS_CC, CLASS_DC, CLASS_URC, CLASS_PC, CLASS_LITERAL, CLASS_TRUE)

# which target-class requirements a claimed class satisfies (cc<dc, cc<urc,
# dc<pc, urc<pc; literal and true are trivially pc)
CLASS_SATISFIES = {
    CLASS_CC: frozenset({CLASS_CC}),
    CLASS_DC: frozenset({CLASS_CC, CLASS_DC}),
    CLASS_URC: frozenset({CLASS_CC, CLASS_URC}),
    CLASS_PC: frozenset({CLASS_CC, CLASS_DC, CLASS_URC, CLASS_PC}),
    CLASS_LITERAL: frozenset({CLASS_CC, CLASS_DC, CLASS_URC, CLASS_PC}),
    CLASS_TRUE: frozenset({CLASS_CC, CLASS_DC, CLASS_URC, CLASS_PC}),
}


def make_clause(lits: Iterable[int]) -> Clause:
    """Canonical clause: deduplicated, sorted by variable then polarity.

    Tautologies (x and -x in one clause) are rejected.
    """
    seen = set(lits)
    if 0 in seen:
        raise InputError("literal 0 is not allowed in a clause")
    for lit in seen:
        if -lit in seen:
            raise InputError(f"tautological clause: contains both {lit} and {-lit}")
    return tuple(sorted(seen, key=lambda l: (abs(l), l < 0)))


@dataclass(frozen=True)
class CnfFormula:
    """A set of clauses with a declared variable universe."""

    clauses: tuple[Clause, ...]
    variables: frozenset[int]

    def __len__(self) -> int:
        return len(self.clauses)

    @property
    def length(self) -> int:
        """Total number of literal occurrences."""
        return sum(len(c) for c in self.clauses)

    @staticmethod
    def build(clauses: Iterable[Iterable[int]], variables: Optional[Iterable[int]] = None) -> "CnfFormula":
        cs = tuple(dict.fromkeys(make_clause(c) for c in clauses))
        if variables is None:
            vs = frozenset(abs(l) for c in cs for l in c)
        else:
            vs = frozenset(variables)
            for c in cs:
                for l in c:
                    if abs(l) not in vs:
                        raise InputError(f"clause literal {l} outside the declared variables")
        return CnfFormula(cs, vs)


@dataclass(frozen=True)
class LeafEncoding:
    """One leaf: a CNF formula over declared inputs x_i and private aux y_i."""

    index: int
    input_vars: tuple[int, ...]
    aux_vars: tuple[int, ...]
    clauses: tuple[Clause, ...]
    claimed_class: str
    aux_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.claimed_class not in LEAF_CLASSES:
            raise InputError(f"unknown leaf class {self.claimed_class!r}")
        allowed = set(self.input_vars) | set(self.aux_vars)
        for c in self.clauses:
            for l in c:
                if abs(l) not in allowed:
                    raise InputError(
                        f"leaf {self.index}: clause variable {abs(l)} not among its inputs/aux"
                    )
        if not self.input_vars and not self.is_constant:
            raise InputError(
                f"leaf {self.index}: empty input set is only allowed for constant leaves"
            )

    @property
    def is_constant_true(self) -> bool:
        return not self.clauses

    @property
    def is_constant_false(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    @property
    def is_constant(self) -> bool:
        return self.is_constant_true or self.is_constant_false

    def formula(self) -> CnfFormula:
        return CnfFormula(self.clauses, frozenset(self.input_vars) | frozenset(self.aux_vars))

    @property
    def num_vars(self) -> int:
        """|x_i u y_i|, the leaf's contribution to the size parameter m."""
        return len(self.input_vars) + len(self.aux_vars)


def infer_claimed_class(input_vars, aux_vars, clauses) -> str:
    """Syntactic default claim for leaves parsed without an explicit class."""
    if not clauses:
        return CLASS_TRUE
    if any(len(c) == 0 for c in clauses):
        # constant false is trivially propagation complete
        return CLASS_PC
    if len(clauses) == 1 and len(clauses[0]) == 1 and not aux_vars:
        return CLASS_LITERAL
    return CLASS_CC


@dataclass(frozen=True)
class Node:
    kind: str  # 'and' | 'or' | 'leaf'
    children: tuple[int, ...] = ()
    leaf: int = 0  # 1-based leaf index for kind == 'leaf'


@dataclass(frozen=True)
class BdmcGraph:
    nodes: tuple[Node, ...]
    root: int
    num_inputs: int
    leaves: tuple[LeafEncoding, ...]
    input_names: tuple[str, ...]
    node_of_leaf: tuple[int, ...] = field(repr=False)
    parents: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def num_nodes(self) -> int:
        """s = |V|"""
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        """e = |E|"""
        return sum(len(nd.children) for nd in self.nodes)

    @property
    def num_leaves(self) -> int:
        return len(self.leaves)

    @property
    def input_vars(self) -> range:
        return range(1, self.num_inputs + 1)

    def leaf_node(self, index: int) -> int:
        return self.node_of_leaf[index - 1]

    def leaf_of_node(self, node_id: int) -> LeafEncoding:
        return self.leaves[self.nodes[node_id].leaf - 1]

    def var_name(self, var: int) -> str:
        if 1 <= var <= self.num_inputs:
            return self.input_names[var - 1]
        for leaf in self.leaves:
            for v, name in zip(leaf.aux_vars, leaf.aux_names):
                if v == var:
                    return name if _aux_name_unique(self, name) else f"{name}@{leaf.index}"
        return f"v{var}"


def _aux_name_unique(graph: BdmcGraph, name: str) -> bool:
    count = sum(leaf.aux_names.count(name) for leaf in graph.leaves)
    return count <= 1


def assemble_graph(
    nodes: Sequence[Node],
    root: int,
    leaves: Sequence[LeafEncoding],
    input_names: Sequence[str],
) -> BdmcGraph:
    """Build a BdmcGraph from fully resolved parts, checking hard invariants.

    Hard failures here are malformed sentences no operation could accept:
    broken leaf<->node bijection, out-of-range ids, duplicate edges.  Softer
    structural properties are validate()'s job.
    """
    nodes = tuple(nodes)
    leaves = tuple(sorted(leaves, key=lambda lf: lf.index))
    n = len(input_names)
    if not nodes:
        raise StructureError("no nodes: sentence has no root")
    if not (0 <= root < len(nodes)):
        raise StructureError(f"root id {root} out of range")
    if [lf.index for lf in leaves] != list(range(1, len(leaves) + 1)):
        raise StructureError("leaf indices must be exactly 1..numLeaves")
    node_of_leaf = [-1] * len(leaves)
    for nid, nd in enumerate(nodes):
        if nd.kind == "leaf":
            if not (1 <= nd.leaf <= len(leaves)):
                raise StructureError(f"node {nid}: leaf index {nd.leaf} out of range")
            if node_of_leaf[nd.leaf - 1] != -1:
                raise StructureError(f"leaf {nd.leaf} attached to two nodes")
            node_of_leaf[nd.leaf - 1] = nid
        elif nd.kind in ("and", "or"):
            if not nd.children:
                raise StructureError(f"node {nid}: inner node with no children")
            if len(set(nd.children)) != len(nd.children):
                raise StructureError(f"node {nid}: duplicate edge")
            for ch in nd.children:
                if not (0 <= ch < len(nodes)):
                    raise StructureError(f"node {nid}: child id {ch} out of range")
        else:
            raise StructureError(f"node {nid}: unknown kind {nd.kind!r}")
    if -1 in node_of_leaf:
        raise StructureError(f"leaf {node_of_leaf.index(-1) + 1} has no node")
    seen_aux: set[int] = set()
    for leaf in leaves:
        for v in leaf.input_vars:
            if not (1 <= v <= n):
                raise StructureError(f"leaf {leaf.index}: input variable {v} not declared")
        for v in leaf.aux_vars:
            if v <= n or v in seen_aux:
                raise StructureError(f"leaf {leaf.index}: aux variable {v} reused or clashes with inputs")
            seen_aux.add(v)
    parents: list[list[int]] = [[] for _ in nodes]
    for nid, nd in enumerate(nodes):
        for ch in nd.children:
            parents[ch].append(nid)
    return BdmcGraph(
        nodes=nodes,
        root=root,
        num_inputs=n,
        leaves=leaves,
        input_names=tuple(input_names),
        node_of_leaf=tuple(node_of_leaf),
        parents=tuple(tuple(p) for p in parents),
    )


def leaf_spec(inputs, clauses, aux=0, cls=None, aux_names=None):
    """Leaf description for build_graph.

    ``inputs`` are global input ids, ``aux`` a count (or list of names) of
    private variables.  Clause literals use a local numbering: 1..len(inputs)
    name the declared inputs in order, higher values name the aux variables.
    """
    return {"inputs": list(inputs), "aux": aux, "clauses": [list(c) for c in clauses],
            "cls": cls, "aux_names": aux_names}


def build_graph(nodes, leaves, n=None, input_names=None, root=0) -> BdmcGraph:
    """Assemble a graph from compact specs (see leaf_spec).

    ``nodes`` is a list of ('and'|'or', children) or ('leaf', index) tuples;
    node ids are list positions.  Node 0 is the root unless stated otherwise.
    """
    if input_names is None:
        if n is None:
            raise InputError("build_graph needs n or input_names")
        input_names = tuple(f"x{i}" for i in range(1, n + 1))
    input_names = tuple(input_names)
    n = len(input_names)
    node_objs = []
    for spec in nodes:
        kind = spec[0]
        if kind == "leaf":
            node_objs.append(Node("leaf", leaf=spec[1]))
        else:
            node_objs.append(Node(kind, children=tuple(spec[1])))
    leaf_objs = []
    next_aux = n + 1
    for idx, spec in enumerate(leaves, start=1):
        ins = tuple(spec["inputs"])
        aux = spec["aux"]
        if isinstance(aux, int):
            names = tuple(spec["aux_names"] or (f"y{j}" for j in range(1, aux + 1)))
            if len(names) != aux:
                raise InputError(f"leaf {idx}: aux name count mismatch")
        else:
            names = tuple(aux)
        aux_ids = tuple(range(next_aux, next_aux + len(names)))
        next_aux += len(names)
        local = {j + 1: v for j, v in enumerate(ins)}
        local.update({len(ins) + j + 1: v for j, v in enumerate(aux_ids)})
        try:
            cls = []
            for c in spec["clauses"]:
                cls.append(make_clause((1 if l > 0 else -1) * local[abs(l)] for l in c))
        except KeyError as exc:
            raise InputError(f"leaf {idx}: clause literal {exc} not declared") from None
        claimed = spec["cls"] or infer_claimed_class(ins, aux_ids, cls)
        leaf_objs.append(
            LeafEncoding(idx, ins, aux_ids, tuple(dict.fromkeys(cls)), claimed, names)
        )
    return assemble_graph(node_objs, root, leaf_objs, input_names)


# ---------------------------------------------------------------------------
# structural validation


@dataclass(frozen=True)
class ValidationReport:
    acyclic: bool
    rooted: bool
    decomposable: bool
    smooth: bool
    aux_disjoint: bool
    covers_inputs: bool
    cycle: tuple[int, ...] = ()
    unreachable: tuple[int, ...] = ()
    decomp_witness: Optional[tuple[int, int]] = None  # (and-node, shared input var)
    smooth_witness: Optional[tuple[int, int, frozenset[int]]] = None  # (or-node, child, missing)
    missing_inputs: tuple[int, ...] = ()

    @property
    def structurally_valid(self) -> bool:
        return self.acyclic and self.rooted and self.aux_disjoint and self.covers_inputs

    @property
    def is_valid_bdmc(self) -> bool:
        """Structure plus decomposability: what every operation relies on."""
        return self.structurally_valid and self.decomposable


def _find_cycle(graph: BdmcGraph) -> tuple[int, ...]:
    color = [0] * graph.num_nodes  # 0 white, 1 on stack, 2 done
    for start in range(graph.num_nodes):
        if color[start]:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        path = [start]
        color[start] = 1
        while stack:
            nid, ci = stack[-1]
            children = graph.nodes[nid].children
            if ci == len(children):
                stack.pop()
                path.pop()
                color[nid] = 2
                continue
            stack[-1] = (nid, ci + 1)
            ch = children[ci]
            if color[ch] == 1:
                return tuple(path[path.index(ch):]) + (ch,)
            if color[ch] == 0:
                color[ch] = 1
                stack.append((ch, 0))
                path.append(ch)
    return ()


def _reachable(graph: BdmcGraph) -> set[int]:
    seen = {graph.root}
    todo = [graph.root]
    while todo:
        nid = todo.pop()
        for ch in graph.nodes[nid].children:
            if ch not in seen:
                seen.add(ch)
                todo.append(ch)
    return seen


def topo_order(graph: BdmcGraph) -> list[int]:
    """Deterministic topological order (parents first) of reachable nodes."""
    import heapq

    reach = _reachable(graph)
    indeg = {nid: 0 for nid in reach}
    for nid in reach:
        for ch in graph.nodes[nid].children:
            indeg[ch] += 1
    heap = [nid for nid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        nid = heapq.heappop(heap)
        order.append(nid)
        for ch in graph.nodes[nid].children:
            indeg[ch] -= 1
            if indeg[ch] == 0:
                heapq.heappush(heap, ch)
    if len(order) != len(reach):
        raise StructureError("cycle detected; topological order undefined")
    return order


def compute_scopes(graph: BdmcGraph) -> "VarScopeMap":
    """var(v) for every node, H_i per input variable, range per input variable."""
    cycle = _find_cycle(graph)
    if cycle:
        raise StructureError(f"cycle detected through nodes {list(cycle)}")
    order = topo_order(graph)
    var_sets: list[frozenset[int]] = [frozenset()] * graph.num_nodes
    for nid in reversed(order):
        nd = graph.nodes[nid]
        if nd.kind == "leaf":
            var_sets[nid] = frozenset(graph.leaves[nd.leaf - 1].input_vars)
        else:
            acc: set[int] = set()
            for ch in nd.children:
                acc |= var_sets[ch]
            var_sets[nid] = frozenset(acc)
    holders = []
    for v in graph.input_vars:
        holders.append(frozenset(nid for nid in range(graph.num_nodes) if v in var_sets[nid]))
    ranges = []
    for v in graph.input_vars:
        ranges.append(tuple(lf.index for lf in graph.leaves if v in lf.input_vars))
    return VarScopeMap(tuple(var_sets), tuple(holders), tuple(ranges))


@dataclass(frozen=True)
class VarScopeMap:
    var_sets: tuple[frozenset[int], ...]
    holders: tuple[frozenset[int], ...]
    ranges: tuple[tuple[int, ...], ...]

    def var(self, node_id: int) -> frozenset[int]:
        return self.var_sets[node_id]

    def h(self, input_var: int) -> frozenset[int]:
        return self.holders[input_var - 1]

    def range_of(self, lit: int) -> tuple[int, ...]:
        return self.ranges[abs(lit) - 1]


def validate(graph: BdmcGraph) -> ValidationReport:
    """Structural report: acyclicity, reachability, decomposability, smoothness,
    aux disjointness, and var(root) covering the declared inputs."""
    cycle = _find_cycle(graph)
    acyclic = not cycle
    reach = _reachable(graph)
    unreachable = tuple(sorted(set(range(graph.num_nodes)) - reach))
    seen_aux: set[int] = set()
    aux_disjoint = True
    for leaf in graph.leaves:
        for v in leaf.aux_vars:
            if v in seen_aux:
                aux_disjoint = False
            seen_aux.add(v)
    decomposable = smooth = False
    decomp_witness = smooth_witness = None
    covers = False
    missing: tuple[int, ...] = ()
    if acyclic:
        scopes = compute_scopes(graph)
        decomposable, decomp_witness = True, None
        for nid, nd in enumerate(graph.nodes):
            if nd.kind != "and":
                continue
            taken: dict[int, int] = {}
            for ch in nd.children:
                for v in scopes.var(ch):
                    if v in taken and taken[v] != ch:
                        decomposable = False
                        decomp_witness = decomp_witness or (nid, v)
                    taken.setdefault(v, ch)
        smooth, smooth_witness = True, None
        for nid, nd in enumerate(graph.nodes):
            if nd.kind != "or":
                continue
            for ch in nd.children:
                gap = scopes.var(nid) - scopes.var(ch)
                if gap:
                    smooth = False
                    smooth_witness = smooth_witness or (nid, ch, frozenset(gap))
        missing = tuple(sorted(set(graph.input_vars) - scopes.var(graph.root)))
        covers = not missing
    return ValidationReport(
        acyclic=acyclic,
        rooted=not unreachable,
        decomposable=decomposable,
        smooth=smooth,
        aux_disjoint=aux_disjoint,
        covers_inputs=covers,
        cycle=cycle,
        unreachable=unreachable,
        decomp_witness=decomp_witness,
        smooth_witness=smooth_witness,
        missing_inputs=missing,
    )


def require_valid(graph: BdmcGraph, need_decomposable: bool = True) -> ValidationReport:
    report = validate(graph)
    if not report.acyclic:
        raise StructureError(f"cycle detected through nodes {list(report.cycle)}")
    if not report.covers_inputs:
        raise StructureError(
            f"input variables {list(report.missing_inputs)} appear in no leaf (var(root) != x)"
        )
    if not report.aux_disjoint:
        raise StructureError("leaf auxiliary variable sets are not pairwise disjoint")
    if need_decomposable and not report.decomposable:
        raise StructureError(
            f"graph is not decomposable; witness (node, var) = {report.decomp_witness}"
        )
    return report


# ---------------------------------------------------------------------------
# semantics

Assignment = Union[Mapping[int, Union[bool, int]], Iterable[int]]


def _input_mask(graph: BdmcGraph, assignment: Assignment) -> int:
    n = graph.num_inputs
    if isinstance(assignment, Mapping):
        lits = [v if assignment[v] else -v for v in assignment]
    else:
        lits = list(assignment)
    lits = engine.check_partial_assignment(lits)
    mask = 0
    seen = set()
    for lit in lits:
        v = abs(lit)
        if not (1 <= v <= n):
            raise InputError(f"assignment mentions {v}, not an input variable (1..{n})")
        seen.add(v)
        if lit > 0:
            mask |= 1 << (v - 1)
    if len(seen) != n:
        raise InputError("assignment is not total on the input variables")
    return mask


class Evaluator:
    """Bottom-up circuit evaluation with memoized leaf satisfiability."""

    def __init__(self, graph: BdmcGraph):
        require_valid(graph)
        self.graph = graph
        self.order = topo_order(graph)
        self._leaf_cache: list[dict[int, bool]] = [dict() for _ in graph.leaves]

    def leaf_sat(self, leaf: LeafEncoding, mask: int) -> bool:
        cache = self._leaf_cache[leaf.index - 1]
        sub = 0
        for j, v in enumerate(leaf.input_vars):
            if mask >> (v - 1) & 1:
                sub |= 1 << j
        hit = cache.get(sub)
        if hit is not None:
            return hit
        alpha = [v if sub >> j & 1 else -v for j, v in enumerate(leaf.input_vars)]
        local_vars = sorted(set(leaf.input_vars) | set(leaf.aux_vars))
        remap = {v: i + 1 for i, v in enumerate(local_vars)}
        clauses = [[(1 if l > 0 else -1) * remap[abs(l)] for l in c] for c in leaf.clauses]
        model = engine.brute_sat(
            clauses, len(local_vars), [(1 if l > 0 else -1) * remap[abs(l)] for l in alpha],
            var_budget=None,
        )
        result = model is not None
        cache[sub] = result
        return result

    def __call__(self, mask: int) -> bool:
        graph = self.graph
        vals: dict[int, bool] = {}
        for nid in reversed(self.order):
            nd = graph.nodes[nid]
            if nd.kind == "leaf":
                vals[nid] = self.leaf_sat(graph.leaves[nd.leaf - 1], mask)
            elif nd.kind == "and":
                vals[nid] = all(vals[ch] for ch in nd.children)
            else:
                vals[nid] = any(vals[ch] for ch in nd.children)
        return vals[graph.root]


def evaluate(graph: BdmcGraph, assignment: Assignment) -> bool:
    """f(a): each leaf contributes "phi_i is satisfiable under a", combined
    through the monotone circuit."""
    return Evaluator(graph)(_input_mask(graph, assignment))


DEFAULT_ENUM_BOUND = 20


def enumerate_models(graph: BdmcGraph, bound: int = DEFAULT_ENUM_BOUND) -> frozenset[int]:
    """All satisfying full assignments as bitmasks (bit v-1 = value of input v)."""
    n = graph.num_inputs
    if n > bound:
        raise BudgetExceededError(
            f"enumerate_models needs bound >= {n} for this graph (got {bound})"
        )
    ev = Evaluator(graph)
    return frozenset(mask for mask in range(1 << n) if ev(mask))


DEFAULT_SUBTREE_CAP = 100_000


def minimal_subtrees(graph: BdmcGraph, cap: int = DEFAULT_SUBTREE_CAP) -> list[frozenset[int]]:
    """All minimal satisfying subtrees, each as a frozenset of node ids.

    A subtree takes every child of an and-node and exactly one child of an
    or-node, rooted at the graph root.  Node sets determine subtrees uniquely
    here because decomposability forbids two and-branches from sharing any
    node with a nonempty variable scope.
    """
    require_valid(graph)
    memo: dict[int, list[frozenset[int]]] = {}

    def rec(nid: int) -> list[frozenset[int]]:
        got = memo.get(nid)
        if got is not None:
            return got
        nd = graph.nodes[nid]
        if nd.kind == "leaf":
            out = [frozenset((nid,))]
        elif nd.kind == "or":
            out = [sub | {nid} for ch in nd.children for sub in rec(ch)]
        else:
            out = [frozenset((nid,))]
            for ch in nd.children:
                out = [acc | sub for acc in out for sub in rec(ch)]
                if len(out) > cap:
                    raise BudgetExceededError(f"more than {cap} minimal subtrees")
        if len(out) > cap:
            raise BudgetExceededError(f"more than {cap} minimal subtrees")
        memo[nid] = out
        return out

    return rec(graph.root)


def evaluate_by_subtrees(graph: BdmcGraph, assignment: Assignment) -> bool:
    """Disjunction-over-minimal-subtrees semantics; oracle for evaluate()."""
    mask = _input_mask(graph, assignment)
    ev = Evaluator(graph)
    for tree in minimal_subtrees(graph):
        ok = True
        for nid in tree:
            nd = graph.nodes[nid]
            if nd.kind == "leaf" and not ev.leaf_sat(graph.leaves[nd.leaf - 1], mask):
                ok = False
                break
        if ok:
            return True
    return False
