"""Structure-preserving rewrites: smoothing, leveling, separator covers.

Smoothing pads or-branches with fresh constant-true leaves so every or-child
covers its parent's variable scope.  Leveling inserts pass-through one-child
or-nodes until every root-to-leaf path has the same length, which makes the
depth layers of each D_i separators and yields a separator cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    BdmcGraph,
    CLASS_TRUE,
    LeafEncoding,
    Node,
    VarScopeMap,
    assemble_graph,
    compute_scopes,
    require_valid,
)
from .errors import PreconditionError


def smooth(graph: BdmcGraph) -> BdmcGraph:
    """Make every or-node smooth; returns the input unchanged if it already is.

    An or-child u missing M = var(v) - var(u) is replaced by and(u, t) where t
    is a fresh constant-true leaf over M.  The represented function, validity
    and decomposability are preserved.
    """
    require_valid(graph)
    scopes = compute_scopes(graph)
    nodes = list(graph.nodes)
    leaves = list(graph.leaves)
    changed = False
    for nid in range(len(graph.nodes)):
        nd = graph.nodes[nid]
        if nd.kind != "or":
            continue
        new_children = []
        for ch in nd.children:
            missing = scopes.var(nid) - scopes.var(ch)
            if not missing:
                new_children.append(ch)
                continue
            changed = True
            index = len(leaves) + 1
            leaves.append(
                LeafEncoding(index, tuple(sorted(missing)), (), (), CLASS_TRUE, ())
            )
            leaf_nid = len(nodes)
            nodes.append(Node("leaf", leaf=index))
            wrap_nid = len(nodes)
            nodes.append(Node("and", children=(ch, leaf_nid)))
            new_children.append(wrap_nid)
        if tuple(new_children) != nd.children:
            nodes[nid] = Node("or", children=tuple(new_children))
    if not changed:
        return graph
    return assemble_graph(nodes, graph.root, leaves, graph.input_names)


def node_depths(graph: BdmcGraph) -> list[int]:
    """Longest-path-from-root depth per reachable node (-1 if unreachable)."""
    from .core import topo_order

    depth = [-1] * graph.num_nodes
    depth[graph.root] = 0
    for nid in topo_order(graph):
        for ch in graph.nodes[nid].children:
            depth[ch] = max(depth[ch], depth[nid] + 1)
    return depth


def level(graph: BdmcGraph) -> BdmcGraph:
    """Stretch every edge with pass-through one-child or-nodes until all
    root-to-leaf paths have the same length; fixpoint on already-leveled input.

    The function, smoothness and decomposability are preserved; each inserted
    node later contributes one N1 and one N3 clause.
    """
    require_valid(graph)
    depth = node_depths(graph)
    leaf_ids = [nid for nid, nd in enumerate(graph.nodes) if nd.kind == "leaf" and depth[nid] >= 0]
    target = [d for d in depth]
    full = max((depth[nid] for nid in leaf_ids), default=0)
    for nid in leaf_ids:
        target[nid] = full
    nodes = list(graph.nodes)
    changed = False
    for nid, nd in enumerate(graph.nodes):
        if nd.kind == "leaf" or depth[nid] < 0:
            continue
        new_children = []
        for ch in nd.children:
            gap = target[ch] - target[nid]
            if gap <= 1:
                new_children.append(ch)
                continue
            changed = True
            below = ch
            for _ in range(gap - 1):
                nodes.append(Node("or", children=(below,)))
                below = len(nodes) - 1
            new_children.append(below)
        if tuple(new_children) != nd.children:
            nodes[nid] = Node(nd.kind, children=tuple(new_children))
    if not changed:
        return graph
    return assemble_graph(nodes, graph.root, list(graph.leaves), graph.input_names)


def strict_depths(graph: BdmcGraph) -> Optional[list[int]]:
    """Depths if the graph is strictly leveled (every edge spans one level,
    all leaves at the same level), else None."""
    depth = node_depths(graph)
    leaf_depths = {depth[nid] for nid, nd in enumerate(graph.nodes) if nd.kind == "leaf" and depth[nid] >= 0}
    if len(leaf_depths) > 1:
        return None
    for nid, nd in enumerate(graph.nodes):
        if depth[nid] < 0:
            continue
        for ch in nd.children:
            if depth[ch] != depth[nid] + 1:
                return None
    return depth


def is_strictly_leveled(graph: BdmcGraph) -> bool:
    return strict_depths(graph) is not None


def _witness_paths(graph: BdmcGraph) -> tuple[list[int], list[int]]:
    """A shortest and a longest root-to-leaf path, as node id lists."""
    def heights(agg):
        memo: dict[int, int] = {}

        def rec(nid):
            if nid not in memo:
                nd = graph.nodes[nid]
                memo[nid] = 0 if nd.kind == "leaf" else 1 + agg(rec(c) for c in nd.children)
            return memo[nid]

        rec(graph.root)
        return memo

    def walk(memo, sign):
        path = [graph.root]
        while graph.nodes[path[-1]].kind != "leaf":
            path.append(min(graph.nodes[path[-1]].children, key=lambda c: sign * memo[c]))
        return path

    return walk(heights(min), 1), walk(heights(max), -1)


@dataclass(frozen=True)
class SeparatorCover:
    """Per input variable, separators of D_i; plus the merged deduplicated family.

    Every S is a set of node ids hitting each root-to-leaf path of D_i exactly
    once; the union of a variable's separators is H_i minus the root (the
    {root} separator exists but is dropped, the encodings never need it).
    """

    per_var: tuple[tuple[frozenset[int], ...], ...]
    merged: tuple[frozenset[int], ...]

    @property
    def total_size(self) -> int:
        """t = sum of |S| over the merged family."""
        return sum(len(s) for s in self.merged)


def separator_cover(graph: BdmcGraph, scopes: Optional[VarScopeMap] = None) -> SeparatorCover:
    """Depth-layer separators of a strictly leveled graph.

    S_{i,d} = nodes of H_i at depth d, for d = 1..L; empty layers and the
    d = 0 layer {root} are dropped; duplicates across variables are merged.
    """
    require_valid(graph)
    depth = strict_depths(graph)
    if depth is None:
        short, long_ = _witness_paths(graph)
        raise PreconditionError(
            "graph is not strictly leveled: root-to-leaf paths "
            f"{short} and {long_} have different lengths; run level() first"
        )
    if scopes is None:
        scopes = compute_scopes(graph)
    full = max((d for d in depth if d >= 0), default=0)
    per_var = []
    merged: dict[frozenset[int], None] = {}
    for v in graph.input_vars:
        seps = []
        for d in range(1, full + 1):
            layer = frozenset(nid for nid in scopes.h(v) if depth[nid] == d)
            if layer:
                seps.append(layer)
                merged.setdefault(layer)
        per_var.append(tuple(seps))
    return SeparatorCover(tuple(per_var), tuple(merged))


@dataclass(frozen=True)
class CoverCheck:
    ok: bool
    bad_path: Optional[tuple[int, ...]] = None    # path hitting some S != once
    bad_separator: Optional[frozenset[int]] = None
    uncovered: Optional[tuple[int, int]] = None   # (input var, node id) not covered

    def __bool__(self) -> bool:
        return self.ok


def check_separator_cover(graph: BdmcGraph, cover: SeparatorCover) -> CoverCheck:
    """Exactly-one-hit check by min/max hit-count DP over each D_i, plus the
    coverage condition union(S_i) in {H_i, H_i - root}."""
    require_valid(graph, need_decomposable=False)
    scopes = compute_scopes(graph)
    for v in graph.input_vars:
        h = scopes.h(v)
        seps = cover.per_var[v - 1] if v - 1 < len(cover.per_var) else ()
        for sep in seps:
            if not sep <= h:
                return CoverCheck(False, bad_separator=sep, uncovered=(v, min(sep - h)))
            verdict = _check_one_separator(graph, h, sep)
            if verdict is not None:
                return verdict
        covered = frozenset().union(*seps) if seps else frozenset()
        missing = h - covered - {graph.root}
        if missing:
            return CoverCheck(False, uncovered=(v, min(missing)))
    return CoverCheck(True)


def _check_one_separator(graph, h, sep) -> Optional[CoverCheck]:
    # lo/hi hits on any path from node to a sink of D_i, counting the node itself
    lo: dict[int, int] = {}
    hi: dict[int, int] = {}

    def rec(nid: int) -> None:
        if nid in lo:
            return
        own = 1 if nid in sep else 0
        kids = [ch for ch in graph.nodes[nid].children if ch in h]
        if not kids:
            lo[nid] = hi[nid] = own
            return
        for ch in kids:
            rec(ch)
        lo[nid] = own + min(lo[ch] for ch in kids)
        hi[nid] = own + max(hi[ch] for ch in kids)

    rec(graph.root)
    if lo[graph.root] == 1 and hi[graph.root] == 1:
        return None
    # reconstruct a violating path greedily
    want_low = lo[graph.root] != 1
    path = [graph.root]
    while True:
        nid = path[-1]
        kids = [ch for ch in graph.nodes[nid].children if ch in h]
        if not kids:
            break
        pick = min(kids, key=(lambda c: lo[c]) if want_low else (lambda c: -hi[c]))
        path.append(pick)
    return CoverCheck(False, bad_path=tuple(path), bad_separator=sep)
