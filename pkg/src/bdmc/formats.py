"""Parsing and serialization: the BDMC text format and DIMACS output.

BDMC format (UTF-8, line oriented, '#' starts a comment):

    bdmc <numNodes> <numEdges> <numLeaves> <numInputVars>
    inputs x1 x2 ... xn
    <one line per node, ids are 0-based listing order>
        A <k> <childId>...   |   O <k> <childId>...   |   L <leafIndex>
    root <nodeId>
    leaf <leafIndex> inputs <names...> aux <names...> clauses <m> [class <c>]
    <m clause lines over the declared names, '-' for negation, 0-terminated>

The optional trailing `class` tag records the leaf's claimed base class; files
without it get a syntactic default (constant true, single input literal, else
cc).  Auxiliary names may repeat across leaf blocks; they are renamed apart
internally.
"""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

from .core import (
    BdmcGraph,
    LeafEncoding,
    Node,
    assemble_graph,
    infer_claimed_class,
    make_clause,
)
from .errors import ParseError

if TYPE_CHECKING:
    from .encoder import EncodingOutput

KEYWORDS = {"bdmc", "inputs", "aux", "clauses", "root", "leaf", "class", "A", "O", "L"}


def _is_name(tok: str) -> bool:
    if not tok or tok in KEYWORDS or tok == "0" or tok.startswith("-"):
        return False
    return all(ch.isalnum() or ch in "_@." for ch in tok) and not tok[0].isdigit()


class _Lines:
    def __init__(self, text: str):
        self.rows = []
        for lno, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0]
            if body.strip():
                self.rows.append((lno, body.split()))
        self.pos = 0

    def next(self, what: str):
        if self.pos >= len(self.rows):
            raise ParseError(f"unexpected end of file, expected {what}")
        row = self.rows[self.pos]
        self.pos += 1
        return row

    @property
    def done(self) -> bool:
        return self.pos >= len(self.rows)


def _int(tok: str, lno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected {what}, got {tok!r}", line=lno) from None


def parse_bdmc(text: str) -> BdmcGraph:
    """Parse a BDMC document into a validated graph."""
    lines = _Lines(text)
    lno, toks = lines.next("header line 'bdmc ...'")
    if toks[0] != "bdmc" or len(toks) != 5:
        raise ParseError("expected header 'bdmc <nodes> <edges> <leaves> <inputVars>'", line=lno)
    n_nodes, n_edges, n_leaves, n_inputs = (_int(t, lno, "a count") for t in toks[1:])
    lno, toks = lines.next("'inputs' line")
    if toks[0] != "inputs":
        raise ParseError("expected 'inputs' line", line=lno)
    input_names = toks[1:]
    if len(input_names) != n_inputs:
        raise ParseError(
            f"header declares {n_inputs} input variables, 'inputs' lists {len(input_names)}",
            line=lno,
        )
    for col, name in enumerate(input_names, start=2):
        if not _is_name(name):
            raise ParseError(f"invalid input variable name {name!r}", line=lno, column=col)
    if len(set(input_names)) != len(input_names):
        raise ParseError("duplicate input variable name", line=lno)
    input_id = {name: i + 1 for i, name in enumerate(input_names)}

    if n_nodes == 0:
        raise ParseError("no nodes: sentence has no root")
    nodes: list[Node] = []
    edge_count = 0
    for _ in range(n_nodes):
        lno, toks = lines.next("a node line")
        kind = toks[0]
        if kind == "L":
            if len(toks) != 2:
                raise ParseError("leaf node line must be 'L <leafIndex>'", line=lno)
            nodes.append(Node("leaf", leaf=_int(toks[1], lno, "a leaf index")))
        elif kind in ("A", "O"):
            if len(toks) < 2:
                raise ParseError(f"node line must be '{kind} <k> <children...>'", line=lno)
            k = _int(toks[1], lno, "a child count")
            kids = [_int(t, lno, "a child id") for t in toks[2:]]
            if len(kids) != k:
                raise ParseError(f"node declares {k} children but lists {len(kids)}", line=lno)
            for ch in kids:
                if not (0 <= ch < n_nodes):
                    raise ParseError(f"child id {ch} out of range 0..{n_nodes - 1}", line=lno)
            if len(set(kids)) != len(kids):
                raise ParseError("duplicate edge", line=lno)
            if k == 0:
                raise ParseError("inner node must have at least one child", line=lno)
            edge_count += k
            nodes.append(Node("and" if kind == "A" else "or", children=tuple(kids)))
        else:
            raise ParseError(f"unknown node kind {kind!r}", line=lno, column=1)
    if edge_count != n_edges:
        raise ParseError(f"header declares {n_edges} edges, nodes list {edge_count}")

    lno, toks = lines.next("'root' line")
    if toks[0] != "root" or len(toks) != 2:
        raise ParseError("expected 'root <nodeId>'", line=lno)
    root = _int(toks[1], lno, "a node id")
    if not (0 <= root < n_nodes):
        raise ParseError(f"root id {root} out of range", line=lno)

    leaves: list[LeafEncoding] = []
    next_aux = n_inputs + 1
    for _ in range(n_leaves):
        lno, toks = lines.next("a 'leaf' block")
        if toks[0] != "leaf":
            raise ParseError("expected 'leaf' block", line=lno)
        try:
            i_inputs = toks.index("inputs")
            i_aux = toks.index("aux")
            i_clauses = toks.index("clauses")
        except ValueError:
            raise ParseError("leaf line needs 'inputs', 'aux' and 'clauses' sections", line=lno)
        if i_inputs != 2 or not (i_inputs < i_aux < i_clauses):
            raise ParseError("leaf line sections out of order", line=lno)
        index = _int(toks[1], lno, "a leaf index")
        in_names = toks[i_inputs + 1:i_aux]
        aux_names = toks[i_aux + 1:i_clauses]
        tail = toks[i_clauses + 1:]
        if not tail:
            raise ParseError("missing clause count", line=lno)
        m = _int(tail[0], lno, "a clause count")
        claimed = None
        if len(tail) > 1:
            if tail[1] != "class" or len(tail) != 3:
                raise ParseError("trailing tokens must be 'class <c>'", line=lno)
            claimed = tail[2].lower()
        for name in in_names:
            if name not in input_id:
                raise ParseError(f"leaf {index} references undeclared input var {name!r}", line=lno)
        if len(set(in_names)) != len(in_names):
            raise ParseError(f"leaf {index} lists an input variable twice", line=lno)
        for name in aux_names:
            if not _is_name(name):
                raise ParseError(f"invalid aux variable name {name!r}", line=lno)
            if name in input_id:
                raise ParseError(f"aux name {name!r} clashes with an input variable", line=lno)
        if len(set(aux_names)) != len(aux_names):
            raise ParseError(f"leaf {index} lists an aux variable twice", line=lno)
        aux_ids = tuple(range(next_aux, next_aux + len(aux_names)))
        next_aux += len(aux_names)
        local = dict(zip(aux_names, aux_ids))
        clauses = []
        for _c in range(m):
            clno, ctoks = lines.next(f"clause {_c + 1} of leaf {index}")
            if not ctoks or ctoks[-1] != "0":
                raise ParseError("clause line must be 0-terminated", line=clno)
            lits = []
            for col, tok in enumerate(ctoks[:-1], start=1):
                neg = tok.startswith("-")
                name = tok[1:] if neg else tok
                if name in local:
                    var = local[name]
                elif name in input_id:
                    var = input_id[name]
                    if name not in in_names:
                        raise ParseError(
                            f"leaf {index}: clause uses input {name!r} not declared for this leaf",
                            line=clno, column=col,
                        )
                else:
                    raise ParseError(f"unknown variable {name!r} in clause", line=clno, column=col)
                lits.append(-var if neg else var)
            clauses.append(make_clause(lits))
        in_ids = tuple(sorted(input_id[name] for name in in_names))
        clauses = tuple(dict.fromkeys(clauses))
        if claimed is None:
            claimed = infer_claimed_class(in_ids, aux_ids, clauses)
        leaves.append(LeafEncoding(index, in_ids, aux_ids, clauses, claimed, tuple(aux_names)))
    if not lines.done:
        lno, toks = lines.next("")
        raise ParseError(f"unexpected trailing content {' '.join(toks)!r}", line=lno)
    if len(leaves) != n_leaves:
        raise ParseError(f"header declares {n_leaves} leaves, found {len(leaves)}")
    return assemble_graph(nodes, root, leaves, input_names)


def serialize_bdmc(graph: BdmcGraph) -> str:
    """Canonical text for a graph; parse(serialize(g)) is isomorphic to g."""
    out = [f"bdmc {graph.num_nodes} {graph.num_edges} {graph.num_leaves} {graph.num_inputs}"]
    out.append("inputs " + " ".join(graph.input_names))
    for nd in graph.nodes:
        if nd.kind == "leaf":
            out.append(f"L {nd.leaf}")
        else:
            head = "A" if nd.kind == "and" else "O"
            out.append(f"{head} {len(nd.children)} " + " ".join(str(c) for c in nd.children))
    out.append(f"root {graph.root}")
    for leaf in graph.leaves:
        name_of = {v: graph.input_names[v - 1] for v in leaf.input_vars}
        name_of.update(dict(zip(leaf.aux_vars, leaf.aux_names)))
        head = (
            f"leaf {leaf.index} inputs "
            + " ".join(graph.input_names[v - 1] for v in leaf.input_vars)
            + " aux " + " ".join(leaf.aux_names)
        ).rstrip()
        out.append(f"{head} clauses {len(leaf.clauses)} class {leaf.claimed_class}")
        for clause in leaf.clauses:
            toks = [("-" if l < 0 else "") + name_of[abs(l)] for l in clause]
            out.append(" ".join(toks + ["0"]))
    return "\n".join(out) + "\n"


def emit_dimacs(output: "EncodingOutput") -> tuple[str, str]:
    """DIMACS text plus the varmap sidecar (one JSON object per line).

    Clause order: groups in the fixed order N1,N2,N3,N5,N6,E1,E2,E3,ROOT,
    construction order within each group.
    """
    clauses = output.all_clauses()
    rows = [f"p cnf {output.num_vars} {len(clauses)}"]
    for clause in clauses:
        rows.append(" ".join(str(l) for l in clause) + " 0")
    cnf_text = "\n".join(rows) + "\n"
    map_rows = [json.dumps(entry, separators=(", ", ": ")) for entry in output.varmap.entries]
    return cnf_text, "\n".join(map_rows) + "\n"


def parse_dimacs(text: str) -> tuple[int, list[tuple[int, ...]]]:
    """Read a DIMACS CNF file: (num_vars, clauses).  Header counts are checked."""
    nvars = None
    declared = None
    clauses: list[tuple[int, ...]] = []
    for lno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"bad problem line {line!r}", line=lno)
            nvars, declared = int(parts[2]), int(parts[3])
            continue
        if nvars is None:
            raise ParseError("clause before 'p cnf' header", line=lno)
        lits = [int(t) for t in line.split()]
        if not lits or lits[-1] != 0:
            raise ParseError("clause line must end with 0", line=lno)
        body = lits[:-1]
        for l in body:
            if l == 0 or abs(l) > nvars:
                raise ParseError(f"literal {l} out of range", line=lno)
        clauses.append(tuple(body))
    if nvars is None:
        raise ParseError("missing 'p cnf' header")
    if declared != len(clauses):
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    return nvars, clauses
