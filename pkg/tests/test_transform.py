"""Smoothing, leveling, separator covers and their checker."""

import pytest

from bdmc.core import build_graph, compute_scopes, enumerate_models, leaf_spec, validate
from bdmc.errors import PreconditionError
from bdmc.propcheck import gen_random
from bdmc.transform import (
    SeparatorCover,
    check_separator_cover,
    is_strictly_leveled,
    level,
    node_depths,
    separator_cover,
    smooth,
)

from conftest import g1


def or_of_unbalanced():
    # or(L1 over {x1}, L2 over {x1,x2}): not smooth
    return build_graph(
        nodes=[("or", [1, 2]), ("leaf", 1), ("leaf", 2)],
        leaves=[leaf_spec(inputs=[1], clauses=[[1]], cls="pc"),
                leaf_spec(inputs=[1, 2], clauses=[[1, 2]], cls="pc")],
        n=2,
    )


def test_smooth_fixpoint_on_smooth_graph():
    g = g1()
    assert smooth(g) is g


def test_smooth_pads_with_true_leaf():
    g = or_of_unbalanced()
    gs = smooth(g)
    rep = validate(gs)
    assert rep.smooth and rep.decomposable
    # the thin branch became and(L1, true-leaf over {x2})
    wrap = gs.nodes[gs.nodes[0].children[0]]
    assert wrap.kind == "and"
    pad = gs.leaf_of_node(wrap.children[1])
    assert pad.is_constant_true
    assert pad.input_vars == (2,)
    assert pad.claimed_class == "true"
    assert enumerate_models(gs) == enumerate_models(g)


def test_level_fixpoint():
    g = g1()
    gl = level(g)
    assert gl is g


def test_level_inserts_single_passthrough():
    # or(L1, and(L2, L3)): leaf depths 1 and 2
    g = build_graph(
        nodes=[("or", [1, 2]), ("leaf", 1), ("and", [3, 4]), ("leaf", 2), ("leaf", 3)],
        leaves=[leaf_spec(inputs=[1, 2], clauses=[[1, 2]], cls="pc"),
                leaf_spec(inputs=[1], clauses=[[1]], cls="pc"),
                leaf_spec(inputs=[2], clauses=[[-1]], cls="pc")],
        n=2,
    )
    assert not is_strictly_leveled(g)
    gl = level(g)
    assert is_strictly_leveled(gl)
    assert gl.num_nodes == g.num_nodes + 1
    inserted = gl.nodes[gl.nodes[0].children[0]]
    assert inserted.kind == "or" and len(inserted.children) == 1
    assert enumerate_models(gl) == enumerate_models(g)
    rep = validate(gl)
    assert rep.smooth and rep.decomposable


def test_level_edges_span_one_level():
    for seed in (3, 7, 21):
        g = level(smooth(gen_random(n=5, max_depth=3, leaf_class="pc", seed=seed)))
        depth = node_depths(g)
        for nid, nd in enumerate(g.nodes):
            for ch in nd.children:
                assert depth[ch] == depth[nid] + 1


def test_transforms_preserve_models():
    for seed in range(10):
        g = gen_random(n=6, max_depth=3, leaf_class="pc", seed=60 + seed)
        want = enumerate_models(g)
        gs = smooth(g)
        gl = level(gs)
        assert enumerate_models(gs) == want
        assert enumerate_models(gl) == want


def test_separator_cover_g1():
    g = g1()
    cov = separator_cover(g)
    assert cov.per_var == ((frozenset({1, 2}),), (frozenset({1, 2}),))
    assert cov.merged == (frozenset({1, 2}),)
    assert cov.total_size == 2


def test_separator_cover_single_leaf_empty():
    g = build_graph(nodes=[("leaf", 1)],
                    leaves=[leaf_spec(inputs=[1], clauses=[[1]], cls="pc")], n=1)
    cov = separator_cover(g)
    assert cov.merged == ()
    assert check_separator_cover(g, cov).ok


def test_separator_cover_chain():
    g = build_graph(nodes=[("or", [1]), ("leaf", 1)],
                    leaves=[leaf_spec(inputs=[1], clauses=[[1]], cls="pc")], n=1)
    cov = separator_cover(g)
    assert cov.merged == (frozenset({1}),)


def test_separator_cover_requires_leveling():
    g = build_graph(
        nodes=[("or", [1, 2]), ("leaf", 1), ("and", [3, 4]), ("leaf", 2), ("leaf", 3)],
        leaves=[leaf_spec(inputs=[1, 2], clauses=[[1, 2]], cls="pc"),
                leaf_spec(inputs=[1], clauses=[[1]], cls="pc"),
                leaf_spec(inputs=[2], clauses=[[-1]], cls="pc")],
        n=2,
    )
    with pytest.raises(PreconditionError, match="paths"):
        separator_cover(g)


def test_cover_roundtrip_random():
    for seed in range(20):
        g = level(smooth(gen_random(n=5, max_depth=3, leaf_class="pc", seed=300 + seed)))
        cov = separator_cover(g)
        assert check_separator_cover(g, cov).ok
        # per-variable union covers H_i minus the root
        sc = compute_scopes(g)
        for v in g.input_vars:
            seps = cov.per_var[v - 1]
            union = frozenset().union(*seps) if seps else frozenset()
            assert union == sc.h(v) - {g.root}
            assert sum(len(s) for s in seps) == len(sc.h(v)) - 1


def test_cover_mutation_detected():
    g = level(smooth(gen_random(n=5, max_depth=3, leaf_class="pc", seed=300)))
    cov = separator_cover(g)
    big = max(cov.merged, key=len)
    assert len(big) >= 2
    shrunk = frozenset(sorted(big)[:-1])
    bad = SeparatorCover(
        tuple(tuple(shrunk if s == big else s for s in svar) for svar in cov.per_var),
        tuple(shrunk if s == big else s for s in cov.merged),
    )
    res = check_separator_cover(g, bad)
    assert not res.ok
    assert res.bad_path is not None or res.uncovered is not None


def test_empty_cover_uncovered_witness():
    g = g1()
    res = check_separator_cover(g, SeparatorCover(((), ()), ()))
    assert not res.ok
    assert res.uncovered is not None
    var, node = res.uncovered
    assert node != g.root


def test_merged_separator_rejected():
    # chain or -> and -> leaves: merging the depth layers breaks exactly-one
    g = build_graph(
        nodes=[("or", [1]), ("and", [2, 3]), ("leaf", 1), ("leaf", 2)],
        leaves=[leaf_spec(inputs=[1], clauses=[[1]], cls="pc"),
                leaf_spec(inputs=[2], clauses=[[1]], cls="pc")],
        n=2,
    )
    cov = separator_cover(g)
    merged_sep = frozenset({1, 2})  # and-node with its own child leaf
    bad = SeparatorCover(((merged_sep,), cov.per_var[1]), (merged_sep,) + cov.merged[1:])
    res = check_separator_cover(g, bad)
    assert not res.ok
    assert res.bad_path == (0, 1, 2)
