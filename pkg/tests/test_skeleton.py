import numpy as np
import pytest

from treeplan.skeleton import (GRANDPARENT, PARENT_SIBLING, SIBLING,
                               SkeletonParseError, build_enhanced_tree,
                               build_hierarchy, parse_json, parse_swc,
                               segment_of_node, segment_tree, serialize_swc)

from conftest import make_tree, path_tree, random_tree, star_tree, y_tree


def test_parse_single_record():
    tree = parse_swc("1 1 0 0 0 1.0 -1")
    assert len(tree) == 1
    assert tree.root_id == 1
    np.testing.assert_array_equal(tree.nodes[1].position, [0.0, 0.0, 0.0])
    assert tree.nodes[1].radius == 1.0
    assert tree.nodes[1].parent is None


def test_parse_three_node_chain_lengths():
    text = "1 1 0 0 0 0.5 -1\n2 1 0 1 0 0.5 1\n3 1 0 2 0 0.5 2\n"
    tree = parse_swc(text)
    assert len(tree) == 3
    # oracle: Euclidean distance between the stated positions
    assert tree.edge_length(2) == pytest.approx(1.0)
    assert tree.edge_length(3) == pytest.approx(1.0)
    assert tree.nodes[1].children == [2]


def test_parse_comments_and_child_order():
    text = "# comment\n1 1 0 0 0 1 -1\n3 1 1 0 0 1 1\n2 1 0 1 0 1 1\n"
    tree = parse_swc(text)
    assert tree.nodes[1].children == [3, 2]  # file order

def test_parse_missing_parent_cites_line():
    text = "1 1 0 0 0 1 -1\n2 1 0 1 0 1 7\n"
    with pytest.raises(SkeletonParseError, match="line 2"):
        parse_swc(text)


def test_parse_duplicate_id():
    text = "1 1 0 0 0 1 -1\n1 1 0 1 0 1 1\n"
    with pytest.raises(SkeletonParseError, match="duplicate"):
        parse_swc(text)


def test_parse_multiple_roots():
    text = "1 1 0 0 0 1 -1\n2 1 0 1 0 1 -1\n"
    with pytest.raises(SkeletonParseError, match="multiple roots"):
        parse_swc(text)


def test_parse_cycle():
    text = "1 1 0 0 0 1 -1\n2 1 0 1 0 1 3\n3 1 1 1 0 1 2\n"
    with pytest.raises(SkeletonParseError, match="cycle"):
        parse_swc(text)


def test_parse_zero_length_edge_rejected():
    text = "1 1 0 0 0 1 -1\n2 1 0 0 0 1 1\n"
    with pytest.raises(SkeletonParseError, match="zero-length"):
        parse_swc(text)


def test_parse_negative_radius_rejected():
    with pytest.raises(SkeletonParseError, match="radius"):
        parse_swc("1 1 0 0 0 -1 -1")


def test_swc_roundtrip_identity():
    text = "1 3 0 0 0 0.25 -1\n2 3 1.5 0 0 0.125 1\n3 2 1.5 2 -0.5 0.5 2\n4 2 2 2 1 0.5 2\n"
    tree = parse_swc(text)
    again = parse_swc(serialize_swc(tree))
    for nid, n in tree.nodes.items():
        m = again.nodes[nid]
        np.testing.assert_array_equal(n.position, m.position)
        assert n.radius == m.radius
        assert n.parent == m.parent
        assert n.swc_type == m.swc_type


def test_json_parse_and_errors():
    doc = '{"nodes": [{"id": 1, "pos": [0,0,0], "radius": 1, "parent": null},' \
          '{"id": 2, "pos": [1,0,0], "radius": 0.5, "parent": 1}]}'
    tree = parse_json(doc)
    assert len(tree) == 2 and tree.root_id == 1
    with pytest.raises(SkeletonParseError):
        parse_json('{"nodes": "nope"}')
    with pytest.raises(SkeletonParseError):
        parse_json('{"nodes": [{"id": 1, "pos": [0,0], "radius": 1, "parent": null}]}')


def test_segments_path():
    segs = segment_tree(path_tree(4))
    assert len(segs) == 1
    assert segs[0].node_ids == [2, 3, 4]


def test_segments_star():
    segs = segment_tree(star_tree(2))
    assert [s.node_ids for s in segs] == [[2], [3]]


def test_segments_y_tree():
    segs = segment_tree(y_tree())
    assert [s.node_ids for s in segs] == [[2, 3], [4, 5], [6]]


def test_segments_partition_random_trees():
    rng = np.random.default_rng(11)
    for _ in range(25):
        tree = random_tree(rng, int(rng.integers(2, 40)))
        segs = segment_tree(tree)
        seen = []
        for s in segs:
            seen.extend(s.node_ids)
        assert sorted(seen) == sorted(set(seen))  # pairwise disjoint
        assert set(seen) == set(tree.nodes) - {tree.root_id}
        for s in segs:
            for nid in s.node_ids[:-1]:
                assert len(tree.nodes[nid].children) == 1


def test_enhanced_single_edge_no_imaginary():
    tree = path_tree(2)
    assert build_enhanced_tree(tree).imaginary_edges == []


def test_enhanced_two_children_one_sibling_edge():
    tree = star_tree(2)
    et = build_enhanced_tree(tree)
    assert et.imaginary_edges == [(2, 3, SIBLING)]


def test_enhanced_all_three_kinds_for_one_node():
    # node F has a sibling G, a grandparent R, and a parent's sibling B
    tree = make_tree([
        (1, (0, 0, 0), 0.1, None),    # R
        (2, (1, 0, 0), 0.1, 1),       # A
        (3, (0, 1, 0), 0.1, 1),       # B
        (4, (2, 0, 0), 0.1, 2),       # F
        (5, (1, 1, 0), 0.1, 2),       # G
    ])
    et = build_enhanced_tree(tree)
    kinds_for_f = {kind for a, b, kind in et.imaginary_edges if 4 in (a, b)}
    assert kinds_for_f == {SIBLING, GRANDPARENT, PARENT_SIBLING}
    assert (4, 5, SIBLING) in et.imaginary_edges
    assert (4, 1, GRANDPARENT) in et.imaginary_edges
    assert (4, 3, PARENT_SIBLING) in et.imaginary_edges


def test_enhanced_counts_match_combinatorics():
    rng = np.random.default_rng(7)
    for _ in range(20):
        tree = random_tree(rng, int(rng.integers(2, 50)))
        et = build_enhanced_tree(tree)
        by_kind = {SIBLING: 0, GRANDPARENT: 0, PARENT_SIBLING: 0}
        for _, _, kind in et.imaginary_edges:
            by_kind[kind] += 1
        sib = sum(len(n.children) * (len(n.children) - 1) // 2
                  for n in tree.nodes.values())
        depth = {tree.root_id: 0}
        for nid in tree.ids_topo():
            if nid != tree.root_id:
                depth[nid] = depth[tree.nodes[nid].parent] + 1
        gp = sum(1 for nid in tree.nodes if depth[nid] >= 2)
        psib = 0
        for nid, n in tree.nodes.items():
            if n.parent is None:
                continue
            p = tree.nodes[n.parent]
            if p.parent is not None:
                psib += len(tree.nodes[p.parent].children) - 1
        assert by_kind[SIBLING] == sib
        assert by_kind[GRANDPARENT] == gp
        assert by_kind[PARENT_SIBLING] == psib


def test_hierarchy_path_tree_level0_only():
    h = build_hierarchy(path_tree(5))
    assert h.m == 0
    assert len(h.levels[0]) == 1
    assert h.levels[0][0].node_ids == frozenset(range(1, 6))


def test_hierarchy_y_tree():
    h = build_hierarchy(y_tree())
    assert h.m == 1
    assert len(h.levels[1]) == 2
    assert {s.root_id for s in h.levels[1]} == {4, 6}
    assert {frozenset(s.node_ids) for s in h.levels[1]} == {frozenset({4, 5}), frozenset({6})}


def test_hierarchy_binary_branching_depth_two():
    # root chain, then two levels of binary branching: 2 then 4 subtrees
    tree = make_tree([
        (1, (0, 0, 0), 0.1, None),
        (2, (0, 1, 0), 0.1, 1),
        (3, (-1, 2, 0), 0.1, 2), (4, (1, 2, 0), 0.1, 2),
        (5, (-1.5, 3, 0), 0.1, 3), (6, (-0.5, 3, 0), 0.1, 3),
        (7, (0.5, 3, 0), 0.1, 4), (8, (1.5, 3, 0), 0.1, 4),
    ])
    h = build_hierarchy(tree)
    assert h.m == 2
    assert len(h.levels[1]) == 2
    assert len(h.levels[2]) == 4


def test_hierarchy_disjoint_and_nested():
    rng = np.random.default_rng(23)
    for _ in range(15):
        tree = random_tree(rng, int(rng.integers(3, 45)))
        h = build_hierarchy(tree)
        assert h.levels[0][0].node_ids == frozenset(tree.nodes)
        for level in h.levels[1:]:
            for i, a in enumerate(level):
                for b in level[i + 1:]:
                    assert not (a.node_ids & b.node_ids)
        for lo, hi in zip(h.levels, h.levels[1:]):
            for child in hi:
                containers = [p for p in lo if child.node_ids < p.node_ids]
                assert len(containers) == 1


def test_segment_of_node_covers_non_root():
    tree = y_tree()
    segs = segment_tree(tree)
    mapping = segment_of_node(segs)
    assert set(mapping) == set(tree.nodes) - {tree.root_id}
