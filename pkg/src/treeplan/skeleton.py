"""Skeleton tree model and ingestion.

Trees come in as SWC records (``id type x y z radius parent``) or a JSON node
list. They are decomposed into single-child chains (segments), augmented with
imaginary sibling/grandparent/parent-sibling edges ("enhanced" tree), and
split into a level-by-level subtree hierarchy that drives the view search.

All structures are treated as immutable after construction and are safe to
share across solver workers.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

ROOT_PARENT = -1

# imaginary edge kinds
SIBLING = "sibling"
GRANDPARENT = "grandparent"
PARENT_SIBLING = "parent_sibling"


class SkeletonParseError(ValueError):
    """Malformed skeleton input; `line` is 1-based for SWC sources."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class SkeletonNode:
    id: int
    position: np.ndarray  # (3,) float64, world units
    radius: float
    parent: int | None
    children: list[int] = field(default_factory=list)
    swc_type: int = 0  # parsed and retained, semantically ignored


@dataclass
class SkeletonTree:
    """Rooted tree; nodes keyed by id, dict order = input order."""

    nodes: dict[int, SkeletonNode]
    root_id: int

    def __len__(self) -> int:
        return len(self.nodes)

    def node(self, nid: int) -> SkeletonNode:
        return self.nodes[nid]

    def edge_length(self, nid: int) -> float:
        """Length of the edge connecting `nid` to its parent."""
        n = self.nodes[nid]
        return float(np.linalg.norm(n.position - self.nodes[n.parent].position))

    def ids_topo(self) -> list[int]:
        """Node ids with parents before children (BFS, child order kept)."""
        order = [self.root_id]
        queue = deque([self.root_id])
        while queue:
            for c in self.nodes[queue.popleft()].children:
                order.append(c)
                queue.append(c)
        return order

    def descendants(self, nid: int) -> frozenset[int]:
        """`nid` plus every node below it."""
        out = []
        stack = [nid]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(self.nodes[cur].children)
        return frozenset(out)

    def branching_ids(self) -> list[int]:
        return [nid for nid, n in self.nodes.items() if len(n.children) >= 2]


@dataclass
class Segment:
    """Maximal single-child chain; starts at a child of a branching node or
    of the root, ends at a leaf or at the branching node it runs into."""

    node_ids: list[int]
    index: int

    @property
    def first(self) -> int:
        return self.node_ids[0]

    @property
    def last(self) -> int:
        return self.node_ids[-1]


@dataclass
class EnhancedTree:
    """Skeleton plus imaginary edges.

    Each imaginary edge is stored once as ``(owner, other, kind)``: the owner
    is the node whose sibling/grandparent/parent-sibling relation defines the
    edge (for sibling pairs either endpoint owns it).
    """

    base: SkeletonTree
    imaginary_edges: list[tuple[int, int, str]]


@dataclass
class Subtree:
    root_id: int
    node_ids: frozenset[int]
    level: int


@dataclass
class SubtreeHierarchy:
    """Level 0 is the whole tree; level h+1 subtrees hang off the branching
    nodes that terminate level-h segments."""

    levels: list[list[Subtree]]

    @property
    def m(self) -> int:
        return len(self.levels) - 1

    def all_subtrees(self) -> list[Subtree]:
        return [s for level in self.levels for s in level]


def _build_tree(records: list[tuple], where: str) -> SkeletonTree:
    """records: (label, id, swc_type, (x, y, z), radius, parent_or_None)."""
    nodes: dict[int, SkeletonNode] = {}
    lines: dict[int, int | str] = {}
    root_id = None
    for label, nid, ntype, pos, radius, parent in records:
        if nid in nodes:
            raise SkeletonParseError(f"duplicate node id {nid}", _lineno(label))
        if radius < 0:
            raise SkeletonParseError(f"negative radius for node {nid}", _lineno(label))
        if parent is None:
            if root_id is not None:
                raise SkeletonParseError(
                    f"multiple roots: {root_id} and {nid}", _lineno(label))
            root_id = nid
        nodes[nid] = SkeletonNode(
            id=nid, position=np.asarray(pos, dtype=np.float64),
            radius=float(radius), parent=parent, swc_type=ntype)
        lines[nid] = label
    if root_id is None:
        raise SkeletonParseError("no root node (parent -1) found")
    for nid, n in nodes.items():
        if n.parent is None:
            continue
        if n.parent not in nodes:
            raise SkeletonParseError(
                f"node {nid} references missing parent {n.parent}", _lineno(lines[nid]))
        nodes[n.parent].children.append(nid)
    # every node must reach the root; a walk that revisits a node is a cycle
    state: dict[int, int] = {}  # 0 on current path, 1 done
    for nid in nodes:
        path = []
        cur = nid
        while cur is not None and cur not in state:
            state[cur] = 0
            path.append(cur)
            cur = nodes[cur].parent
        if cur is not None and state[cur] == 0:
            raise SkeletonParseError(
                f"cycle through node {cur}", _lineno(lines[cur]))
        for p in path:
            state[p] = 1
    for nid, n in nodes.items():
        if n.parent is not None:
            l = np.linalg.norm(n.position - nodes[n.parent].position)
            if l <= 0.0:
                raise SkeletonParseError(
                    f"zero-length edge at node {nid}", _lineno(lines[nid]))
    return SkeletonTree(nodes=nodes, root_id=root_id)


def _lineno(label) -> int | None:
    return label if isinstance(label, int) else None


def parse_swc(text: str) -> SkeletonTree:
    """Parse SWC text: whitespace-separated ``id type x y z radius parent``
    records, ``#`` comments; parent -1 marks the root. File order defines
    child order."""
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 7:
            raise SkeletonParseError(
                "expected 7 fields `id type x y z radius parent`", lineno)
        try:
            nid, ntype = int(parts[0]), int(parts[1])
            x, y, z, radius = (float(p) for p in parts[2:6])
            parent = int(parts[6])
        except ValueError:
            raise SkeletonParseError(f"unparsable record {line!r}", lineno) from None
        records.append((lineno, nid, ntype, (x, y, z), radius,
                        None if parent == ROOT_PARENT else parent))
    if not records:
        raise SkeletonParseError("no records found")
    return _build_tree(records, where="swc")


def parse_json(text: str) -> SkeletonTree:
    """Parse the JSON skeleton format:
    ``{"nodes": [{"id", "pos": [x,y,z], "radius", "parent": int|null}]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SkeletonParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("nodes"), list):
        raise SkeletonParseError("expected an object with a `nodes` list")
    records = []
    for i, entry in enumerate(doc["nodes"]):
        try:
            nid = int(entry["id"])
            pos = tuple(float(v) for v in entry["pos"])
            radius = float(entry.get("radius", 0.0))
            parent = entry.get("parent")
            parent = None if parent is None else int(parent)
        except (KeyError, TypeError, ValueError):
            raise SkeletonParseError(f"bad node entry at index {i}") from None
        if len(pos) != 3:
            raise SkeletonParseError(f"node {nid}: `pos` must have 3 components")
        records.append((f"node {nid}", nid, int(entry.get("type", 0)),
                        pos, radius, parent))
    if not records:
        raise SkeletonParseError("empty `nodes` list")
    return _build_tree(records, where="json")


def serialize_swc(tree: SkeletonTree) -> str:
    """Emit SWC records in id order with 6-significant-digit positions."""
    out = []
    for nid in sorted(tree.nodes):
        n = tree.nodes[nid]
        x, y, z = (f"{v:.6g}" for v in n.position)
        parent = ROOT_PARENT if n.parent is None else n.parent
        out.append(f"{nid} {n.swc_type} {x} {y} {z} {n.radius:.6g} {parent}")
    return "\n".join(out) + "\n"


def serialize_json(tree: SkeletonTree) -> str:
    nodes = [
        {"id": nid, "pos": [float(v) for v in n.position],
         "radius": float(n.radius), "parent": n.parent}
        for nid, n in ((i, tree.nodes[i]) for i in sorted(tree.nodes))
    ]
    return json.dumps({"nodes": nodes}, indent=2) + "\n"


def segment_tree(tree: SkeletonTree) -> list[Segment]:
    """Partition all non-root nodes into single-child chains, in depth-first
    discovery order."""
    segments: list[Segment] = []
    stack = list(reversed(tree.nodes[tree.root_id].children))
    while stack:
        start = stack.pop()
        chain = [start]
        node = tree.nodes[start]
        while len(node.children) == 1:
            nxt = node.children[0]
            chain.append(nxt)
            node = tree.nodes[nxt]
        segments.append(Segment(node_ids=chain, index=len(segments)))
        stack.extend(reversed(node.children))
    return segments


def segment_of_node(segments: list[Segment]) -> dict[int, int]:
    """node id -> segment index (root has no segment)."""
    out = {}
    for seg in segments:
        for nid in seg.node_ids:
            out[nid] = seg.index
    return out


def build_enhanced_tree(tree: SkeletonTree) -> EnhancedTree:
    """Attach imaginary edges: every sibling pair once, one grandparent edge
    per node of depth >= 2, and one edge per (node, parent's sibling) pair."""
    imag: list[tuple[int, int, str]] = []
    for nid in tree.ids_topo():
        n = tree.nodes[nid]
        kids = n.children
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                imag.append((kids[i], kids[j], SIBLING))
        if n.parent is not None:
            p = tree.nodes[n.parent]
            if p.parent is not None:
                imag.append((nid, p.parent, GRANDPARENT))
                for ps in tree.nodes[p.parent].children:
                    if ps != n.parent:
                        imag.append((nid, ps, PARENT_SIBLING))
    return EnhancedTree(base=tree, imaginary_edges=imag)


def build_hierarchy(tree: SkeletonTree, segments: list[Segment] | None = None) -> SubtreeHierarchy:
    """Level 0 holds the full tree; a segment whose first node has exactly h
    branching nodes among its proper ancestors roots a level-h subtree."""
    if segments is None:
        segments = segment_tree(tree)
    branch_count: dict[int, int] = {tree.root_id: 0}
    for nid in tree.ids_topo():
        if nid == tree.root_id:
            continue
        p = tree.nodes[nid].parent
        is_branch = len(tree.nodes[p].children) >= 2
        branch_count[nid] = branch_count[p] + (1 if is_branch else 0)
    by_level: dict[int, list[Subtree]] = {}
    for seg in segments:
        h = branch_count[seg.first]
        if h == 0:
            continue  # the root chain belongs to the full-tree level
        by_level.setdefault(h, []).append(
            Subtree(root_id=seg.first, node_ids=tree.descendants(seg.first), level=h))
    levels = [[Subtree(root_id=tree.root_id,
                       node_ids=frozenset(tree.nodes), level=0)]]
    for h in range(1, max(by_level, default=0) + 1):
        levels.append(by_level[h])
    return SubtreeHierarchy(levels=levels)
