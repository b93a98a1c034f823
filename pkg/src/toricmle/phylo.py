"""Binary group-based (CFN) tree models in Fourier coordinates.

States are edge labelings of a tree by bits such that at every inner vertex
the incident labels sum to an even number.  Labelings are ordered
lexicographically as bit strings over the input edge order.

For trees whose inner vertices all have degree three the MLE is rational.  It
is computed here three ways: directly from tripod and edge margins, by a Horn
matrix, and recursively as a toric fiber product.  A staged tree
parametrization is also provided.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping

from .model import LatticePolytope, ProbVector
from . import tfp as _tfp

MAX_LEAVES = 20
# labelings of a tripod, in the order used for Horn rows and staged-tree parameters
TRIPOD_LABELINGS = ((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1))


class TreeError(ValueError):
    """Malformed tree or an operation not applicable to this tree."""


class BoundaryDataError(ZeroDivisionError):
    """A margin that appears in a denominator is zero."""


def label_string(labeling) -> str:
    return "".join(str(b) for b in labeling)


def parse_label(text: str) -> tuple:
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(c) for c in text)


@dataclass(frozen=True)
class PhyloTree:
    """Tree given by an ordered edge list; the order indexes labeling bits."""

    edges: tuple
    names: tuple = field(default=())

    def __post_init__(self):
        edges = tuple((str(a), str(b)) for a, b in self.edges)
        if not edges:
            raise TreeError("a tree needs at least one edge")
        object.__setattr__(self, "edges", edges)
        vertices = []
        for a, b in edges:
            if a == b:
                raise TreeError(f"loop at vertex {a}")
            for v in (a, b):
                if v not in vertices:
                    vertices.append(v)
        object.__setattr__(self, "names", tuple(vertices))
        if len(set(frozenset(e) for e in edges)) != len(edges):
            raise TreeError("repeated edge")
        if len(edges) != len(vertices) - 1:
            raise TreeError("edge list does not describe a tree")
        # connectivity
        adj = {v: [] for v in vertices}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {vertices[0]}
        stack = [vertices[0]]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(vertices):
            raise TreeError("tree is not connected")
        for v in vertices:
            if len(adj[v]) == 2:
                raise TreeError(f"vertex {v} has degree 2")

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            edges = data["edges"]
        except (TypeError, KeyError):
            raise TreeError("tree JSON needs an 'edges' list") from None
        tree = cls(tuple(tuple(e) for e in edges))
        if "leaves" in data and set(map(str, data["leaves"])) != set(tree.leaves):
            raise TreeError("declared leaves do not match the edge list")
        return tree

    def to_json(self):
        return {"edges": [list(e) for e in self.edges], "leaves": list(self.leaves)}

    @cached_property
    def degree(self):
        deg = {v: 0 for v in self.names}
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    @cached_property
    def incident(self):
        """Edge indices at each vertex, in edge order."""
        inc = {v: [] for v in self.names}
        for idx, (a, b) in enumerate(self.edges):
            inc[a].append(idx)
            inc[b].append(idx)
        return {v: tuple(x) for v, x in inc.items()}

    @property
    def leaves(self):
        return tuple(v for v in self.names if self.degree[v] == 1)

    @property
    def inner_vertices(self):
        return tuple(v for v in self.names if self.degree[v] > 1)

    @property
    def n_leaves(self):
        return len(self.leaves)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def three_valent(self):
        return all(self.degree[v] == 3 for v in self.inner_vertices)

    def inner_edges(self):
        inner = set(self.inner_vertices)
        return tuple(i for i, (a, b) in enumerate(self.edges) if a in inner and b in inner)


# -- constructors ----------------------------------------------------------------

def caterpillar(n: int) -> PhyloTree:
    """3-valent caterpillar on ``n >= 2`` leaves.

    For four leaves the edges are ``(l1,v1), (l2,v1), (v1,v2), (v2,l3), (v2,l4)``.
    """
    if n < 2:
        raise TreeError("need at least two leaves")
    if n == 2:
        return PhyloTree((("l1", "l2"),))
    edges = [("l1", "v1"), ("l2", "v1")]
    for m in range(1, n - 2):
        edges += [(f"v{m}", f"v{m + 1}"), (f"v{m + 1}", f"l{m + 2}")]
    edges.append((f"v{n - 2}", f"l{n}"))
    if n == 3:
        edges = [("l1", "v1"), ("l2", "v1"), ("v1", "l3")]
    return PhyloTree(tuple(edges))


def random_three_valent(n: int, rng: random.Random | None = None) -> PhyloTree:
    """Random 3-valent tree by repeatedly splitting a random edge with a new leaf."""
    rng = rng or random.Random(0)
    if n < 3:
        return caterpillar(n)
    edges = [("l1", "v1"), ("l2", "v1"), ("l3", "v1")]
    for m in range(4, n + 1):
        idx = rng.randrange(len(edges))
        a, b = edges.pop(idx)
        w = f"v{m - 2}"
        edges.insert(idx, (a, w))
        edges.append((w, b))
        edges.append((w, f"l{m}"))
    order = list(range(len(edges)))
    rng.shuffle(order)
    return PhyloTree(tuple(edges[i] for i in order))


def claw(k: int) -> PhyloTree:
    """Star tree with ``k`` leaves."""
    return PhyloTree(tuple((f"l{i + 1}", "c") for i in range(k)))


# -- state space -----------------------------------------------------------------

def valid_labelings(T: PhyloTree) -> tuple:
    """All parity-even labelings in lexicographic order."""
    return _labelings(T)


@lru_cache(maxsize=256)
def _labelings(T: PhyloTree) -> tuple:
    if T.n_leaves > MAX_LEAVES:
        raise TreeError(f"trees with more than {MAX_LEAVES} leaves are not supported")
    m = T.n_edges
    # vertices whose constraint is complete once edge idx is assigned
    closing = [[] for _ in range(m)]
    for v in T.inner_vertices:
        closing[max(T.incident[v])].append(T.incident[v])
    out = []
    bits = [0] * m

    def rec(idx):
        if idx == m:
            out.append(tuple(bits))
            return
        for b in (0, 1):
            bits[idx] = b
            if all(sum(bits[e] for e in inc) % 2 == 0 for inc in closing[idx]):
                rec(idx + 1)
        bits[idx] = 0

    rec(0)
    return tuple(out)


def polytope(T: PhyloTree) -> LatticePolytope:
    return LatticePolytope(tuple(valid_labelings(T)))


def subtree(T: PhyloTree, edge_indices) -> PhyloTree:
    idx = sorted(edge_indices)
    return PhyloTree(tuple(T.edges[i] for i in idx))


@dataclass(frozen=True)
class TripodDecomposition:
    tripods: tuple        # each a sorted triple of edge indices
    inner_edges: tuple
    centers: tuple


def tripod_decomposition(T: PhyloTree) -> TripodDecomposition:
    if not T.three_valent or T.n_leaves < 3:
        raise TreeError("tripod decomposition needs a 3-valent tree with at least 3 leaves")
    centers = T.inner_vertices
    return TripodDecomposition(tuple(T.incident[v] for v in centers), T.inner_edges(), centers)


def as_label_vector(T: PhyloTree, u) -> tuple:
    """Counts in lexicographic labeling order from a mapping or a sequence."""
    labs = valid_labelings(T)
    if isinstance(u, Mapping):
        keyed = {}
        valid = set(labs)
        for k, v in u.items():
            key = parse_label(k) if isinstance(k, str) else tuple(k)
            if key not in valid:
                raise ValueError(f"{label_string(key)} is not a valid labeling")
            keyed[key] = v
        missing = [label_string(l) for l in labs if l not in keyed]
        if missing:
            raise ValueError(f"missing counts for {missing}")
        return tuple(keyed[l] for l in labs)
    u = tuple(u)
    if len(u) != len(labs):
        raise ValueError(f"expected {len(labs)} counts, got {len(u)}")
    return u


def marginal(T: PhyloTree, u, edge_indices) -> dict:
    """Sums of ``u`` over labelings with each restriction to ``edge_indices``."""
    labs = valid_labelings(T)
    u = as_label_vector(T, u)
    idx = tuple(edge_indices)
    acc = {}
    for l, x in zip(labs, u):
        key = tuple(l[e] for e in idx)
        acc[key] = acc.get(key, 0) + x
    return dict(sorted(acc.items()))


# -- MLE ---------------------------------------------------------------------------

def _normalized(margin, total):
    return {k: Fraction(v) / total for k, v in margin.items()}


def phylo_mle(T: PhyloTree, u) -> ProbVector:
    """Exact MLE from normalized tripod margins over normalized inner-edge margins."""
    if not T.three_valent:
        raise TreeError("a rational MLE is only available for 3-valent trees")
    u = as_label_vector(T, u)
    total = sum(u)
    if total <= 0:
        raise ValueError("data must have positive total")
    labs = valid_labelings(T)
    if T.n_leaves < 3:
        return ProbVector.exact(Fraction(x, total) for x in u)
    dec = tripod_decomposition(T)
    tri = [_normalized(marginal(T, u, t), total) for t in dec.tripods]
    edg = [_normalized(marginal(T, u, (e,)), total) for e in dec.inner_edges]
    out = []
    for l in labs:
        num = Fraction(1)
        for t, m in zip(dec.tripods, tri):
            num *= m[tuple(l[e] for e in t)]
        den = Fraction(1)
        for e, m in zip(dec.inner_edges, edg):
            den *= m[(l[e],)]
        if den == 0:
            raise BoundaryDataError("an inner-edge margin is zero")
        out.append(num / den)
    return ProbVector.exact(out)


def mle_by_label(T: PhyloTree, p: ProbVector) -> dict:
    return {label_string(l): v for l, v in zip(valid_labelings(T), p.values)}


# -- toric fiber product path --------------------------------------------------------

@dataclass(frozen=True)
class TreeSplit:
    """``T`` as the fiber product of two subtrees glued along ``edge``."""

    edge: int
    left: tuple           # edge indices of the first subtree, including ``edge``
    right: tuple
    config: _tfp.GradedConfig
    blocks_B: tuple       # blocks_B[i][j] = labeling of the left subtree
    blocks_C: tuple


def _component(T, start, banned_edge):
    """Edges reachable from vertex ``start`` without crossing ``banned_edge``."""
    seen_v = {start}
    out = set()
    stack = [start]
    while stack:
        v = stack.pop()
        for idx in T.incident[v]:
            if idx == banned_edge or idx in out:
                continue
            out.add(idx)
            a, b = T.edges[idx]
            w = b if a == v else a
            if w not in seen_v:
                seen_v.add(w)
                stack.append(w)
    return out


def split_tree(T: PhyloTree, edge: int | None = None) -> TreeSplit:
    """Split at an inner edge (default: the first one in edge order)."""
    inner = T.inner_edges()
    if not inner:
        raise TreeError("tree has no inner edge")
    if edge is None:
        edge = inner[0]
    if edge not in inner:
        raise TreeError(f"edge {edge} is not an inner edge")
    a, b = T.edges[edge]
    left = tuple(sorted(_component(T, a, edge) | {edge}))
    right = tuple(sorted(_component(T, b, edge) | {edge}))
    TL, TR = subtree(T, left), subtree(T, right)
    pos_l, pos_r = left.index(edge), right.index(edge)
    labs_l, labs_r = valid_labelings(TL), valid_labelings(TR)
    blocks_B = tuple(tuple(l for l in labs_l if l[pos_l] == i) for i in (0, 1))
    blocks_C = tuple(tuple(l for l in labs_r if l[pos_r] == i) for i in (0, 1))

    def proj(n, pos):
        # homogenized vector (bits, 1) -> (bit_e, 1 - bit_e)
        row0 = [0] * (n + 1)
        row0[pos] = 1
        row1 = [0] * (n + 1)
        row1[pos] = -1
        row1[n] = 1
        return (tuple(row0), tuple(row1))

    cfg = _tfp.GradedConfig(
        gradingA=((0, 1), (1, 0)),
        B=tuple(tuple(l + (1,) for l in blk) for blk in blocks_B),
        C=tuple(tuple(l + (1,) for l in blk) for blk in blocks_C),
        pi1=proj(len(left), pos_l),
        pi2=proj(len(right), pos_r),
    )
    return TreeSplit(edge, left, right, cfg, blocks_B, blocks_C)


def _glue(T, split, lb, lc):
    bits = [None] * T.n_edges
    for e, x in zip(split.left, lb):
        bits[e] = x
    for e, x in zip(split.right, lc):
        bits[e] = x
    return tuple(bits)


def phylo_mle_tfp(T: PhyloTree, u) -> ProbVector:
    """Exact MLE by recursive fiber-product composition of tripod estimates."""
    if not T.three_valent:
        raise TreeError("a rational MLE is only available for 3-valent trees")
    u = as_label_vector(T, u)
    labs = valid_labelings(T)
    if T.n_leaves <= 3:
        total = sum(u)
        return ProbVector.exact(Fraction(x, total) for x in u)
    split = split_tree(T)
    cfg = split.config
    counts = dict(zip(labs, u))
    uvec = _tfp.TfpVector.from_function(
        cfg, lambda i, j, k: counts[_glue(T, split, split.blocks_B[i][j], split.blocks_C[i][k])])
    TL, TR = subtree(T, split.left), subtree(T, split.right)
    flat_B = [l for blk in split.blocks_B for l in blk]
    flat_C = [l for blk in split.blocks_C for l in blk]

    def solver(sub, flat):
        def run(margin):
            est = phylo_mle_tfp(sub, dict(zip(flat, margin)))
            by = dict(zip(valid_labelings(sub), est.values))
            return tuple(by[l] for l in flat)
        return run

    pvec, _ = _tfp.tfp_mle(cfg, uvec, solver(TL, flat_B), solver(TR, flat_C))
    by_label = {}
    for i, j, k in cfg.indices():
        by_label[_glue(T, split, split.blocks_B[i][j], split.blocks_C[i][k])] = pvec[i, j, k]
    return ProbVector.exact(by_label[l] for l in labs)


def phylo_generators(T: PhyloTree, edge: int | None = None) -> list:
    """Generators of the model's ideal over labeling indices (0-based, lexicographic).

    Built recursively from the fiber-product structure; tripods contribute none.
    """
    if not T.three_valent:
        raise TreeError("generators are built for 3-valent trees")
    labs = valid_labelings(T)
    if T.n_leaves <= 3:
        return []
    split = split_tree(T, edge)
    index = {l: n for n, l in enumerate(labs)}
    TL, TR = subtree(T, split.left), subtree(T, split.right)

    def to_block_keys(sub, blocks):
        pos = {}
        for i, blk in enumerate(blocks):
            for j, l in enumerate(blk):
                pos[l] = (i, j)
        sub_labs = valid_labelings(sub)
        return [g.relabel({n: pos[l] for n, l in enumerate(sub_labs)}) for g in phylo_generators(sub)]

    F = to_block_keys(TL, split.blocks_B)
    G = to_block_keys(TR, split.blocks_C)
    gens = _tfp.generators(F, G, split.config)
    mapping = {(i, j, k): index[_glue(T, split, split.blocks_B[i][j], split.blocks_C[i][k])]
               for i, j, k in split.config.indices()}
    return [g.relabel(mapping) for g in gens]


# -- Horn uniformization -----------------------------------------------------------

@dataclass(frozen=True)
class HornData:
    H: tuple
    lam: tuple
    row_labels: tuple
    column_labels: tuple

    @property
    def shape(self):
        return len(self.H), len(self.H[0]) if self.H else 0

    def as_dict(self):
        return {"H": [list(r) for r in self.H], "lambda": list(self.lam),
                "rows": list(self.row_labels), "columns": list(self.column_labels)}


def _row_label(T, edges, sub):
    chars = ["+"] * T.n_edges
    for e, x in zip(edges, sub):
        chars[e] = str(x)
    return "".join(chars)


def horn_matrix(T: PhyloTree) -> HornData:
    """Rows: tripod labelings (+1), inner-edge labels (-1), then the total (-1)."""
    if not T.three_valent:
        raise TreeError("Horn matrices are built for 3-valent trees")
    if T.n_leaves < 4:
        raise TreeError("for a tripod the MLE is linear; no Horn matrix is needed")
    labs = valid_labelings(T)
    dec = tripod_decomposition(T)
    rows, names = [], []
    for t in dec.tripods:
        for sub in TRIPOD_LABELINGS:
            rows.append(tuple(1 if tuple(l[e] for e in t) == sub else 0 for l in labs))
            names.append(_row_label(T, t, sub))
    for e in dec.inner_edges:
        for bit in (0, 1):
            rows.append(tuple(-1 if l[e] == bit else 0 for l in labs))
            names.append(_row_label(T, (e,), (bit,)))
    rows.append(tuple(-1 for _ in labs))
    names.append("+" * T.n_edges)
    sign = (-1) ** (T.n_leaves - 2)
    return HornData(tuple(rows), tuple(sign for _ in labs), tuple(names),
                    tuple(label_string(l) for l in labs))


def horn_mle(hd: HornData, u) -> ProbVector:
    """``p_j = lambda_j prod_i (sum_k h_ik u_k)^{h_ij}`` evaluated exactly."""
    u = tuple(u)
    if len(u) != len(hd.lam):
        raise ValueError(f"expected {len(hd.lam)} counts, got {len(u)}")
    forms = [sum(h * x for h, x in zip(row, u)) for row in hd.H]
    out = []
    for j, lam in enumerate(hd.lam):
        val = Fraction(lam)
        for row, f in zip(hd.H, forms):
            e = row[j]
            if e == 0:
                continue
            if f == 0 and e < 0:
                raise BoundaryDataError("a linear form with a negative exponent vanishes")
            val *= Fraction(f) ** e
        out.append(val)
    return ProbVector.exact(out)


# -- staged tree -------------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    tripod: tuple          # edge indices
    shared_edge: int | None
    florets: tuple         # one tuple of parameter names per shared-edge label
    labelings: tuple       # tripod labelings matching florets entrywise


@dataclass(frozen=True)
class StagedTree:
    tree: PhyloTree
    stages: tuple
    # name -> (tripod edges, tripod labeling, shared edge or None, shared label or None)
    parameters: tuple
    # per global labeling, the parameter names along its root-to-leaf path
    paths: tuple

    @property
    def labels(self):
        return tuple(name for name, *_ in self.parameters)

    def florets(self):
        return [f for st in self.stages for f in st.florets]

    def florets_equal_or_disjoint(self) -> bool:
        fl = [frozenset(f) for f in self.florets()]
        return all(a == b or not (a & b) for a in fl for b in fl)

    def mu(self):
        """Matrix of path exponents ``mu[s][j]``."""
        names = self.labels
        return tuple(tuple(path.count(s) for path in self.paths) for s in names)

    def theta(self, p) -> dict:
        """Parameter values at the margins of the distribution ``p``."""
        T = self.tree
        p = as_label_vector(T, p)
        out = {}
        for name, edges, sub, e, bit in self.parameters:
            num = marginal(T, p, edges)[sub]
            if e is None:
                out[name] = num
            else:
                den = marginal(T, p, (e,))[(bit,)]
                if den == 0:
                    raise BoundaryDataError(f"edge margin for {name} is zero")
                out[name] = num / den
        return out

    def floret_sums(self, theta: Mapping) -> list:
        return [sum(theta[s] for s in f) for f in self.florets()]

    def evaluate(self, theta: Mapping) -> tuple:
        out = []
        for path in self.paths:
            v = Fraction(1)
            for s in path:
                v *= theta[s]
            out.append(v)
        return tuple(out)


def staged_tree(T: PhyloTree) -> StagedTree:
    """Staged tree with one stage per tripod, rooted at the first tripod."""
    dec = tripod_decomposition(T)
    labs = valid_labelings(T)
    tripods = list(dec.tripods)
    root = tripods[0]
    order = [(root, None)]
    visited = {root}
    queue = deque([root])
    while queue:
        cur = queue.popleft()
        for t in tripods:
            if t in visited:
                continue
            shared = set(cur) & set(t)
            if shared:
                visited.add(t)
                order.append((t, shared.pop()))
                queue.append(t)
    tri_labs = TRIPOD_LABELINGS
    params = []
    stages = []
    count = 0
    for t, e in order:
        if e is None:
            names = []
            for sub in tri_labs:
                count += 1
                names.append(f"theta{count}")
                params.append((f"theta{count}", t, sub, None, None))
            stages.append(Stage(t, None, (tuple(names),), (tri_labs,)))
            continue
        pos = t.index(e)
        florets, sublists = [], []
        for bit in (0, 1):
            names, subs = [], []
            for sub in tri_labs:
                if sub[pos] != bit:
                    continue
                count += 1
                names.append(f"theta{count}")
                subs.append(sub)
                params.append((f"theta{count}", t, sub, e, bit))
            florets.append(tuple(names))
            sublists.append(tuple(subs))
        stages.append(Stage(t, e, tuple(florets), tuple(sublists)))
    lookup = {(t, sub): name for name, t, sub, _, _ in params}
    paths = tuple(tuple(lookup[(t, tuple(l[x] for x in t))] for t, _ in order) for l in labs)
    return StagedTree(T, tuple(stages), tuple(params), paths)
