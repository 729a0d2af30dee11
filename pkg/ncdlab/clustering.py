"""Dendrograms over NCD matrices and the clustering error

A dendrogram is an unrooted binary tree: leaves are document ids (str),
internal nodes are ints of degree three.  The distance between two
leaves is the number of internal nodes on the path joining them.  The
clustering error of a tree is the sum of these distances over every
pair of documents that belong to the same cluster, minus the smallest
sum any tree could achieve for the same cluster sizes.
"""

import collections
import functools
import itertools
import logging
import math
import random
import re
import statistics
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ParseError, UnsupportedSizeError, ValidationError
from .textops import level_tenths

log = logging.getLogger(__name__)

Node = Union[str, int]

MAX_CLUSTER_SIZE = 12
PATIENCE_PER_LEAF = 2000

_NEWICK_TOKEN = re.compile(r"\s*('(?:[^']|'')*'|[(),:;]|[^\s(),:;'\[\]]+)")
_NEEDS_QUOTES = re.compile(r"[\s(),:;'\[\]]")


def _node_key(node):
    # ints and strs never compare directly
    return (1, node) if isinstance(node, str) else (0, node)


def _copy(adjacency):
    return {node: set(neighbors) for node, neighbors in adjacency.items()}


def _leaf_distance_matrix(adjacency, leaves):
    """Edge counts between every pair of leaves, by one BFS per leaf"""
    index = {leaf: i for i, leaf in enumerate(leaves)}
    out = np.zeros((len(leaves), len(leaves)), dtype=int)
    for leaf in leaves:
        row = out[index[leaf]]
        seen = {leaf: 0}
        queue = collections.deque([leaf])
        while queue:
            node = queue.popleft()
            depth = seen[node] + 1
            for neighbor in adjacency[node]:
                if neighbor not in seen:
                    seen[neighbor] = depth
                    queue.append(neighbor)
                    if neighbor in index:
                        row[index[neighbor]] = depth
    return out


class Dendrogram:
    def __init__(self, edges: Iterable[Tuple[Node, Node]]):
        adjacency = collections.defaultdict(set)
        for a, b in edges:
            if a == b:
                raise ValidationError(f"self loop at {a!r}")
            adjacency[a].add(b)
            adjacency[b].add(a)
        self._adjacency = {node: frozenset(neighbors) for node, neighbors in adjacency.items()}
        self.leaves = tuple(sorted(node for node in self._adjacency if isinstance(node, str)))
        self.internal_nodes = tuple(
            sorted(node for node in self._adjacency if not isinstance(node, str))
        )
        self._distances = None

    def __repr__(self):
        return f"Dendrogram({self.to_newick()!r})"

    def __eq__(self, other):
        if not isinstance(other, Dendrogram):
            return NotImplemented
        return self.leaves == other.leaves and self.splits() == other.splits()

    def __hash__(self):
        return hash((self.leaves, frozenset(self.splits())))

    @property
    def adjacency(self) -> Dict[Node, frozenset]:
        return dict(self._adjacency)

    def neighbors(self, node):
        return sorted(self._adjacency[node], key=_node_key)

    def edges(self) -> List[Tuple[Node, Node]]:
        out = []
        for node in sorted(self._adjacency, key=_node_key):
            for neighbor in self.neighbors(node):
                if _node_key(node) < _node_key(neighbor):
                    out.append((node, neighbor))
        return out

    def validate(self):
        """Checks the tree is connected, acyclic and binary"""
        n = len(self.leaves)
        if n < 3:
            raise ValidationError(f"a dendrogram needs at least 3 leaves, got {n}")
        for leaf in self.leaves:
            if len(self._adjacency[leaf]) != 1:
                raise ValidationError(f"leaf {leaf!r} has degree {len(self._adjacency[leaf])}")
        for node in self.internal_nodes:
            if len(self._adjacency[node]) != 3:
                raise ValidationError(
                    f"internal node {node} has degree {len(self._adjacency[node])}"
                )
        if len(self.internal_nodes) != n - 2:
            raise ValidationError(f"{len(self.internal_nodes)} internal nodes for {n} leaves")
        if len(self.edges()) != len(self._adjacency) - 1:
            raise ValidationError("the graph has a cycle")
        seen = {self.leaves[0]}
        stack = [self.leaves[0]]
        while stack:
            for neighbor in self._adjacency[stack.pop()]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    stack.append(neighbor)
        if len(seen) != len(self._adjacency):
            raise ValidationError("the tree is not connected")
        return self

    def distance_matrix(self) -> np.ndarray:
        """Internal-node counts between leaves, rows in self.leaves order"""
        if self._distances is None:
            self._distances = np.maximum(_leaf_distance_matrix(self._adjacency, self.leaves) - 1, 0)
            np.fill_diagonal(self._distances, 0)
        return self._distances

    def leaf_distance(self, a: str, b: str) -> int:
        for leaf in (a, b):
            if leaf not in self._adjacency or not isinstance(leaf, str):
                raise ValidationError(f"unknown leaf {leaf!r}")
        if a == b:
            raise ValidationError(f"distance from {a!r} to itself is undefined")
        i = self.leaves.index(a)
        j = self.leaves.index(b)
        return int(self.distance_matrix()[i, j])

    def splits(self):
        """The leaf bipartition of every internal edge, each as the side without leaves[0]"""
        out = set()
        everything = frozenset(self.leaves)
        for a, b in self.edges():
            if isinstance(a, str) or isinstance(b, str):
                continue
            side = frozenset(self._side(b, a))
            if self.leaves[0] in side:
                side = everything - side
            out.add(side)
        return out

    def _side(self, start, parent):
        """Leaves reachable from start without crossing back to parent"""
        leaves = []
        stack = [(start, parent)]
        while stack:
            node, came_from = stack.pop()
            if isinstance(node, str):
                leaves.append(node)
            for neighbor in self._adjacency[node]:
                if neighbor != came_from:
                    stack.append((neighbor, node))
        return leaves

    def relabel(self, mapping: Mapping[str, str]) -> "Dendrogram":
        def rename(node):
            return mapping.get(node, node) if isinstance(node, str) else node

        return Dendrogram((rename(a), rename(b)) for a, b in self.edges())

    def to_newick(self) -> str:
        """Unrooted Newick, written from the node next to the first leaf"""
        if not self.leaves:
            return ";"
        first = self.leaves[0]
        (start,) = self._adjacency[first]
        if isinstance(start, str):
            return f"({_quote(first)},{_quote(start)});"

        def write(node, parent):
            if isinstance(node, str):
                return _quote(node)
            children = [n for n in self._adjacency[node] if n != parent]
            children.sort(key=lambda child: min(self._side(child, node)))
            return "(" + ",".join(write(child, node) for child in children) + ")"

        return write(start, None) + ";"

    def to_dot(self) -> str:
        lines = ["graph dendrogram {", "  node [shape=point];"]
        for leaf in self.leaves:
            lines.append(f"  {_dot_id(leaf)} [shape=box, label={_dot_id(leaf)}];")
        for a, b in self.edges():
            lines.append(f"  {_dot_id(a)} -- {_dot_id(b)};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_newick(cls, text: str, path=None) -> "Dendrogram":
        """Parses Newick; branch lengths and internal labels are ignored

        A bifurcating root is suppressed so rooted trees load as their
        unrooted topology.
        """
        tokens = _newick_tokens(text, path)
        pos = 0
        counter = itertools.count()
        edges = []

        def peek():
            return tokens[pos] if pos < len(tokens) else None

        def take():
            nonlocal pos
            if pos >= len(tokens):
                raise ParseError("Newick text ends early", path)
            token = tokens[pos]
            pos += 1
            return token

        def skip_length():
            if peek() == ":":
                take()
                take()

        def subtree():
            if peek() == "(":
                take()
                node = next(counter)
                while True:
                    edges.append((node, subtree()))
                    token = take()
                    if token == ")":
                        break
                    if token != ",":
                        raise ParseError(f"expected ',' or ')', got {token!r}", path)
                if peek() not in (None, ",", ")", ":", ";"):
                    take()
                skip_length()
                return node
            token = take()
            if token in ("(", ")", ",", ":", ";"):
                raise ParseError(f"expected a leaf name, got {token!r}", path)
            skip_length()
            return _unquote(token)

        root = subtree()
        if take() != ";" or pos != len(tokens):
            raise ParseError("Newick text must end with a single ';'", path)

        adjacency = collections.defaultdict(set)
        for a, b in edges:
            adjacency[a].add(b)
            adjacency[b].add(a)
        leaves = [node for node in adjacency if isinstance(node, str)]
        if len(leaves) != sum(1 for a, b in edges if isinstance(b, str)):
            raise ParseError("duplicate leaf names", path)
        if isinstance(root, str):
            raise ParseError("a tree needs at least two leaves", path)
        # suppress degree-2 nodes, the root of a rooted tree in particular
        for node in [n for n in list(adjacency) if not isinstance(n, str)]:
            if len(adjacency[node]) == 2:
                a, b = adjacency.pop(node)
                adjacency[a].discard(node)
                adjacency[b].discard(node)
                adjacency[a].add(b)
                adjacency[b].add(a)
            elif len(adjacency[node]) > 3:
                raise ParseError(f"node with {len(adjacency[node])} neighbors is not binary", path)
        pairs = {
            (a, b) if _node_key(a) < _node_key(b) else (b, a)
            for a, neighbors in adjacency.items()
            for b in neighbors
        }
        return cls(sorted(pairs, key=lambda e: (_node_key(e[0]), _node_key(e[1])))).validate()


def _newick_tokens(text, path):
    text = text.strip()
    tokens = []
    pos = 0
    while pos < len(text):
        m = _NEWICK_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected {text[pos]!r} at offset {pos} of Newick text", path)
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _quote(label):
    if _NEEDS_QUOTES.search(label) or not label:
        return "'" + label.replace("'", "''") + "'"
    return label


def _unquote(token):
    if token.startswith("'"):
        return token[1:-1].replace("''", "'")
    return token


def _dot_id(node):
    if isinstance(node, str):
        return '"' + node.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return f"n{node}"


def same_topology(a: Dendrogram, b: Dendrogram) -> bool:
    return a.leaves == b.leaves and a.splits() == b.splits()


def _checked_distances(matrix):
    values = np.asarray(matrix.values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValidationError("matrix holds NaN or infinite values")
    if np.any(values < 0) or np.any(values >= 1.5):
        raise ValidationError("matrix values must lie in [0, 1.5)")
    symmetric = (values + values.T) / 2
    np.fill_diagonal(symmetric, 0.0)
    return symmetric


def neighbor_joining(matrix) -> Dendrogram:
    """Saitou-Nei joining on the symmetrized matrix

    Ties in the Q criterion go to the first pair in row-major order, so
    the result only depends on the matrix.
    """
    d = _checked_distances(matrix)
    nodes: List[Node] = list(matrix.labels)
    if len(nodes) < 3:
        raise ValidationError(f"neighbor joining needs at least 3 documents, got {len(nodes)}")
    counter = itertools.count()
    edges = []
    while len(nodes) > 3:
        m = len(nodes)
        r = d.sum(axis=0)
        q = (m - 2) * d - r[:, None] - r[None, :]
        np.fill_diagonal(q, np.inf)
        i, j = np.unravel_index(int(np.argmin(q)), q.shape)
        i, j = min(i, j), max(i, j)
        joined = next(counter)
        edges.append((joined, nodes[i]))
        edges.append((joined, nodes[j]))
        merged = 0.5 * (d[i] + d[j] - d[i, j])
        d[i, :] = merged
        d[:, i] = merged
        d[i, i] = 0.0
        d = np.delete(np.delete(d, j, axis=0), j, axis=1)
        nodes[i] = joined
        del nodes[j]
    center = next(counter)
    edges.extend((center, node) for node in nodes)
    return Dendrogram(edges).validate()


class _QuartetScorer:
    """Normalized quartet benefit of a tree against a distance matrix

    For every four leaves the tree embeds exactly one of the three
    pairings; the score is (M - C) / (M - m) where C is the summed cost
    of the embedded pairings and m, M the best and worst possible sums.
    """

    def __init__(self, d):
        n = len(d)
        self.quartets = np.array(list(itertools.combinations(range(n), 4)), dtype=int)
        a, b, c, e = self.quartets.T
        self.costs = np.stack([d[a, b] + d[c, e], d[a, c] + d[b, e], d[a, e] + d[b, c]], axis=1)
        self.best = float(self.costs.min(axis=1).sum())
        self.worst = float(self.costs.max(axis=1).sum())

    def __call__(self, tree_distances):
        if self.worst - self.best <= 1e-12:
            return 1.0
        t = tree_distances
        a, b, c, e = self.quartets.T
        sums = np.stack([t[a, b] + t[c, e], t[a, c] + t[b, e], t[a, e] + t[b, c]], axis=1)
        embedded = sums.argmin(axis=1)
        cost = float(self.costs[np.arange(len(embedded)), embedded].sum())
        return (self.worst - cost) / (self.worst - self.best)


def _edge_list(adjacency, start=None, avoid=None):
    """Edges reachable from start (or all of them), in a deterministic order"""
    nodes = sorted(adjacency, key=_node_key) if start is None else [start]
    seen_nodes = set(nodes)
    out = []
    queue = collections.deque(nodes)
    seen_edges = set()
    while queue:
        node = queue.popleft()
        for neighbor in sorted(adjacency[node], key=_node_key):
            if neighbor == avoid:
                continue
            edge = frozenset((node, neighbor))
            if edge not in seen_edges:
                seen_edges.add(edge)
                out.append((node, neighbor))
            if neighbor not in seen_nodes:
                seen_nodes.add(neighbor)
                queue.append(neighbor)
    return out


def _random_tree(leaves, rng):
    order = list(leaves)
    rng.shuffle(order)
    adjacency = {0: set(order[:3])}
    for leaf in order[:3]:
        adjacency[leaf] = {0}
    for number, leaf in enumerate(order[3:], 1):
        u, v = rng.choice(_edge_list(adjacency))
        adjacency[u].remove(v)
        adjacency[v].remove(u)
        adjacency[number] = {u, v, leaf}
        adjacency[u].add(number)
        adjacency[v].add(number)
        adjacency[leaf] = {number}
    return adjacency


def _swap_leaves(adjacency, rng, leaves):
    a, b = rng.sample(leaves, 2)
    (pa,) = adjacency[a]
    (pb,) = adjacency[b]
    if pa == pb:
        return None
    new = _copy(adjacency)
    new[pa].remove(a)
    new[pa].add(b)
    new[pb].remove(b)
    new[pb].add(a)
    new[a] = {pb}
    new[b] = {pa}
    return new


def _move_subtree(adjacency, rng, internals):
    """Prunes the subtree hanging off an internal node and regrafts it elsewhere"""
    p = rng.choice(internals)
    s = rng.choice(sorted(adjacency[p], key=_node_key))
    x, y = sorted(adjacency[p] - {s}, key=_node_key)
    new = _copy(adjacency)
    new[p] = {s}
    new[x].remove(p)
    new[y].remove(p)
    new[x].add(y)
    new[y].add(x)
    candidates = [e for e in _edge_list(new, start=x, avoid=p) if set(e) != {x, y}]
    if not candidates:
        return None
    u, v = rng.choice(candidates)
    new[u].remove(v)
    new[v].remove(u)
    new[u].add(p)
    new[v].add(p)
    new[p].update((u, v))
    return new


@dataclass(frozen=True)
class QuartetResult:
    tree: Dendrogram
    score: float
    history: Tuple[float, ...]
    proposals: int


def quartet_tree(matrix, seed: int = 0, patience: Optional[int] = None) -> QuartetResult:
    """Seeded hill climbing on the normalized quartet benefit

    Proposals alternate at random between swapping two leaves and moving
    a subtree; only strict improvements are kept.  The search stops after
    patience proposals in a row without improvement (2000 per leaf by
    default) or once the score reaches 1.
    """
    d = _checked_distances(matrix)
    leaves = sorted(matrix.labels)
    n = len(leaves)
    if n < 4:
        raise ValidationError(f"the quartet method needs at least 4 documents, got {n}")
    order = [matrix.labels.index(leaf) for leaf in leaves]
    d = d[np.ix_(order, order)]
    if patience is None:
        patience = PATIENCE_PER_LEAF * n
    rng = random.Random(seed)
    scorer = _QuartetScorer(d)

    adjacency = _random_tree(leaves, rng)
    internals = sorted(node for node in adjacency if not isinstance(node, str))
    score = scorer(_leaf_distance_matrix(adjacency, leaves))
    history = [score]
    proposals = 0
    idle = 0
    while idle < patience and score < 1.0:
        proposals += 1
        idle += 1
        if rng.random() < 0.5:
            candidate = _swap_leaves(adjacency, rng, leaves)
        else:
            candidate = _move_subtree(adjacency, rng, internals)
        if candidate is None:
            continue
        candidate_score = scorer(_leaf_distance_matrix(candidate, leaves))
        if candidate_score > score:
            adjacency, score = candidate, candidate_score
            history.append(score)
            idle = 0
    log.debug("quartet search: score %.4f after %d proposals", score, proposals)
    tree = Dendrogram(_edge_list(adjacency)).validate()
    return QuartetResult(tree, score, tuple(history), proposals)


BUILDERS = ("nj", "quartet")


def build_dendrogram(matrix, method: str = "nj", seed: int = 0, patience=None) -> Dendrogram:
    if method == "nj":
        return neighbor_joining(matrix)
    if method == "quartet":
        return quartet_tree(matrix, seed, patience).tree
    raise ValidationError(f"unknown tree builder {method!r}, expected one of {', '.join(BUILDERS)}")


# A cluster placed as a rooted subtree hanging off one outward edge is
# described by S, the sum of its pairwise leaf distances, and D, the sum
# of the edge counts from its root to each leaf.  Joining subtrees L and
# R under a new root gives
#     S = S(L) + S(R) + |R|·D(L) + |L|·D(R) + |L|·|R|
#     D = D(L) + D(R) + |L| + |R|


@functools.lru_cache(maxsize=None)
def _shapes(k):
    """Pareto front {D: (S, shape)} of rooted binary shapes with k leaves"""
    if k == 1:
        return {0: (0, None)}
    front = {}
    for left in range(1, k // 2 + 1):
        right = k - left
        for dl, (sl, shape_l) in _shapes(left).items():
            for dr, (sr, shape_r) in _shapes(right).items():
                s = sl + sr + right * dl + left * dr + left * right
                d = dl + dr + left + right
                if d not in front or s < front[d][0]:
                    front[d] = (s, (left, shape_l, shape_r))
    # drop entries beaten on both S and D
    pruned = {}
    best = math.inf
    for d in sorted(front):
        s, shape = front[d]
        if s < best:
            pruned[d] = (s, shape)
            best = s
    return pruned


def _check_size(k):
    if k < 1:
        raise ValidationError(f"cluster size {k} must be positive")
    if k > MAX_CLUSTER_SIZE:
        raise UnsupportedSizeError(
            f"cluster of {k} documents exceeds the exhaustive search limit of {MAX_CLUSTER_SIZE}"
        )


def _best_rooted(k):
    return min(_shapes(k).values(), key=lambda entry: entry[0])


def _best_unrooted(k):
    """One cluster covering the whole tree: a rooted k-1 shape plus one leaf at its root"""
    if k <= 2:
        return (0, None)
    s, d, shape = min(
        ((s, d, shape) for d, (s, shape) in _shapes(k - 1).items()),
        key=lambda entry: entry[0] + entry[1],
    )
    return (s + d, shape)


def cluster_perfect_sum(size: int, alone: bool = False) -> int:
    """Smallest pairwise sum of one cluster; alone means it spans the whole tree"""
    _check_size(size)
    if alone:
        return _best_unrooted(size)[0]
    return _best_rooted(size)[0]


def perfect_sum(cluster_sizes: Sequence[int]) -> int:
    sizes = list(cluster_sizes)
    for k in sizes:
        _check_size(k)
    if len(sizes) == 1:
        return cluster_perfect_sum(sizes[0], alone=True)
    return sum(cluster_perfect_sum(k) for k in sizes)


def _group(assignment: Mapping[str, str]) -> Dict[str, List[str]]:
    clusters = collections.defaultdict(list)
    for doc_id in sorted(assignment):
        clusters[assignment[doc_id]].append(doc_id)
    return dict(sorted(clusters.items()))


def _build_shape(shape, labels, counter, edges):
    """Materializes a rooted shape over labels and returns its root"""
    if shape is None:
        return labels[0]
    left, shape_l, shape_r = shape
    root = next(counter)
    edges.append((root, _build_shape(shape_l, labels[:left], counter, edges)))
    edges.append((root, _build_shape(shape_r, labels[left:], counter, edges)))
    return root


def perfect_tree(assignment: Mapping[str, str]) -> Dendrogram:
    """A dendrogram achieving perfect_sum: every cluster in its best shape

    Cluster subtrees hang off a caterpillar backbone.
    """
    clusters = list(_group(assignment).values())
    if sum(len(members) for members in clusters) < 3:
        raise ValidationError("a dendrogram needs at least 3 documents")
    for members in clusters:
        _check_size(len(members))
    counter = itertools.count()
    edges = []
    if len(clusters) == 1:
        members = clusters[0]
        _, shape = _best_unrooted(len(members))
        root = _build_shape(shape, members[1:], counter, edges)
        if isinstance(root, str):
            raise ValidationError("a dendrogram needs at least 3 documents")
        edges.append((root, members[0]))
        return Dendrogram(edges).validate()

    roots = [_build_shape(_best_rooted(len(m))[1], m, counter, edges) for m in clusters]
    if len(roots) == 2:
        edges.append((roots[0], roots[1]))
        return Dendrogram(edges).validate()
    backbone = [next(counter) for _ in range(len(roots) - 2)]
    edges.extend(zip(backbone, backbone[1:]))
    edges.append((backbone[0], roots[0]))
    for spine, root in zip(backbone, roots[1:-1]):
        edges.append((spine, root))
    edges.append((backbone[-1], roots[-1]))
    return Dendrogram(edges).validate()


@dataclass(frozen=True)
class ClusteringReport:
    pairs: Tuple[Tuple[str, str, int], ...]
    achieved_sum: int
    perfect_sum: int

    @property
    def error(self) -> int:
        return self.achieved_sum - self.perfect_sum


def clustering_error(tree: Dendrogram, assignment: Mapping[str, str]) -> ClusteringReport:
    missing = [leaf for leaf in tree.leaves if leaf not in assignment]
    if missing:
        raise ValidationError(f"no cluster label for {', '.join(missing)}")
    extra = sorted(set(assignment) - set(tree.leaves))
    if extra:
        raise ValidationError(f"labelled documents missing from the tree: {', '.join(extra)}")
    pairs = []
    clusters = _group(assignment)
    for members in clusters.values():
        for a, b in itertools.combinations(members, 2):
            pairs.append((a, b, tree.leaf_distance(a, b)))
    achieved = sum(distance for _, _, distance in pairs)
    perfect = perfect_sum([len(members) for members in clusters.values()])
    report = ClusteringReport(tuple(pairs), achieved, perfect)
    if report.error < 0:
        log.error("clustering error %d is negative, perfect sum %d is wrong", report.error, perfect)
    return report


def average_ce(errors: Mapping[float, float]) -> float:
    """Mean error over the ten levels 0.1 .. 1.0; level 0.0 is ignored"""
    by_tenth = {}
    for level, error in errors.items():
        by_tenth[level_tenths(level)] = error
    missing = [t / 10 for t in range(1, 11) if t not in by_tenth]
    if missing:
        raise ValidationError(f"average error needs every level, missing {missing}")
    return math.fsum(by_tenth[t] for t in range(1, 11)) / 10


@dataclass(frozen=True)
class ErrorSummary:
    delta: float
    normalized: Optional[float]

    @property
    def undefined(self) -> bool:
        return self.normalized is None


def error_summaries(e0: float, ek: float) -> ErrorSummary:
    """Relative error ek - e0 and normalized error ek / e0 (None when e0 is 0)"""
    return ErrorSummary(ek - e0, ek / e0 if e0 else None)


def repeat_summary(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample standard deviation; a single value has deviation 0"""
    values = list(values)
    if not values:
        raise ValidationError("no repeats to summarize")
    if len(values) == 1:
        return float(values[0]), 0.0
    return statistics.fmean(values), statistics.stdev(values)


def assignment_from_ids(doc_ids: Iterable[str]) -> Dict[str, str]:
    """Cluster label of each id: its top directory, else the part before the first dot"""
    out = {}
    for doc_id in doc_ids:
        if "/" in doc_id:
            out[doc_id] = doc_id.split("/", 1)[0]
        else:
            out[doc_id] = doc_id.split(".", 1)[0]
    return out


def load_assignment(path) -> Dict[str, str]:
    """Reads id<TAB>cluster lines; '#' lines and blank lines are ignored"""
    out = {}
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise ParseError("expected id<TAB>cluster", path, number)
            if fields[0] in out:
                raise ParseError(f"{fields[0]!r} assigned twice", path, number)
            out[fields[0]] = fields[1]
    if not out:
        raise ParseError("no assignments", path)
    return out
