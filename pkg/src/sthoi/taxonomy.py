"""Object-class clustering and class-tree construction over a hypernym oracle.

The oracle abstracts the lexical database. :class:`MockOntology` implements it
from a ``child<TAB>parent`` edge list so everything runs offline.
"""
from __future__ import annotations

import abc
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class OracleError(KeyError):
    """The oracle knows nothing about a word."""


class HypernymOracle(abc.ABC):
    @abc.abstractmethod
    def has_path(self, a: str, b: str) -> bool: ...

    @abc.abstractmethod
    def path_length(self, a: str, b: str) -> int | None: ...

    @abc.abstractmethod
    def level(self, w: str) -> int: ...

    @abc.abstractmethod
    def closest_common_parent(self, a: str, b: str) -> str | None: ...


class MockOntology(HypernymOracle):
    """Hypernym graph given as ``(child, parent)`` edges.

    Two words have a path when they are connected through is-a links in
    either direction. ``level`` is the hop count to the nearest root.
    """

    def __init__(self, edges: Iterable[tuple[str, str]] = (), words: Iterable[str] = ()):
        self.parents: dict[str, list[str]] = {}
        self.children: dict[str, list[str]] = {}
        for w in words:
            self._add(w)
        for child, parent in edges:
            self._add(child)
            self._add(parent)
            if parent not in self.parents[child]:
                self.parents[child].append(parent)
                self.children[parent].append(child)
        self._levels: dict[str, int] = {}
        self._component: dict[str, int] = {}

    def _add(self, w: str):
        if w not in self.parents:
            self.parents[w] = []
            self.children[w] = []

    def _need(self, w: str):
        if w not in self.parents:
            raise OracleError(w)

    @classmethod
    def from_file(cls, path: str | Path) -> "MockOntology":
        edges, words = [], []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                words.append(parts[0])
            elif len(parts) == 2:
                edges.append((parts[0].strip(), parts[1].strip()))
            else:
                raise ValueError(f"{path}:{lineno}: expected 'child<TAB>parent'")
        return cls(edges, words)

    def __contains__(self, w: str) -> bool:
        return w in self.parents

    def ancestors(self, w: str) -> dict[str, int]:
        """Ancestors (including ``w`` itself) with their hop distance."""
        self._need(w)
        dist = {w: 0}
        q = deque([w])
        while q:
            u = q.popleft()
            for p in self.parents[u]:
                if p not in dist:
                    dist[p] = dist[u] + 1
                    q.append(p)
        return dist

    def _neighbours(self, w):
        return self.parents[w] + self.children[w]

    def path_length(self, a: str, b: str) -> int | None:
        self._need(a)
        self._need(b)
        if a == b:
            return 0
        dist = {a: 0}
        q = deque([a])
        while q:
            u = q.popleft()
            for v in self._neighbours(u):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    if v == b:
                        return dist[v]
                    q.append(v)
        return None

    def has_path(self, a: str, b: str) -> bool:
        return self._component_of(a) == self._component_of(b)

    def _component_of(self, w: str) -> int:
        self._need(w)
        if w not in self._component:
            cid = len(set(self._component.values()))
            q = deque([w])
            self._component[w] = cid
            while q:
                u = q.popleft()
                for v in self._neighbours(u):
                    if v not in self._component:
                        self._component[v] = cid
                        q.append(v)
        return self._component[w]

    def level(self, w: str) -> int:
        self._need(w)
        if w not in self._levels:
            anc = self.ancestors(w)
            self._levels[w] = min(d for u, d in anc.items() if not self.parents[u])
        return self._levels[w]

    def closest_common_parent(self, a: str, b: str) -> str | None:
        """Deepest shared ancestor (a word counts as its own ancestor)."""
        da, db = self.ancestors(a), self.ancestors(b)
        common = da.keys() & db.keys()
        if not common:
            return None
        return min(common, key=lambda w: (-self.level(w), da[w] + db[w], w))


def cluster_classes(words: Sequence[str], oracle: HypernymOracle,
                    representative: str = "shallowest") -> list[list[str]]:
    """Group words whose cluster representative is reachable in the oracle.

    Each word joins the first cluster whose representative (its shallowest
    member, or deepest with ``representative="deepest"``) has a path to it,
    and starts a new cluster when none does.
    """
    if not words:
        raise ValueError("no words to cluster")
    if representative not in ("shallowest", "deepest"):
        raise ValueError(f"unknown representative rule {representative!r}")
    sign = 1 if representative == "shallowest" else -1
    clusters: list[list[str]] = []
    for w in words:
        oracle.level(w)  # surface unknown words early
        for c in clusters:
            rep = min(c, key=lambda u: sign * oracle.level(u))
            if oracle.has_path(w, rep):
                c.append(w)
                break
        else:
            clusters.append([w])
    return clusters


@dataclass
class ClassTree:
    root: str
    parent: dict[str, str | None] = field(default_factory=dict)
    children: dict[str, list[str]] = field(default_factory=dict)
    introduced: set[str] = field(default_factory=set)

    def __post_init__(self):
        if self.root not in self.parent:
            self.parent[self.root] = None
            self.children[self.root] = []

    @property
    def nodes(self) -> list[str]:
        return list(self.parent)

    @property
    def words(self) -> set[str]:
        return {w for w in self.parent if w not in self.introduced}

    def __len__(self) -> int:
        return len(self.parent)

    def __contains__(self, w: str) -> bool:
        return w in self.parent

    def add(self, word: str, under: str, introduced: bool = False):
        if word in self.parent:
            raise ValueError(f"{word!r} already in tree")
        self.parent[word] = under
        self.children[word] = []
        self.children[under].append(word)
        if introduced:
            self.introduced.add(word)

    def set_parent(self, word: str, new_parent: str | None):
        old = self.parent[word]
        if old is not None:
            self.children[old].remove(word)
        self.parent[word] = new_parent
        if new_parent is not None:
            self.children[new_parent].append(word)

    def roots(self) -> list[str]:
        return [w for w, p in self.parent.items() if p is None]

    def is_ancestor(self, a: str, b: str) -> bool:
        """True when ``a`` lies on the path from ``b`` up to the root."""
        seen = set()
        while b is not None and b not in seen:
            if b == a:
                return True
            seen.add(b)
            b = self.parent[b]
        return False

    def is_acyclic(self) -> bool:
        for w in self.parent:
            seen = set()
            u = w
            while u is not None:
                if u in seen:
                    return False
                seen.add(u)
                u = self.parent[u]
        return True

    def depth(self, w: str) -> int:
        d = 0
        while self.parent[w] is not None:
            w = self.parent[w]
            d += 1
        return d

    def to_dict(self) -> dict:
        def sub(w):
            return {c: sub(c) for c in self.children[w]}
        return {self.root: sub(self.root)}

    def copy(self) -> "ClassTree":
        t = ClassTree(self.root)
        t.parent = dict(self.parent)
        t.children = {k: list(v) for k, v in self.children.items()}
        t.introduced = set(self.introduced)
        return t

    def render(self) -> str:
        lines = []

        def walk(w, depth):
            mark = "*" if w in self.introduced else ""
            lines.append("  " * depth + w + mark)
            for c in self.children[w]:
                walk(c, depth + 1)
        walk(self.root, 0)
        return "\n".join(lines)


def construct_tree(cluster: Sequence[str], oracle: HypernymOracle) -> ClassTree:
    """Seed with the first word; hang every next word under the closest node."""
    if not cluster:
        raise ValueError("cannot build a tree from an empty cluster")
    tree = ClassTree(cluster[0])
    for w in cluster[1:]:
        if w in tree:
            continue
        best, best_d = None, math.inf
        for node in tree.nodes:
            d = oracle.path_length(w, node)
            d = math.inf if d is None else d
            if d < best_d:
                best, best_d = node, d
        tree.add(w, best if best is not None else tree.root)
    return tree


def _merge_into(base: ClassTree, other: ClassTree) -> ClassTree:
    """Union of two trees; a word present in both becomes one node."""
    out = base.copy()
    order = deque([other.root])
    visit = []
    while order:
        w = order.popleft()
        visit.append(w)
        order.extend(other.children[w])
    for w in visit:
        p = other.parent[w]
        if w not in out:
            out.parent[w] = None
            out.children[w] = []
            if w in other.introduced:
                out.introduced.add(w)
            if p is not None:
                out.set_parent(w, p)
            continue
        if w not in other.introduced:
            out.introduced.discard(w)
        if out.parent[w] is None and p is not None and not out.is_ancestor(w, p):
            out.set_parent(w, p)
    return out


def combine_trees(tx: ClassTree, ty: ClassTree, oracle: HypernymOracle) -> ClassTree:
    """Join two trees under the closest common parent of their roots."""
    if len(tx) == 0 or len(ty) == 0:
        raise ValueError("cannot combine an empty tree")
    clash = (tx.words & ty.words)
    if clash:
        raise ValueError(f"trees share input words: {sorted(clash)}")
    out = _merge_into(tx, ty)
    roots = out.roots()
    while len(roots) > 1:
        rx, ry = roots[0], roots[1]
        r = oracle.closest_common_parent(rx, ry)
        if r is None:
            raise ValueError(f"no common parent for {rx!r} and {ry!r}")
        if r == rx:
            out.set_parent(ry, rx)
        elif r == ry:
            out.set_parent(rx, ry)
        else:
            if r in out:
                out.set_parent(r, None)  # promote: detach and re-root
            else:
                out.parent[r] = None
                out.children[r] = []
                out.introduced.add(r)
            for w in (rx, ry):
                if w != r:
                    out.set_parent(w, r)
        roots = out.roots()
    out.root = roots[0]
    return out


def build_taxonomy(clusters: Sequence[Sequence[str]], oracle: HypernymOracle) -> ClassTree:
    if not clusters:
        raise ValueError("no clusters")
    tree = construct_tree(clusters[0], oracle)
    for c in clusters[1:]:
        tree = combine_trees(tree, construct_tree(c, oracle), oracle)
    return tree


def read_words(path: str | Path) -> list[str]:
    return [w.strip() for w in Path(path).read_text().splitlines() if w.strip()]
