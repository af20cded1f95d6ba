from collections import Counter
from typing import Dict, Hashable, Iterable, List


class UnionFind:
    """
    Disjoint sets with union by rank and path compression.

    Blocks are reported with members in sorted order, blocks ordered by their
    least member, so results are independent of insertion order.

    >>> uf = UnionFind(["a", "b", "c"])
    >>> uf.union("a", "c")
    >>> uf.blocks()
    [['a', 'c'], ['b']]
    """

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        self.rank = Counter()
        for item in items:
            self.find(item)

    def find(self, x):
        if x not in self.parent:
            self.parent[x] = x
            return x
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        # path compression
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> None:
        px, py = self.find(x), self.find(y)
        if px == py:
            return
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1

    def same(self, x, y) -> bool:
        return self.find(x) == self.find(y)

    def blocks(self) -> List[List]:
        groups: Dict[Hashable, List] = {}
        for item in self.parent:
            groups.setdefault(self.find(item), []).append(item)
        return sorted((sorted(members) for members in groups.values()), key=lambda b: b[0])
