from typing import Dict, List


class UnionFind:
    """Disjoint sets over 0..size-1 with path compression."""

    def __init__(self, size: int):
        self.size = size
        # initially all elements disconnected
        self.parents = list(range(size))
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]
        # compress the path so every visited element points at the root
        while elem != root:
            self.parents[elem], elem = root, self.parents[elem]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # smaller root wins, so groups come out keyed by their first member
        if rb < ra:
            ra, rb = rb, ra
        self.parents[rb] = ra
        self.num_components -= 1

    def groups(self) -> List[List[int]]:
        """Components in order of their smallest element, members ascending."""
        components: Dict[int, List[int]] = {}
        for i in range(self.size):
            components.setdefault(self.find(i), []).append(i)
        return [components[root] for root in sorted(components)]
