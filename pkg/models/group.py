from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from utils.errors import InputError


@dataclass(eq=False)
class FinGroup:
    """
    Finite group given by its Cayley table.

    `table` maps (a, b) to the name of a*b. Element order is the order of the
    source document and only matters for serialization.
    """
    name: str
    elements: Tuple[str, ...]
    table: Dict[Tuple[str, str], str]
    unit: str

    def __repr__(self) -> str:
        return f"FinGroup({self.name!r}, order {len(self.elements)})"

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, a: str, b: str) -> str:
        try:
            return self.table[(a, b)]
        except KeyError:
            raise InputError(f"'{a}' or '{b}' is not an element of '{self.name}'", {"elements": [a, b]})

    def has(self, a: str) -> bool:
        return a in self._element_set

    @cached_property
    def _element_set(self):
        return frozenset(self.elements)

    @cached_property
    def _inverses(self) -> Dict[str, str]:
        inv = {}
        for a in self.elements:
            for b in self.elements:
                if self.table.get((a, b)) == self.unit:
                    inv[a] = b
                    break
        return inv

    def inv(self, a: str) -> str:
        try:
            return self._inverses[a]
        except KeyError:
            raise InputError(f"'{a}' has no inverse in '{self.name}'", {"element": a})

    def conj(self, g: str, x: str) -> str:
        """g x g^-1"""
        return self.mul(self.mul(g, x), self.inv(g))

    def power(self, a: str, k: int) -> str:
        result = self.unit
        base = a if k >= 0 else self.inv(a)
        for _ in range(abs(k)):
            result = self.mul(result, base)
        return result

    def element_order(self, a: str) -> int:
        x, k = a, 1
        while x != self.unit:
            x = self.mul(x, a)
            k += 1
        return k

    @cached_property
    def is_abelian(self) -> bool:
        return all(self.table[(a, b)] == self.table[(b, a)] for a in self.elements for b in self.elements)

    @cached_property
    def generators(self) -> List[str]:
        """Greedy generating set in element order"""
        gens: List[str] = []
        span = {self.unit}
        for a in sorted(self.elements):
            if a not in span:
                gens.append(a)
                span = self.closure(gens)
            if len(span) == len(self.elements):
                break
        return gens

    def closure(self, gens) -> set:
        span = {self.unit}
        frontier = [self.unit]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.table[(x, g)]
                if y not in span:
                    span.add(y)
                    frontier.append(y)
        return span


@dataclass(eq=False)
class GroupHom:
    name: str
    source: FinGroup
    target: FinGroup
    map: Dict[str, str]

    def __repr__(self) -> str:
        return f"GroupHom({self.name!r}: {self.source.name} -> {self.target.name})"

    def __call__(self, a: str) -> str:
        try:
            return self.map[a]
        except KeyError:
            raise InputError(f"Homomorphism '{self.name}' is undefined on '{a}'", {"element": a})

    def same_as(self, other: "GroupHom") -> bool:
        return self.map == other.map


@dataclass(eq=False)
class GroupAction:
    """act[(g, x)] = g * x"""
    actor: FinGroup
    carrier: FinGroup
    act: Dict[Tuple[str, str], str]

    def __call__(self, g: str, x: str) -> str:
        try:
            return self.act[(g, x)]
        except KeyError:
            raise InputError(f"Action undefined on ({g}, {x})", {"actor": g, "element": x})

    def is_trivial(self) -> bool:
        return all(x == y for (_, x), y in self.act.items())


@dataclass(eq=False)
class CModule:
    """Abelian group B with a C-action by automorphisms"""
    base: FinGroup
    carrier: FinGroup
    action: GroupAction
    name: Optional[str] = None

    def __call__(self, c: str, b: str) -> str:
        return self.action(c, b)
