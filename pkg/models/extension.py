from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from models.fibration import TriangleOverA
from models.group import CModule, FinGroup, GroupAction, GroupHom


@dataclass(eq=False)
class CrossedModule:
    """∂: G2 -> G1 with an action of G1 on G2"""
    d: GroupHom
    action: GroupAction


@dataclass(eq=False)
class CrossedExtension:
    """
    0 -> B -j-> G_n -> ... -> G_2 -∂-> G_1 -p-> C -> 1.

    `groups` holds G_1..G_n; `d[0]` is ∂: G_2 -> G_1 and `d[i]` maps
    G_{i+2} -> G_{i+1}. `action` is the G_1-action on G_2 (n >= 2) and
    `modules` the C-module structures on G_3..G_n. For n = 1 the datum is an
    extension of C by the module B, j: B -> G_1.
    """
    name: str
    c: FinGroup
    b_module: CModule
    groups: Tuple[FinGroup, ...]
    p: GroupHom
    j: GroupHom
    d: Tuple[GroupHom, ...] = ()
    action: Optional[GroupAction] = None
    modules: Tuple[CModule, ...] = ()

    def __repr__(self) -> str:
        terms = " -> ".join(g.name for g in reversed(self.groups))
        return f"CrossedExtension({self.name!r}: 0 -> {self.b.name} -> {terms} -> {self.c.name} -> 1)"

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def b(self) -> FinGroup:
        return self.b_module.carrier

    def term(self, i: int) -> FinGroup:
        """G_i, 1-based"""
        return self.groups[i - 1]

    def sequence(self) -> List[GroupHom]:
        """j, d_{n-1}, ..., d_2, ∂, p in sequence order"""
        return [self.j, *reversed(self.d), self.p]

    @property
    def crossed_module(self) -> Optional[CrossedModule]:
        if self.n < 2 or self.action is None:
            return None
        return CrossedModule(d=self.d[0], action=self.action)


@dataclass(eq=False)
class ModMorphism:
    """(γ, β): (C, B) -> (C', B') with β(c*b) = γ(c)*β(b)"""
    gamma: GroupHom
    beta: GroupHom


@dataclass(eq=False)
class XExtMorphism:
    """(γ, f_1, ..., f_n, β) between extensions of equal length"""
    name: str
    source: CrossedExtension
    target: CrossedExtension
    gamma: GroupHom
    f: Tuple[GroupHom, ...]
    beta: GroupHom

    @property
    def is_vertical(self) -> bool:
        """γ is an identity"""
        return self.source.c is self.target.c and all(self.gamma(c) == c for c in self.source.c.elements)

    @property
    def is_weak_equivalence(self) -> bool:
        return self.is_vertical and all(self.beta(b) == b for b in self.source.b.elements) \
            and self.source.b is self.target.b


@dataclass(eq=False)
class MaterializedTriangle:
    """Π: XExt -> Mod over Gp as finite categories, with the data behind every name"""
    triangle: TriangleOverA
    extensions: Dict[str, CrossedExtension]
    morphisms: Dict[str, XExtMorphism]
    modules: Dict[str, CModule] = field(default_factory=dict)
    mod_arrows: Dict[str, ModMorphism] = field(default_factory=dict)
    groups: Dict[str, FinGroup] = field(default_factory=dict)
    group_arrows: Dict[str, GroupHom] = field(default_factory=dict)
