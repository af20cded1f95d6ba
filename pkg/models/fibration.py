from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from models.category import FinCategory, FunctorData
from utils.errors import InputError, PropertyFailure


class Direction(str, Enum):
    CARTESIAN = "cartesian"
    OPCARTESIAN = "opcartesian"

    @property
    def dual(self) -> "Direction":
        return Direction.OPCARTESIAN if self is Direction.CARTESIAN else Direction.CARTESIAN


@dataclass(eq=False)
class Cleavage:
    """
    Chosen (op)cartesian liftings of a functor.

    Keys are (object of the total category, arrow of the base); for the
    cartesian direction the base arrow ends at the image of the object, for
    the opcartesian direction it starts there.
    """
    functor: FunctorData
    lifts: Dict[Tuple[str, str], str]
    direction: Direction

    def lift(self, x: str, phi: str) -> str:
        try:
            return self.lifts[(x, phi)]
        except KeyError:
            raise PropertyFailure(
                f"No chosen {self.direction.value} lifting of '{phi}' at '{x}' for '{self.functor.name}'",
                {"object": x, "arrow": phi, "functor": self.functor.name},
            )

    def lifted_object(self, x: str, phi: str) -> str:
        """α*x for cartesian cleavages, β_*x for opcartesian ones"""
        a = self.lift(x, phi)
        e = self.functor.source
        return e.src(a) if self.direction is Direction.CARTESIAN else e.dst(a)


@dataclass(eq=False)
class TriangleOverA:
    """P: (X, F) -> (M, G) in CAT/A; requires G∘P = F on the nose"""
    p: FunctorData
    f: FunctorData
    g: FunctorData

    def __post_init__(self):
        if self.p.source is not self.f.source or self.p.target is not self.g.source or self.f.target is not self.g.target:
            raise InputError(
                "not a triangle: functor endpoints do not match",
                {"p": self.p.name, "f": self.f.name, "g": self.g.name},
            )
        for x in self.p.source.objects:
            if self.g.obj(self.p.obj(x)) != self.f.obj(x):
                raise InputError("not a triangle", {"object": x})
        for a in self.p.source.arrows:
            if self.g.arr(self.p.arr(a)) != self.f.arr(a):
                raise InputError("not a triangle", {"arrow": a})

    @property
    def x(self) -> FinCategory:
        return self.p.source

    @property
    def m(self) -> FinCategory:
        return self.p.target

    @property
    def a(self) -> FinCategory:
        return self.f.target


@dataclass(eq=False)
class BarConstruction:
    """X̄ with Q, F̄, P̄ and the data used to build it"""
    input: TriangleOverA
    g_cleavage: Cleavage
    fiber_cleavages: Dict[str, Cleavage]
    bar_x: FinCategory
    q: FunctorData
    bar_f: FunctorData
    bar_p: FunctorData
    blocks: Dict[str, List[str]]
    block_of: Dict[str, str]
    membership: Dict[str, Dict[str, Any]] = field(default_factory=dict)


@dataclass(eq=False)
class ArrowFactorization:
    """ξ = cart_part ∘ vertical_part ∘ opcart_part"""
    original: str
    opcart_part: str
    vertical_part: str
    cart_part: str
    f_vertical: str


@dataclass(eq=False)
class ChevalleyReport:
    is_opfibration: bool
    r: FunctorData
    l: Optional[FunctorData]
    unit_identity: bool
    counit_identity: bool
    l_cartesian: Optional[bool] = None
    witness: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        ok = self.is_opfibration and self.unit_identity
        if self.l_cartesian is not None:
            ok = ok and self.l_cartesian
        return ok
