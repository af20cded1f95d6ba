from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

from utils.errors import InputError


def comma_object_name(x: str, beta: str, y: str) -> str:
    return f"({x},{beta},{y})"


def comma_arrow_name(xi: str, upsilon: str, src: str, dst: str) -> str:
    return f"[{xi},{upsilon}]:{src}->{dst}"


def pair_name(left: str, right: str) -> str:
    return f"({left},{right})"


@dataclass(eq=False)
class FinCategory:
    """
    Explicit finite category.

    `table` maps a composable pair (g, f) to the name of g∘f. Values are never
    mutated after construction; derived indices are cached.
    """
    name: str
    objects: Tuple[str, ...]
    arrows: Dict[str, Tuple[str, str]]
    identity: Dict[str, str]
    table: Dict[Tuple[str, str], str]

    def __repr__(self) -> str:
        return f"FinCategory({self.name!r}, {len(self.objects)} objects, {len(self.arrows)} arrows)"

    def src(self, a: str) -> str:
        try:
            return self.arrows[a][0]
        except KeyError:
            raise InputError(f"Unknown arrow '{a}' in category '{self.name}'", {"arrow": a})

    def dst(self, a: str) -> str:
        try:
            return self.arrows[a][1]
        except KeyError:
            raise InputError(f"Unknown arrow '{a}' in category '{self.name}'", {"arrow": a})

    def id(self, x: str) -> str:
        try:
            return self.identity[x]
        except KeyError:
            raise InputError(f"Unknown object '{x}' in category '{self.name}'", {"object": x})

    def compose(self, g: str, f: str) -> str:
        """g∘f"""
        try:
            return self.table[(g, f)]
        except KeyError:
            raise InputError(
                f"Arrows '{g}' and '{f}' are not composable in '{self.name}'",
                {"g": g, "f": f},
            )

    def is_identity(self, a: str) -> bool:
        return self.identity.get(self.src(a)) == a

    def has_object(self, x: str) -> bool:
        return x in self._object_set

    def has_arrow(self, a: str) -> bool:
        return a in self.arrows

    @cached_property
    def _object_set(self):
        return frozenset(self.objects)

    @cached_property
    def _hom(self) -> Dict[Tuple[str, str], List[str]]:
        hom: Dict[Tuple[str, str], List[str]] = {}
        for a in sorted(self.arrows):
            hom.setdefault(self.arrows[a], []).append(a)
        return hom

    @cached_property
    def _out(self) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {x: [] for x in self.objects}
        for a in sorted(self.arrows):
            out[self.arrows[a][0]].append(a)
        return out

    @cached_property
    def _in(self) -> Dict[str, List[str]]:
        into: Dict[str, List[str]] = {x: [] for x in self.objects}
        for a in sorted(self.arrows):
            into[self.arrows[a][1]].append(a)
        return into

    def hom(self, x: str, y: str) -> List[str]:
        return self._hom.get((x, y), [])

    def arrows_from(self, x: str) -> List[str]:
        return self._out.get(x, [])

    def arrows_into(self, y: str) -> List[str]:
        return self._in.get(y, [])

    @cached_property
    def arrow_names(self) -> List[str]:
        return sorted(self.arrows)

    @cached_property
    def non_identity_arrows(self) -> List[str]:
        ids = set(self.identity.values())
        return [a for a in self.arrow_names if a not in ids]


@dataclass(eq=False)
class ProductCategory(FinCategory):
    """A×B with its pairing tables"""
    left: Optional[FinCategory] = None
    right: Optional[FinCategory] = None
    object_pairs: Dict[str, Tuple[str, str]] = field(default_factory=dict)
    arrow_pairs: Dict[str, Tuple[str, str]] = field(default_factory=dict)

    @cached_property
    def _object_by_pair(self) -> Dict[Tuple[str, str], str]:
        return {pair: name for name, pair in self.object_pairs.items()}

    @cached_property
    def _arrow_by_pair(self) -> Dict[Tuple[str, str], str]:
        return {pair: name for name, pair in self.arrow_pairs.items()}

    def object_of(self, a: str, b: str) -> str:
        try:
            return self._object_by_pair[(a, b)]
        except KeyError:
            raise InputError(f"No object ({a},{b}) in '{self.name}'", {"pair": [a, b]})

    def arrow_of(self, alpha: str, beta: str) -> str:
        try:
            return self._arrow_by_pair[(alpha, beta)]
        except KeyError:
            raise InputError(f"No arrow ({alpha},{beta}) in '{self.name}'", {"pair": [alpha, beta]})


@dataclass(eq=False)
class FunctorData:
    name: str
    source: FinCategory
    target: FinCategory
    obj_map: Dict[str, str]
    arr_map: Dict[str, str]

    def __repr__(self) -> str:
        return f"FunctorData({self.name!r}: {self.source.name} -> {self.target.name})"

    def obj(self, x: str) -> str:
        try:
            return self.obj_map[x]
        except KeyError:
            raise InputError(f"Functor '{self.name}' is undefined on object '{x}'", {"object": x})

    def arr(self, a: str) -> str:
        try:
            return self.arr_map[a]
        except KeyError:
            raise InputError(f"Functor '{self.name}' is undefined on arrow '{a}'", {"arrow": a})

    def same_as(self, other: "FunctorData") -> bool:
        return (
            self.source is other.source
            and self.target is other.target
            and self.obj_map == other.obj_map
            and self.arr_map == other.arr_map
        )


@dataclass(eq=False)
class NatTransData:
    name: str
    source_functor: FunctorData
    target_functor: FunctorData
    components: Dict[str, str]

    def at(self, x: str) -> str:
        try:
            return self.components[x]
        except KeyError:
            raise InputError(f"Transformation '{self.name}' has no component at '{x}'", {"object": x})


@dataclass(eq=False)
class CommaResult:
    comma: FinCategory
    p0: FunctorData
    p1: FunctorData
    lam: NatTransData
    triples: Dict[str, Tuple[str, str, str]]
    squares: Dict[str, Tuple[str, str]]

    @cached_property
    def _by_triple(self) -> Dict[Tuple[str, str, str], str]:
        return {t: name for name, t in self.triples.items()}

    def object_of(self, x: str, beta: str, y: str) -> str:
        try:
            return self._by_triple[(x, beta, y)]
        except KeyError:
            raise InputError(f"No object ({x},{beta},{y}) in '{self.comma.name}'", {"triple": [x, beta, y]})

    def arrow_of(self, xi: str, upsilon: str, src: str, dst: str) -> str:
        name = comma_arrow_name(xi, upsilon, src, dst)
        if name not in self.comma.arrows:
            raise InputError(f"No arrow {name} in '{self.comma.name}'", {"arrow": name})
        return name


@dataclass(eq=False)
class IdenteeResult:
    category: FinCategory
    d: FunctorData
    c: FunctorData
    kappa: NatTransData
