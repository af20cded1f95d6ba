import logging
from collections import deque
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

from config import Bounds, default_bounds
from models.category import (
    CommaResult,
    FinCategory,
    FunctorData,
    IdenteeResult,
    NatTransData,
    ProductCategory,
    comma_arrow_name,
    comma_object_name,
    pair_name,
)
from models.schemas import ValidationReport
from utils.errors import BoundExceeded, InputError
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)


def ensure_within_bounds(c: FinCategory, bounds: Optional[Bounds] = None) -> FinCategory:
    """Raise BoundExceeded when a category is larger than the configured arrow cap"""
    bounds = bounds or default_bounds()
    if len(c.arrows) > bounds.max_arrows:
        raise BoundExceeded(
            f"Category '{c.name}' has {len(c.arrows)} arrows, cap is {bounds.max_arrows}",
            {"category": c.name, "arrows": len(c.arrows), "cap": bounds.max_arrows},
        )
    return c


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_category(c: FinCategory) -> ValidationReport:
    """
    Check the category laws exhaustively.

    Returns:
        ValidationReport whose violations name the offending arrows.
    """
    report = ValidationReport(subject=c.name)
    objects = set(c.objects)

    for name, (s, d) in sorted(c.arrows.items()):
        if s not in objects or d not in objects:
            report.add("dangling arrow", [name], f"endpoints {s}->{d} are not objects")
    for x in c.objects:
        ida = c.identity.get(x)
        if ida is None or c.arrows.get(ida) != (x, x):
            report.add("identity", [x], f"object {x} lacks an identity endpoint-matched arrow")

    for (g, f), gf in sorted(c.table.items()):
        if g not in c.arrows or f not in c.arrows or gf not in c.arrows:
            report.add("unknown arrow in composition", [g, f, gf])
        elif c.arrows[f][1] != c.arrows[g][0]:
            report.add("composition domain mismatch", [g, f], f"dst({f}) != src({g})")
        elif c.arrows[gf] != (c.arrows[f][0], c.arrows[g][1]):
            report.add("composite endpoints", [g, f, gf])
    if not report.ok:
        return report

    for f in c.arrow_names:
        for g in c.arrows_from(c.dst(f)):
            if (g, f) not in c.table:
                report.add("composition missing", [g, f])
    if not report.ok:
        return report

    for f in c.arrow_names:
        x, y = c.arrows[f]
        if c.table[(c.identity[y], f)] != f or c.table[(f, c.identity[x])] != f:
            report.add("unit law", [f])

    for f in c.arrow_names:
        for g in c.arrows_from(c.dst(f)):
            gf = c.table[(g, f)]
            for h in c.arrows_from(c.dst(g)):
                if c.table[(h, gf)] != c.table[(c.table[(h, g)], f)]:
                    report.add("associativity", [h, g, f])

    if report.ok:
        logger.debug(f"Category {c.name} validated: {len(c.objects)} objects, {len(c.arrows)} arrows")
    return report


def validate_functor(f: FunctorData) -> ValidationReport:
    """Check that f preserves endpoints, identities and composition"""
    report = ValidationReport(subject=f.name)
    s, t = f.source, f.target
    for x in s.objects:
        if x not in f.obj_map or not t.has_object(f.obj_map[x]):
            report.add("object map", [x], "undefined or lands outside the target")
    for a in s.arrow_names:
        if a not in f.arr_map or not t.has_arrow(f.arr_map[a]):
            report.add("arrow map", [a], "undefined or lands outside the target")
    if not report.ok:
        return report

    for a in s.arrow_names:
        x, y = s.arrows[a]
        if t.arrows[f.arr_map[a]] != (f.obj_map[x], f.obj_map[y]):
            report.add("endpoints", [a])
    for x in s.objects:
        if f.arr_map[s.identity[x]] != t.identity[f.obj_map[x]]:
            report.add("identity", [x])
    if not report.ok:
        return report

    for (g, h), gh in sorted(s.table.items()):
        if t.table.get((f.arr_map[g], f.arr_map[h])) != f.arr_map[gh]:
            report.add("composition", [g, h], f"F({g}∘{h}) != F({g})∘F({h})")
    return report


def validate_nat_trans(n: NatTransData) -> ValidationReport:
    report = ValidationReport(subject=n.name)
    f, g = n.source_functor, n.target_functor
    c = f.target
    for x in f.source.objects:
        comp = n.components.get(x)
        if comp is None or c.arrows.get(comp) != (f.obj(x), g.obj(x)):
            report.add("component", [x])
    if not report.ok:
        return report
    for a in f.source.arrow_names:
        x, y = f.source.arrows[a]
        if c.compose(g.arr(a), n.components[x]) != c.compose(n.components[y], f.arr(a)):
            report.add("naturality", [a])
    return report


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_category(
    name: str,
    objects: Iterable[str],
    arrows: Dict[str, Tuple[str, str]],
    identity: Dict[str, str],
    table: Dict[Tuple[str, str], str],
) -> FinCategory:
    return FinCategory(
        name=name,
        objects=tuple(sorted(objects)),
        arrows=dict(arrows),
        identity=dict(identity),
        table=dict(table),
    )


def terminal_category(name: str = "1") -> FinCategory:
    return build_category(name, ["*"], {"1_*": ("*", "*")}, {"*": "1_*"}, {("1_*", "1_*"): "1_*"})


def discrete_category(name: str, objects: Iterable[str]) -> FinCategory:
    objects = sorted(objects)
    arrows = {f"1_{x}": (x, x) for x in objects}
    identity = {x: f"1_{x}" for x in objects}
    table = {(f"1_{x}", f"1_{x}"): f"1_{x}" for x in objects}
    return build_category(name, objects, arrows, identity, table)


def preorder_category(name: str, objects: Iterable[str], generators: Dict[str, Tuple[str, str]]) -> FinCategory:
    """
    Thin category generated by named arrows.

    Composites are named by the generators along a shortest path, outermost
    first ("g.f" is g after f); identities are "1_x".
    """
    objects = sorted(objects)
    adjacency: Dict[str, List[Tuple[str, str]]] = {x: [] for x in objects}
    seen_pairs = {}
    for g, (s, d) in sorted(generators.items()):
        if s not in adjacency or d not in adjacency:
            raise InputError(f"Generator '{g}' has unknown endpoints", {"generator": g})
        if (s, d) in seen_pairs:
            raise InputError(
                f"Generators '{seen_pairs[(s, d)]}' and '{g}' are parallel in a thin category",
                {"generators": [seen_pairs[(s, d)], g]},
            )
        seen_pairs[(s, d)] = g
        adjacency[s].append((g, d))

    arrows: Dict[str, Tuple[str, str]] = {}
    between: Dict[Tuple[str, str], str] = {}
    for x in objects:
        between[(x, x)] = f"1_{x}"
        arrows[f"1_{x}"] = (x, x)
        paths = {x: []}
        queue = deque([x])
        while queue:
            y = queue.popleft()
            for g, z in adjacency[y]:
                if z not in paths:
                    paths[z] = paths[y] + [g]
                    queue.append(z)
        for y, path in paths.items():
            if y == x:
                continue
            arrow = ".".join(reversed(path))
            between[(x, y)] = arrow
            arrows[arrow] = (x, y)

    table = {}
    for (x, y), f in between.items():
        for (y2, z), g in between.items():
            if y2 == y:
                table[(g, f)] = between[(x, z)] if (x, z) in between else None
    missing = [k for k, v in table.items() if v is None]
    if missing:
        raise InputError(f"Preorder '{name}' is not transitively closed", {"pairs": [list(k) for k in missing]})
    return build_category(name, objects, arrows, {x: f"1_{x}" for x in objects}, table)


def full_subcategory(c: FinCategory, objects: Iterable[str], name: Optional[str] = None) -> FinCategory:
    keep = set(objects)
    arrows = {a: e for a, e in c.arrows.items() if e[0] in keep and e[1] in keep}
    table = {k: v for k, v in c.table.items() if k[0] in arrows and k[1] in arrows}
    identity = {x: c.identity[x] for x in keep}
    return build_category(name or f"{c.name}|sub", keep, arrows, identity, table)


def wide_subcategory(c: FinCategory, arrows: Iterable[str], name: Optional[str] = None) -> FinCategory:
    keep = set(arrows) | set(c.identity.values())
    table = {}
    for (g, f), gf in c.table.items():
        if g in keep and f in keep:
            if gf not in keep:
                raise InputError(
                    f"Arrow set not closed under composition: {g}∘{f} = {gf}",
                    {"g": g, "f": f, "composite": gf},
                )
            table[(g, f)] = gf
    return build_category(name or f"{c.name}|wide", c.objects, {a: c.arrows[a] for a in keep}, c.identity, table)


def opposite_category(c: FinCategory) -> FinCategory:
    """Same names, reversed arrows; (g∘f)^op = f^op∘g^op"""
    arrows = {a: (d, s) for a, (s, d) in c.arrows.items()}
    table = {(f, g): gf for (g, f), gf in c.table.items()}
    return build_category(f"{c.name}^op", c.objects, arrows, c.identity, table)


def opposite_functor(f: FunctorData, source_op: Optional[FinCategory] = None,
                     target_op: Optional[FinCategory] = None) -> FunctorData:
    return FunctorData(
        name=f"{f.name}^op",
        source=source_op or opposite_category(f.source),
        target=target_op or opposite_category(f.target),
        obj_map=dict(f.obj_map),
        arr_map=dict(f.arr_map),
    )


def identity_functor(c: FinCategory) -> FunctorData:
    return FunctorData(
        name=f"1_{c.name}",
        source=c,
        target=c,
        obj_map={x: x for x in c.objects},
        arr_map={a: a for a in c.arrows},
    )


def constant_functor(source: FinCategory, target: FinCategory, obj: str, name: Optional[str] = None) -> FunctorData:
    ida = target.id(obj)
    return FunctorData(
        name=name or f"const_{obj}",
        source=source,
        target=target,
        obj_map={x: obj for x in source.objects},
        arr_map={a: ida for a in source.arrows},
    )


def to_terminal(c: FinCategory, terminal: Optional[FinCategory] = None) -> FunctorData:
    terminal = terminal or terminal_category()
    return constant_functor(c, terminal, terminal.objects[0], name=f"!_{c.name}")


def compose_functors(g: FunctorData, f: FunctorData, name: Optional[str] = None) -> FunctorData:
    """g∘f"""
    if f.target is not g.source:
        raise InputError(
            f"Functors '{g.name}' and '{f.name}' are not composable",
            {"g": g.name, "f": f.name},
        )
    return FunctorData(
        name=name or f"{g.name}.{f.name}",
        source=f.source,
        target=g.target,
        obj_map={x: g.obj(f.obj(x)) for x in f.source.objects},
        arr_map={a: g.arr(f.arr(a)) for a in f.source.arrows},
    )


def whisker(f: FunctorData, n: NatTransData) -> NatTransData:
    """f·n, the functor applied componentwise"""
    return NatTransData(
        name=f"{f.name}.{n.name}",
        source_functor=compose_functors(f, n.source_functor),
        target_functor=compose_functors(f, n.target_functor),
        components={x: f.arr(a) for x, a in n.components.items()},
    )


# ---------------------------------------------------------------------------
# Products, commas, components, identees
# ---------------------------------------------------------------------------

def product_category(a: FinCategory, b: FinCategory, name: Optional[str] = None,
                     bounds: Optional[Bounds] = None) -> Tuple[ProductCategory, FunctorData, FunctorData]:
    """A×B with projections Pr0, Pr1"""
    name = name or f"{a.name}x{b.name}"
    object_pairs = {pair_name(x, y): (x, y) for x in a.objects for y in b.objects}
    arrow_pairs = {pair_name(f, g): (f, g) for f in a.arrow_names for g in b.arrow_names}
    arrows = {
        n: (pair_name(a.src(f), b.src(g)), pair_name(a.dst(f), b.dst(g)))
        for n, (f, g) in arrow_pairs.items()
    }
    identity = {n: pair_name(a.id(x), b.id(y)) for n, (x, y) in object_pairs.items()}
    table = {}
    for (f2, f1), f21 in a.table.items():
        for (g2, g1), g21 in b.table.items():
            table[(pair_name(f2, g2), pair_name(f1, g1))] = pair_name(f21, g21)
    prod = ProductCategory(
        name=name,
        objects=tuple(sorted(object_pairs)),
        arrows=arrows,
        identity=identity,
        table=table,
        left=a,
        right=b,
        object_pairs=object_pairs,
        arrow_pairs=arrow_pairs,
    )
    ensure_within_bounds(prod, bounds)
    pr0 = FunctorData(
        name=f"Pr0[{name}]",
        source=prod,
        target=a,
        obj_map={n: x for n, (x, _) in object_pairs.items()},
        arr_map={n: f for n, (f, _) in arrow_pairs.items()},
    )
    pr1 = FunctorData(
        name=f"Pr1[{name}]",
        source=prod,
        target=b,
        obj_map={n: y for n, (_, y) in object_pairs.items()},
        arr_map={n: g for n, (_, g) in arrow_pairs.items()},
    )
    logger.debug(f"Product {name}: {len(prod.objects)} objects, {len(prod.arrows)} arrows")
    return prod, pr0, pr1


def product_functor(f: FunctorData, g: FunctorData, source: ProductCategory,
                    target: ProductCategory) -> FunctorData:
    """f×g between given product categories"""
    return FunctorData(
        name=f"{f.name}x{g.name}",
        source=source,
        target=target,
        obj_map={n: target.object_of(f.obj(x), g.obj(y)) for n, (x, y) in source.object_pairs.items()},
        arr_map={n: target.arrow_of(f.arr(a), g.arr(b)) for n, (a, b) in source.arrow_pairs.items()},
    )


def comma_category(
    f: FunctorData,
    g: FunctorData,
    name: Optional[str] = None,
    object_filter: Optional[Callable[[str, str, str], bool]] = None,
    bounds: Optional[Bounds] = None,
) -> CommaResult:
    """
    (f↓g): objects (x, β: f x -> g y, y), arrows commuting squares (ξ, υ).

    `object_filter` restricts to a full subcategory, which is how the comma
    objects of CAT/𝒜 (vertical β only) are obtained.
    """
    if f.target is not g.target:
        raise InputError(f"Comma of '{f.name}' and '{g.name}' needs a shared target", {"f": f.name, "g": g.name})
    t = f.target
    name = name or f"({f.name}|{g.name})"

    triples: Dict[str, Tuple[str, str, str]] = {}
    for x in f.source.objects:
        for y in g.source.objects:
            for beta in t.hom(f.obj(x), g.obj(y)):
                if object_filter is None or object_filter(x, beta, y):
                    triples[comma_object_name(x, beta, y)] = (x, beta, y)

    cap = (bounds or default_bounds()).max_arrows
    arrows: Dict[str, Tuple[str, str]] = {}
    squares: Dict[str, Tuple[str, str]] = {}
    by_src: Dict[str, List[str]] = {o: [] for o in triples}
    for o, (x, beta, y) in triples.items():
        for o2, (x2, beta2, y2) in triples.items():
            for xi in f.source.hom(x, x2):
                for ups in g.source.hom(y, y2):
                    if t.compose(g.arr(ups), beta) == t.compose(beta2, f.arr(xi)):
                        a = comma_arrow_name(xi, ups, o, o2)
                        arrows[a] = (o, o2)
                        squares[a] = (xi, ups)
                        by_src[o].append(a)
        if len(arrows) > cap:
            raise BoundExceeded(
                f"Comma category {name} exceeds {cap} arrows",
                {"category": name, "cap": cap},
            )

    identity = {
        o: comma_arrow_name(f.source.id(x), g.source.id(y), o, o) for o, (x, _, y) in triples.items()
    }
    table = {}
    for a1, (o, o2) in arrows.items():
        xi1, ups1 = squares[a1]
        for a2 in by_src[o2]:
            xi2, ups2 = squares[a2]
            o3 = arrows[a2][1]
            table[(a2, a1)] = comma_arrow_name(
                f.source.compose(xi2, xi1), g.source.compose(ups2, ups1), o, o3
            )
    comma = build_category(name, triples, arrows, identity, table)
    p0 = FunctorData(
        name=f"p0[{name}]",
        source=comma,
        target=f.source,
        obj_map={o: x for o, (x, _, _) in triples.items()},
        arr_map={a: xi for a, (xi, _) in squares.items()},
    )
    p1 = FunctorData(
        name=f"p1[{name}]",
        source=comma,
        target=g.source,
        obj_map={o: y for o, (_, _, y) in triples.items()},
        arr_map={a: ups for a, (_, ups) in squares.items()},
    )
    lam = NatTransData(
        name=f"lambda[{name}]",
        source_functor=compose_functors(f, p0),
        target_functor=compose_functors(g, p1),
        components={o: beta for o, (_, beta, _) in triples.items()},
    )
    logger.debug(f"Comma {name}: {len(triples)} objects, {len(arrows)} arrows")
    return CommaResult(comma=comma, p0=p0, p1=p1, lam=lam, triples=triples, squares=squares)


def connected_components(c: FinCategory) -> List[List[str]]:
    """Zig-zag components; members sorted, blocks ordered by least member"""
    uf = UnionFind(c.objects)
    for a in c.arrow_names:
        s, d = c.arrows[a]
        uf.union(s, d)
    return uf.blocks()


def identee(f: FunctorData, bounds: Optional[Bounds] = None) -> IdenteeResult:
    """
    The category of f-vertical arrows with its domain/codomain functors and κ.

    Objects are the triples (x, ω, y) with f(ω) an identity; κ at such an
    object is ω itself, so f·κ is an identity 2-cell.
    """
    x_cat = f.source
    ident = identity_functor(x_cat)
    vertical = lambda x, omega, y: f.target.is_identity(f.arr(omega))  # noqa: E731
    comma = comma_category(ident, ident, name=f"I({f.name})", object_filter=vertical, bounds=bounds)
    d = FunctorData(name=f"d[{f.name}]", source=comma.comma, target=x_cat,
                    obj_map=comma.p0.obj_map, arr_map=comma.p0.arr_map)
    c = FunctorData(name=f"c[{f.name}]", source=comma.comma, target=x_cat,
                    obj_map=comma.p1.obj_map, arr_map=comma.p1.arr_map)
    kappa = NatTransData(
        name=f"kappa[{f.name}]",
        source_functor=d,
        target_functor=c,
        components={o: omega for o, (_, omega, _) in comma.triples.items()},
    )
    return IdenteeResult(category=comma.comma, d=d, c=c, kappa=kappa)


def check_coidentifies(j: FunctorData, kappa: NatTransData) -> bool:
    """True iff every component of j·κ is an identity arrow"""
    if kappa.source_functor.target is not j.source:
        raise InputError(f"2-cell '{kappa.name}' does not land in the source of '{j.name}'",
                         {"functor": j.name, "kappa": kappa.name})
    return all(j.target.is_identity(j.arr(a)) for a in kappa.components.values())


def reflects_identities(g: FunctorData, kappa: NatTransData) -> bool:
    """
    For a 2-cell κ with g·κ = id, report whether κ is itself an identity.

    Holds whenever g is a discrete (op)fibration.
    """
    if not check_coidentifies(g, kappa):
        raise InputError(f"'{g.name}' does not send '{kappa.name}' to an identity", {"kappa": kappa.name})
    c = kappa.source_functor.target
    return all(c.is_identity(a) for a in kappa.components.values())


# ---------------------------------------------------------------------------
# Isomorphisms and functor search
# ---------------------------------------------------------------------------

def inverse(c: FinCategory, a: str) -> Optional[str]:
    x, y = c.src(a), c.dst(a)
    for b in c.hom(y, x):
        if c.compose(b, a) == c.id(x) and c.compose(a, b) == c.id(y):
            return b
    return None


def is_isomorphism(c: FinCategory, a: str) -> bool:
    return inverse(c, a) is not None


def is_isomorphism_functor(f: FunctorData) -> bool:
    """Bijective on objects and arrows"""
    return (
        len(set(f.obj_map.values())) == len(f.source.objects) == len(f.target.objects)
        and len(set(f.arr_map.values())) == len(f.source.arrows) == len(f.target.arrows)
    )


def enumerate_functors(
    source: FinCategory,
    target: FinCategory,
    *,
    obj_candidates: Optional[Callable[[str], Iterable[str]]] = None,
    arr_filter: Optional[Callable[[str, str], bool]] = None,
    fixed_obj: Optional[Dict[str, str]] = None,
    fixed_arr: Optional[Dict[str, str]] = None,
    cap: Optional[int] = None,
    name: str = "F",
) -> Iterator[FunctorData]:
    """
    All functors source -> target meeting the constraints, in deterministic order.

    Objects are assigned first, then non-identity arrows in name order; each
    composition triple is checked as soon as its last arrow is assigned.

    Raises:
        BoundExceeded: more than `cap` search nodes were visited.
    """
    cap = cap or default_bounds().enumeration_cap
    fixed_obj = fixed_obj or {}
    fixed_arr = fixed_arr or {}
    objects = list(source.objects)
    arrows = source.non_identity_arrows
    position = {a: i for i, a in enumerate(arrows)}

    checks: Dict[int, List[Tuple[str, str, str]]] = {i: [] for i in range(len(arrows))}
    for (g, f), gf in source.table.items():
        last = max(position.get(g, -1), position.get(f, -1), position.get(gf, -1))
        if last >= 0:
            checks[last].append((g, f, gf))

    visited = 0
    produced = 0

    def tick():
        nonlocal visited
        visited += 1
        if visited > cap:
            raise BoundExceeded(
                f"Functor enumeration {source.name} -> {target.name} exceeded {cap} nodes",
                {"source": source.name, "target": target.name, "cap": cap},
            )

    def image(a, om, am):
        if a in am:
            return am[a]
        return target.id(om[source.src(a)])

    def arrows_from(i, om, am) -> Iterator[Dict[str, str]]:
        if i == len(arrows):
            yield dict(am)
            return
        a = arrows[i]
        s, d = source.arrows[a]
        if a in fixed_arr:
            candidates = [fixed_arr[a]] if target.arrows.get(fixed_arr[a]) == (om[s], om[d]) else []
        else:
            candidates = target.hom(om[s], om[d])
        for cand in candidates:
            tick()
            if arr_filter is not None and not arr_filter(a, cand):
                continue
            am[a] = cand
            if all(target.table.get((image(g, om, am), image(f, om, am))) == image(gf, om, am)
                   for g, f, gf in checks[i]):
                yield from arrows_from(i + 1, om, am)
            del am[a]

    def objects_from(i, om) -> Iterator[Tuple[Dict[str, str], Dict[str, str]]]:
        if i == len(objects):
            for am in arrows_from(0, om, {}):
                yield dict(om), am
            return
        x = objects[i]
        if x in fixed_obj:
            candidates = [fixed_obj[x]]
        elif obj_candidates is not None:
            candidates = sorted(obj_candidates(x))
        else:
            candidates = target.objects
        for cand in candidates:
            tick()
            om[x] = cand
            yield from objects_from(i + 1, om)
            del om[x]

    for om, am in objects_from(0, {}):
        produced += 1
        arr_map = {a: image(a, om, am) for a in source.arrows}
        yield FunctorData(name=f"{name}#{produced}", source=source, target=target, obj_map=om, arr_map=arr_map)
