import logging
from itertools import product
from typing import Dict, List, Optional, Tuple

from config import Bounds, default_bounds
from models.extension import CrossedExtension, XExtMorphism
from models.group import CModule, FinGroup, GroupHom
from models.schemas import ClassificationReport, SimilarityClass, Verdict
from services.catalog import catalog_names, get_group
from services.grp import (
    action_from_automorphisms,
    automorphism_group,
    compose_homs,
    enumerate_homs,
    from_function,
    identity_hom,
    is_central,
    is_equivariant,
    is_injective,
    is_surjective,
    modules_over,
)
from services.xmod import enumerate_morphisms, validate_crossed_extension
from utils.errors import BoundExceeded, InputError
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)

Cocycle = Dict[Tuple[str, str], str]

# order bound for n = 2 middle groups and for the carriers of fiber objects
DEFAULT_MAX_ORDER = 4


def _non_unit_pairs(c: FinGroup) -> List[Tuple[str, str]]:
    others = sorted(x for x in c.elements if x != c.unit)
    return [(a, b) for a in others for b in others]


def _full(c: FinGroup, b: FinGroup, values: Dict[Tuple[str, str], str]) -> Cocycle:
    f = {(x, y): b.unit for x in c.elements for y in c.elements}
    f.update(values)
    return f


def cocycle_name(c: FinGroup, f: Cocycle) -> str:
    """f(v1,v2,...) listing values on non-unit pairs in sorted pair order"""
    return "f(" + ",".join(f[pair] for pair in _non_unit_pairs(c)) + ")"


def is_cocycle(mod: CModule, f: Cocycle) -> bool:
    """c1*f(c2,c3) + f(c1,c2c3) = f(c1,c2) + f(c1c2,c3)"""
    c, b = mod.base, mod.carrier
    return all(
        b.mul(mod(c1, f[(c2, c3)]), f[(c1, c.mul(c2, c3))]) == b.mul(f[(c1, c2)], f[(c.mul(c1, c2), c3)])
        for c1 in c.elements for c2 in c.elements for c3 in c.elements
    )


def normalized_cocycles(mod: CModule, bounds: Optional[Bounds] = None) -> List[Cocycle]:
    """
    Every normalized factor set f: C×C -> B (f(1, c) = f(c, 1) = 0).

    Values are assigned pair by pair; the cocycle identity is checked for
    each triple as soon as its four values are known.

    Raises:
        BoundExceeded: more search nodes than the enumeration cap.
    """
    bounds = bounds or default_bounds()
    c, b = mod.base, mod.carrier
    if not b.is_abelian:
        raise InputError(f"'{b.name}' is not abelian", {"group": b.name})
    pairs = _non_unit_pairs(c)
    index = {pair: i for i, pair in enumerate(pairs)}

    def last_needed(c1: str, c2: str, c3: str) -> int:
        needed = [(c2, c3), (c1, c.mul(c2, c3)), (c1, c2), (c.mul(c1, c2), c3)]
        return max(index.get(pair, -1) for pair in needed)

    checks: Dict[int, List[Tuple[str, str, str]]] = {}
    for c1, c2, c3 in product(c.elements, repeat=3):
        checks.setdefault(last_needed(c1, c2, c3), []).append((c1, c2, c3))

    f = _full(c, b, {})
    found: List[Cocycle] = []
    visited = 0

    def holds(triples) -> bool:
        return all(
            b.mul(mod(c1, f[(c2, c3)]), f[(c1, c.mul(c2, c3))]) == b.mul(f[(c1, c2)], f[(c.mul(c1, c2), c3)])
            for c1, c2, c3 in triples
        )

    def search(i: int) -> None:
        nonlocal visited
        if i == len(pairs):
            found.append(dict(f))
            return
        for v in sorted(b.elements):
            visited += 1
            if visited > bounds.enumeration_cap:
                raise BoundExceeded("bound exceeded: factor set search",
                                    {"c": c.name, "b": b.name, "cap": bounds.enumeration_cap})
            f[pairs[i]] = v
            if holds(checks.get(i, [])):
                search(i + 1)
        f[pairs[i]] = b.unit

    if holds(checks.get(-1, [])):
        search(0)
    logger.debug(f"{len(found)} normalized factor sets for {c.name} acting on {b.name}")
    return found


def coboundary(mod: CModule, h: Dict[str, str]) -> Cocycle:
    """δh(c1, c2) = c1*h(c2) - h(c1c2) + h(c1)"""
    c, b = mod.base, mod.carrier
    return {
        (c1, c2): b.mul(b.mul(mod(c1, h[c2]), b.inv(h[c.mul(c1, c2)])), h[c1])
        for c1 in c.elements for c2 in c.elements
    }


def normalized_coboundaries(mod: CModule, bounds: Optional[Bounds] = None) -> List[Cocycle]:
    bounds = bounds or default_bounds()
    c, b = mod.base, mod.carrier
    others = sorted(x for x in c.elements if x != c.unit)
    if len(b) ** len(others) > bounds.enumeration_cap:
        raise BoundExceeded("bound exceeded: coboundary search",
                            {"c": c.name, "b": b.name, "cap": bounds.enumeration_cap})
    out = []
    for values in product(sorted(b.elements), repeat=len(others)):
        h = dict(zip(others, values))
        h[c.unit] = b.unit
        out.append(coboundary(mod, h))
    return out


def extension_from_cocycle(mod: CModule, f: Cocycle, name: Optional[str] = None) -> CrossedExtension:
    """
    0 -> B -> B×_f C -> C -> 1 with (b1,c1)(b2,c2) = (b1 + c1*b2 + f(c1,c2), c1c2).
    """
    c, b = mod.base, mod.carrier
    name = name or cocycle_name(c, f)
    split = {f"({x},{y})": (x, y) for x in b.elements for y in c.elements}

    def op(u: str, v: str) -> str:
        (b1, c1), (b2, c2) = split[u], split[v]
        return f"({b.mul(b.mul(b1, mod(c1, b2)), f[(c1, c2)])},{c.mul(c1, c2)})"

    middle = from_function(f"{b.name}x_{name}{c.name}", list(split), op, f"({b.unit},{c.unit})")
    j = GroupHom(name=f"j[{name}]", source=b, target=middle, map={x: f"({x},{c.unit})" for x in b.elements})
    p = GroupHom(name=f"p[{name}]", source=middle, target=c, map={u: pair[1] for u, pair in split.items()})
    return CrossedExtension(name=name, c=c, b_module=mod, groups=(middle,), p=p, j=j)


def _report(mod: CModule, n: int, blocks: List[List[str]], relative: bool, bound: Optional[int]) -> ClassificationReport:
    classes = [SimilarityClass(class_id=i + 1, representative=block[0], members=block) for i, block in enumerate(blocks)]
    return ClassificationReport(c=mod.base.name, b=mod.carrier.name, n=n, classes=classes, count=len(classes),
                                relative_to_bound=relative, bound=bound)


def classify_factor_sets(mod: CModule, bounds: Optional[Bounds] = None) -> ClassificationReport:
    """n = 1: factor sets up to coboundaries, one class per similarity class of extensions"""
    cocycles = normalized_cocycles(mod, bounds)
    names = {cocycle_name(mod.base, f): f for f in cocycles}
    uf = UnionFind(names)
    b = mod.carrier
    for delta in normalized_coboundaries(mod, bounds):
        for label, f in names.items():
            shifted = {pair: b.mul(v, delta[pair]) for pair, v in f.items()}
            uf.union(label, cocycle_name(mod.base, shifted))
    report = _report(mod, 1, uf.blocks(), relative=False, bound=None)
    logger.info(f"{report.count} similarity classes of extensions of {mod.base.name} by {b.name}")
    return report


def crossed_two_fold_extensions(mod: CModule, max_order: int = DEFAULT_MAX_ORDER,
                                bounds: Optional[Bounds] = None) -> List[CrossedExtension]:
    """
    Crossed 2-fold extensions 0 -> B -> G2 -> G1 -> C -> 1 with G1, G2 from the
    catalog up to `max_order`, realizing the given C-module structure on B.
    """
    bounds = bounds or default_bounds()
    c, b = mod.base, mod.carrier
    candidates = [get_group(name) for name in catalog_names(max_order)]
    found: List[CrossedExtension] = []
    for g1 in candidates:
        if len(g1) % len(c):
            continue
        ps = [p for p in enumerate_homs(g1, c, bounds) if is_surjective(p)]
        if not ps:
            continue
        for g2 in candidates:
            # |G2| = |B| |ker p|
            if len(g2) != len(b) * len(g1) // len(c):
                continue
            js = [j for j in enumerate_homs(b, g2, bounds)
                  if is_injective(j) and is_central(g2, set(j.map.values()))]
            if not js:
                continue
            aut, maps = automorphism_group(g2, bounds)
            actions = [action_from_automorphisms(g1, g2, rho, maps) for rho in enumerate_homs(g1, aut, bounds)]
            ds = enumerate_homs(g2, g1, bounds)
            for p, j, d, act in product(ps, js, ds, actions):
                image = set(j.map.values())
                if {y for y in g2.elements if d(y) == g1.unit} != image:
                    continue
                if set(d.map.values()) != {a for a in g1.elements if p(a) == c.unit}:
                    continue
                x = CrossedExtension(
                    name=f"{g2.name}->{g1.name}#{len(found) + 1}", c=c, b_module=mod,
                    groups=(g1, g2), p=p, j=j, d=(d,), action=act,
                )
                if validate_crossed_extension(x).ok:
                    found.append(x)
                    if len(found) > bounds.enumeration_cap:
                        raise BoundExceeded("bound exceeded: too many crossed extensions",
                                            {"cap": bounds.enumeration_cap})
    logger.debug(f"{len(found)} crossed 2-fold extensions of {c.name} by {b.name} up to order {max_order}")
    return found


def fiber_objects(c: FinGroup, n: int, max_order: int = DEFAULT_MAX_ORDER,
                  bounds: Optional[Bounds] = None) -> List[CrossedExtension]:
    """
    Crossed n-fold extensions over C with every catalog abelian B' up to
    `max_order` and every C-module structure on it.

    n = 1 gives one extension per normalized factor set, so every extension
    with such a B' is there up to vertical isomorphism. n = 2 takes the
    catalog search of crossed_two_fold_extensions. Nothing is enumerated for
    n >= 3.
    """
    bounds = bounds or default_bounds()
    if n not in (1, 2):
        logger.warning(f"No fiber enumeration for n = {n}; only the given extensions are used")
        return []
    out: List[CrossedExtension] = []
    for name in catalog_names(max_order):
        carrier = get_group(name)
        if not carrier.is_abelian:
            continue
        for mod in modules_over(c, carrier, bounds):
            if n == 1:
                out.extend(extension_from_cocycle(mod, f, name=f"{cocycle_name(c, f)}@{mod.name}")
                           for f in normalized_cocycles(mod, bounds))
            else:
                out.extend(crossed_two_fold_extensions(mod, max_order, bounds))
            if len(out) > bounds.enumeration_cap:
                raise BoundExceeded("bound exceeded: too many fiber objects",
                                    {"c": c.name, "n": n, "cap": bounds.enumeration_cap})
    logger.debug(f"{len(out)} fiber objects over {c.name} for n = {n} up to order {max_order}")
    return out


def verify_opcartesian_xext(m: XExtMorphism, targets: Optional[List[CrossedExtension]] = None,
                            bounds: Optional[Bounds] = None, max_order: int = DEFAULT_MAX_ORDER) -> Verdict:
    """
    Universal property of a vertical morphism m: X -> Y inside the fiber over C.

    For every vertical φ: X -> Z and module map μ: B_Y -> B_Z with μ∘β_m = β_φ,
    exactly one h: Y -> Z with h∘m = φ and β_h = μ must exist. Without
    explicit targets, Z ranges over X, Y and fiber_objects up to `max_order`.
    """
    prop = "opcartesian"
    x, y = m.source, m.target
    if not m.is_vertical:
        raise InputError("morphism is not vertical", {"morphism": m.name})
    one = identity_hom(x.c)
    checked = 0
    try:
        if targets is None:
            targets = [x, y, *fiber_objects(x.c, x.n, max_order, bounds)]
        for z in targets:
            if z.c is not x.c or z.n != x.n:
                continue
            mus = [
                mu for mu in enumerate_homs(y.b, z.b, bounds)
                if is_equivariant(mu, y.b_module.action, z.b_module.action)
            ]
            for phi in enumerate_morphisms(x, z, gamma=one, bounds=bounds):
                for mu in mus:
                    if compose_homs(mu, m.beta).map != phi.beta.map:
                        continue
                    checked += 1
                    hs = [h for h in enumerate_morphisms(y, z, gamma=one, beta=mu, bounds=bounds)
                          if all(compose_homs(hf, mf).map == pf.map for hf, mf, pf in zip(h.f, m.f, phi.f))]
                    if len(hs) != 1:
                        return Verdict(property=prop, holds=False, details={"checked": checked},
                                       witness={"target": z.name, "phi": phi.name, "factorizations": len(hs)})
    except BoundExceeded as exc:
        logger.warning(f"Opcartesian check for {m.name} inconclusive: {exc.message}")
        return Verdict(property=prop, holds=False, inconclusive=True, witness=exc.witness, details={"checked": checked})
    return Verdict(property=prop, holds=True, details={"checked": checked, "targets": len(targets)})


def classify_by_morphisms(extensions: List[CrossedExtension], bounds: Optional[Bounds] = None) -> List[List[str]]:
    """Connected components under vertical morphisms (1, f_1, ..., f_n, 1)"""
    uf = UnionFind(x.name for x in extensions)
    for x in extensions:
        for z in extensions:
            if x is z or uf.same(x.name, z.name):
                continue
            if enumerate_morphisms(x, z, gamma=identity_hom(x.c), beta=identity_hom(x.b), bounds=bounds):
                uf.union(x.name, z.name)
    return uf.blocks()


def similarity_classes(mod: CModule, n: int, bounds: Optional[Bounds] = None,
                       max_order: int = DEFAULT_MAX_ORDER) -> ClassificationReport:
    """
    Similarity classes of crossed n-fold extensions of C by the module B.

    n = 1 is exact. n = 2 searches catalog middle groups up to `max_order`
    and the report is marked relative to that bound.

    Raises:
        InputError: n outside {1, 2}.
        BoundExceeded: an enumeration cap was hit.
    """
    if n == 1:
        return classify_factor_sets(mod, bounds)
    if n != 2:
        raise InputError(f"similarity classes are computed for n = 1 or 2, got {n}", {"n": n})
    extensions = crossed_two_fold_extensions(mod, max_order, bounds)
    report = _report(mod, 2, classify_by_morphisms(extensions, bounds), relative=True, bound=max_order)
    logger.info(f"{report.count} similarity classes (relative to order {max_order}) for "
                f"{mod.base.name} by {mod.carrier.name}")
    return report
