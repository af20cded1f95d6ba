import logging
from itertools import product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.named_groups import AlternatingGroup, SymmetricGroup

from config import Bounds, default_bounds
from models.group import CModule, FinGroup, GroupAction, GroupHom
from models.schemas import ValidationReport, Verdict
from utils.errors import BoundExceeded, InputError, PropertyFailure

logger = logging.getLogger(__name__)


def ensure_order(g: FinGroup, bounds: Optional[Bounds] = None) -> FinGroup:
    bounds = bounds or default_bounds()
    if len(g) > bounds.max_group_order:
        raise BoundExceeded(
            f"bound exceeded: group '{g.name}' has order {len(g)}, cap is {bounds.max_group_order}",
            {"group": g.name, "order": len(g), "cap": bounds.max_group_order},
        )
    return g


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_group(g: FinGroup) -> ValidationReport:
    report = ValidationReport(subject=g.name)
    elements = set(g.elements)
    if len(elements) != len(g.elements):
        report.add("duplicate element", sorted(x for x in g.elements if g.elements.count(x) > 1))
    if g.unit not in elements:
        report.add("unit", [g.unit], "unit is not an element")
        return report
    for a in g.elements:
        for b in g.elements:
            ab = g.table.get((a, b))
            if ab not in elements:
                report.add("closure", [a, b, str(ab)])
    if not report.ok:
        return report
    for a in g.elements:
        if g.table[(g.unit, a)] != a or g.table[(a, g.unit)] != a:
            report.add("unit law", [a])
        if not any(g.table[(a, b)] == g.unit and g.table[(b, a)] == g.unit for b in g.elements):
            report.add("inverse", [a], f"{a} has no two-sided inverse")
    for a, b, c in product(g.elements, repeat=3):
        if g.table[(g.table[(a, b)], c)] != g.table[(a, g.table[(b, c)])]:
            report.add("associativity", [a, b, c])
            break
    return report


def validate_hom(h: GroupHom) -> ValidationReport:
    report = ValidationReport(subject=h.name)
    for a in h.source.elements:
        if not h.target.has(h.map.get(a)):
            report.add("map", [a], f"{a} has no image in {h.target.name}")
    if not report.ok:
        return report
    if h(h.source.unit) != h.target.unit:
        report.add("unit", [h.source.unit])
    for a in h.source.elements:
        for b in h.source.elements:
            if h(h.source.mul(a, b)) != h.target.mul(h(a), h(b)):
                report.add("hom law", [a, b])
                return report
    return report


def validate_action(x: GroupAction, name: str = "action") -> ValidationReport:
    report = ValidationReport(subject=name)
    g, m = x.actor, x.carrier
    for a in g.elements:
        for b in m.elements:
            if not m.has(x.act.get((a, b))):
                report.add("action map", [a, b])
    if not report.ok:
        return report
    for b in m.elements:
        if x(g.unit, b) != b:
            report.add("unit acts trivially", [b])
    for a in g.elements:
        images = {x(a, b) for b in m.elements}
        if len(images) != len(m.elements):
            report.add("automorphism", [a], "not bijective")
            continue
        for b1 in m.elements:
            for b2 in m.elements:
                if x(a, m.mul(b1, b2)) != m.mul(x(a, b1), x(a, b2)):
                    report.add("automorphism", [a, b1, b2])
                    break
    for a1 in g.elements:
        for a2 in g.elements:
            for b in m.elements:
                if x(g.mul(a1, a2), b) != x(a1, x(a2, b)):
                    report.add("action law", [a1, a2, b])
                    return report
    return report


def validate_module(mod: CModule) -> ValidationReport:
    report = validate_action(mod.action, name=mod.name or f"{mod.base.name}-module {mod.carrier.name}")
    if not mod.carrier.is_abelian:
        report.add("carrier not abelian", [mod.carrier.name])
    return report


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def build_group(name: str, elements: Sequence[str], table: Dict[Tuple[str, str], str], unit: str) -> FinGroup:
    return FinGroup(name=name, elements=tuple(elements), table=dict(table), unit=unit)


def from_function(name: str, elements: Sequence[str], op: Callable[[str, str], str], unit: str) -> FinGroup:
    return build_group(name, elements, {(a, b): op(a, b) for a in elements for b in elements}, unit)


def trivial_group(name: str = "Z1") -> FinGroup:
    return build_group(name, ["0"], {("0", "0"): "0"}, "0")


def cyclic_group(n: int, name: Optional[str] = None) -> FinGroup:
    if n < 1:
        raise InputError(f"Cyclic group order must be positive, got {n}", {"n": n})
    elements = [str(i) for i in range(n)]
    return from_function(name or f"Z{n}", elements, lambda a, b: str((int(a) + int(b)) % n), "0")


def dihedral_group(k: int, name: Optional[str] = None) -> FinGroup:
    """Order 2k; elements s^a r^b named e, r, r2, ..., s, sr, sr2, ..."""
    if k < 2:
        raise InputError(f"Dihedral group needs k >= 2, got {k}", {"k": k})

    def label(a: int, b: int) -> str:
        rot = "" if b == 0 else ("r" if b == 1 else f"r{b}")
        if a == 0:
            return rot or "e"
        return "s" + rot

    index = {label(a, b): (a, b) for a in range(2) for b in range(k)}

    def op(x: str, y: str) -> str:
        (a, b), (c, d) = index[x], index[y]
        sign = -1 if c else 1
        return label((a + c) % 2, (b * sign + d) % k)

    return from_function(name or f"D{k}", list(index), op, "e")


def quaternion_group(name: str = "Q8") -> FinGroup:
    units = {"1": (1, "1"), "-1": (-1, "1"), "i": (1, "i"), "-i": (-1, "i"),
             "j": (1, "j"), "-j": (-1, "j"), "k": (1, "k"), "-k": (-1, "k")}
    basis = {("1", x): (1, x) for x in "1ijk"}
    basis.update({(x, "1"): (1, x) for x in "ijk"})
    basis.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                  ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                  ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})

    def op(x: str, y: str) -> str:
        (s1, u1), (s2, u2) = units[x], units[y]
        s3, u3 = basis[(u1, u2)]
        sign = s1 * s2 * s3
        return u3 if sign == 1 else ("-1" if u3 == "1" else f"-{u3}")

    return from_function(name, list(units), op, "1")


def _from_sympy(name: str, pgroup: PermutationGroup) -> FinGroup:
    """Cayley table of a sympy permutation group; elements p0, p1, ... in array-form order"""
    perms = sorted(pgroup.elements, key=lambda p: p.array_form)
    label = {tuple(p.array_form): f"p{i}" for i, p in enumerate(perms)}
    # sympy composes left to right: (p*q)(i) = q(p(i))
    table = {(label[tuple(p.array_form)], label[tuple(q.array_form)]): label[tuple((p * q).array_form)]
             for p in perms for q in perms}
    unit = label[tuple(pgroup.identity.array_form)]
    return build_group(name, [label[tuple(p.array_form)] for p in perms], table, unit)


def permutation_group(name: str, generators: Iterable[Sequence[int]]) -> FinGroup:
    """Group generated by permutations given as image tuples"""
    gens = [Permutation(list(g)) for g in generators]
    if not gens:
        raise InputError("permutation_group needs at least one generator", {"group": name})
    return _from_sympy(name, PermutationGroup(gens))


def symmetric_group(degree: int, name: Optional[str] = None) -> FinGroup:
    return _from_sympy(name or f"Sym{degree}", SymmetricGroup(degree))


def alternating_group(degree: int, name: Optional[str] = None) -> FinGroup:
    return _from_sympy(name or f"A{degree}", AlternatingGroup(degree))


def direct_product(g: FinGroup, h: FinGroup, name: Optional[str] = None) -> FinGroup:
    elements = [f"({a},{b})" for a in g.elements for b in h.elements]
    pair = {f"({a},{b})": (a, b) for a in g.elements for b in h.elements}
    table = {}
    for x, (a1, b1) in pair.items():
        for y, (a2, b2) in pair.items():
            table[(x, y)] = f"({g.mul(a1, a2)},{h.mul(b1, b2)})"
    return build_group(name or f"{g.name}x{h.name}", elements, table, f"({g.unit},{h.unit})")


def semidirect_product(n: FinGroup, h: FinGroup, action: GroupAction, name: Optional[str] = None) -> FinGroup:
    """N⋊H with (n1,h1)(n2,h2) = (n1·(h1*n2), h1h2)"""
    if action.actor is not h or action.carrier is not n:
        raise InputError("action does not match the factors", {"n": n.name, "h": h.name})
    elements = [f"({a},{b})" for a in n.elements for b in h.elements]
    pair = {f"({a},{b})": (a, b) for a in n.elements for b in h.elements}
    table = {}
    for x, (n1, h1) in pair.items():
        for y, (n2, h2) in pair.items():
            table[(x, y)] = f"({n.mul(n1, action(h1, n2))},{h.mul(h1, h2)})"
    return build_group(name or f"{n.name}:{h.name}", elements, table, f"({n.unit},{h.unit})")


def pair_elements(g: FinGroup) -> Dict[str, Tuple[str, str]]:
    """Split "(a,b)" element names of a product-shaped group"""
    out = {}
    for x in g.elements:
        depth = 0
        for i, ch in enumerate(x):
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif ch == "," and depth == 1:
                out[x] = (x[1:i], x[i + 1:-1])
                break
    return out


def rename_group(g: FinGroup, mapping: Dict[str, str], name: Optional[str] = None) -> Tuple[FinGroup, GroupHom]:
    """Relabel elements; returns the copy and the isomorphism g -> copy"""
    if sorted(mapping) != sorted(g.elements) or len(set(mapping.values())) != len(g.elements):
        raise InputError("renaming must be a bijection on elements", {"group": g.name})
    table = {(mapping[a], mapping[b]): mapping[ab] for (a, b), ab in g.table.items()}
    copy = build_group(name or g.name, [mapping[a] for a in g.elements], table, mapping[g.unit])
    return copy, GroupHom(name=f"rename[{g.name}]", source=g, target=copy, map=dict(mapping))


# ---------------------------------------------------------------------------
# Homomorphisms
# ---------------------------------------------------------------------------

def identity_hom(g: FinGroup) -> GroupHom:
    return GroupHom(name=f"1_{g.name}", source=g, target=g, map={a: a for a in g.elements})


def zero_hom(g: FinGroup, h: FinGroup) -> GroupHom:
    return GroupHom(name=f"0[{g.name},{h.name}]", source=g, target=h, map={a: h.unit for a in g.elements})


def compose_homs(g: GroupHom, f: GroupHom, name: Optional[str] = None) -> GroupHom:
    """g∘f"""
    if f.target is not g.source:
        raise InputError(f"Homomorphisms '{g.name}' and '{f.name}' are not composable", {"g": g.name, "f": f.name})
    return GroupHom(name=name or f"{g.name}.{f.name}", source=f.source, target=g.target,
                    map={a: g(f(a)) for a in f.source.elements})


def is_injective(h: GroupHom) -> bool:
    return len(set(h.map.values())) == len(h.source)


def is_surjective(h: GroupHom) -> bool:
    return set(h.map.values()) == set(h.target.elements)


def is_isomorphism_hom(h: GroupHom) -> bool:
    return is_injective(h) and is_surjective(h)


def inverse_hom(h: GroupHom) -> GroupHom:
    if not is_isomorphism_hom(h):
        raise InputError(f"'{h.name}' is not invertible", {"hom": h.name})
    return GroupHom(name=f"{h.name}^-1", source=h.target, target=h.source, map={b: a for a, b in h.map.items()})


def enumerate_homs(g: FinGroup, h: FinGroup, bounds: Optional[Bounds] = None,
                   allowed: Optional[Callable[[str, str], bool]] = None) -> List[GroupHom]:
    """
    All homomorphisms g -> h by backtracking over generator images.

    Each partial assignment is extended along the Cayley graph of the
    generators assigned so far; a clash prunes the branch. `allowed(a, b)`
    may forbid sending a to b.

    Raises:
        BoundExceeded: group order or search size exceeds the configured bounds.
    """
    bounds = bounds or default_bounds()
    ensure_order(g, bounds)
    ensure_order(h, bounds)
    gens = g.generators
    visited = 0
    found: List[GroupHom] = []

    def extend(images: Dict[str, str], assigned: List[str]) -> Optional[Dict[str, str]]:
        phi = {g.unit: h.unit}
        frontier = [g.unit]
        while frontier:
            x = frontier.pop()
            for s in assigned:
                y = g.mul(x, s)
                val = h.mul(phi[x], images[s])
                if y in phi:
                    if phi[y] != val:
                        return None
                else:
                    phi[y] = val
                    frontier.append(y)
        if allowed is not None and any(not allowed(a, b) for a, b in phi.items()):
            return None
        return phi

    def search(i: int, images: Dict[str, str]):
        nonlocal visited
        if i == len(gens):
            phi = extend(images, gens)
            if phi is not None and all(
                phi[g.mul(a, b)] == h.mul(phi[a], phi[b]) for a in g.elements for b in g.elements
            ):
                found.append(GroupHom(name=f"{g.name}->{h.name}#{len(found) + 1}", source=g, target=h, map=phi))
            return
        s = gens[i]
        order = g.element_order(s)
        for candidate in h.elements:
            visited += 1
            if visited > bounds.enumeration_cap:
                raise BoundExceeded(
                    f"bound exceeded: homomorphism search {g.name} -> {h.name}",
                    {"source": g.name, "target": h.name, "cap": bounds.enumeration_cap},
                )
            if order % h.element_order(candidate):
                continue
            images[s] = candidate
            if extend(images, gens[: i + 1]) is not None:
                search(i + 1, images)
            del images[s]

    search(0, {})
    logger.debug(f"Found {len(found)} homomorphisms {g.name} -> {h.name}")
    return found


def is_isomorphic(g: FinGroup, h: FinGroup, bounds: Optional[Bounds] = None) -> Optional[GroupHom]:
    """An isomorphism g -> h, or None"""
    if len(g) != len(h) or g.is_abelian != h.is_abelian:
        return None
    for phi in enumerate_homs(g, h, bounds):
        if is_injective(phi):
            return phi
    return None


def automorphism_group(b: FinGroup, bounds: Optional[Bounds] = None) -> Tuple[FinGroup, Dict[str, Dict[str, str]]]:
    """Aut(b) with elements a0, a1, ... (a0 the identity) and their element maps"""
    autos = [phi.map for phi in enumerate_homs(b, b, bounds) if is_injective(phi)]
    key = lambda m: tuple(m[x] for x in b.elements)  # noqa: E731
    autos.sort(key=lambda m: (key(m) != tuple(b.elements), key(m)))
    label = {key(m): f"a{i}" for i, m in enumerate(autos)}
    maps = {f"a{i}": m for i, m in enumerate(autos)}
    table = {}
    for n1, m1 in maps.items():
        for n2, m2 in maps.items():
            table[(n1, n2)] = label[tuple(m1[m2[x]] for x in b.elements)]
    return build_group(f"Aut({b.name})", list(maps), table, "a0"), maps


# ---------------------------------------------------------------------------
# Subgroups, kernels, quotients, pullbacks
# ---------------------------------------------------------------------------

def subgroup(g: FinGroup, elements: Iterable[str], name: Optional[str] = None) -> Tuple[FinGroup, GroupHom]:
    keep = [x for x in g.elements if x in set(elements)]
    keep_set = set(keep)
    if g.unit not in keep_set or any(g.mul(a, b) not in keep_set for a in keep for b in keep):
        raise InputError(f"Elements do not form a subgroup of '{g.name}'", {"elements": sorted(keep_set)})
    sub = build_group(name or f"{g.name}|sub", keep, {(a, b): g.mul(a, b) for a in keep for b in keep}, g.unit)
    return sub, GroupHom(name=f"incl[{sub.name}]", source=sub, target=g, map={a: a for a in keep})


def is_normal(g: FinGroup, elements: Iterable[str]) -> bool:
    keep = set(elements)
    return all(g.conj(x, n) in keep for x in g.elements for n in keep)


def is_central(g: FinGroup, elements: Iterable[str]) -> bool:
    return all(g.mul(x, n) == g.mul(n, x) for x in g.elements for n in elements)


def kernel(h: GroupHom) -> Tuple[FinGroup, GroupHom]:
    return subgroup(h.source, [a for a in h.source.elements if h(a) == h.target.unit], name=f"ker({h.name})")


def quotient_group(g: FinGroup, normal: Iterable[str], name: Optional[str] = None) -> Tuple[FinGroup, GroupHom]:
    """G/N named by name-least coset representatives, with the projection"""
    n = set(normal)
    if not is_normal(g, n):
        raise PropertyFailure("image not normal", {"group": g.name, "subgroup": sorted(n)})
    rep = {}
    for x in g.elements:
        if x not in rep:
            coset = [g.mul(x, k) for k in n]
            least = min(coset)
            for y in coset:
                rep[y] = least
    reps = [x for x in g.elements if rep[x] == x]
    table = {(a, b): rep[g.mul(a, b)] for a in reps for b in reps}
    quot = build_group(name or f"{g.name}/N", reps, table, rep[g.unit])
    return quot, GroupHom(name=f"proj[{quot.name}]", source=g, target=quot, map=rep)


def image_and_cokernel(h: GroupHom, require_quotient: bool = False):
    """
    Image subgroup, normality flag, and the cokernel with its projection when normal.

    Raises:
        PropertyFailure: "image not normal" when `require_quotient` is set.
    """
    image = set(h.map.values())
    im, incl = subgroup(h.target, image, name=f"im({h.name})")
    normal = is_normal(h.target, image)
    if not normal:
        if require_quotient:
            raise PropertyFailure("image not normal", {"hom": h.name})
        return im, False, None, None
    quot, proj = quotient_group(h.target, image, name=f"coker({h.name})")
    return im, True, quot, proj


def pullback_groups(f: GroupHom, g: GroupHom, name: Optional[str] = None) -> Tuple[FinGroup, GroupHom, GroupHom]:
    """{(a, b) : f(a) = g(b)} with its projections"""
    if f.target is not g.target:
        raise InputError("pullback needs a shared target", {"f": f.name, "g": g.name})
    a_grp, b_grp = f.source, g.source
    pairs = {f"({a},{b})": (a, b) for a in a_grp.elements for b in b_grp.elements if f(a) == g(b)}
    table = {}
    for x, (a1, b1) in pairs.items():
        for y, (a2, b2) in pairs.items():
            table[(x, y)] = f"({a_grp.mul(a1, a2)},{b_grp.mul(b1, b2)})"
    pb = build_group(name or f"{a_grp.name}x_{f.target.name}{b_grp.name}", list(pairs), table,
                     f"({a_grp.unit},{b_grp.unit})")
    pr0 = GroupHom(name=f"pr0[{pb.name}]", source=pb, target=a_grp, map={x: p[0] for x, p in pairs.items()})
    pr1 = GroupHom(name=f"pr1[{pb.name}]", source=pb, target=b_grp, map={x: p[1] for x, p in pairs.items()})
    return pb, pr0, pr1


def is_exact_sequence(seq: List[GroupHom], augmented: bool = True) -> Verdict:
    """
    Image = kernel at every interior node; with `augmented`, also the first map
    injective and the last surjective (0 -> ... -> 1).
    """
    prop = "exact sequence"
    for i in range(len(seq) - 1):
        if seq[i].target is not seq[i + 1].source:
            raise InputError("sequence maps are not composable", {"position": i})
    if augmented and seq:
        if not is_injective(seq[0]):
            return Verdict(property=prop, holds=False, witness={"position": 0, "reason": "first map not injective"})
        if not is_surjective(seq[-1]):
            return Verdict(property=prop, holds=False,
                           witness={"position": len(seq), "reason": "last map not surjective"})
    for i in range(len(seq) - 1):
        image = set(seq[i].map.values())
        ker = {a for a in seq[i + 1].source.elements if seq[i + 1](a) == seq[i + 1].target.unit}
        if image != ker:
            return Verdict(property=prop, holds=False, witness={
                "position": i + 1, "node": seq[i].target.name,
                "image": sorted(image), "kernel": sorted(ker),
            })
    return Verdict(property=prop, holds=True)


# ---------------------------------------------------------------------------
# Actions and modules
# ---------------------------------------------------------------------------

def conjugation_action(g: FinGroup) -> GroupAction:
    return GroupAction(actor=g, carrier=g, act={(a, x): g.conj(a, x) for a in g.elements for x in g.elements})


def trivial_action(actor: FinGroup, carrier: FinGroup) -> GroupAction:
    return GroupAction(actor=actor, carrier=carrier, act={(a, x): x for a in actor.elements for x in carrier.elements})


def trivial_module(c: FinGroup, b: FinGroup) -> CModule:
    return CModule(base=c, carrier=b, action=trivial_action(c, b), name=f"{b.name}[{c.name}]")


def action_along(action: GroupAction, h: GroupHom) -> GroupAction:
    """Restrict an action of H to G along h: G -> H"""
    if h.target is not action.actor:
        raise InputError("homomorphism does not land in the acting group", {"hom": h.name})
    return GroupAction(actor=h.source, carrier=action.carrier,
                       act={(a, x): action(h(a), x) for a in h.source.elements for x in action.carrier.elements})


def restrict_module(mod: CModule, gamma: GroupHom) -> CModule:
    """γ*B: the C-module B viewed over the source of γ"""
    return CModule(base=gamma.source, carrier=mod.carrier, action=action_along(mod.action, gamma),
                   name=f"{mod.carrier.name}[{gamma.source.name}]")


def action_from_automorphisms(c: FinGroup, b: FinGroup, rho: GroupHom, maps: Dict[str, Dict[str, str]]) -> GroupAction:
    """The action c * x = ρ(c)(x) for ρ: C -> Aut(B)"""
    return GroupAction(actor=c, carrier=b, act={(a, x): maps[rho(a)][x] for a in c.elements for x in b.elements})


def modules_over(c: FinGroup, b: FinGroup, bounds: Optional[Bounds] = None) -> List[CModule]:
    """Every C-module structure on an abelian group B, trivial first"""
    if not b.is_abelian:
        raise InputError(f"'{b.name}' is not abelian", {"group": b.name})
    aut, maps = automorphism_group(b, bounds)
    out = []
    for i, rho in enumerate(enumerate_homs(c, aut, bounds)):
        out.append(CModule(base=c, carrier=b, action=action_from_automorphisms(c, b, rho, maps),
                           name=f"{b.name}[{c.name}]#{i + 1}"))
    out.sort(key=lambda m: not m.action.is_trivial())
    return out


def is_equivariant(h: GroupHom, source: GroupAction, target: GroupAction, along: Optional[GroupHom] = None,
                   on: Optional[Iterable[str]] = None) -> bool:
    """h(c * x) = γ(c) * h(x), with γ = `along` (identity by default), x ranging over `on`"""
    elements = list(on) if on is not None else h.source.elements
    for c in source.actor.elements:
        c2 = along(c) if along is not None else c
        for x in elements:
            if h(source(c, x)) != target(c2, h(x)):
                return False
    return True
