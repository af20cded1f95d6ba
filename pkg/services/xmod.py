import logging
from typing import Callable, Dict, List, Optional, Tuple

from config import Bounds, default_bounds
from models.category import FunctorData
from models.extension import CrossedExtension, CrossedModule, MaterializedTriangle, ModMorphism, XExtMorphism
from models.fibration import Cleavage, Direction, TriangleOverA
from models.group import CModule, FinGroup, GroupAction, GroupHom
from models.schemas import ValidationReport, Verdict
from services.fincat import build_category
from services.grp import (
    action_along,
    compose_homs,
    direct_product,
    enumerate_homs,
    identity_hom,
    is_central,
    is_equivariant,
    is_isomorphism_hom,
    is_normal,
    is_exact_sequence,
    pullback_groups,
    quotient_group,
    restrict_module,
    semidirect_product,
    trivial_module,
    validate_action,
    validate_group,
    validate_hom,
    validate_module,
)
from utils.errors import BoundExceeded, InputError, InvariantError, PropertyFailure

logger = logging.getLogger(__name__)


def _merge(report: ValidationReport, other: ValidationReport, prefix: str) -> None:
    for v in other.violations:
        report.add(v.kind, v.items, f"{prefix}: {v.message}" if v.message else prefix)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_crossed_module(xm: CrossedModule, name: str = "crossed module") -> ValidationReport:
    """Equivariance ∂(g1*g2) = g1 ∂(g2) g1^-1 and Peiffer ∂(g2)*g2' = g2 g2' g2^-1"""
    report = ValidationReport(subject=name)
    _merge(report, validate_hom(xm.d), "boundary")
    _merge(report, validate_action(xm.action, name="action"), "action")
    if not report.ok:
        return report
    d, act = xm.d, xm.action
    g1, g2 = d.target, d.source
    if act.actor is not g1 or act.carrier is not g2:
        report.add("action", [act.actor.name, act.carrier.name], "action does not match the boundary map")
        return report
    for a in g1.elements:
        for x in g2.elements:
            if d(act(a, x)) != g1.conj(a, d(x)):
                report.add("equivariance", [a, x])
                break
    for x in g2.elements:
        for y in g2.elements:
            if act(d(x), y) != g2.conj(x, y):
                report.add("Peiffer", [x, y])
                break
    ker = [x for x in g2.elements if d(x) == g1.unit]
    if report.ok and not is_central(g2, ker):
        report.add("kernel not central", ker)
    return report


def _preimages(p: GroupHom) -> Dict[str, str]:
    """A name-least preimage for every element in the image"""
    pre: Dict[str, str] = {}
    for g in sorted(p.source.elements):
        pre.setdefault(p(g), g)
    return pre


def induced_c_action(x: CrossedExtension, level: int) -> Callable[[str, str], str]:
    """
    C acting on G_1 (level 1, n = 1: conjugation) or on G_2 (level 2: the G_1-action),
    through name-least preimages under p.
    """
    pre = _preimages(x.p)
    g1 = x.term(1)
    if level == 1:
        return lambda c, y: g1.conj(pre[c], y)
    return lambda c, y: x.action(pre[c], y)


def validate_crossed_extension(x: CrossedExtension) -> ValidationReport:
    """Exactness, crossed-module axioms and C-module compatibility"""
    report = ValidationReport(subject=x.name)
    for g in (x.c, x.b, *x.groups):
        _merge(report, validate_group(g), f"group {g.name}")
    for h in x.sequence():
        _merge(report, validate_hom(h), f"map {h.name}")
    _merge(report, validate_module(x.b_module), "B-module")
    if not report.ok:
        return report
    if x.b_module.base is not x.c:
        report.add("module base", [x.b_module.base.name, x.c.name], "B is not a module over C")
    if len(x.d) != x.n - 1 or len(x.modules) != max(x.n - 2, 0):
        report.add("shape", [x.name], "wrong number of maps or modules")
        return report

    exact = is_exact_sequence(x.sequence(), augmented=True)
    if not exact:
        report.add("not exact", [str(exact.witness.get("position")), exact.witness.get("node", "")],
                   exact.witness.get("reason", "image differs from kernel"))
        return report

    b_act = x.b_module.action
    if x.n == 1:
        c_act = induced_c_action(x, 1)
        for c in x.c.elements:
            for b in x.b.elements:
                if x.j(b_act(c, b)) != c_act(c, x.j(b)):
                    report.add("j not C-equivariant", [c, b])
                    return report
        return report

    if x.action is None:
        report.add("action", [x.name], "missing G1-action on G2")
        return report
    _merge(report, validate_crossed_module(x.crossed_module), "crossed module")
    if not report.ok:
        return report
    c_act = induced_c_action(x, 2)
    if x.n == 2:
        for c in x.c.elements:
            for b in x.b.elements:
                if x.j(b_act(c, b)) != c_act(c, x.j(b)):
                    report.add("j not C-equivariant", [c, b])
                    return report
        return report

    for k, mod in enumerate(x.modules):
        _merge(report, validate_module(mod), f"module G{k + 3}")
        if mod.base is not x.c or mod.carrier is not x.term(k + 3):
            report.add("module base", [mod.carrier.name], f"G{k + 3} is not a C-module")
    if not report.ok:
        return report
    top = x.modules[-1]
    if not is_equivariant(x.j, x.b_module.action, top.action):
        report.add("j not C-equivariant", [x.j.name])
    for k in range(1, x.n - 2):
        # d[k]: G_{k+2} -> G_{k+1}, both modules when k >= 2
        if k >= 2 and not is_equivariant(x.d[k], x.modules[k - 1].action, x.modules[k - 2].action):
            report.add("d not C-equivariant", [x.d[k].name])
    d2 = x.d[1]
    g3 = x.modules[0]
    for c in x.c.elements:
        for y in x.term(3).elements:
            if d2(g3(c, y)) != c_act(c, d2(y)):
                report.add("d2 not C-equivariant on its image", [c, y])
                return report
    return report


def validate_morphism(m: XExtMorphism) -> ValidationReport:
    """Every ladder square commutes, (f1, f2) equivariant, (γ, β) a module map"""
    report = ValidationReport(subject=m.name)
    x, z = m.source, m.target
    if x.n != z.n or len(m.f) != x.n:
        report.add("shape", [m.name], "lengths differ")
        return report
    for h in (m.gamma, *m.f, m.beta):
        _merge(report, validate_hom(h), f"map {h.name}")
    if not report.ok:
        return report
    for g in x.term(1).elements:
        if z.p(m.f[0](g)) != m.gamma(x.p(g)):
            report.add("ladder", ["p", g])
            return report
    for i, d in enumerate(x.d):
        for y in d.source.elements:
            if m.f[i](d(y)) != z.d[i](m.f[i + 1](y)):
                report.add("ladder", [d.name, y])
                return report
    for b in x.b.elements:
        if m.f[-1](x.j(b)) != z.j(m.beta(b)):
            report.add("ladder", ["j", b])
            return report
    if not is_equivariant(m.beta, x.b_module.action, z.b_module.action, along=m.gamma):
        report.add("beta not equivariant", [m.beta.name])
    if x.n >= 2:
        for a in x.term(1).elements:
            for y in x.term(2).elements:
                if m.f[1](x.action(a, y)) != z.action(m.f[0](a), m.f[1](y)):
                    report.add("crossed module morphism", [a, y])
                    return report
    for k, mod in enumerate(x.modules):
        if not is_equivariant(m.f[k + 2], mod.action, z.modules[k].action, along=m.gamma):
            report.add("module map", [m.f[k + 2].name])
    return report


def pi(m: XExtMorphism) -> ModMorphism:
    return ModMorphism(gamma=m.gamma, beta=m.beta)


def pi0(m: XExtMorphism) -> GroupHom:
    return m.gamma


# ---------------------------------------------------------------------------
# Morphism calculus
# ---------------------------------------------------------------------------

def identity_morphism(x: CrossedExtension) -> XExtMorphism:
    return XExtMorphism(name=f"1_{x.name}", source=x, target=x, gamma=identity_hom(x.c),
                        f=tuple(identity_hom(g) for g in x.groups), beta=identity_hom(x.b))


def compose_morphisms(m2: XExtMorphism, m1: XExtMorphism, name: Optional[str] = None) -> XExtMorphism:
    """m2∘m1"""
    if m1.target is not m2.source:
        raise InputError(f"Morphisms '{m2.name}' and '{m1.name}' are not composable", {"m2": m2.name, "m1": m1.name})
    return XExtMorphism(
        name=name or f"{m2.name}.{m1.name}",
        source=m1.source,
        target=m2.target,
        gamma=compose_homs(m2.gamma, m1.gamma),
        f=tuple(compose_homs(b, a) for a, b in zip(m1.f, m2.f)),
        beta=compose_homs(m2.beta, m1.beta),
    )


def morphism_key(m: XExtMorphism) -> tuple:
    """Hashable identity of a morphism between fixed extensions"""
    def freeze(h: GroupHom):
        return tuple(sorted(h.map.items()))
    return (id(m.source), id(m.target), freeze(m.gamma), tuple(freeze(f) for f in m.f), freeze(m.beta))


def same_morphism(m1: XExtMorphism, m2: XExtMorphism) -> bool:
    return morphism_key(m1) == morphism_key(m2)


def enumerate_morphisms(
    x: CrossedExtension,
    z: CrossedExtension,
    gamma: Optional[GroupHom] = None,
    beta: Optional[GroupHom] = None,
    bounds: Optional[Bounds] = None,
) -> List[XExtMorphism]:
    """
    All morphisms x -> z, optionally with γ and/or β fixed.

    Components are chosen from the B end towards C; each f_i is searched
    with its images on im(d_i) (or im j) already forced by the ladder.

    Raises:
        BoundExceeded: more candidates than the enumeration cap.
    """
    bounds = bounds or default_bounds()
    if x.n != z.n:
        raise InputError("extensions have different lengths", {"source": x.name, "target": z.name})
    n = x.n
    found: List[XExtMorphism] = []
    gammas = [gamma] if gamma is not None else enumerate_homs(x.c, z.c, bounds)

    def forced(i: int, chosen: Dict[int, GroupHom], b: GroupHom) -> Optional[Dict[str, str]]:
        req: Dict[str, str] = {}
        if i == n:
            pairs = [(x.j(e), z.j(b(e))) for e in x.b.elements]
        else:
            d, d2 = x.d[i - 1], z.d[i - 1]
            pairs = [(d(y), d2(chosen[i + 1](y))) for y in d.source.elements]
        for a, v in pairs:
            if req.setdefault(a, v) != v:
                return None
        return req

    for g in gammas:
        if g.source is not x.c or g.target is not z.c:
            raise InputError("gamma does not map between the base groups", {"gamma": g.name})
        betas = [beta] if beta is not None else [
            h for h in enumerate_homs(x.b, z.b, bounds)
            if is_equivariant(h, x.b_module.action, z.b_module.action, along=g)
        ]
        for b in betas:
            def level(i: int, chosen: Dict[int, GroupHom]):
                if i == 0:
                    f = tuple(chosen[k] for k in range(1, n + 1))
                    m = XExtMorphism(name=f"{x.name}->{z.name}#{len(found) + 1}", source=x, target=z,
                                     gamma=g, f=f, beta=b)
                    if _equivariant_parts(m):
                        found.append(m)
                        if len(found) > bounds.enumeration_cap:
                            raise BoundExceeded("bound exceeded: too many extension morphisms",
                                                {"source": x.name, "target": z.name, "cap": bounds.enumeration_cap})
                    return
                req = forced(i, chosen, b)
                if req is None:
                    return
                if i == 1:
                    allowed = lambda a, v: req.get(a, v) == v and z.p(v) == g(x.p(a))  # noqa: E731
                else:
                    allowed = lambda a, v: req.get(a, v) == v  # noqa: E731
                for f in enumerate_homs(x.term(i), z.term(i), bounds, allowed=allowed):
                    chosen[i] = f
                    level(i - 1, chosen)
                    del chosen[i]

            level(n, {})
    logger.debug(f"Enumerated {len(found)} morphisms {x.name} -> {z.name}")
    return found


def _equivariant_parts(m: XExtMorphism) -> bool:
    x, z = m.source, m.target
    if x.n >= 2:
        f1, f2 = m.f[0], m.f[1]
        for a in x.term(1).elements:
            for y in x.term(2).elements:
                if f2(x.action(a, y)) != z.action(f1(a), f2(y)):
                    return False
    return all(
        is_equivariant(m.f[k + 2], mod.action, z.modules[k].action, along=m.gamma)
        for k, mod in enumerate(x.modules)
    )


def vertical_isomorphism(x: CrossedExtension, z: CrossedExtension,
                         bounds: Optional[Bounds] = None) -> Optional[XExtMorphism]:
    """A morphism (1, f_1, ..., f_n, 1) with every f_i bijective, or None"""
    if x.c is not z.c or x.b is not z.b:
        return None
    for m in enumerate_morphisms(x, z, gamma=identity_hom(x.c), beta=identity_hom(x.b), bounds=bounds):
        if all(is_isomorphism_hom(f) for f in m.f):
            return m
    return None


# ---------------------------------------------------------------------------
# Liftings
# ---------------------------------------------------------------------------

def cartesian_lift_xext(x_prime: CrossedExtension, gamma: GroupHom,
                        name: Optional[str] = None) -> Tuple[CrossedExtension, XExtMorphism]:
    """
    γ*X' with first term G1' ×_{C'} C, and the morphism (γ, pr0, 1, ..., 1, 1_B).
    """
    if gamma.target is not x_prime.c:
        raise InputError(f"'{gamma.name}' does not land in {x_prime.c.name}", {"gamma": gamma.name})
    c = gamma.source
    g1p = x_prime.term(1)
    pb, pr0, pr1 = pullback_groups(x_prime.p, gamma, name=f"{g1p.name}x_{x_prime.c.name}{c.name}")
    name = name or f"{gamma.name}*{x_prime.name}"
    b_module = restrict_module(x_prime.b_module, gamma)

    def pair(g: str) -> str:
        return f"({g},{c.unit})"

    if x_prime.n == 1:
        j = GroupHom(name=f"j[{name}]", source=x_prime.b, target=pb,
                     map={b: pair(x_prime.j(b)) for b in x_prime.b.elements})
        lifted = CrossedExtension(name=name, c=c, b_module=b_module, groups=(pb,), p=pr1, j=j)
    else:
        dp = x_prime.d[0]
        boundary = GroupHom(name=f"d[{name}]", source=dp.source, target=pb,
                            map={y: pair(dp(y)) for y in dp.source.elements})
        lifted = CrossedExtension(
            name=name, c=c, b_module=b_module, groups=(pb, *x_prime.groups[1:]), p=pr1, j=x_prime.j,
            d=(boundary, *x_prime.d[1:]), action=action_along(x_prime.action, pr0),
            modules=tuple(restrict_module(mod, gamma) for mod in x_prime.modules),
        )
    morphism = XExtMorphism(
        name=f"cart[{name}]", source=lifted, target=x_prime, gamma=gamma,
        f=(pr0, *(identity_hom(g) for g in x_prime.groups[1:])), beta=identity_hom(x_prime.b),
    )
    logger.info(f"Cartesian lift {name}: first term of order {len(pb)}")
    return lifted, morphism


def _descend(proj: GroupHom, values: Callable[[str], str], what: str) -> Dict[str, str]:
    """A map on the quotient from a map constant on cosets"""
    out: Dict[str, str] = {}
    for e in proj.source.elements:
        v = values(e)
        if out.setdefault(proj(e), v) != v:
            raise InvariantError(f"{what} ill-defined", {"element": e, "values": [out[proj(e)], v]})
    return out


def _pair(a: str, b: str) -> str:
    return f"({a},{b})"


def push_forward_xext(x: CrossedExtension, beta: GroupHom, target_module: Optional[CModule] = None,
                      name: Optional[str] = None) -> Tuple[CrossedExtension, XExtMorphism]:
    """
    β_*X: the opcartesian lifting of a module map β: B -> B' at X.

    The B end G is replaced by (B' × G)/{(β(b), j(b)^-1)}; for n = 1 the
    product is B' ⋊ G_1 with G_1 acting on B' through p.

    Raises:
        PropertyFailure: beta not equivariant.
        InvariantError: an induced map is not well defined on cosets.
    """
    if beta.source is not x.b:
        raise InputError(f"'{beta.name}' does not start at {x.b.name}", {"beta": beta.name})
    module = target_module or trivial_module(x.c, beta.target)
    if module.base is not x.c or module.carrier is not beta.target:
        raise InputError("target module does not match beta", {"beta": beta.name})
    if not is_equivariant(beta, x.b_module.action, module.action):
        raise PropertyFailure("beta not equivariant", {"beta": beta.name})
    name = name or f"{beta.name}_*{x.name}"
    bp = beta.target
    top = x.term(x.n)

    if x.n == 1:
        product = semidirect_product(bp, top, action_along(module.action, x.p), name=f"{bp.name}:{top.name}")
    else:
        product = direct_product(bp, top, name=f"{bp.name}x{top.name}")
    relations = {_pair(beta(b), top.inv(x.j(b))) for b in x.b.elements}
    if not is_normal(product, relations):
        raise InvariantError("induced ∂' ill-defined: relation subgroup not normal", {"extension": x.name})
    quot, proj = quotient_group(product, relations, name=f"{bp.name}x^{x.b.name}{top.name}")
    split = {_pair(u, g): (u, g) for u in bp.elements for g in top.elements}

    j_new = GroupHom(name=f"j[{name}]", source=bp, target=quot, map={u: proj(_pair(u, top.unit)) for u in bp.elements})
    f_top = GroupHom(name=f"f{x.n}[{name}]", source=top, target=quot,
                     map={g: proj(_pair(bp.unit, g)) for g in top.elements})

    if x.n == 1:
        p_new = GroupHom(name=f"p[{name}]", source=quot, target=x.c,
                         map=_descend(proj, lambda e: x.p(split[e][1]), "induced p"))
        pushed = CrossedExtension(name=name, c=x.c, b_module=module, groups=(quot,), p=p_new, j=j_new)
    else:
        below = x.d[-1]
        d_top = GroupHom(name=f"d{x.n - 1}[{name}]", source=quot, target=below.target,
                         map=_descend(proj, lambda e: below(split[e][1]), "induced ∂'"))
        if x.n == 2:
            g1 = x.term(1)
            act = {}
            for a in g1.elements:
                images = _descend(
                    proj, lambda e: proj(_pair(module(x.p(a), split[e][0]), x.action(a, split[e][1]))),
                    "induced action",
                )
                act.update({(a, y): v for y, v in images.items()})
            pushed = CrossedExtension(
                name=name, c=x.c, b_module=module, groups=(g1, quot), p=x.p, j=j_new, d=(d_top,),
                action=GroupAction(actor=g1, carrier=quot, act=act),
            )
        else:
            top_mod = x.modules[-1]
            act = {}
            for c in x.c.elements:
                images = _descend(proj, lambda e: proj(_pair(module(c, split[e][0]), top_mod(c, split[e][1]))),
                                  "induced module action")
                act.update({(c, y): v for y, v in images.items()})
            new_mod = CModule(base=x.c, carrier=quot, action=GroupAction(actor=x.c, carrier=quot, act=act),
                              name=f"{quot.name}[{x.c.name}]")
            pushed = CrossedExtension(
                name=name, c=x.c, b_module=module, groups=(*x.groups[:-1], quot), p=x.p, j=j_new,
                d=(*x.d[:-1], d_top), action=x.action, modules=(*x.modules[:-1], new_mod),
            )
    morphism = XExtMorphism(
        name=f"push[{name}]", source=x, target=pushed, gamma=identity_hom(x.c),
        f=(*(identity_hom(g) for g in x.groups[:-1]), f_top), beta=beta,
    )
    logger.info(f"Push forward {name}: top term of order {len(quot)}")
    return pushed, morphism


def verify_cartesian_xext(m: XExtMorphism, sources: Optional[List[CrossedExtension]] = None,
                          bounds: Optional[Bounds] = None) -> Verdict:
    """
    Π0-cartesianness of m: X -> X' against the given test extensions W:
    every φ: W -> X' with γ_φ = γ_m∘δ factors uniquely as m∘h with γ_h = δ.
    """
    prop = "cartesian"
    x, xp = m.source, m.target
    sources = sources if sources is not None else [x]
    checked = 0
    try:
        for w in sources:
            if w.n != x.n:
                continue
            for delta in enumerate_homs(w.c, x.c, bounds):
                target_gamma = compose_homs(m.gamma, delta)
                for phi in enumerate_morphisms(w, xp, gamma=target_gamma, bounds=bounds):
                    checked += 1
                    hs = [h for h in enumerate_morphisms(w, x, gamma=delta, bounds=bounds)
                          if same_morphism(compose_morphisms(m, h), phi)]
                    if len(hs) != 1:
                        return Verdict(property=prop, holds=False, details={"checked": checked},
                                       witness={"source": w.name, "phi": phi.name, "factorizations": len(hs)})
    except BoundExceeded as exc:
        logger.warning(f"Cartesian check for {m.name} inconclusive: {exc.message}")
        return Verdict(property=prop, holds=False, inconclusive=True, witness=exc.witness, details={"checked": checked})
    return Verdict(property=prop, holds=True, details={"checked": checked})


def check_condition_c_xext(x: CrossedExtension, gamma: GroupHom, beta: GroupHom,
                           target_module: Optional[CModule] = None, bounds: Optional[Bounds] = None) -> Verdict:
    """γ*(β_*X) ≅ (γ*β)_*(γ*X) by a vertical isomorphism fixing B'"""
    prop = "condition (C)"
    module = target_module or trivial_module(x.c, beta.target)
    pushed, _ = push_forward_xext(x, beta, module)
    left, _ = cartesian_lift_xext(pushed, gamma)
    pulled, _ = cartesian_lift_xext(x, gamma)
    right, _ = push_forward_xext(pulled, beta, restrict_module(module, gamma))
    try:
        iso = vertical_isomorphism(left, right, bounds)
    except BoundExceeded as exc:
        return Verdict(property=prop, holds=False, inconclusive=True, witness=exc.witness)
    if iso is None:
        logger.info(f"Condition (C) fails for {x.name} along {gamma.name}, {beta.name}")
        return Verdict(property=prop, holds=False, witness={"left": left.name, "right": right.name})
    return Verdict(property=prop, holds=True, details={"iso": iso.name})


def three_fold_factorization(m: XExtMorphism) -> Tuple[XExtMorphism, XExtMorphism, XExtMorphism]:
    """
    m = cart∘weq∘opcart: opcart pushes along β, weq fixes both ends, cart pulls back along γ.

    Raises:
        InvariantError: the recomposition differs from m.
    """
    x, xp = m.source, m.target
    module = restrict_module(xp.b_module, m.gamma)
    pushed, opcart = push_forward_xext(x, m.beta, module)
    pulled, cart = cartesian_lift_xext(xp, m.gamma)
    n = x.n
    top_pushed = pushed.term(n)

    # every element of the pushed top term is j(u)·f_n(g)
    omega_top: Dict[str, str] = {}
    for u in xp.b.elements:
        for g in x.term(n).elements:
            elem = top_pushed.mul(pushed.j(u), opcart.f[-1](g))
            v = xp.term(n).mul(xp.j(u), m.f[-1](g))
            if n == 1:
                v = _pair(v, x.p(g))
            if omega_top.setdefault(elem, v) != v:
                raise InvariantError("weak equivalence ill-defined", {"element": elem})
    weq_f: List[GroupHom] = []
    for i in range(1, n + 1):
        if i == n:
            weq_f.append(GroupHom(name=f"w{i}[{m.name}]", source=top_pushed, target=pulled.term(i), map=omega_top))
        elif i == 1:
            weq_f.append(GroupHom(name=f"w1[{m.name}]", source=x.term(1), target=pulled.term(1),
                                  map={g: _pair(m.f[0](g), x.p(g)) for g in x.term(1).elements}))
        else:
            weq_f.append(GroupHom(name=f"w{i}[{m.name}]", source=x.term(i), target=pulled.term(i),
                                  map=dict(m.f[i - 1].map)))
    weq = XExtMorphism(name=f"weq[{m.name}]", source=pushed, target=pulled, gamma=identity_hom(x.c),
                       f=tuple(weq_f), beta=identity_hom(xp.b))
    recomposed = compose_morphisms(cart, compose_morphisms(weq, opcart))
    if not (recomposed.gamma.map == m.gamma.map and recomposed.beta.map == m.beta.map
            and all(a.map == b.map for a, b in zip(recomposed.f, m.f))):
        raise InvariantError("three-fold factorization does not recompose", {"morphism": m.name})
    return opcart, weq, cart


# ---------------------------------------------------------------------------
# Materialization
# ---------------------------------------------------------------------------

def _module_key(mod: CModule) -> tuple:
    return (id(mod.base), id(mod.carrier), tuple(sorted(mod.action.act.items())))


def _hom_key(h: GroupHom) -> tuple:
    return (id(h.source), id(h.target), tuple(sorted(h.map.items())))


def _close(arrows: Dict, ends: Dict[str, Tuple[str, str]], compose: Callable, add: Callable) -> Dict[Tuple[str, str], str]:
    """Composition table, adding composites through `add` until nothing new appears"""
    table: Dict[Tuple[str, str], str] = {}
    grew = True
    while grew:
        grew = False
        for n1 in list(arrows):
            for n2 in list(arrows):
                if (n2, n1) in table or ends[n1][1] != ends[n2][0]:
                    continue
                before = len(arrows)
                table[(n2, n1)] = add(f"{n2}.{n1}", ends[n1][0], ends[n2][1], compose(arrows[n2], arrows[n1]))
                grew = grew or len(arrows) > before
    return table


def materialize_categories(
    extensions: List[CrossedExtension],
    morphisms: Optional[List[XExtMorphism]] = None,
    bounds: Optional[Bounds] = None,
) -> MaterializedTriangle:
    """
    Π: XExt -> Mod over (_)_0: Mod -> Gp on a finite collection.

    With no morphisms, all morphisms between the extensions are enumerated.
    Otherwise the given morphisms plus identities must be closed under
    composition. Mod and Gp carry exactly the images.

    Raises:
        PropertyFailure: collection not composition-closed.
    """
    names = [x.name for x in extensions]
    if len(set(names)) != len(names):
        raise InputError("extension names must be distinct", {"names": names})
    by_id = {id(x): x for x in extensions}

    arrows: Dict[str, XExtMorphism] = {}
    keys: Dict[tuple, str] = {}
    for x in extensions:
        ident = identity_morphism(x)
        arrows[ident.name] = ident
        keys[morphism_key(ident)] = ident.name
    if morphisms is None:
        for x in extensions:
            for z in extensions:
                for k, m in enumerate(enumerate_morphisms(x, z, bounds=bounds)):
                    key = morphism_key(m)
                    if key not in keys:
                        m.name = f"{x.name}->{z.name}#{k + 1}"
                        arrows[m.name] = m
                        keys[key] = m.name
    else:
        for m in morphisms:
            if id(m.source) not in by_id or id(m.target) not in by_id:
                raise InputError(f"Morphism '{m.name}' leaves the collection", {"morphism": m.name})
            key = morphism_key(m)
            if key not in keys:
                arrows[m.name] = m
                keys[key] = m.name

    table = {}
    for n1, m1 in arrows.items():
        for n2, m2 in arrows.items():
            if m1.target is m2.source:
                key = morphism_key(compose_morphisms(m2, m1))
                if key not in keys:
                    raise PropertyFailure("collection not composition-closed", {"pair": [n2, n1]})
                table[(n2, n1)] = keys[key]
    x_cat = build_category(
        "XExt", names, {a: (m.source.name, m.target.name) for a, m in arrows.items()},
        {x.name: f"1_{x.name}" for x in extensions}, table,
    )

    # Mod and Gp carry the images of Π and Π0, closed under composition
    modules: Dict[str, CModule] = {}
    mod_names: Dict[tuple, str] = {}
    for x in extensions:
        key = _module_key(x.b_module)
        if key not in mod_names:
            label = f"({x.c.name},{x.b.name})"
            taken = sum(1 for k in modules if k == label or k.startswith(f"{label}#"))
            if taken:
                label = f"{label}#{taken + 1}"
            mod_names[key] = label
            modules[label] = x.b_module
    groups: Dict[str, FinGroup] = {}
    group_label: Dict[int, str] = {}
    for mod in modules.values():
        if id(mod.base) not in group_label:
            taken = sum(1 for k in groups if k == mod.base.name or k.startswith(f"{mod.base.name}#"))
            label = f"{mod.base.name}#{taken + 1}" if taken else mod.base.name
            group_label[id(mod.base)] = label
            groups[label] = mod.base

    mod_arrows: Dict[str, ModMorphism] = {}
    mod_ends: Dict[str, Tuple[str, str]] = {}
    mod_keys: Dict[tuple, str] = {}

    def add_mod_arrow(name: str, src: str, dst: str, mm: ModMorphism) -> str:
        key = (src, dst, _hom_key(mm.gamma), _hom_key(mm.beta))
        if key not in mod_keys:
            mod_keys[key] = name
            mod_arrows[name] = mm
            mod_ends[name] = (src, dst)
        return mod_keys[key]

    mod_identity = {
        label: add_mod_arrow(f"1_{label}", label, label,
                             ModMorphism(gamma=identity_hom(mod.base), beta=identity_hom(mod.carrier)))
        for label, mod in modules.items()
    }
    pi_map = {
        a: add_mod_arrow(f"pi[{a}]", mod_names[_module_key(m.source.b_module)],
                         mod_names[_module_key(m.target.b_module)], pi(m))
        for a, m in arrows.items()
    }
    mod_table = _close(
        mod_arrows, mod_ends,
        lambda m2, m1: ModMorphism(gamma=compose_homs(m2.gamma, m1.gamma), beta=compose_homs(m2.beta, m1.beta)),
        add_mod_arrow,
    )
    m_cat = build_category("Mod", modules, mod_ends, mod_identity, mod_table)

    gp_arrows: Dict[str, GroupHom] = {}
    gp_ends: Dict[str, Tuple[str, str]] = {}
    gp_keys: Dict[tuple, str] = {}

    def add_gp_arrow(name: str, src: str, dst: str, h: GroupHom) -> str:
        key = _hom_key(h)
        if key not in gp_keys:
            gp_keys[key] = name
            gp_arrows[name] = h
            gp_ends[name] = (src, dst)
        return gp_keys[key]

    gp_identity = {name: add_gp_arrow(f"1_{name}", name, name, identity_hom(g)) for name, g in groups.items()}
    g_map = {
        a: add_gp_arrow(f"gamma[{a}]", group_label[id(mm.gamma.source)], group_label[id(mm.gamma.target)], mm.gamma)
        for a, mm in mod_arrows.items()
    }
    gp_table = _close(gp_arrows, gp_ends, compose_homs, add_gp_arrow)
    a_cat = build_category("Gp", groups, gp_ends, gp_identity, gp_table)

    p = FunctorData(name="Pi", source=x_cat, target=m_cat,
                    obj_map={x.name: mod_names[_module_key(x.b_module)] for x in extensions}, arr_map=pi_map)
    g = FunctorData(name="mod0", source=m_cat, target=a_cat,
                    obj_map={label: group_label[id(mod.base)] for label, mod in modules.items()}, arr_map=g_map)
    f = FunctorData(name="Pi0", source=x_cat, target=a_cat,
                    obj_map={x.name: group_label[id(x.c)] for x in extensions},
                    arr_map={a: g_map[pi_map[a]] for a in arrows})
    logger.info(f"Materialized {len(extensions)} extensions, {len(arrows)} morphisms, "
                f"{len(modules)} modules, {len(groups)} groups")
    return MaterializedTriangle(
        triangle=TriangleOverA(p=p, f=f, g=g),
        extensions={x.name: x for x in extensions},
        morphisms=arrows,
        modules=modules,
        mod_arrows=mod_arrows,
        groups=groups,
        group_arrows=gp_arrows,
    )


def module_cleavage(mat: MaterializedTriangle) -> Cleavage:
    """
    The cleavage of (_)_0 choosing (γ, 1_B) over γ.

    Raises:
        PropertyFailure: some (γ, 1_B) is missing from the materialized Mod.
    """
    t = mat.triangle
    g, m_cat, a_cat = t.g, t.m, t.a
    lifts = {}
    for obj in m_cat.objects:
        mod = mat.modules[obj]
        for gamma_name in a_cat.arrows_into(g.obj(obj)):
            chosen = [
                a for a in m_cat.arrows_into(obj)
                if g.arr(a) == gamma_name and mat.mod_arrows[a].beta.source is mod.carrier
                and all(mat.mod_arrows[a].beta(b) == b for b in mod.carrier.elements)
            ]
            if not chosen:
                raise PropertyFailure("no (gamma, 1) arrow in the materialized module category",
                                      {"module": obj, "gamma": gamma_name})
            lifts[(obj, gamma_name)] = chosen[0]
    return Cleavage(functor=g, lifts=lifts, direction=Direction.CARTESIAN)
