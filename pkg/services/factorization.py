import logging
import os
from typing import Any, Dict, List, Optional

from config import Bounds, default_bounds
from models.category import FunctorData, ProductCategory
from models.fibration import ArrowFactorization, BarConstruction, Cleavage, Direction, TriangleOverA
from models.schemas import Verdict
from services.fibration import (
    choose_cleavage,
    classify_functor,
    compatible_cartesian_lift,
    default_cleavage,
    fiber,
    fiber_cleavages,
    is_cartesian,
    is_cartesian_functor,
    is_fiberwise_opfibration,
    is_opcartesian,
    is_vertical,
    split_failure,
)
from services.fincat import (
    build_category,
    check_coidentifies,
    compose_functors,
    connected_components,
    ensure_within_bounds,
    enumerate_functors,
    identee,
)
from utils.errors import BoundExceeded, InputError, InvariantError, PropertyFailure
from utils.serialization import category_to_file, functor_to_file, write_json
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)


def block_name(rep: str) -> str:
    return f"[{rep}]"


def bar_arrow_name(mu: str, b1: str, b2: str) -> str:
    return f"{mu}:{b1}->{b2}"


def _unique_vertical(t: TriangleOverA, m_obj: str, g_lift: str, mu: str) -> str:
    """The G-vertical β with g_lift∘β = μ"""
    m = t.m
    found = [b for b in m.hom(m_obj, m.src(g_lift)) if is_vertical(t.g, b) and m.compose(g_lift, b) == mu]
    if len(found) != 1:
        raise InvariantError(
            f"Arrow '{mu}' does not factor uniquely through the chosen lifting '{g_lift}'",
            {"arrow": mu, "lift": g_lift, "candidates": found},
        )
    return found[0]


def build_bar_x(
    t: TriangleOverA,
    g_cleavage: Optional[Cleavage] = None,
    fiber_cls: Optional[Dict[str, Cleavage]] = None,
    bounds: Optional[Bounds] = None,
) -> BarConstruction:
    """
    Factor P = P̄·Q through the category of P-vertical components.

    Args:
        t: fiberwise opfibration (X, F) -> (M, G)
        g_cleavage: split cartesian cleavage of G; defaults to the projection
            cleavage when G is a product projection
        fiber_cls: opcartesian cleavages of the fiber functors P_a

    Raises:
        PropertyFailure: G-cleavage not split, or t is not a fiberwise opfibration.
        InvariantError: the constructed arrow set is not closed under composition.
    """
    bounds = bounds or default_bounds()
    g_cl = g_cleavage or default_cleavage(t.g, Direction.CARTESIAN)
    failure = split_failure(g_cl)
    if failure is not None:
        raise PropertyFailure("G-cleavage not split", failure)
    fiberwise = is_fiberwise_opfibration(t)
    if not fiberwise:
        raise PropertyFailure("not fiberwise opfibration", fiberwise.witness)
    fiber_cls = fiber_cls or fiber_cleavages(t)

    x_cat, m_cat = t.x, t.m
    uf = UnionFind(x_cat.objects)
    for a in x_cat.arrow_names:
        if is_vertical(t.p, a):
            uf.union(*x_cat.arrows[a])
    blocks = {block_name(members[0]): members for members in uf.blocks()}
    block_of = {x: name for name, members in blocks.items() for x in members}
    rep = {name: members[0] for name, members in blocks.items()}

    arrows: Dict[str, tuple] = {}
    mu_of: Dict[str, str] = {}
    membership: Dict[str, Dict[str, Any]] = {}
    for b1, r1 in rep.items():
        for b2, r2 in rep.items():
            for mu in m_cat.hom(t.p.obj(r1), t.p.obj(r2)):
                alpha = t.g.arr(mu)
                g_lift = g_cl.lift(t.p.obj(r2), alpha)
                beta = _unique_vertical(t, t.p.obj(r1), g_lift, mu)
                pushed = x_cat.dst(fiber_cls[t.f.obj(r1)].lift(r1, beta))
                pulled = x_cat.src(compatible_cartesian_lift(t, g_cl, r2, alpha))
                name = bar_arrow_name(mu, b1, b2)
                membership[name] = {
                    "alpha": alpha, "beta": beta, "pushed": pushed, "pulled": pulled,
                    "member": block_of[pushed] == block_of[pulled],
                }
                if block_of[pushed] == block_of[pulled]:
                    arrows[name] = (b1, b2)
                    mu_of[name] = mu
        if len(arrows) > bounds.max_arrows:
            raise BoundExceeded(f"X-bar exceeds {bounds.max_arrows} arrows", {"cap": bounds.max_arrows})

    identity = {}
    for b, r in rep.items():
        name = bar_arrow_name(m_cat.id(t.p.obj(r)), b, b)
        if name not in arrows:
            raise InvariantError(f"Identity of block {b} failed the membership test", membership.get(name, {}))
        identity[b] = name

    by_src: Dict[str, List[str]] = {b: [] for b in rep}
    for name, (b1, _) in arrows.items():
        by_src[b1].append(name)
    table = {}
    for n1, (b1, b2) in arrows.items():
        for n2 in by_src[b2]:
            b3 = arrows[n2][1]
            composite = bar_arrow_name(m_cat.compose(mu_of[n2], mu_of[n1]), b1, b3)
            if composite not in arrows:
                raise InvariantError(
                    f"Composite of {n2} and {n1} is not an arrow of X-bar",
                    {"arrows": [n2, n1], "composite": composite},
                )
            table[(n2, n1)] = composite
    bar_x = ensure_within_bounds(
        build_category(f"Xbar[{t.p.name}]", rep, arrows, identity, table), bounds
    )

    q_arr = {}
    for a, (s, d) in x_cat.arrows.items():
        name = bar_arrow_name(t.p.arr(a), block_of[s], block_of[d])
        if name not in arrows:
            raise InvariantError(f"Q is undefined on '{a}'", {"arrow": a, "image": name})
        q_arr[a] = name
    q = FunctorData(name=f"Q[{t.p.name}]", source=x_cat, target=bar_x, obj_map=dict(block_of), arr_map=q_arr)
    bar_p = FunctorData(
        name=f"Pbar[{t.p.name}]", source=bar_x, target=m_cat,
        obj_map={b: t.p.obj(r) for b, r in rep.items()}, arr_map=dict(mu_of),
    )
    bar_f = FunctorData(
        name=f"Fbar[{t.p.name}]", source=bar_x, target=t.a,
        obj_map={b: t.f.obj(r) for b, r in rep.items()},
        arr_map={n: t.g.arr(mu) for n, mu in mu_of.items()},
    )
    logger.info(f"Built {bar_x.name}: {len(rep)} blocks from {len(x_cat.objects)} objects, {len(arrows)} arrows")
    return BarConstruction(
        input=t, g_cleavage=g_cl, fiber_cleavages=fiber_cls, bar_x=bar_x, q=q, bar_f=bar_f, bar_p=bar_p,
        blocks=blocks, block_of=block_of, membership=membership,
    )


def bar_triangle(b: BarConstruction) -> TriangleOverA:
    """P̄: (X̄, F̄) -> (M, G)"""
    return TriangleOverA(p=b.bar_p, f=b.bar_f, g=b.input.g)


def verify_bar_construction(b: BarConstruction) -> List[Verdict]:
    """Recheck every property the factorization promises, one verdict per property"""
    t = b.input
    verdicts = []

    p_ok = compose_functors(b.bar_p, b.q).arr_map == t.p.arr_map and \
        compose_functors(b.bar_p, b.q).obj_map == t.p.obj_map
    f_ok = compose_functors(b.bar_f, b.q).arr_map == t.f.arr_map and \
        compose_functors(b.bar_f, b.q).obj_map == t.f.obj_map
    verdicts.append(Verdict(property="factorization commutes", holds=p_ok and f_ok,
                            details={"bar_p.q = p": p_ok, "bar_f.q = f": f_ok}))

    cls = classify_functor(b.bar_f)
    verdicts.append(Verdict(property="bar_f fibration", holds=cls.fibration, witness=cls.witness.get("fibration")))

    mismatch = [a for a in b.bar_x.arrow_names if is_cartesian(b.bar_f, a) != is_cartesian(t.g, b.bar_p.arr(a))]
    verdicts.append(Verdict(
        property="cartesian characterization", holds=not mismatch,
        witness={"arrows": mismatch} if mismatch else None,
    ))

    tri = bar_triangle(b)
    discrete = is_fiberwise_opfibration(tri, discrete=True)
    verdicts.append(Verdict(property="bar_p fiberwise discrete opfibration", holds=discrete.holds,
                            witness=discrete.witness))
    cart = is_cartesian_functor(tri)
    verdicts.append(Verdict(property="bar_p cartesian functor", holds=cart.holds, witness=cart.witness))
    q_cart = is_cartesian_functor(TriangleOverA(p=b.q, f=t.f, g=b.bar_f))
    verdicts.append(Verdict(property="q cartesian functor", holds=q_cart.holds, witness=q_cart.witness))

    sizes = {}
    for m in t.m.objects:
        bar_fiber, _ = fiber(b.bar_p, m)
        p_fiber, _ = fiber(t.p, m)
        sizes[m] = (len(bar_fiber.objects), len(connected_components(p_fiber)))
    bad = {m: list(v) for m, v in sizes.items() if v[0] != v[1]}
    verdicts.append(Verdict(property="fibers are components", holds=not bad, witness=bad or None))

    for v in verdicts:
        if not v.holds:
            logger.warning(f"Bar construction check failed: {v.property} ({v.witness})")
    return verdicts


def verify_member(member: TriangleOverA) -> None:
    """Raise unless member is a discrete opfibration between fibrations, cartesian over A"""
    checks = {
        "source fibration": classify_functor(member.f).fibration,
        "target fibration": classify_functor(member.g).fibration,
        "cartesian": is_cartesian_functor(member).holds,
        "fiberwise discrete opfibration": is_fiberwise_opfibration(member, discrete=True).holds,
    }
    if not all(checks.values()):
        raise PropertyFailure("catalog member not a discrete opfibration", {"member": member.p.name, **checks})


def verify_q_initial(b: BarConstruction, catalog: List[TriangleOverA],
                     bounds: Optional[Bounds] = None) -> Verdict:
    """
    Exhaustive orthogonality of Q against each catalog member over A.

    For every square g∘h = k∘Q (h, k over A) exactly one diagonal d with
    d∘Q = h and g∘d = k must exist. Exceeding the enumeration cap yields an
    inconclusive verdict.
    """
    bounds = bounds or default_bounds()
    prop = "Q initial"
    t = b.input
    for member in catalog:
        verify_member(member)
    coid = check_coidentifies(b.q, identee(t.p, bounds).kappa)
    details: Dict[str, Any] = {"coidentifies": coid, "squares": 0}
    if not coid:
        return Verdict(property=prop, holds=False, witness={"reason": "Q does not coidentify kappa"}, details=details)

    bar_x, q = b.bar_x, b.q
    try:
        for member in catalog:
            g, e, e_prime = member.p, member.x, member.m
            ks = enumerate_functors(
                bar_x, e_prime,
                obj_candidates=lambda xb: [y for y in e_prime.objects if member.g.obj(y) == b.bar_f.obj(xb)],
                arr_filter=lambda a, c: member.g.arr(c) == b.bar_f.arr(a),
                cap=bounds.enumeration_cap, name="k",
            )
            for k in ks:
                hs = enumerate_functors(
                    t.x, e,
                    obj_candidates=lambda x: [y for y in e.objects if g.obj(y) == k.obj(q.obj(x))],
                    arr_filter=lambda a, c: g.arr(c) == k.arr(q.arr(a)),
                    cap=bounds.enumeration_cap, name="h",
                )
                for h in hs:
                    details["squares"] += 1
                    fixed = {q.obj(x): h.obj(x) for x in t.x.objects}
                    diagonals = [
                        d for d in enumerate_functors(
                            bar_x, e, fixed_obj=fixed,
                            arr_filter=lambda a, c: g.arr(c) == k.arr(a),
                            cap=bounds.enumeration_cap, name="d",
                        )
                        if all(d.arr(q.arr(a)) == h.arr(a) for a in t.x.arrows)
                    ]
                    if len(diagonals) != 1:
                        logger.info(f"Square without unique diagonal against {member.p.name}: {len(diagonals)}")
                        return Verdict(
                            property=prop, holds=False, details=details,
                            witness={"member": member.p.name, "k": k.obj_map, "h": h.obj_map,
                                     "diagonals": len(diagonals)},
                        )
    except BoundExceeded as exc:
        logger.warning(f"Q-initiality search inconclusive: {exc.message}")
        return Verdict(property=prop, holds=False, inconclusive=True, witness=exc.witness, details=details)
    return Verdict(property=prop, holds=True, details=details)


def factor_arrow(t: TriangleOverA, xi: str, f_cleavage: Optional[Cleavage] = None,
                 fiber_cls: Optional[Dict[str, Cleavage]] = None) -> ArrowFactorization:
    """
    ξ = κ∘ω∘ℓ: ℓ fiber-opcartesian over the vertical part of Pξ, ω P-vertical,
    κ F-cartesian over Fξ.
    """
    x_cat = t.x
    f_cl = f_cleavage or choose_cleavage(t.f, Direction.CARTESIAN)
    fiber_cls = fiber_cls or fiber_cleavages(t)
    x1, x2 = x_cat.src(xi), x_cat.dst(xi)

    kappa = f_cl.lift(x2, t.f.arr(xi))
    nus = [n for n in x_cat.hom(x1, x_cat.src(kappa)) if is_vertical(t.f, n) and x_cat.compose(kappa, n) == xi]
    if len(nus) != 1:
        raise InvariantError(f"'{xi}' does not factor uniquely through '{kappa}'", {"arrow": xi, "candidates": nus})
    nu = nus[0]
    ell = fiber_cls[t.f.obj(x1)].lift(x1, t.p.arr(nu))
    omegas = [w for w in x_cat.hom(x_cat.dst(ell), x_cat.src(kappa))
              if is_vertical(t.p, w) and x_cat.compose(w, ell) == nu]
    if len(omegas) != 1:
        raise PropertyFailure(
            f"Lifting '{ell}' is not globally opcartesian", {"arrow": xi, "lift": ell, "candidates": omegas}
        )
    logger.debug(f"Factored {xi} = {kappa} . {omegas[0]} . {ell}")
    return ArrowFactorization(original=xi, opcart_part=ell, vertical_part=omegas[0], cart_part=kappa, f_vertical=nu)


def check_factorization(t: TriangleOverA, fac: ArrowFactorization) -> bool:
    x_cat = t.x
    recomposed = x_cat.compose(fac.cart_part, x_cat.compose(fac.vertical_part, fac.opcart_part))
    pa = fiber_cleavages(t)[t.f.obj(x_cat.src(fac.original))].functor
    return (
        recomposed == fac.original
        and is_opcartesian(pa, fac.opcart_part)
        and is_vertical(t.p, fac.vertical_part)
        and is_cartesian(t.f, fac.cart_part)
    )


def act_on_class(b: BarConstruction, x_bar: str, alpha: Optional[str] = None,
                 beta: Optional[str] = None) -> str:
    """
    β•x̄ (transport along a B-arrow) or x̄•α (pullback along an A-arrow).

    The codomain of P must be a product A×B with G the first projection.
    """
    t = b.input
    prod = t.m
    if not isinstance(prod, ProductCategory):
        raise InputError("target not a product", {"functor": t.p.name})
    if (alpha is None) == (beta is None):
        raise InputError("Give exactly one of alpha and beta", {"alpha": alpha, "beta": beta})
    if x_bar not in b.blocks:
        raise InputError(f"Unknown class '{x_bar}'", {"class": x_bar})
    r = b.blocks[x_bar][0]
    a, bb = prod.object_pairs[t.p.obj(r)]
    if beta is not None:
        if prod.right.src(beta) != bb:
            raise InputError(f"'{beta}' does not start at {bb}", {"beta": beta, "object": bb})
        lift = b.fiber_cleavages[a].lift(r, prod.arrow_of(prod.left.id(a), beta))
        return b.block_of[t.x.dst(lift)]
    if prod.left.dst(alpha) != a:
        raise InputError(f"'{alpha}' does not end at {a}", {"alpha": alpha, "object": a})
    lift = compatible_cartesian_lift(t, b.g_cleavage, r, alpha)
    return b.block_of[t.x.src(lift)]


def induced_functor(b: BarConstruction, l: FunctorData, name: Optional[str] = None) -> FunctorData:
    """
    The unique L̄ with L̄∘Q = L for a functor L killing P-vertical arrows.

    L̄(μ) = L(α̂)∘L(β̂) with β̂ the fiber lifting at the source representative
    and α̂ the compatible cartesian lifting at the target representative.
    """
    t = b.input
    if l.source is not t.x:
        raise InputError("functor does not start at X", {"functor": l.name})
    if not check_coidentifies(l, identee(t.p).kappa):
        raise InputError(f"'{l.name}' does not send P-vertical arrows to identities", {"functor": l.name})
    y = l.target
    arr_map = {}
    for name_, (b1, b2) in b.bar_x.arrows.items():
        info = b.membership[name_]
        r1, r2 = b.blocks[b1][0], b.blocks[b2][0]
        beta_hat = b.fiber_cleavages[t.f.obj(r1)].lift(r1, info["beta"])
        alpha_hat = compatible_cartesian_lift(t, b.g_cleavage, r2, info["alpha"])
        arr_map[name_] = y.compose(l.arr(alpha_hat), l.arr(beta_hat))
    induced = FunctorData(
        name=name or f"{l.name}bar", source=b.bar_x, target=y,
        obj_map={blk: l.obj(members[0]) for blk, members in b.blocks.items()}, arr_map=arr_map,
    )
    composite = compose_functors(induced, b.q)
    if composite.arr_map != l.arr_map or composite.obj_map != l.obj_map:
        raise InvariantError("induced functor does not restrict to L along Q", {"functor": l.name})
    return induced


def emit_bar(b: BarConstruction, directory: str) -> List[str]:
    """Write X̄, Q, F̄, P̄ and the block table; returns the written paths"""
    os.makedirs(directory, exist_ok=True)
    outputs = {
        "bar_x.cat": category_to_file(b.bar_x),
        "q.fun": functor_to_file(b.q),
        "bar_f.fun": functor_to_file(b.bar_f),
        "bar_p.fun": functor_to_file(b.bar_p),
        "blocks.json": {"blocks": b.blocks},
    }
    paths = []
    for filename, doc in outputs.items():
        path = os.path.join(directory, filename)
        write_json(doc, path)
        paths.append(path)
    logger.info(f"Wrote bar construction to {directory}")
    return paths
