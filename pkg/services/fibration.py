import logging
from functools import wraps
from typing import Any, Dict, List, Optional, Tuple

from models.category import FinCategory, FunctorData, ProductCategory
from models.fibration import ChevalleyReport, Cleavage, Direction, TriangleOverA
from models.schemas import FunctorClassification, Verdict
from services.fincat import (
    build_category,
    comma_category,
    compose_functors,
    identity_functor,
    is_isomorphism,
    opposite_category,
    opposite_functor,
    preorder_category,
    terminal_category,
    to_terminal,
    validate_functor,
)
from utils.errors import InputError, InvariantError, PropertyFailure

logger = logging.getLogger(__name__)


def _memoized(fn):
    """Cache results on the first argument's instance dict; they go when it goes"""
    slot = f"_memo_{fn.__name__}"

    @wraps(fn)
    def wrapper(owner, *args):
        memo = owner.__dict__.setdefault(slot, {})
        if args not in memo:
            memo[args] = fn(owner, *args)
        return memo[args]

    return wrapper


# ---------------------------------------------------------------------------
# Cartesian arrows
# ---------------------------------------------------------------------------

@_memoized
def _lifting_failure(f: FunctorData, arrow: str, direction: Direction) -> Optional[Tuple[str, str, Tuple[str, ...]]]:
    """
    First (test arrow, base arrow, factorizations) violating the universal
    property, or None. O(|arrows|^3) in the worst case; memoized per arrow.
    """
    e, b = f.source, f.target
    x, y = e.src(arrow), e.dst(arrow)
    fa = f.arr(arrow)
    if direction is Direction.CARTESIAN:
        for g in e.arrows_into(y):
            w = e.src(g)
            fg = f.arr(g)
            for psi in b.hom(f.obj(w), f.obj(x)):
                if b.compose(fa, psi) != fg:
                    continue
                hs = tuple(h for h in e.hom(w, x) if f.arr(h) == psi and e.compose(arrow, h) == g)
                if len(hs) != 1:
                    return g, psi, hs
    else:
        for g in e.arrows_from(x):
            w = e.dst(g)
            fg = f.arr(g)
            for psi in b.hom(f.obj(y), f.obj(w)):
                if b.compose(psi, fa) != fg:
                    continue
                hs = tuple(h for h in e.hom(y, w) if f.arr(h) == psi and e.compose(h, arrow) == g)
                if len(hs) != 1:
                    return g, psi, hs
    return None


def is_cartesian(f: FunctorData, arrow: str) -> bool:
    """Decide F-cartesianness of `arrow` by exhaustive enumeration"""
    f.source.src(arrow)
    return _lifting_failure(f, arrow, Direction.CARTESIAN) is None


def is_opcartesian(f: FunctorData, arrow: str) -> bool:
    f.source.src(arrow)
    return _lifting_failure(f, arrow, Direction.OPCARTESIAN) is None


def is_lifting(f: FunctorData, arrow: str, direction: Direction) -> bool:
    if direction is Direction.CARTESIAN:
        return is_cartesian(f, arrow)
    return is_opcartesian(f, arrow)


def cartesian_witness(f: FunctorData, arrow: str, direction: Direction = Direction.CARTESIAN) -> Optional[Dict[str, Any]]:
    failure = _lifting_failure(f, arrow, direction)
    if failure is None:
        return None
    g, psi, hs = failure
    return {"arrow": arrow, "test_arrow": g, "base_arrow": psi, "factorizations": list(hs)}


def is_vertical(f: FunctorData, arrow: str) -> bool:
    return f.target.is_identity(f.arr(arrow))


def liftings(f: FunctorData, x: str, phi: str, direction: Direction) -> List[str]:
    """All (op)cartesian liftings of φ at x, in name order"""
    e, b = f.source, f.target
    if direction is Direction.CARTESIAN:
        if b.dst(phi) != f.obj(x):
            raise InputError(f"'{phi}' does not end at F({x})", {"object": x, "arrow": phi})
        candidates = e.arrows_into(x)
    else:
        if b.src(phi) != f.obj(x):
            raise InputError(f"'{phi}' does not start at F({x})", {"object": x, "arrow": phi})
        candidates = e.arrows_from(x)
    return [a for a in candidates if f.arr(a) == phi and is_lifting(f, a, direction)]


def _base_arrows_at(f: FunctorData, x: str, direction: Direction) -> List[str]:
    b = f.target
    return b.arrows_into(f.obj(x)) if direction is Direction.CARTESIAN else b.arrows_from(f.obj(x))


def classify_functor(f: FunctorData) -> FunctorClassification:
    """Decide the four lifting properties; discrete means exactly one lifting"""
    e = f.source
    flags = {}
    witness: Dict[str, Any] = {}
    for direction, plain, discrete in (
        (Direction.CARTESIAN, "fibration", "discrete_fibration"),
        (Direction.OPCARTESIAN, "opfibration", "discrete_opfibration"),
    ):
        flags[plain] = True
        flags[discrete] = True
        for x in e.objects:
            candidates = e.arrows_into(x) if direction is Direction.CARTESIAN else e.arrows_from(x)
            for phi in _base_arrows_at(f, x, direction):
                over = [a for a in candidates if f.arr(a) == phi]
                if len(over) != 1 and flags[discrete]:
                    flags[discrete] = False
                    witness.setdefault(discrete, {"object": x, "arrow": phi, "liftings": over})
                if not any(is_lifting(f, a, direction) for a in over):
                    if flags[plain]:
                        witness.setdefault(plain, {"object": x, "arrow": phi})
                    flags[plain] = False
    logger.debug(f"Classified {f.name}: {flags}")
    return FunctorClassification(witness=witness, **flags)


def choose_cleavage(f: FunctorData, direction: Direction = Direction.CARTESIAN) -> Cleavage:
    """
    Lexicographically least (op)cartesian lifting for every (x, φ).

    Raises:
        PropertyFailure: some (x, φ) has no lifting.
    """
    lifts: Dict[Tuple[str, str], str] = {}
    for x in f.source.objects:
        for phi in _base_arrows_at(f, x, direction):
            found = liftings(f, x, phi, direction)
            if not found:
                kind = "a fibration" if direction is Direction.CARTESIAN else "an opfibration"
                raise PropertyFailure(
                    f"not a fibration in that direction: '{f.name}' is not {kind}",
                    {"object": x, "arrow": phi, "direction": direction.value},
                )
            lifts[(x, phi)] = found[0]
    return Cleavage(functor=f, lifts=lifts, direction=direction)


@_memoized
def projection(prod: ProductCategory, factor: int) -> FunctorData:
    """Pr0 or Pr1 of a product category, one shared instance per product"""
    if factor not in (0, 1):
        raise InputError(f"Factor must be 0 or 1, got {factor}", {"factor": factor})
    target = prod.left if factor == 0 else prod.right
    return FunctorData(
        name=f"Pr{factor}[{prod.name}]",
        source=prod,
        target=target,
        obj_map={n: pair[factor] for n, pair in prod.object_pairs.items()},
        arr_map={n: pair[factor] for n, pair in prod.arrow_pairs.items()},
    )


def projection_cleavage(prod: ProductCategory, factor: int = 0,
                        direction: Direction = Direction.CARTESIAN) -> Cleavage:
    """The split cleavage of Pr_i lifting φ to (φ, 1) or (1, φ)"""
    pr = projection(prod, factor)
    base = prod.left if factor == 0 else prod.right
    lifts = {}
    for obj, pair in prod.object_pairs.items():
        here, other = pair[factor], pair[1 - factor]
        other_cat = prod.right if factor == 0 else prod.left
        at = base.arrows_into(here) if direction is Direction.CARTESIAN else base.arrows_from(here)
        for phi in at:
            ident = other_cat.id(other)
            lifts[(obj, phi)] = prod.arrow_of(phi, ident) if factor == 0 else prod.arrow_of(ident, phi)
    return Cleavage(functor=pr, lifts=lifts, direction=direction)


def default_cleavage(g: FunctorData, direction: Direction = Direction.CARTESIAN) -> Cleavage:
    """Projection cleavage when g is a product projection, least-name choice otherwise"""
    src = g.source
    if isinstance(src, ProductCategory):
        for factor in (0, 1):
            pr = projection(src, factor)
            if g.target is pr.target and g.obj_map == pr.obj_map and g.arr_map == pr.arr_map:
                cl = projection_cleavage(src, factor, direction)
                return Cleavage(functor=g, lifts=cl.lifts, direction=direction)
    return choose_cleavage(g, direction)


def split_failure(cl: Cleavage) -> Optional[Dict[str, Any]]:
    e, b = cl.functor.source, cl.functor.target
    for (x, phi), a in sorted(cl.lifts.items()):
        if b.is_identity(phi) and not e.is_identity(a):
            return {"object": x, "arrow": phi, "lift": a, "reason": "identity not lifted to identity"}
    for (x, phi), a in sorted(cl.lifts.items()):
        if cl.direction is Direction.CARTESIAN:
            s = e.src(a)
            for psi in b.arrows_into(b.src(phi)):
                lhs = cl.lift(x, b.compose(phi, psi))
                rhs = e.compose(a, cl.lift(s, psi))
                if lhs != rhs:
                    return {"object": x, "arrows": [phi, psi], "composite_lift": lhs, "lift_composite": rhs}
        else:
            d = e.dst(a)
            for psi in b.arrows_from(b.dst(phi)):
                lhs = cl.lift(x, b.compose(psi, phi))
                rhs = e.compose(cl.lift(d, psi), a)
                if lhs != rhs:
                    return {"object": x, "arrows": [psi, phi], "composite_lift": lhs, "lift_composite": rhs}
    return None


def is_split(cl: Cleavage) -> bool:
    """Chosen lifts compose functorially and identities lift to identities"""
    return split_failure(cl) is None


# ---------------------------------------------------------------------------
# Fibers and triangles
# ---------------------------------------------------------------------------

@_memoized
def fiber(f: FunctorData, a: str) -> Tuple[FinCategory, FunctorData]:
    """Subcategory over a and id_a, with its inclusion; names are kept"""
    base = f.target
    ida = base.id(a)
    e = f.source
    objects = [x for x in e.objects if f.obj(x) == a]
    arrows = {n: ends for n, ends in e.arrows.items() if f.arr(n) == ida}
    table = {k: v for k, v in e.table.items() if k[0] in arrows and k[1] in arrows}
    cat = build_category(f"{e.name}_{a}", objects, arrows, {x: e.identity[x] for x in objects}, table)
    inclusion = FunctorData(
        name=f"incl[{cat.name}]",
        source=cat,
        target=e,
        obj_map={x: x for x in objects},
        arr_map={n: n for n in arrows},
    )
    return cat, inclusion


@_memoized
def fiber_functor(t: TriangleOverA, a: str) -> FunctorData:
    """P_a: X_a -> M_a"""
    xa, _ = fiber(t.f, a)
    ma, _ = fiber(t.g, a)
    return FunctorData(
        name=f"{t.p.name}_{a}",
        source=xa,
        target=ma,
        obj_map={x: t.p.obj(x) for x in xa.objects},
        arr_map={n: t.p.arr(n) for n in xa.arrows},
    )


def fiber_cleavages(t: TriangleOverA, direction: Direction = Direction.OPCARTESIAN) -> Dict[str, Cleavage]:
    return {a: choose_cleavage(fiber_functor(t, a), direction) for a in t.a.objects}


def is_cartesian_functor(t: TriangleOverA, direction: Direction = Direction.CARTESIAN) -> Verdict:
    """P maps every F-(op)cartesian arrow to a G-(op)cartesian arrow"""
    prop = "cartesian functor" if direction is Direction.CARTESIAN else "opcartesian functor"
    for a in t.x.arrow_names:
        if is_lifting(t.f, a, direction) and not is_lifting(t.g, t.p.arr(a), direction):
            return Verdict(property=prop, holds=False, witness={"arrow": a, "image": t.p.arr(a)})
    return Verdict(property=prop, holds=True)


def _fiberwise(t: TriangleOverA, direction: Direction, discrete: bool) -> Verdict:
    kind = "fibration" if direction is Direction.CARTESIAN else "opfibration"
    prop = f"fiberwise {'discrete ' if discrete else ''}{kind}"
    for a in t.a.objects:
        cls = classify_functor(fiber_functor(t, a))
        flag = getattr(cls, f"discrete_{kind}" if discrete else kind)
        if not flag:
            key = f"discrete_{kind}" if discrete else kind
            return Verdict(property=prop, holds=False, witness={"fiber": a, **cls.witness.get(key, {})})
    return Verdict(property=prop, holds=True)


def is_fiberwise_opfibration(t: TriangleOverA, discrete: bool = False) -> Verdict:
    return _fiberwise(t, Direction.OPCARTESIAN, discrete)


def is_fiberwise_fibration(t: TriangleOverA, discrete: bool = False) -> Verdict:
    return _fiberwise(t, Direction.CARTESIAN, discrete)


def has_globally_opcartesian_liftings(t: TriangleOverA) -> Verdict:
    """Every fiber-opcartesian arrow is P-opcartesian in the whole of X"""
    prop = "globally opcartesian liftings"
    for a in t.a.objects:
        pa = fiber_functor(t, a)
        for arrow in pa.source.arrow_names:
            if is_opcartesian(pa, arrow) and not is_opcartesian(t.p, arrow):
                return Verdict(
                    property=prop,
                    holds=False,
                    witness={"fiber": a, **(cartesian_witness(t.p, arrow, Direction.OPCARTESIAN) or {})},
                )
    return Verdict(property=prop, holds=True)


def compatible_cartesian_lift(t: TriangleOverA, g_cleavage: Cleavage, x: str, alpha: str) -> str:
    """
    An F-cartesian lifting of α at x whose P-image is the chosen G-lifting.

    Exists whenever P is a fiberwise opfibration in Fib(A).
    """
    target = g_cleavage.lift(t.p.obj(x), alpha)
    for a in t.x.arrows_into(x):
        if t.p.arr(a) == target and t.f.arr(a) == alpha and is_cartesian(t.f, a):
            return a
    raise PropertyFailure(
        "no F-cartesian lifting compatible with the G-cleavage",
        {"object": x, "arrow": alpha, "g_lift": target},
    )


def _unique(candidates: List[str], what: str, witness: Dict[str, Any]) -> str:
    if len(candidates) != 1:
        raise PropertyFailure(f"{what} is not uniquely determined", {**witness, "candidates": candidates})
    return candidates[0]


def span_triangle(s: FunctorData, factor: int = 0) -> TriangleOverA:
    """(S, S_i, Pr_i) for a span S into a product"""
    if not isinstance(s.target, ProductCategory):
        raise InputError("target not a product", {"functor": s.name})
    pr = projection(s.target, factor)
    return TriangleOverA(p=s, f=compose_functors(pr, s, name=f"S{factor}[{s.name}]"), g=pr)


def is_regular_span(s: FunctorData) -> Verdict:
    """(R0) vertical cartesian liftings for S0 and (R1) vertical opcartesian liftings for S1"""
    prop = "regular span"
    if not isinstance(s.target, ProductCategory):
        raise InputError("target not a product", {"functor": s.name})
    prod = s.target
    s0 = span_triangle(s, 0).f
    s1 = span_triangle(s, 1).f
    x_cat = s.source
    for x in x_cat.objects:
        for alpha in prod.left.arrows_into(s0.obj(x)):
            if not any(
                s0.arr(a) == alpha and is_vertical(s1, a) and is_cartesian(s0, a) for a in x_cat.arrows_into(x)
            ):
                return Verdict(property=prop, holds=False, witness={"condition": "R0", "object": x, "arrow": alpha})
    for x in x_cat.objects:
        for beta in prod.right.arrows_from(s1.obj(x)):
            if not any(
                s1.arr(a) == beta and is_vertical(s0, a) and is_opcartesian(s1, a) for a in x_cat.arrows_from(x)
            ):
                return Verdict(property=prop, holds=False, witness={"condition": "R1", "object": x, "arrow": beta})
    return Verdict(property=prop, holds=True)


# ---------------------------------------------------------------------------
# Condition (C)
# ---------------------------------------------------------------------------

def check_condition_c(
    t: TriangleOverA,
    cart_cl: Optional[Cleavage] = None,
    fiber_cls: Optional[Dict[str, Cleavage]] = None,
) -> Verdict:
    """
    Build the comparison ω: (α*β)_*α*x -> α*β_*x for every (x, α, β) and test invertibility.

    `cart_cl` is a cartesian cleavage of G; F-liftings are then chosen with
    P-image equal to the G-lifting. Without it, the least-name F-cleavage is used.

    Raises:
        PropertyFailure: a lifting required by the construction is missing.
    """
    prop = "condition (C)"
    x_cat, a_cat = t.x, t.a
    fiber_cls = fiber_cls or fiber_cleavages(t)
    f_cl = None if cart_cl is not None else choose_cleavage(t.f, Direction.CARTESIAN)

    def f_lift(obj: str, alpha: str) -> str:
        if cart_cl is not None:
            return compatible_cartesian_lift(t, cart_cl, obj, alpha)
        return f_cl.lift(obj, alpha)

    checked = 0
    for x in x_cat.objects:
        fx = t.f.obj(x)
        for beta in fiber_cls[fx].functor.target.arrows_from(t.p.obj(x)):
            beta_hat = fiber_cls[fx].lift(x, beta)
            y = x_cat.dst(beta_hat)
            for alpha in a_cat.arrows_into(fx):
                a = a_cat.src(alpha)
                alpha_x = f_lift(x, alpha)
                alpha_y = f_lift(y, alpha)
                ax, ay = x_cat.src(alpha_x), x_cat.src(alpha_y)
                target = x_cat.compose(beta_hat, alpha_x)
                u = _unique(
                    [h for h in x_cat.hom(ax, ay) if is_vertical(t.f, h) and x_cat.compose(alpha_y, h) == target],
                    "alpha*beta_hat",
                    {"object": x, "alpha": alpha, "beta": beta},
                )
                ell = fiber_cls[a].lift(ax, t.p.arr(u))
                z = x_cat.dst(ell)
                omega = _unique(
                    [w for w in x_cat.hom(z, ay) if is_vertical(t.p, w) and x_cat.compose(w, ell) == u],
                    "omega",
                    {"object": x, "alpha": alpha, "beta": beta},
                )
                checked += 1
                if not is_isomorphism(x_cat, omega):
                    logger.info(f"Condition (C) fails at x={x}, alpha={alpha}, beta={beta}: omega={omega}")
                    return Verdict(
                        property=prop,
                        holds=False,
                        witness={"object": x, "alpha": alpha, "beta": beta, "omega": omega},
                        details={"checked": checked},
                    )
    return Verdict(property=prop, holds=True, details={"checked": checked})


def is_two_sided_fibration(s: FunctorData) -> Verdict:
    """Regular span satisfying condition (C) over Pr0"""
    prop = "two-sided fibration"
    regular = is_regular_span(s)
    if not regular:
        return Verdict(property=prop, holds=False, witness=regular.witness)
    t = span_triangle(s, 0)
    c = check_condition_c(t, cart_cl=projection_cleavage(s.target, 0))
    return Verdict(property=prop, holds=c.holds, witness=c.witness, details=c.details)


# ---------------------------------------------------------------------------
# Chevalley criterion
# ---------------------------------------------------------------------------

def over_terminal(p: FunctorData) -> TriangleOverA:
    """P as a triangle over the terminal category"""
    one = terminal_category()
    return TriangleOverA(p=p, f=to_terminal(p.source, one), g=to_terminal(p.target, one))


def chevalley_check(p: FunctorData, base: Optional[TriangleOverA] = None,
                    in_fibrations: bool = False) -> ChevalleyReport:
    """
    Build R: (X,F)↓(X,F) -> P↓(M,G) and, when possible, its left adjoint L.

    With no `base` this is the plain CAT criterion. With `in_fibrations`, L
    must moreover be a cartesian functor between the comma fibrations over A.
    """
    t = base or over_terminal(p)
    if t.p is not p:
        raise InputError("base triangle does not carry the given functor", {"functor": p.name})
    x_cat, m_cat = t.x, t.m
    f_vert = lambda x0, nu, x1: is_vertical(t.f, nu)  # noqa: E731
    g_vert = lambda x, beta, m: is_vertical(t.g, beta)  # noqa: E731
    h = comma_category(identity_functor(x_cat), identity_functor(x_cat), name=f"H[{p.name}]", object_filter=f_vert)
    k = comma_category(p, identity_functor(m_cat), name=f"K[{p.name}]", object_filter=g_vert)

    r_obj = {o: k.object_of(x0, p.arr(nu), p.obj(x1)) for o, (x0, nu, x1) in h.triples.items()}
    r_arr = {}
    for a, (xi0, xi1) in h.squares.items():
        o, o2 = h.comma.arrows[a]
        r_arr[a] = k.arrow_of(xi0, p.arr(xi1), r_obj[o], r_obj[o2])
    r = FunctorData(name=f"R[{p.name}]", source=h.comma, target=k.comma, obj_map=r_obj, arr_map=r_arr)

    def absent(witness: Dict[str, Any]) -> ChevalleyReport:
        logger.info(f"Chevalley check for {p.name}: no left adjoint ({witness})")
        return ChevalleyReport(is_opfibration=False, r=r, l=None, unit_identity=False,
                               counit_identity=False, l_cartesian=False if in_fibrations else None,
                               witness=witness)

    try:
        cls = fiber_cleavages(t)
    except PropertyFailure as exc:
        return absent({"reason": "fiber not an opfibration", **exc.witness})

    l_obj = {}
    for o, (x, beta, m) in k.triples.items():
        lift = cls[t.f.obj(x)].lift(x, beta)
        l_obj[o] = h.object_of(x, lift, x_cat.dst(lift))
    l_arr = {}
    for a, (xi, mu) in k.squares.items():
        o, o2 = k.comma.arrows[a]
        x, beta, _ = k.triples[o]
        x2, beta2, _ = k.triples[o2]
        bh = cls[t.f.obj(x)].lift(x, beta)
        bh2 = cls[t.f.obj(x2)].lift(x2, beta2)
        want = x_cat.compose(bh2, xi)
        phis = [phi for phi in x_cat.hom(x_cat.dst(bh), x_cat.dst(bh2))
                if p.arr(phi) == mu and x_cat.compose(phi, bh) == want]
        if len(phis) != 1:
            return absent({"reason": "lifting not globally opcartesian", "arrow": a, "candidates": phis})
        l_arr[a] = h.arrow_of(xi, phis[0], l_obj[o], l_obj[o2])
    l_fun = FunctorData(name=f"L[{p.name}]", source=k.comma, target=h.comma, obj_map=l_obj, arr_map=l_arr)
    if not validate_functor(l_fun).ok:
        return absent({"reason": "L is not functorial"})

    rl = compose_functors(r, l_fun)
    unit_identity = all(rl.obj(o) == o for o in k.comma.objects) and all(rl.arr(a) == a for a in k.comma.arrows)

    eps = {}
    for o, (x0, nu, x1) in h.triples.items():
        ell = cls[t.f.obj(x0)].lift(x0, p.arr(nu))
        omegas = [w for w in x_cat.hom(x_cat.dst(ell), x1) if is_vertical(p, w) and x_cat.compose(w, ell) == nu]
        if len(omegas) != 1:
            return absent({"reason": "counit undefined", "object": o, "candidates": omegas})
        eps[o] = h.arrow_of(x_cat.id(x0), omegas[0], l_obj[r_obj[o]], o)

    lr = compose_functors(l_fun, r)
    natural = all(
        h.comma.compose(eps[h.comma.dst(a)], lr.arr(a)) == h.comma.compose(a, eps[h.comma.src(a)])
        for a in h.comma.arrow_names
    )
    r_eps = all(k.comma.is_identity(r.arr(eps[o])) for o in h.comma.objects)
    eps_l = all(h.comma.is_identity(eps[l_obj[o]]) for o in k.comma.objects)
    counit_identity = all(h.comma.is_identity(e) for e in eps.values())
    is_opfib = unit_identity and natural and r_eps and eps_l

    l_cartesian = None
    if in_fibrations:
        kf = FunctorData(name=f"K->A[{p.name}]", source=k.comma, target=t.a,
                         obj_map={o: t.f.obj(x) for o, (x, _, _) in k.triples.items()},
                         arr_map={a: t.f.arr(xi) for a, (xi, _) in k.squares.items()})
        hf = FunctorData(name=f"H->A[{p.name}]", source=h.comma, target=t.a,
                         obj_map={o: t.f.obj(x0) for o, (x0, _, _) in h.triples.items()},
                         arr_map={a: t.f.arr(xi0) for a, (xi0, _) in h.squares.items()})
        l_cartesian = is_cartesian_functor(TriangleOverA(p=l_fun, f=kf, g=hf)).holds

    logger.info(
        f"Chevalley check for {p.name}: opfibration={is_opfib}, unit_identity={unit_identity}, "
        f"counit_identity={counit_identity}, l_cartesian={l_cartesian}"
    )
    return ChevalleyReport(
        is_opfibration=is_opfib,
        r=r,
        l=l_fun,
        unit_identity=unit_identity,
        counit_identity=counit_identity,
        l_cartesian=l_cartesian,
        witness={} if is_opfib else {"natural": natural, "r_eps": r_eps, "eps_l": eps_l},
    )


# ---------------------------------------------------------------------------
# Liftings up to vertical isomorphism, duals, the fiberwise counterexample
# ---------------------------------------------------------------------------

def vertical_iso_between_liftings(f: FunctorData, first: str, second: str,
                                  direction: Direction = Direction.CARTESIAN) -> str:
    """
    The unique vertical isomorphism θ relating two liftings of one arrow.

    Cartesian: second∘θ = first with θ: src(first) -> src(second).
    Opcartesian: θ∘first = second with θ: dst(first) -> dst(second).
    """
    e = f.source
    anchor = e.dst if direction is Direction.CARTESIAN else e.src
    if f.arr(first) != f.arr(second) or anchor(first) != anchor(second):
        raise InputError("arrows are not liftings of one arrow at one object", {"arrows": [first, second]})
    for a in (first, second):
        if not is_lifting(f, a, direction):
            raise PropertyFailure(f"'{a}' is not {direction.value}", {"arrow": a})
    if direction is Direction.CARTESIAN:
        thetas = [h for h in e.hom(e.src(first), e.src(second))
                  if is_vertical(f, h) and e.compose(second, h) == first]
    else:
        thetas = [h for h in e.hom(e.dst(first), e.dst(second))
                  if is_vertical(f, h) and e.compose(h, first) == second]
    if len(thetas) != 1 or not is_isomorphism(e, thetas[0]):
        raise InvariantError("liftings are not related by a unique vertical isomorphism",
                             {"arrows": [first, second], "candidates": thetas})
    return thetas[0]


def opposite_triangle(t: TriangleOverA) -> TriangleOverA:
    """The triangle of opposite categories; swaps cartesian and opcartesian"""
    x_op, m_op, a_op = opposite_category(t.x), opposite_category(t.m), opposite_category(t.a)
    return TriangleOverA(
        p=opposite_functor(t.p, x_op, m_op),
        f=opposite_functor(t.f, x_op, a_op),
        g=opposite_functor(t.g, m_op, a_op),
    )


def counterexample_triangle(dual: bool = False) -> TriangleOverA:
    """
    A fiberwise fibration over a0 -> a1 that is not a fibration in CAT/A.

    The lifting xi of mu is cartesian in the fiber over a1 but not globally:
    xi' over mu.mu' does not factor through it. With `dual`, the opposite
    triangle, a fiberwise opfibration without global opcartesian liftings.
    """
    x_cat = preorder_category("X", ["x0", "x1", "x1'"], {"xi": ("x1", "x1'"), "xi'": ("x0", "x1'")})
    m_cat = preorder_category("M", ["m0", "m1", "m1'"], {"mu'": ("m0", "m1"), "mu": ("m1", "m1'")})
    a_cat = preorder_category("A", ["a0", "a1"], {"alpha": ("a0", "a1")})
    p = FunctorData(
        name="P", source=x_cat, target=m_cat,
        obj_map={"x0": "m0", "x1": "m1", "x1'": "m1'"},
        arr_map={"1_x0": "1_m0", "1_x1": "1_m1", "1_x1'": "1_m1'", "xi": "mu", "xi'": "mu.mu'"},
    )
    g = FunctorData(
        name="G", source=m_cat, target=a_cat,
        obj_map={"m0": "a0", "m1": "a1", "m1'": "a1"},
        arr_map={"1_m0": "1_a0", "1_m1": "1_a1", "1_m1'": "1_a1", "mu'": "alpha", "mu": "1_a1",
                 "mu.mu'": "alpha"},
    )
    t = TriangleOverA(p=p, f=compose_functors(g, p, name="F"), g=g)
    return opposite_triangle(t) if dual else t
