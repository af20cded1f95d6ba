from typing import Optional

import pytest

from models.category import FinCategory, FunctorData
from models.extension import CrossedExtension, XExtMorphism
from models.group import CModule, GroupHom
from services.catalog import get_group
from services.fibration import span_triangle
from services.fincat import (
    build_category,
    identity_functor,
    preorder_category,
    product_category,
    product_functor,
    terminal_category,
    to_terminal,
)
from services.grp import cyclic_group, identity_hom, trivial_action, trivial_module, zero_hom


# ---------------------------------------------------------------------------
# Categories and functors
# ---------------------------------------------------------------------------

def arrow_category() -> FinCategory:
    """0 -u-> 1"""
    return preorder_category("2", ["0", "1"], {"u": ("0", "1")})


def iso_category() -> FinCategory:
    """Two objects joined by an isomorphism f with inverse g"""
    arrows = {"1_x": ("x", "x"), "1_y": ("y", "y"), "f": ("x", "y"), "g": ("y", "x")}
    table = {
        ("1_x", "1_x"): "1_x", ("1_y", "1_y"): "1_y",
        ("f", "1_x"): "f", ("1_y", "f"): "f",
        ("g", "1_y"): "g", ("1_x", "g"): "g",
        ("g", "f"): "1_x", ("f", "g"): "1_y",
    }
    return build_category("I", ["x", "y"], arrows, {"x": "1_x", "y": "1_y"}, table)


def base_a() -> FinCategory:
    return preorder_category("A", ["a0", "a1"], {"alpha": ("a0", "a1")})


def base_b() -> FinCategory:
    return preorder_category("B", ["b0", "b1"], {"beta": ("b0", "b1")})


def inclusion(target: FinCategory, obj: str) -> FunctorData:
    one = terminal_category()
    return FunctorData(name=f"incl[{obj}]", source=one, target=target,
                       obj_map={"*": obj}, arr_map={"1_*": target.id(obj)})


def omega_span():
    """
    A regular span into A×B for which the comparison ω at (p, alpha, beta)
    is the non-invertible vertical arrow e: t -> s.
    """
    a, b = base_a(), base_b()
    prod, _, _ = product_category(a, b)
    x = preorder_category("X", ["p", "q", "r", "s", "t"], {
        "a": ("r", "p"), "b": ("p", "q"), "c": ("s", "q"), "d": ("r", "t"), "e": ("t", "s"),
    })
    obj_map = {"r": "(a0,b0)", "t": "(a0,b1)", "s": "(a0,b1)", "p": "(a1,b0)", "q": "(a1,b1)"}
    arr_map = {f"1_{o}": prod.id(target) for o, target in obj_map.items()}
    arr_map.update({
        "a": "(alpha,1_b0)", "b": "(1_a1,beta)", "c": "(alpha,1_b1)", "d": "(1_a0,beta)", "e": "(1_a0,1_b1)",
        "b.a": "(alpha,beta)", "e.d": "(1_a0,beta)", "c.e": "(alpha,1_b1)",
    })
    return FunctorData(name="S", source=x, target=prod, obj_map=obj_map, arr_map=arr_map)


def collapse_span():
    """
    id × ! : A×E -> A×1 with E = e0 -v-> e1; every fiber is one connected
    component, so the bar construction recovers A.
    """
    a = base_a()
    e = preorder_category("E", ["e0", "e1"], {"v": ("e0", "e1")})
    one = terminal_category()
    source, _, _ = product_category(a, e)
    target, _, _ = product_category(a, one)
    return product_functor(identity_functor(a), to_terminal(e, one), source, target)


@pytest.fixture
def arrow_cat():
    return arrow_category()


@pytest.fixture
def iso_cat():
    return iso_category()


@pytest.fixture
def product_ab():
    return product_category(base_a(), base_b())


@pytest.fixture
def identity_span(product_ab):
    prod, _, _ = product_ab
    return identity_functor(prod)


@pytest.fixture
def omega():
    return omega_span()


@pytest.fixture
def r0_failing_span(product_ab):
    prod, _, _ = product_ab
    return inclusion(prod, "(a1,b0)")


@pytest.fixture
def r1_failing_span(product_ab):
    prod, _, _ = product_ab
    return inclusion(prod, "(a0,b0)")


@pytest.fixture
def collapse():
    return collapse_span()


@pytest.fixture
def collapse_triangle(collapse):
    return span_triangle(collapse, 0)


# ---------------------------------------------------------------------------
# Groups and extensions
# ---------------------------------------------------------------------------

@pytest.fixture
def z2():
    return get_group("Z2")


@pytest.fixture
def z4():
    return get_group("Z4")


def z4_extension() -> CrossedExtension:
    """0 -> B -> Z4 -> C -> 1 with B, C of order 2"""
    c, b = cyclic_group(2, name="C"), cyclic_group(2, name="B")
    g = cyclic_group(4, name="G")
    mod = trivial_module(c, b)
    p = GroupHom(name="p[X]", source=g, target=c, map={x: str(int(x) % 2) for x in g.elements})
    j = GroupHom(name="j[X]", source=b, target=g, map={"0": "0", "1": "2"})
    return CrossedExtension(name="X", c=c, b_module=mod, groups=(g,), p=p, j=j)


@pytest.fixture
def z4_ext():
    return z4_extension()


def two_fold(name: str, g1: str, g2: str, j: dict, d: dict, module: Optional[CModule] = None) -> CrossedExtension:
    """0 -> Z2 -> G2 -> G1 -> Z1 -> 1 with trivial actions, all from the catalog"""
    c, b = get_group("Z1"), get_group("Z2")
    top, bottom = get_group(g2), get_group(g1)
    return CrossedExtension(
        name=name, c=c, b_module=module or trivial_module(c, b), groups=(bottom, top),
        p=zero_hom(bottom, c),
        j=GroupHom(name=f"j[{name}]", source=b, target=top, map=j),
        d=(GroupHom(name=f"d1[{name}]", source=top, target=bottom, map=d),),
        action=trivial_action(bottom, top),
    )


def doubling_weak_equivalence() -> XExtMorphism:
    """
    (0 -> Z2 = Z2 -> Z1) -> (0 -> Z2 -> Z4 -> Z2 -> Z1), doubling on the top
    term. A weak equivalence that is not opcartesian: id_X does not factor.
    """
    x = two_fold("X", "Z1", "Z2", j={"0": "0", "1": "1"}, d={"0": "0", "1": "0"})
    w = two_fold("W", "Z2", "Z4", j={"0": "0", "1": "2"}, d={k: str(int(k) % 2) for k in "0123"}, module=x.b_module)
    f1 = zero_hom(x.term(1), w.term(1))
    f2 = GroupHom(name="double", source=x.term(2), target=w.term(2), map={"0": "0", "1": "2"})
    return XExtMorphism(name="w", source=x, target=w, gamma=identity_hom(x.c), f=(f1, f2), beta=identity_hom(x.b))


@pytest.fixture
def doubling():
    return doubling_weak_equivalence()
