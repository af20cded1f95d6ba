import os

import pytest

from models.category import FunctorData
from models.fibration import TriangleOverA
from services.catalog import get_group
from services.classification import extension_from_cocycle, normalized_cocycles
from services.factorization import (
    act_on_class,
    bar_triangle,
    build_bar_x,
    check_factorization,
    emit_bar,
    factor_arrow,
    induced_functor,
    verify_bar_construction,
    verify_q_initial,
)
from services.fibration import counterexample_triangle, fiber, is_fiberwise_opfibration, span_triangle
from services.fincat import (
    discrete_category,
    identity_functor,
    product_category,
    product_functor,
    terminal_category,
    to_terminal,
    validate_category,
    validate_functor,
)
from services.grp import trivial_module
from services.xmod import materialize_categories, module_cleavage
from tests.conftest import inclusion
from utils.errors import InputError, PropertyFailure


@pytest.fixture
def collapse_bar(collapse_triangle):
    return build_bar_x(collapse_triangle)


@pytest.fixture
def identity_bar(identity_span):
    return build_bar_x(span_triangle(identity_span, 0))


class TestBarConstruction:
    def test_components_of_collapse(self, collapse_bar):
        assert collapse_bar.blocks == {
            "[(a0,e0)]": ["(a0,e0)", "(a0,e1)"],
            "[(a1,e0)]": ["(a1,e0)", "(a1,e1)"],
        }
        assert len(collapse_bar.bar_x.arrows) == 3
        assert validate_category(collapse_bar.bar_x).ok
        for f in (collapse_bar.q, collapse_bar.bar_f, collapse_bar.bar_p):
            assert validate_functor(f).ok

    def test_every_promised_property_holds(self, collapse_bar):
        verdicts = verify_bar_construction(collapse_bar)
        assert [v.property for v in verdicts] == [
            "factorization commutes",
            "bar_f fibration",
            "cartesian characterization",
            "bar_p fiberwise discrete opfibration",
            "bar_p cartesian functor",
            "q cartesian functor",
            "fibers are components",
        ]
        assert all(v.holds for v in verdicts)

    def test_discrete_span_keeps_every_object(self, identity_bar):
        assert len(identity_bar.blocks) == 4
        assert all(v.holds for v in verify_bar_construction(identity_bar))

    def test_membership_records_both_transports(self, collapse_bar):
        name = "(alpha,1_*):[(a0,e0)]->[(a1,e0)]"
        assert collapse_bar.membership[name] == {
            "alpha": "alpha", "beta": "(1_a0,1_*)",
            "pushed": "(a0,e0)", "pulled": "(a0,e0)", "member": True,
        }

    def test_missing_compatible_lift(self):
        with pytest.raises(PropertyFailure):
            build_bar_x(counterexample_triangle())

    def test_q_is_initial_against_bar_p(self, collapse_bar):
        verdict = verify_q_initial(collapse_bar, [bar_triangle(collapse_bar)])
        assert verdict.holds
        assert verdict.details["coidentifies"]
        assert verdict.details["squares"] >= 1

    def test_induced_functor_from_q_is_identity(self, collapse_bar):
        qbar = induced_functor(collapse_bar, collapse_bar.q)
        assert qbar.arr_map == {a: a for a in collapse_bar.bar_x.arrows}

    def test_induced_functor_needs_vertical_killing(self, collapse_bar, collapse_triangle):
        with pytest.raises(InputError):
            induced_functor(collapse_bar, identity_functor(collapse_triangle.x))

    def test_emit_bar(self, collapse_bar, tmp_path):
        paths = emit_bar(collapse_bar, str(tmp_path / "bar"))
        assert sorted(os.path.basename(p) for p in paths) == [
            "bar_f.fun", "bar_p.fun", "bar_x.cat", "blocks.json", "q.fun",
        ]
        assert all(os.path.exists(p) for p in paths)


class TestArrowFactorization:
    def test_three_parts(self, collapse_triangle):
        fac = factor_arrow(collapse_triangle, "(alpha,v)")
        assert fac.opcart_part == "(1_a0,1_e0)"
        assert fac.vertical_part == "(1_a0,v)"
        assert fac.cart_part == "(alpha,1_e1)"
        assert fac.f_vertical == "(1_a0,v)"
        assert check_factorization(collapse_triangle, fac)

    def test_every_arrow_factors(self, omega):
        t = span_triangle(omega, 0)
        for a in t.x.arrow_names:
            assert check_factorization(t, factor_arrow(t, a))


class TestActions:
    def test_transport_along_b(self, identity_bar):
        assert act_on_class(identity_bar, "[(a0,b0)]", beta="beta") == "[(a0,b1)]"

    def test_pullback_along_a(self, collapse_bar, identity_bar):
        assert act_on_class(collapse_bar, "[(a1,e0)]", alpha="alpha") == "[(a0,e0)]"
        assert act_on_class(identity_bar, "[(a1,b1)]", alpha="alpha") == "[(a0,b1)]"

    def test_exactly_one_arrow(self, identity_bar):
        with pytest.raises(InputError):
            act_on_class(identity_bar, "[(a0,b0)]", alpha="alpha", beta="beta")
        with pytest.raises(InputError):
            act_on_class(identity_bar, "[(a0,b0)]")

    def test_arrow_must_fit_the_class(self, identity_bar):
        with pytest.raises(InputError):
            act_on_class(identity_bar, "[(a0,b1)]", beta="beta")
        with pytest.raises(InputError):
            act_on_class(identity_bar, "[nowhere]", beta="beta")


MEMBERS = ["identity", "identity on AxD", "projection", "collapse D", "flip D", "start object"]


def discrete_opfibrations(a):
    """Discrete opfibrations in Fib(A) built by hand from A, a two-point set D and 1"""
    d = discrete_category("D", ["d0", "d1"])
    one = terminal_category()
    ad, pr_ad, _ = product_category(a, d)
    a1, pr_a1, _ = product_category(a, one)
    ida = identity_functor(a)
    flip = FunctorData(name="flip", source=d, target=d, obj_map={"d0": "d1", "d1": "d0"},
                       arr_map={"1_d0": "1_d1", "1_d1": "1_d0"})
    start = inclusion(a, "a0")
    return {
        "identity": TriangleOverA(p=ida, f=ida, g=ida),
        "identity on AxD": TriangleOverA(p=identity_functor(ad), f=pr_ad, g=pr_ad),
        "projection": TriangleOverA(p=pr_ad, f=pr_ad, g=ida),
        "collapse D": TriangleOverA(p=product_functor(ida, to_terminal(d, one), ad, a1), f=pr_ad, g=pr_a1),
        "flip D": TriangleOverA(p=product_functor(ida, flip, ad, ad), f=pr_ad, g=pr_ad),
        "start object": TriangleOverA(p=start, f=start, g=ida),
    }


class TestInitiality:
    @pytest.mark.parametrize("member", MEMBERS)
    def test_q_is_initial_against_hand_built_members(self, collapse_bar, member):
        catalog = discrete_opfibrations(collapse_bar.input.a)
        verdict = verify_q_initial(collapse_bar, [catalog[member]])
        assert verdict.holds and not verdict.inconclusive

    def test_against_the_whole_catalog(self, collapse_bar):
        catalog = [*discrete_opfibrations(collapse_bar.input.a).values(), bar_triangle(collapse_bar)]
        verdict = verify_q_initial(collapse_bar, catalog)
        assert verdict.holds
        assert verdict.details["squares"] >= len(catalog) - 1

    def test_members_must_be_discrete(self, collapse_bar, collapse_triangle):
        with pytest.raises(PropertyFailure):
            verify_q_initial(collapse_bar, [collapse_triangle])


class TestMaterializedExtensions:
    @pytest.fixture
    def z2_by_z2(self):
        z2 = get_group("Z2")
        mod = trivial_module(z2, z2)
        return materialize_categories([extension_from_cocycle(mod, f) for f in normalized_cocycles(mod)])

    def test_is_fiberwise_opfibration(self, z2_by_z2):
        assert sorted(z2_by_z2.extensions) == ["f(0)", "f(1)"]
        assert is_fiberwise_opfibration(z2_by_z2.triangle).holds

    def test_bar_fiber_counts_similarity_classes(self, z2_by_z2):
        bar = build_bar_x(z2_by_z2.triangle, g_cleavage=module_cleavage(z2_by_z2))
        classes, _ = fiber(bar.bar_p, "(Z2,Z2)")
        assert len(classes.objects) == 2
        assert all(v.holds for v in verify_bar_construction(bar))
