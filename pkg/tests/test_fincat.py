import pytest

from config import Bounds
from models.category import FunctorData
from services.fincat import (
    build_category,
    check_coidentifies,
    comma_category,
    compose_functors,
    connected_components,
    discrete_category,
    ensure_within_bounds,
    enumerate_functors,
    full_subcategory,
    identee,
    identity_functor,
    inverse,
    is_isomorphism,
    is_isomorphism_functor,
    opposite_category,
    preorder_category,
    product_category,
    reflects_identities,
    to_terminal,
    validate_category,
    validate_functor,
    validate_nat_trans,
    wide_subcategory,
)
from utils.errors import BoundExceeded, InputError
from utils.union_find import UnionFind


def _broken(c, **changes):
    table = dict(c.table)
    for key, value in changes.get("table", {}).items():
        if value is None:
            table.pop(key)
        else:
            table[key] = value
    arrows = {**c.arrows, **changes.get("arrows", {})}
    return build_category(c.name, c.objects, arrows, c.identity, table)


class TestValidateCategory:
    def test_arrow_category_is_valid(self, arrow_cat):
        report = validate_category(arrow_cat)
        assert report.ok
        assert report.subject == "2"

    def test_missing_composite(self, arrow_cat):
        report = validate_category(_broken(arrow_cat, table={("u", "1_0"): None}))
        assert report.kinds() == ["composition missing"]
        assert report.violations[0].items == ["u", "1_0"]

    def test_composite_with_wrong_endpoints(self, arrow_cat):
        report = validate_category(_broken(arrow_cat, table={("u", "1_0"): "1_1"}))
        assert "composite endpoints" in report.kinds()

    def test_dangling_arrow(self, arrow_cat):
        report = validate_category(_broken(arrow_cat, arrows={"w": ("0", "nowhere")}))
        assert report.kinds() == ["dangling arrow"]

    def test_unit_law(self):
        arrows = {"1_x": ("x", "x"), "1_y": ("y", "y"), "f": ("x", "y"), "f2": ("x", "y")}
        table = {
            ("1_x", "1_x"): "1_x", ("1_y", "1_y"): "1_y",
            ("f", "1_x"): "f", ("f2", "1_x"): "f2",
            ("1_y", "f"): "f2", ("1_y", "f2"): "f2",
        }
        c = build_category("parallel", ["x", "y"], arrows, {"x": "1_x", "y": "1_y"}, table)
        report = validate_category(c)
        assert "unit law" in report.kinds()
        assert ["f"] in [v.items for v in report.violations]

    def test_report_is_falsy_on_violation(self, arrow_cat):
        assert not validate_category(_broken(arrow_cat, table={("u", "1_0"): None}))


class TestBuilders:
    def test_preorder_composites(self):
        c = preorder_category("3", ["0", "1", "2"], {"f": ("0", "1"), "g": ("1", "2")})
        assert c.hom("0", "2") == ["g.f"]
        assert c.compose("g", "f") == "g.f"
        assert validate_category(c).ok

    def test_preorder_rejects_parallel_generators(self):
        with pytest.raises(InputError):
            preorder_category("P", ["0", "1"], {"f": ("0", "1"), "g": ("0", "1")})

    def test_opposite_is_involutive(self, iso_cat):
        twice = opposite_category(opposite_category(iso_cat))
        assert twice.arrows == iso_cat.arrows
        assert twice.table == iso_cat.table
        assert opposite_category(iso_cat).arrows["f"] == ("y", "x")

    def test_product(self, arrow_cat):
        prod, pr0, pr1 = product_category(arrow_cat, arrow_cat, name="4")
        assert len(prod.objects) == 4
        assert len(prod.arrows) == 9
        assert validate_category(prod).ok
        assert validate_functor(pr0).ok and validate_functor(pr1).ok
        assert prod.arrow_of("u", "1_1") == "(u,1_1)"
        assert pr0.name == "Pr0[4]"

    def test_product_respects_arrow_cap(self, arrow_cat):
        with pytest.raises(BoundExceeded):
            product_category(arrow_cat, arrow_cat, bounds=Bounds(max_arrows=5))

    def test_subcategories(self, arrow_cat):
        assert full_subcategory(arrow_cat, ["0"]).arrow_names == ["1_0"]
        assert wide_subcategory(arrow_cat, []).arrow_names == ["1_0", "1_1"]

    def test_ensure_within_bounds(self, arrow_cat):
        assert ensure_within_bounds(arrow_cat, Bounds(max_arrows=3)) is arrow_cat
        with pytest.raises(BoundExceeded):
            ensure_within_bounds(arrow_cat, Bounds(max_arrows=2))


class TestFunctors:
    def test_bad_endpoints(self, arrow_cat):
        f = FunctorData(name="bad", source=arrow_cat, target=arrow_cat,
                        obj_map={"0": "0", "1": "1"}, arr_map={"1_0": "1_0", "1_1": "1_1", "u": "1_0"})
        assert validate_functor(f).kinds() == ["endpoints"]

    def test_compose_checks_endpoints(self, arrow_cat, iso_cat):
        with pytest.raises(InputError):
            compose_functors(identity_functor(iso_cat), identity_functor(arrow_cat))

    def test_isomorphism_functor(self, arrow_cat):
        assert is_isomorphism_functor(identity_functor(arrow_cat))
        assert not is_isomorphism_functor(to_terminal(arrow_cat))

    def test_enumerate_endofunctors_of_arrow(self, arrow_cat):
        found = list(enumerate_functors(arrow_cat, arrow_cat))
        assert len(found) == 3
        assert all(validate_functor(f).ok for f in found)

    def test_enumerate_with_fixed_object(self, arrow_cat):
        found = list(enumerate_functors(arrow_cat, arrow_cat, fixed_obj={"0": "1"}))
        assert [f.obj_map for f in found] == [{"0": "1", "1": "1"}]

    def test_enumerate_cap(self, arrow_cat):
        with pytest.raises(BoundExceeded):
            list(enumerate_functors(arrow_cat, arrow_cat, cap=1))


class TestCommaAndIdentee:
    def test_arrow_category_of_arrow(self, arrow_cat):
        ident = identity_functor(arrow_cat)
        comma = comma_category(ident, ident)
        assert sorted(comma.triples) == ["(0,1_0,0)", "(0,u,1)", "(1,1_1,1)"]
        assert len(comma.comma.arrows) == 6
        assert validate_category(comma.comma).ok
        assert validate_nat_trans(comma.lam).ok

    def test_identee_of_terminal_map(self, arrow_cat):
        bang = to_terminal(arrow_cat)
        ident = identee(bang)
        assert len(ident.category.objects) == 3
        assert validate_nat_trans(ident.kappa).ok
        assert check_coidentifies(bang, ident.kappa)
        assert not check_coidentifies(identity_functor(arrow_cat), ident.kappa)

    def test_discrete_fibration_reflects_identities(self, arrow_cat):
        ident = identity_functor(arrow_cat)
        assert reflects_identities(ident, identee(ident).kappa)

    def test_reflects_identities_needs_coidentification(self, arrow_cat):
        with pytest.raises(InputError):
            reflects_identities(identity_functor(arrow_cat), identee(to_terminal(arrow_cat)).kappa)


class TestComponentsAndIsomorphisms:
    def test_connected_components(self, arrow_cat):
        assert connected_components(arrow_cat) == [["0", "1"]]
        assert connected_components(discrete_category("D", ["b", "a"])) == [["a"], ["b"]]

    def test_inverse(self, iso_cat, arrow_cat):
        assert inverse(iso_cat, "f") == "g"
        assert is_isomorphism(iso_cat, "1_x")
        assert not is_isomorphism(arrow_cat, "u")

    def test_union_find_blocks_are_ordered(self):
        uf = UnionFind(["d", "c", "b", "a"])
        uf.union("d", "b")
        uf.union("c", "a")
        assert uf.blocks() == [["a", "c"], ["b", "d"]]
        assert uf.same("b", "d") and not uf.same("a", "b")
