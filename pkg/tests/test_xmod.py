import pytest

from models.extension import CrossedExtension
from models.group import GroupHom
from services.catalog import catalog_names, get_group
from services.classification import (
    extension_from_cocycle,
    fiber_objects,
    normalized_cocycles,
    verify_opcartesian_xext,
)
from services.fincat import validate_category, validate_functor
from services.grp import (
    enumerate_homs,
    identity_hom,
    is_equivariant,
    is_isomorphic,
    modules_over,
    trivial_module,
    zero_hom,
)
from services.xmod import (
    cartesian_lift_xext,
    check_condition_c_xext,
    compose_morphisms,
    enumerate_morphisms,
    identity_morphism,
    materialize_categories,
    module_cleavage,
    push_forward_xext,
    three_fold_factorization,
    validate_crossed_extension,
    validate_morphism,
    verify_cartesian_xext,
    vertical_isomorphism,
)
from tests.conftest import doubling_weak_equivalence, z4_extension
from utils.errors import InputError, PropertyFailure


def to_z2(x: CrossedExtension, zero: bool = False) -> GroupHom:
    z2 = get_group("Z2")
    if zero:
        return zero_hom(x.b, z2)
    return GroupHom(name="beta", source=x.b, target=z2, map={"0": "0", "1": "1"})


def from_z1(x: CrossedExtension) -> GroupHom:
    return GroupHom(name="gamma", source=get_group("Z1"), target=x.c, map={"0": "0"})


class TestValidation:
    def test_cyclic_extension(self, z4_ext):
        assert validate_crossed_extension(z4_ext).ok
        assert z4_ext.n == 1

    def test_not_exact(self, z4_ext):
        broken = CrossedExtension(name="broken", c=z4_ext.c, b_module=z4_ext.b_module, groups=z4_ext.groups,
                                  p=zero_hom(z4_ext.term(1), z4_ext.c), j=z4_ext.j)
        assert validate_crossed_extension(broken).kinds() == ["not exact"]

    def test_morphism_ladder(self, z4_ext):
        assert validate_morphism(identity_morphism(z4_ext)).ok
        g = z4_ext.term(1)
        bad = identity_morphism(z4_ext)
        bad.f = (GroupHom(name="double", source=g, target=g, map={x: str(2 * int(x) % 4) for x in g.elements}),)
        assert "ladder" in validate_morphism(bad).kinds()


class TestMorphisms:
    def test_endomorphisms(self, z4_ext):
        vertical = enumerate_morphisms(z4_ext, z4_ext, gamma=identity_hom(z4_ext.c), beta=identity_hom(z4_ext.b))
        assert len(vertical) == 2
        assert len(enumerate_morphisms(z4_ext, z4_ext)) == 4
        assert all(validate_morphism(m).ok for m in vertical)

    def test_composition(self, z4_ext):
        ms = enumerate_morphisms(z4_ext, z4_ext, gamma=identity_hom(z4_ext.c), beta=identity_hom(z4_ext.b))
        square = compose_morphisms(ms[1], ms[1])
        assert all(f.map == {x: x for x in f.source.elements} for f in square.f)

    def test_compose_checks_endpoints(self, z4_ext):
        pushed, push = push_forward_xext(z4_ext, to_z2(z4_ext))
        with pytest.raises(InputError):
            compose_morphisms(push, push)

    def test_vertical_isomorphism(self, z4_ext):
        assert vertical_isomorphism(z4_ext, z4_ext) is not None


class TestLiftings:
    def test_push_forward_along_isomorphism(self, z4_ext):
        pushed, push = push_forward_xext(z4_ext, to_z2(z4_ext))
        assert validate_crossed_extension(pushed).ok
        assert validate_morphism(push).ok
        assert len(pushed.term(1)) == 4
        assert is_isomorphic(pushed.term(1), get_group("Z4")) is not None

    def test_push_forward_along_zero_splits(self, z4_ext):
        pushed, _ = push_forward_xext(z4_ext, to_z2(z4_ext, zero=True))
        assert validate_crossed_extension(pushed).ok
        assert is_isomorphic(pushed.term(1), get_group("V4")) is not None

    def test_push_forward_needs_matching_source(self, z4_ext):
        z2 = get_group("Z2")
        with pytest.raises(InputError):
            push_forward_xext(z4_ext, identity_hom(z2))

    def test_pullback(self, z4_ext):
        lifted, cart = cartesian_lift_xext(z4_ext, from_z1(z4_ext))
        assert len(lifted.term(1)) == 2
        assert validate_crossed_extension(lifted).ok
        assert validate_morphism(cart).ok
        full, _ = cartesian_lift_xext(z4_ext, identity_hom(z4_ext.c))
        assert len(full.term(1)) == 4

    def test_pullback_needs_matching_target(self, z4_ext):
        with pytest.raises(InputError):
            cartesian_lift_xext(z4_ext, identity_hom(get_group("Z2")))

    def test_push_is_opcartesian(self, z4_ext):
        _, push = push_forward_xext(z4_ext, to_z2(z4_ext, zero=True))
        verdict = verify_opcartesian_xext(push)
        assert verdict.holds
        assert verdict.details["checked"] >= 1

    def test_default_targets_cover_the_fiber(self, z4_ext):
        _, push = push_forward_xext(z4_ext, to_z2(z4_ext, zero=True))
        ends_only = verify_opcartesian_xext(push, targets=[push.source, push.target])
        verdict = verify_opcartesian_xext(push)
        assert verdict.holds
        assert verdict.details["targets"] > 2
        assert verdict.details["checked"] > ends_only.details["checked"]

    def test_fiber_objects(self, z4_ext):
        objects = fiber_objects(z4_ext.c, 1, max_order=2)
        # Z1 has one factor set, Z2 with the trivial action has two
        assert len(objects) == 3
        assert all(x.c is z4_ext.c and validate_crossed_extension(x).ok for x in objects)
        assert fiber_objects(z4_ext.c, 3) == []

    def test_weak_equivalence_is_not_opcartesian(self, doubling):
        assert validate_crossed_extension(doubling.target).ok
        assert validate_morphism(doubling).ok
        assert doubling.is_weak_equivalence
        verdict = verify_opcartesian_xext(doubling)
        assert not verdict.holds and not verdict.inconclusive
        assert verdict.witness["target"] == "X"
        assert verdict.witness["factorizations"] != 1

    def test_push_into_larger_module(self, z4_ext):
        beta = GroupHom(name="double", source=z4_ext.b, target=get_group("Z4"), map={"0": "0", "1": "2"})
        pushed, push = push_forward_xext(z4_ext, beta)
        assert len(pushed.term(1)) == 8
        assert validate_crossed_extension(pushed).ok
        assert validate_morphism(push).ok
        assert verify_opcartesian_xext(push).holds

    def test_two_fold_push_forward(self, doubling):
        w = doubling.target
        pushed, push = push_forward_xext(w, zero_hom(w.b, get_group("Z2")))
        assert len(pushed.term(2)) == 4
        assert pushed.term(1) is w.term(1)
        assert validate_crossed_extension(pushed).ok
        assert validate_morphism(push).ok
        assert verify_opcartesian_xext(push).holds

    def test_pull_is_cartesian(self, z4_ext):
        _, cart = cartesian_lift_xext(z4_ext, from_z1(z4_ext))
        verdict = verify_cartesian_xext(cart)
        assert verdict.holds
        assert verdict.details["checked"] >= 1

    def test_condition_c(self, z4_ext):
        verdict = check_condition_c_xext(z4_ext, from_z1(z4_ext), to_z2(z4_ext, zero=True))
        assert verdict.holds
        assert verdict.property == "condition (C)"


class TestFactorization:
    @pytest.mark.parametrize("kind", ["identity", "push", "pull"])
    def test_three_fold(self, z4_ext, kind):
        if kind == "identity":
            m = identity_morphism(z4_ext)
        elif kind == "push":
            m = push_forward_xext(z4_ext, to_z2(z4_ext, zero=True))[1]
        else:
            m = cartesian_lift_xext(z4_ext, from_z1(z4_ext))[1]
        opcart, weq, cart = three_fold_factorization(m)
        assert weq.is_weak_equivalence
        assert opcart.is_vertical
        assert cart.gamma.map == m.gamma.map
        for part in (opcart, weq, cart):
            assert validate_morphism(part).ok


class TestMaterialization:
    def test_endomorphism_category(self, z4_ext):
        mat = materialize_categories([z4_ext])
        t = mat.triangle
        assert len(t.x.arrows) == 4
        assert len(t.m.arrows) == 2
        assert len(t.a.arrows) == 2
        for cat in (t.x, t.m, t.a):
            assert validate_category(cat).ok
        for f in (t.p, t.f, t.g):
            assert validate_functor(f).ok

    def test_module_cleavage_needs_unit_lifts(self, z4_ext):
        with pytest.raises(PropertyFailure):
            module_cleavage(materialize_categories([z4_ext]))

    def test_module_cleavage_on_identities(self, z4_ext):
        mat = materialize_categories([z4_ext], morphisms=[])
        cl = module_cleavage(mat)
        obj = mat.triangle.m.objects[0]
        assert cl.lift(obj, "1_C") == f"1_{obj}"

    def test_names_must_be_distinct(self, z4_ext):
        with pytest.raises(InputError):
            materialize_categories([z4_ext, z4_ext])

    def test_groups_sharing_a_name_stay_apart(self, z4_ext):
        twin = z4_extension()
        twin.name = "Y"
        mat = materialize_categories([z4_ext, twin])
        t = mat.triangle
        assert sorted(t.a.objects) == ["C", "C#2"]
        assert mat.groups["C"] is z4_ext.c and mat.groups["C#2"] is twin.c
        assert t.f.obj("Y") == "C#2"
        assert validate_category(t.a).ok
        for f in (t.p, t.f, t.g):
            assert validate_functor(f).ok


def sweep_corpus():
    z2 = get_group("Z2")
    mod = trivial_module(z2, z2)
    return [
        z4_extension(),
        *(extension_from_cocycle(mod, f) for f in normalized_cocycles(mod)),
        doubling_weak_equivalence().target,
    ]


def equivariant_betas(x: CrossedExtension, max_order: int = 8):
    """(module, β) for every catalog abelian B' up to max_order and every equivariant β: B -> B'"""
    for name in catalog_names(max_order):
        carrier = get_group(name)
        if not carrier.is_abelian:
            continue
        for mod in modules_over(x.c, carrier):
            for beta in enumerate_homs(x.b, carrier):
                if is_equivariant(beta, x.b_module.action, mod.action):
                    yield mod, beta


@pytest.mark.parametrize("x", sweep_corpus(), ids=lambda x: x.name)
def test_every_push_forward_is_valid_and_opcartesian(x):
    pushes = 0
    for mod, beta in equivariant_betas(x):
        pushed, push = push_forward_xext(x, beta, mod)
        assert validate_crossed_extension(pushed).ok, (mod.name, beta.name)
        assert verify_opcartesian_xext(push, max_order=2).holds, (mod.name, beta.name)
        pushes += 1
    assert pushes >= sum(get_group(name).is_abelian for name in catalog_names(8))
