from itertools import product

import pytest

from config import Bounds
from services.catalog import catalog_names, get_group
from services.classification import (
    classify_by_morphisms,
    classify_factor_sets,
    cocycle_name,
    extension_from_cocycle,
    is_cocycle,
    normalized_coboundaries,
    normalized_cocycles,
    similarity_classes,
)
from services.grp import is_isomorphic, modules_over, trivial_module
from services.xmod import validate_crossed_extension
from utils.errors import BoundExceeded, InputError


def module(c: str, b: str, index: int = 0):
    return modules_over(get_group(c), get_group(b))[index]


class TestOneFold:
    @pytest.mark.parametrize("c, b, count", [
        ("Z2", "Z2", 2),
        ("Z3", "Z3", 3),
        ("Z2", "Z3", 1),
        ("Z1", "Z2", 1),
        ("Z2", "Z4", 2),
    ])
    def test_counts_for_trivial_action(self, c, b, count):
        report = similarity_classes(module(c, b), 1)
        assert report.count == count
        assert not report.relative_to_bound
        assert report.bound is None

    @pytest.mark.parametrize("b", [n for n in catalog_names(8) if get_group(n).is_abelian])
    def test_trivial_base_has_one_class(self, b):
        assert similarity_classes(trivial_module(get_group("Z1"), get_group(b)), 1).count == 1

    def test_twisted_action(self):
        twisted = module("Z2", "Z3", 1)
        assert not twisted.action.is_trivial()
        assert similarity_classes(twisted, 1).count == 1

    def test_factor_sets(self, z2):
        mod = trivial_module(z2, z2)
        cocycles = normalized_cocycles(mod)
        assert [cocycle_name(z2, f) for f in cocycles] == ["f(0)", "f(1)"]
        assert all(is_cocycle(mod, f) for f in cocycles)
        assert all(is_cocycle(mod, f) for f in normalized_coboundaries(mod))

    def test_classes_are_named_by_factor_sets(self, z2):
        report = classify_factor_sets(trivial_module(z2, z2))
        assert [c.representative for c in report.classes] == ["f(0)", "f(1)"]
        assert [c.member_count for c in report.classes] == [1, 1]

    def test_extension_from_cocycle(self, z2):
        mod = trivial_module(z2, z2)
        twisted = next(f for f in normalized_cocycles(mod) if f[("1", "1")] == "1")
        x = extension_from_cocycle(mod, twisted)
        assert validate_crossed_extension(x).ok
        assert x.term(1).element_order("(0,1)") == 4
        assert x.name == "f(1)"


class TestTwoFold:
    def test_relative_to_bound(self):
        report = similarity_classes(module("Z1", "Z2"), 2, max_order=4)
        assert report.count == 1
        assert report.relative_to_bound
        assert report.bound == 4
        assert report.n == 2

    def test_longer_extensions_rejected(self):
        with pytest.raises(InputError):
            similarity_classes(module("Z2", "Z2"), 3)


class TestBounds:
    def test_enumeration_cap(self):
        with pytest.raises(BoundExceeded):
            similarity_classes(module("Z2", "Z2"), 1, bounds=Bounds(enumeration_cap=1))


def brute_force_cocycles(mod):
    """Every normalized assignment on non-unit pairs, filtered by the cocycle identity"""
    c, b = mod.base, mod.carrier
    others = sorted(x for x in c.elements if x != c.unit)
    pairs = [(x, y) for x in others for y in others]
    found = []
    for values in product(sorted(b.elements), repeat=len(pairs)):
        f = {(x, y): b.unit for x in c.elements for y in c.elements}
        f.update(zip(pairs, values))
        if is_cocycle(mod, f):
            found.append(f)
    return found


class TestFactorSetOracle:
    CASES = [("Z2", "Z2"), ("Z3", "Z3"), ("Z2", "Z3"), ("Z1", "Z2"), ("Z2", "Z4"), ("Z2", "V4")]

    @pytest.mark.parametrize("c, b", CASES)
    def test_search_finds_every_factor_set(self, c, b):
        mod = module(c, b)
        expected = sorted(cocycle_name(mod.base, f) for f in brute_force_cocycles(mod))
        assert sorted(cocycle_name(mod.base, f) for f in normalized_cocycles(mod)) == expected

    @pytest.mark.parametrize("c, b", CASES)
    def test_counts_match_vertical_morphism_components(self, c, b):
        mod = module(c, b)
        extensions = [extension_from_cocycle(mod, f) for f in brute_force_cocycles(mod)]
        blocks = classify_by_morphisms(extensions)
        assert len(blocks) == similarity_classes(mod, 1).count
        by_name = {x.name: x for x in extensions}
        for block in blocks:
            first = by_name[block[0]].term(1)
            assert all(is_isomorphic(first, by_name[name].term(1)) is not None for name in block)

    def test_twisted_module(self):
        mod = module("Z2", "Z3", 1)
        extensions = [extension_from_cocycle(mod, f) for f in brute_force_cocycles(mod)]
        assert len(classify_by_morphisms(extensions)) == similarity_classes(mod, 1).count == 1
