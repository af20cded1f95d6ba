import logging
import os
from typing import Any, Dict, List, Optional, Union

from config import Bounds, default_bounds
from models.category import FinCategory, FunctorData
from models.extension import CrossedExtension, XExtMorphism
from models.fibration import TriangleOverA
from models.group import CModule, FinGroup, GroupAction, GroupHom
from models.schemas import (
    CategoryFile,
    ExtensionFile,
    FunctorFile,
    GroupFile,
    HomFile,
    ModuleFile,
    MorphismFile,
    ValidationReport,
)
from services.catalog import get_group
from services.fincat import (
    compose_functors,
    ensure_within_bounds,
    product_category,
    validate_category,
    validate_functor,
)
from services.grp import ensure_order, trivial_action, validate_group, validate_hom, validate_module
from services.xmod import validate_crossed_extension, validate_morphism
from utils.errors import InputError
from utils.serialization import category_from_file, group_from_file, parse, read_json

logger = logging.getLogger(__name__)


def require_valid(report: ValidationReport) -> None:
    """Turn a failed validation into an InputError naming the first violations"""
    if not report.ok:
        first = report.violations[0]
        raise InputError(
            f"Invalid {report.subject}: {first.kind} {first.items}",
            {"subject": report.subject, "violations": [v.model_dump() for v in report.violations[:5]]},
        )


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _table(act: Dict[str, Dict[str, str]]) -> Dict:
    return {(g, x): y for g, row in act.items() for x, y in row.items()}


class Loader:
    """
    Resolves file references into shared domain objects.

    Every file is loaded once per loader, so two documents referring to the
    same category or group get the same instance.
    """

    def __init__(self, base_dir: str = ".", bounds: Optional[Bounds] = None, strict: bool = True):
        self.base_dir = base_dir
        self.bounds = bounds or default_bounds()
        self.strict = strict
        self.categories: Dict[str, FinCategory] = {}
        self.groups: Dict[str, FinGroup] = {}
        self.extensions: Dict[str, CrossedExtension] = {}
        self._products: Dict[tuple, Any] = {}

    def _path(self, ref: str, base_dir: Optional[str] = None) -> str:
        return os.path.abspath(os.path.join(base_dir or self.base_dir, ref))

    # -- categories and functors ------------------------------------------

    def category(self, ref: Union[str, CategoryFile], base_dir: Optional[str] = None) -> FinCategory:
        if isinstance(ref, CategoryFile):
            c = category_from_file(ref)
            # inline documents are referenced by name from later documents
            self.categories.setdefault(c.name, c)
        else:
            path = self._path(ref, base_dir)
            if path in self.categories:
                return self.categories[path]
            if not os.path.exists(path) and ref in self.categories:
                # a category already loaded, referenced by name
                return self.categories[ref]
            c = category_from_file(parse(CategoryFile, read_json(path), path), default_name=_stem(path))
            self.categories[path] = c
            self.categories.setdefault(c.name, c)
        ensure_within_bounds(c, self.bounds)
        if self.strict:
            require_valid(validate_category(c))
        return c

    def product(self, left: FinCategory, right: FinCategory):
        key = (id(left), id(right))
        if key not in self._products:
            prod, _, _ = product_category(left, right, bounds=self.bounds)
            self._products[key] = prod
        return self._products[key]

    def functor(self, ref: Union[str, FunctorFile], base_dir: Optional[str] = None) -> FunctorData:
        if isinstance(ref, FunctorFile):
            doc, name, here = ref, ref.name or "F", base_dir or self.base_dir
        else:
            path = self._path(ref, base_dir)
            doc = parse(FunctorFile, read_json(path), path)
            name, here = doc.name or _stem(path), os.path.dirname(path)
        source = self.category(doc.source, here)
        if isinstance(doc.target, list):
            target = self.product(self.category(doc.target[0], here), self.category(doc.target[1], here))
        else:
            target = self.category(doc.target, here)
        f = FunctorData(name=name, source=source, target=target, obj_map=dict(doc.obj_map), arr_map=dict(doc.arr_map))
        if self.strict:
            require_valid(validate_functor(f))
        return f

    def triangle(self, directory: str) -> TriangleOverA:
        """
        A directory with x.cat, m.cat, a.cat, p.fun and g.fun; f.fun is
        optional and defaults to g∘p.
        """
        directory = self._path(directory)
        for filename in ("x.cat", "m.cat", "a.cat"):
            if os.path.exists(os.path.join(directory, filename)):
                self.category(filename, directory)
        p = self.functor("p.fun", directory)
        g = self.functor("g.fun", directory)
        f_path = os.path.join(directory, "f.fun")
        if os.path.exists(f_path):
            f = self.functor(f_path)
        else:
            f = compose_functors(g, p, name="F")
        logger.info(f"Loaded triangle from {directory}")
        return TriangleOverA(p=p, f=f, g=g)

    # -- groups -------------------------------------------------------------

    def group(self, ref: Union[str, GroupFile], base_dir: Optional[str] = None) -> FinGroup:
        if isinstance(ref, GroupFile):
            g = group_from_file(ref)
            known = self.groups.get(g.name)
            if known is not None and known.elements == g.elements and known.table == g.table:
                return known
            self.groups[g.name] = g
        else:
            path = self._path(ref, base_dir)
            key = path if os.path.exists(path) else ref
            if key in self.groups:
                return self.groups[key]
            if key == path:
                g = group_from_file(parse(GroupFile, read_json(path), path), default_name=_stem(path))
            else:
                g = get_group(ref)
            self.groups[key] = g
        ensure_order(g, self.bounds)
        if self.strict:
            require_valid(validate_group(g))
        return g

    def hom(self, ref: Union[str, HomFile], base_dir: Optional[str] = None) -> GroupHom:
        if isinstance(ref, HomFile):
            doc, here, name = ref, base_dir or self.base_dir, ref.name or "h"
        else:
            path = self._path(ref, base_dir)
            doc = parse(HomFile, read_json(path), path)
            here, name = os.path.dirname(path), doc.name or _stem(path)
        h = GroupHom(name=name, source=self.group(doc.source, here), target=self.group(doc.target, here),
                     map=dict(doc.map))
        if self.strict:
            require_valid(validate_hom(h))
        return h

    def module(self, ref: Union[str, ModuleFile], base_dir: Optional[str] = None) -> CModule:
        """A C-module file; a group file or catalog name gives the trivial module over `base`"""
        if isinstance(ref, ModuleFile):
            doc, here = ref, base_dir or self.base_dir
        else:
            path = self._path(ref, base_dir)
            doc, here = parse(ModuleFile, read_json(path), path), os.path.dirname(path)
        base, carrier = self.group(doc.base, here), self.group(doc.carrier, here)
        act = _table(doc.action) if doc.action else trivial_action(base, carrier).act
        mod = CModule(base=base, carrier=carrier, action=GroupAction(actor=base, carrier=carrier, act=act),
                      name=doc.name or f"{carrier.name}[{base.name}]")
        if self.strict:
            require_valid(validate_module(mod))
        return mod

    def trivial_module(self, base: FinGroup, carrier_ref: str) -> CModule:
        carrier = self.group(carrier_ref)
        return CModule(base=base, carrier=carrier, action=trivial_action(base, carrier),
                       name=f"{carrier.name}[{base.name}]")

    # -- extensions and morphisms -------------------------------------------

    def extension(self, ref: Union[str, ExtensionFile], base_dir: Optional[str] = None) -> CrossedExtension:
        if isinstance(ref, ExtensionFile):
            doc, here, name = ref, base_dir or self.base_dir, ref.name or "X"
        else:
            path = self._path(ref, base_dir)
            if path in self.extensions:
                return self.extensions[path]
            doc = parse(ExtensionFile, read_json(path), path)
            here, name = os.path.dirname(path), doc.name or _stem(path)
        x = self._build_extension(doc, name, here)
        if self.strict:
            require_valid(validate_crossed_extension(x))
        if not isinstance(ref, ExtensionFile):
            self.extensions[self._path(ref, base_dir)] = x
        return x

    def _build_extension(self, doc: ExtensionFile, name: str, here: str) -> CrossedExtension:
        n = doc.n
        if len(doc.maps) != n + 1:
            raise InputError(f"Extension '{name}' needs {n + 1} maps (p, boundaries, j), got {len(doc.maps)}",
                             {"extension": name})
        if len(doc.modules) != max(n - 2, 0):
            raise InputError(f"Extension '{name}' needs {max(n - 2, 0)} module actions", {"extension": name})
        c, b = self.group(doc.c, here), self.group(doc.b, here)
        terms = tuple(self.group(t, here) for t in doc.terms)
        b_act = _table(doc.b_action) if doc.b_action else trivial_action(c, b).act
        b_module = CModule(base=c, carrier=b, action=GroupAction(actor=c, carrier=b, act=b_act),
                           name=f"{b.name}[{c.name}]")
        p = GroupHom(name=f"p[{name}]", source=terms[0], target=c, map=dict(doc.maps[0]))
        j = GroupHom(name=f"j[{name}]", source=b, target=terms[-1], map=dict(doc.maps[-1]))
        d = tuple(
            GroupHom(name=f"d{i}[{name}]", source=terms[i], target=terms[i - 1], map=dict(doc.maps[i]))
            for i in range(1, n)
        )
        action = None
        if n >= 2:
            if doc.action is None:
                raise InputError(f"Extension '{name}' needs the G1-action on G2", {"extension": name})
            action = GroupAction(actor=terms[0], carrier=terms[1], act=_table(doc.action))
        modules = tuple(
            CModule(base=c, carrier=terms[k + 2], action=GroupAction(actor=c, carrier=terms[k + 2], act=_table(m)),
                    name=f"{terms[k + 2].name}[{c.name}]")
            for k, m in enumerate(doc.modules)
        )
        return CrossedExtension(name=name, c=c, b_module=b_module, groups=terms, p=p, j=j, d=d,
                                action=action, modules=modules)

    def morphism(self, ref: Union[str, MorphismFile], base_dir: Optional[str] = None) -> XExtMorphism:
        if isinstance(ref, MorphismFile):
            doc, here, name = ref, base_dir or self.base_dir, ref.name or "m"
        else:
            path = self._path(ref, base_dir)
            doc = parse(MorphismFile, read_json(path), path)
            here, name = os.path.dirname(path), doc.name or _stem(path)
        x, z = self.extension(doc.source, here), self.extension(doc.target, here)
        if len(doc.f) != x.n:
            raise InputError(f"Morphism '{name}' needs {x.n} middle maps", {"morphism": name})
        m = XExtMorphism(
            name=name, source=x, target=z,
            gamma=GroupHom(name=f"gamma[{name}]", source=x.c, target=z.c, map=dict(doc.gamma)),
            f=tuple(GroupHom(name=f"f{i + 1}[{name}]", source=x.term(i + 1), target=z.term(i + 1), map=dict(fi))
                    for i, fi in enumerate(doc.f)),
            beta=GroupHom(name=f"beta[{name}]", source=x.b, target=z.b, map=dict(doc.beta)),
        )
        if self.strict:
            require_valid(validate_morphism(m))
        return m

    def extensions_in(self, directory: str) -> List[CrossedExtension]:
        """Every *.ext file of a directory, in name order"""
        directory = self._path(directory)
        return [self.extension(os.path.join(directory, f)) for f in sorted(os.listdir(directory)) if f.endswith(".ext")]
