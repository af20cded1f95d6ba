import json
import logging
import os
from typing import Any, Dict, Optional

from pydantic import BaseModel, ValidationError

from models.category import FinCategory, FunctorData
from models.group import FinGroup, GroupHom
from models.schemas import CategoryFile, GroupFile
from utils.errors import InputError

logger = logging.getLogger(__name__)


def canonical_json(doc: Any) -> str:
    """Byte-stable rendering: sorted keys, two-space indent, trailing newline"""
    if isinstance(doc, BaseModel):
        doc = doc.model_dump(mode="json")
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(doc: Any, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(doc))


def read_json(path: str) -> Dict[str, Any]:
    """
    Load a JSON document.

    Raises:
        InputError: missing file or malformed JSON, with line/column diagnostics.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"File not found: {path}", {"path": path})
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in {path}: {e.msg}", {"path": path, "line": e.lineno, "column": e.colno})


def parse(model, doc: Any, source: str = "<inline>"):
    """Validate a document against a schema, turning pydantic errors into InputError"""
    try:
        return model.model_validate(doc)
    except ValidationError as e:
        fields = [".".join(str(p) for p in err["loc"]) for err in e.errors()]
        raise InputError(f"Invalid {model.__name__} in {source}: {e.errors()[0]['msg']}",
                         {"source": source, "fields": fields})


# ---------------------------------------------------------------------------
# Categories and functors
# ---------------------------------------------------------------------------

def category_to_file(c: FinCategory) -> Dict[str, Any]:
    return {
        "name": c.name,
        "objects": sorted(c.objects),
        "arrows": [{"name": a, "src": c.arrows[a][0], "dst": c.arrows[a][1]} for a in sorted(c.arrows)],
        "identities": dict(sorted(c.identity.items())),
        "compose": sorted([g, f, gf] for (g, f), gf in c.table.items()),
    }


def category_from_file(doc: CategoryFile, default_name: str = "C") -> FinCategory:
    """Builds the category as written; law violations are left to validate_category"""
    arrows = {}
    for spec in doc.arrows:
        if spec.name in arrows:
            raise InputError(f"Duplicate arrow '{spec.name}'", {"arrow": spec.name})
        arrows[spec.name] = (spec.src, spec.dst)
    table = {}
    for g, f, gf in doc.compose:
        if (g, f) in table and table[(g, f)] != gf:
            raise InputError(f"Conflicting composites for ({g}, {f})", {"pair": [g, f]})
        table[(g, f)] = gf
    return FinCategory(
        name=doc.name or default_name,
        objects=tuple(sorted(doc.objects)),
        arrows=arrows,
        identity=dict(doc.identities),
        table=table,
    )


def functor_to_file(f: FunctorData, source_ref: Optional[Any] = None,
                    target_ref: Optional[Any] = None) -> Dict[str, Any]:
    """Functor document; categories are inlined unless references are given"""
    return {
        "name": f.name,
        "source": source_ref if source_ref is not None else category_to_file(f.source),
        "target": target_ref if target_ref is not None else category_to_file(f.target),
        "obj_map": dict(sorted(f.obj_map.items())),
        "arr_map": dict(sorted(f.arr_map.items())),
    }


# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------

def group_to_file(g: FinGroup) -> Dict[str, Any]:
    elements = sorted(g.elements)
    return {
        "name": g.name,
        "elements": elements,
        "table": [[g.mul(a, b) for b in elements] for a in elements],
        "unit": g.unit,
    }


def group_from_file(doc: GroupFile, default_name: str = "G") -> FinGroup:
    elements = list(doc.elements)
    if len(set(elements)) != len(elements):
        raise InputError("Duplicate group elements", {"group": doc.name or default_name})
    table = {(a, b): doc.table[i][j] for i, a in enumerate(elements) for j, b in enumerate(elements)}
    return FinGroup(name=doc.name or default_name, elements=tuple(elements), table=table, unit=doc.unit)


def hom_to_file(h: GroupHom) -> Dict[str, Any]:
    return {"name": h.name, "source": h.source.name, "target": h.target.name, "map": dict(sorted(h.map.items()))}


def action_to_table(act: Dict) -> Dict[str, Dict[str, str]]:
    out: Dict[str, Dict[str, str]] = {}
    for (g, x), y in sorted(act.items()):
        out.setdefault(g, {})[x] = y
    return out


# ---------------------------------------------------------------------------
# Extensions
# ---------------------------------------------------------------------------

def extension_to_file(x) -> Dict[str, Any]:
    """Self-contained extension document with every group inlined"""
    return {
        "name": x.name,
        "n": x.n,
        "c": group_to_file(x.c),
        "b": group_to_file(x.b),
        "b_action": action_to_table(x.b_module.action.act),
        "terms": [group_to_file(g) for g in x.groups],
        "maps": [dict(sorted(h.map.items())) for h in (x.p, *x.d, x.j)],
        "action": action_to_table(x.action.act) if x.action is not None else None,
        "modules": [action_to_table(m.action.act) for m in x.modules],
    }


def morphism_to_file(m) -> Dict[str, Any]:
    return {
        "name": m.name,
        "source": m.source.name,
        "target": m.target.name,
        "gamma": dict(sorted(m.gamma.map.items())),
        "f": [dict(sorted(f.map.items())) for f in m.f],
        "beta": dict(sorted(m.beta.map.items())),
    }
