import logging
import os
import re
from functools import lru_cache
from typing import Callable, Dict, List, Optional

from config import CATALOG_DIR
from models.group import FinGroup
from models.schemas import GroupFile
from services.grp import (
    alternating_group,
    cyclic_group,
    dihedral_group,
    direct_product,
    quaternion_group,
    trivial_group,
)
from utils.errors import InputError
from utils.serialization import group_from_file, parse, read_json

logger = logging.getLogger(__name__)

# Named groups up to order 16; Zn and Dn patterns are resolved on demand.
BUILTIN: Dict[str, Callable[[], FinGroup]] = {
    "Z1": trivial_group,
    "V4": lambda: direct_product(cyclic_group(2), cyclic_group(2), name="V4"),
    "S3": lambda: dihedral_group(3, name="S3"),
    "Q8": quaternion_group,
    "A4": lambda: alternating_group(4, name="A4"),
    "Z2xZ4": lambda: direct_product(cyclic_group(2), cyclic_group(4), name="Z2xZ4"),
    "Z2xZ2xZ2": lambda: direct_product(
        direct_product(cyclic_group(2), cyclic_group(2), name="V4"), cyclic_group(2), name="Z2xZ2xZ2"
    ),
}

# Written to the catalog directory by create_catalog.py
BUNDLED = [f"Z{k}" for k in range(1, 17)] + [f"D{k}" for k in range(4, 9)] + [
    "V4", "S3", "Q8", "A4", "Z2xZ4", "Z2xZ2xZ2",
]


def construct(name: str) -> FinGroup:
    """Build a named group from its constructor"""
    if name in BUILTIN:
        return BUILTIN[name]()
    match = re.fullmatch(r"([ZD])(\d+)", name)
    if match:
        kind, k = match.group(1), int(match.group(2))
        if kind == "Z" and 1 <= k <= 16:
            return cyclic_group(k) if k > 1 else trivial_group()
        if kind == "D" and 2 <= k <= 8:
            return dihedral_group(k)
    raise InputError(f"Unknown group '{name}'", {"group": name})


@lru_cache(maxsize=None)
def get_group(name: str, catalog_dir: Optional[str] = None) -> FinGroup:
    """
    Resolve a catalog name to a shared FinGroup instance.

    Files in the catalog directory take precedence over constructors.
    """
    directory = catalog_dir or CATALOG_DIR
    path = os.path.join(directory, f"{name.lower()}.json")
    if os.path.exists(path):
        logger.debug(f"Loading group {name} from {path}")
        return group_from_file(parse(GroupFile, read_json(path), path), default_name=name)
    return construct(name)


def catalog_names(max_order: int = 16) -> List[str]:
    """Catalog groups up to the given order, smallest first"""
    names = [f"Z{k}" for k in range(1, 17)] + [f"D{k}" for k in range(4, 9)] + list(BUILTIN)
    seen, out = set(), []
    for name in names:
        if name in seen:
            continue
        seen.add(name)
        if len(get_group(name)) <= max_order:
            out.append(name)
    return sorted(out, key=lambda n: (len(get_group(n)), n))
