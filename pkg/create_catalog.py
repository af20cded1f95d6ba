# create_catalog.py
import os
from config import CATALOG_DIR
from services.catalog import BUNDLED, construct
from utils.serialization import group_to_file, write_json

os.makedirs(CATALOG_DIR, exist_ok=True)
for name in BUNDLED:
    group = construct(name)
    path = os.path.join(CATALOG_DIR, f"{name.lower()}.json")
    write_json(group_to_file(group), path)
    print(f"✓ {name} (order {len(group)}) written to {path}")
