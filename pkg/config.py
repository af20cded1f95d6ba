import logging
import os

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

MAX_ARROWS = int(os.getenv("FIBCALC_MAX_ARROWS", "10000"))
MAX_GROUP_ORDER = int(os.getenv("FIBCALC_MAX_GROUP_ORDER", "64"))
ENUMERATION_CAP = int(os.getenv("FIBCALC_ENUMERATION_CAP", "1000000"))
LOG_LEVEL = os.getenv("FIBCALC_LOG_LEVEL", "INFO").upper()
CATALOG_DIR = os.getenv(
    "FIBCALC_CATALOG_DIR",
    os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "groups"),
)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class Bounds(BaseModel):
    """Caps applied by every bounded operation"""
    max_arrows: int = Field(default=MAX_ARROWS, gt=0)
    max_group_order: int = Field(default=MAX_GROUP_ORDER, gt=0)
    enumeration_cap: int = Field(default=ENUMERATION_CAP, gt=0)


def default_bounds() -> Bounds:
    return Bounds()


def configure_logging(level: str = LOG_LEVEL) -> None:
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)
