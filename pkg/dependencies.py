from fastapi import Depends
from config import Bounds, default_bounds
from services.loaders import Loader
import logging

logger = logging.getLogger(__name__)


def get_bounds() -> Bounds:
    """Bounds from the environment configuration"""
    return default_bounds()


def get_loader(bounds: Bounds = Depends(get_bounds)) -> Loader:
    """A fresh loader per request; inline documents share instances within it"""
    return Loader(bounds=bounds)
