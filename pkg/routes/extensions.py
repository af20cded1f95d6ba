from fastapi import APIRouter, Depends
from models.group import CModule, GroupAction
from models.schemas import ClassificationReport, ClassifyRequest, ExtensionResponse, PullbackRequest, PushforwardRequest
from dependencies import get_loader
from services.classification import similarity_classes
from services.grp import trivial_action, validate_module
from services.loaders import Loader, require_valid
from services.xmod import cartesian_lift_xext, push_forward_xext, validate_crossed_extension
from utils.serialization import extension_to_file, morphism_to_file
import logging

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/api/extensions", tags=["extensions"])


@router.post("/classify", response_model=ClassificationReport)
def classify(req: ClassifyRequest, loader: Loader = Depends(get_loader)):
    """Similarity classes; n = 2 is relative to the middle-group order bound"""
    c, b = loader.group(req.c), loader.group(req.b)
    act = {(g, x): y for g, row in req.action.items() for x, y in row.items()} if req.action \
        else trivial_action(c, b).act
    mod = CModule(base=c, carrier=b, action=GroupAction(actor=c, carrier=b, act=act), name=f"{b.name}[{c.name}]")
    require_valid(validate_module(mod))
    return similarity_classes(mod, req.n, loader.bounds, max_order=req.max_order)


@router.post("/pushforward", response_model=ExtensionResponse)
def pushforward(req: PushforwardRequest, loader: Loader = Depends(get_loader)):
    x = loader.extension(req.extension)
    beta = loader.hom(req.beta)
    module = loader.module(req.module) if req.module is not None else None
    pushed, m = push_forward_xext(x, beta, module)
    logger.info(f"Pushed {x.name} forward along {beta.name}")
    return ExtensionResponse(extension=extension_to_file(pushed), morphism=morphism_to_file(m),
                             valid=validate_crossed_extension(pushed).ok)


@router.post("/pullback", response_model=ExtensionResponse)
def pullback(req: PullbackRequest, loader: Loader = Depends(get_loader)):
    x = loader.extension(req.extension)
    gamma = loader.hom(req.gamma)
    lifted, m = cartesian_lift_xext(x, gamma)
    logger.info(f"Pulled {x.name} back along {gamma.name}")
    return ExtensionResponse(extension=extension_to_file(lifted), morphism=morphism_to_file(m),
                             valid=validate_crossed_extension(lifted).ok)
