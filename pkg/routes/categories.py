from fastapi import APIRouter, Depends
from models.schemas import (
    CategoryFile,
    FactorizationResponse,
    FunctorClassification,
    FunctorFile,
    TriangleRequest,
    ValidationReport,
    Verdict,
)
from models.fibration import TriangleOverA
from dependencies import get_loader
from services.factorization import bar_triangle, build_bar_x, verify_bar_construction, verify_q_initial
from services.fibration import chevalley_check, classify_functor
from services.fincat import compose_functors, validate_category
from services.loaders import Loader
import logging

logger = logging.getLogger(__name__)
router = APIRouter(prefix="/api", tags=["categories"])


@router.post("/categories/validate", response_model=ValidationReport)
def validate(doc: CategoryFile, loader: Loader = Depends(get_loader)):
    """Check the category laws; violations come back as data"""
    loader.strict = False
    report = validate_category(loader.category(doc))
    logger.info(f"Validated category {report.subject}: {len(report.violations)} violations")
    return report


@router.post("/functors/classify", response_model=FunctorClassification)
def classify(doc: FunctorFile, loader: Loader = Depends(get_loader)):
    """Fibration, opfibration and their discrete variants"""
    return classify_functor(loader.functor(doc))


@router.post("/functors/chevalley", response_model=Verdict)
def chevalley(doc: FunctorFile, loader: Loader = Depends(get_loader)):
    report = chevalley_check(loader.functor(doc))
    return Verdict(
        property="Chevalley criterion", holds=report.holds, witness=report.witness or None,
        details={"opfibration": report.is_opfibration, "unit identity": report.unit_identity,
                 "counit identity": report.counit_identity},
    )


@router.post("/triangles/factorize", response_model=FactorizationResponse)
def factorize(req: TriangleRequest, loader: Loader = Depends(get_loader)):
    """
    Factor P through the category of vertical components.

    Raises:
        PropertyFailure: the triangle is not a fiberwise opfibration over a split fibration (409).
    """
    for doc in (req.x, req.m, req.a):
        loader.category(doc)
    p, g = loader.functor(req.p), loader.functor(req.g)
    f = loader.functor(req.f) if req.f is not None else compose_functors(g, p, name="F")
    b = build_bar_x(TriangleOverA(p=p, f=f, g=g), bounds=loader.bounds)
    verdicts = verify_bar_construction(b)
    if req.check_initial:
        verdicts.append(verify_q_initial(b, [bar_triangle(b)], loader.bounds))
    logger.info(f"Factorized {p.name}: {len(b.blocks)} classes")
    return FactorizationResponse(blocks=b.blocks, verdicts=verdicts)
