import logging

from fastapi import APIRouter, Body
from fastapi.responses import JSONResponse

from app.core.config import settings
from app.schemas.schemas import HealthResponse, InvolutionOp, document, parse_input
from app.services import documents

logger = logging.getLogger(__name__)

router = APIRouter()


def _respond(command: str, build, payload: dict) -> JSONResponse:
    """Parses the raw payload ourselves so HTTP and CLI reject exactly the same documents."""
    body = build(parse_input(payload))
    status_code = 422 if "error" in body else 200
    return JSONResponse(status_code=status_code, content=document(command, body))


@router.get("/health/", response_model=HealthResponse)
async def health():
    return {"status": "ok", "schema": settings.SCHEMA_VERSION}


@router.post("/analyze/")
def analyze(payload: dict = Body(...)):
    return _respond("analyze", documents.analyze, payload)


@router.post("/reconstruct/")
def reconstruct(payload: dict = Body(...)):
    return _respond("reconstruct", documents.reconstruct, payload)


@router.post("/classify/")
def classify(payload: dict = Body(...)):
    return _respond("classify", documents.classify, payload)


@router.post("/canonical-planar/")
def canonical_planar(payload: dict = Body(...)):
    return _respond("canonical-planar", documents.canonical_planar, payload)


@router.post("/invert-areas/")
def invert_areas(payload: dict = Body(...)):
    return _respond("invert-areas", documents.invert_areas, payload)


@router.post("/involution/{operation}/")
def involution(operation: InvolutionOp, payload: dict = Body(...)):
    logger.info(f"involution request: {operation.value}")
    return _respond(
        f"involution {operation.value}", lambda doc: documents.involution(operation.value, doc), payload
    )


@router.post("/solve-2to2/")
def solve_2to2(payload: dict = Body(...)):
    return _respond("solve-2to2", documents.solve_2to2, payload)
