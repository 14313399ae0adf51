import logging
from fastapi import Request, status
from fastapi.responses import JSONResponse

# Set up our logger
logger = logging.getLogger(__name__)


class HedronometryError(Exception):
    """Base class for every error the library raises on purpose."""
    exit_code = 1
    code = "error"


class GeometryError(HedronometryError, ValueError):
    """The input is well formed but geometrically invalid for the requested operation."""
    exit_code = 3
    code = "geometry"


class DegenerateTetrahedron(GeometryError):
    code = "degenerate_tetrahedron"


class ExSphereUndefined(GeometryError):
    code = "ex_sphere_undefined"


class NegativeParameter(GeometryError):
    code = "negative_parameter"


class DegenerateParameters(GeometryError):
    code = "degenerate_parameters"


class InvalidParameters(GeometryError):
    code = "invalid_parameters"


class InvalidAreas(GeometryError):
    code = "invalid_areas"


class NotRealizable(GeometryError):
    code = "not_realizable"


class YetterViolated(GeometryError):
    code = "yetter_violated"


class DegenerateGramian(GeometryError):
    code = "degenerate_gramian"


class WrongRank(GeometryError):
    code = "wrong_rank"


class NotDegenerate(GeometryError):
    code = "not_degenerate"


class NotRank1(GeometryError):
    code = "not_rank1"


class InconsistentAreas(GeometryError):
    code = "inconsistent_areas"


class DegenerateBase(GeometryError):
    code = "degenerate_base"


class CoincidentPoints(GeometryError):
    code = "coincident_points"


class DegenerateSimplex(GeometryError):
    code = "degenerate_simplex"


class NoSolution(GeometryError):
    code = "no_solution"


class DegenerateInput(GeometryError):
    code = "degenerate_input"


class InputParseError(HedronometryError, ValueError):
    """Malformed input document."""
    exit_code = 2
    code = "parse_error"


class ToleranceFailure(HedronometryError, RuntimeError):
    """An internal post-condition or convergence check failed."""
    exit_code = 4
    code = "tolerance_failure"


class ConditioningWarning(UserWarning):
    """Emitted when a computation runs close to a known ill-conditioned locus."""


async def global_exception_handler(request: Request, exc: Exception):
    """
    Catches ALL completely unhandled Python exceptions (500s) globally.
    Logs the full traceback on the server, but returns a clean JSON to the client.
    """
    logger.error(f"CRITICAL UNHANDLED ERROR processing {request.method} {request.url}: {exc}", exc_info=True)

    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": "An unexpected system error occurred."},
    )


async def geometry_exception_handler(request: Request, exc: HedronometryError):
    """Maps library errors to client-facing status codes with a machine-readable reason."""
    if isinstance(exc, InputParseError):
        status_code = status.HTTP_400_BAD_REQUEST
    elif isinstance(exc, ToleranceFailure):
        status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    else:
        status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    logger.info(f"{request.method} {request.url} rejected with {exc.code}: {exc}")
    return JSONResponse(status_code=status_code, content={"detail": str(exc), "code": exc.code})
