from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.exceptions import RequestValidationError
import logging
from config import LOG_LEVEL, configure_logging
from routes import categories, extensions
from utils.errors import BoundExceeded, FibcalcError, InputError, InvariantError, PropertyFailure

# Configure logging
configure_logging(LOG_LEVEL)
logger = logging.getLogger(__name__)

# Create FastAPI app
app = FastAPI(
    title="fibcalc",
    description="Fibrations of finite categories and crossed extensions of finite groups",
    version="1.0.0"
)

# Include routers
app.include_router(categories.router)
app.include_router(extensions.router)

ERROR_STATUS = {
    InputError: 422,
    PropertyFailure: 409,
    InvariantError: 409,
    BoundExceeded: 413,
}


def _client(request: Request) -> str:
    return request.client.host if request.client else "unknown"


# Global exception handlers
@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request: Request, exc: RequestValidationError):
    logger.warning(f"Validation error from {_client(request)}: {exc.errors()}")
    return JSONResponse(
        status_code=422,
        content={
            "detail": "Invalid request format",
            "errors": exc.errors()
        }
    )


@app.exception_handler(FibcalcError)
async def fibcalc_exception_handler(request: Request, exc: FibcalcError):
    code = next((code for cls, code in ERROR_STATUS.items() if isinstance(exc, cls)), 500)
    logger.warning(f"{type(exc).__name__} from {_client(request)}: {exc.message}")
    return JSONResponse(status_code=code, content={"detail": exc.message, **exc.to_dict()})


@app.exception_handler(Exception)
async def general_exception_handler(request: Request, exc: Exception):
    logger.error(f"Unhandled exception from {_client(request)}: {str(exc)}", exc_info=True)
    return JSONResponse(
        status_code=500,
        content={
            "detail": "Internal server error",
            "message": "An unexpected error occurred"
        }
    )


# Health check endpoint
@app.get("/health")
async def health_check():
    """Health check endpoint for monitoring"""
    return {"status": "ok", "service": "fibcalc"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
