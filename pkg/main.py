import logging
from fastapi import FastAPI
from app.api.routes import router
from app.core.config import settings
from app.core.exceptions import HedronometryError, geometry_exception_handler, global_exception_handler

# Basic logging
logging.basicConfig(level=settings.LOG_LEVEL)
logging.captureWarnings(True)

# --- THE SERVER API ---
app = FastAPI(title="Hedronometry API")

# Register the Global Exception Handler
app.add_exception_handler(Exception, global_exception_handler)
app.add_exception_handler(HedronometryError, geometry_exception_handler)

# Register the routes from our Clean Architecture modules
app.include_router(router)
