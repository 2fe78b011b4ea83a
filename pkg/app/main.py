# app/main.py
import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from .config import ALLOW_ORIGINS
from .routes import synthesis as synthesis_routes
from .version import get_version_info

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Load the technology file and build the PG library once at startup."""
    logger.info("Starting up: loading technology and PG library...")
    try:
        synthesis_routes.get_library(True)
    except Exception as e:
        logger.error(f"Failed to warm technology/library on startup: {e}")
    yield
    synthesis_routes.get_library.cache_clear()
    synthesis_routes.get_tech.cache_clear()


app = FastAPI(title="NV-Clustering Toolchain", version="1.0.0", lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=[o.strip() for o in ALLOW_ORIGINS.split(",")],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(synthesis_routes.router)


@app.get("/healthz")
def healthz():
    return {"ok": True}


@app.get("/version")
def version():
    """Tool version, git SHA/tag and the sha256 of the loaded technology file."""
    try:
        digest = synthesis_routes.get_tech().digest
    except Exception as e:
        logger.error(f"Technology file unavailable: {e}")
        digest = None
    return get_version_info(tech_digest=digest)
