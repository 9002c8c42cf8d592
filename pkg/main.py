from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from contextlib import asynccontextmanager
from dotenv import load_dotenv
import logging

# Load environment variables from .env file
load_dotenv()

from angular_lab import __version__
from angular_lab.api.routes import router as api_router
from angular_lab.config import get_settings

# Set up logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Log the active numerical settings on startup."""
    settings = get_settings()
    logger.info(f"{settings.tool_name} {__version__} starting: threads={settings.threads}, "
                f"tolerance={settings.tolerance:g}, quad_tol={settings.quad_tol:g}")

    yield  # Application runs here

    logger.info("Shutting down")


# Create FastAPI application
app = FastAPI(
    title="Angular Lab",
    description="Admissibility deciders and oracles for mixed radial-angular weighted inequalities",
    version=__version__,
    lifespan=lifespan
)

# Add CORS middleware for local development
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include API routes
app.include_router(api_router)


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy", "service": "angular-lab"}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run("main:app", host="0.0.0.0", port=8000, reload=True)
