"""
MetaCache - inspection API
Backend using FastAPI

Main entry point - creates the FastAPI app, opens the store and mounts routes.
"""

import logging
from contextlib import asynccontextmanager
from typing import Optional

import uvicorn
from fastapi import FastAPI

from metacache import __version__
from metacache.config import LOG_FORMAT, LOG_LEVEL, StoreConfig
from metacache.routes import router
from metacache.storage.store import Store

# Configure logging
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format=LOG_FORMAT,
)
logger = logging.getLogger(__name__)


def create_app(store_config: Optional[StoreConfig] = None) -> FastAPI:
    """
    Build the app. The store is opened on startup and closed on shutdown.

    Args:
        store_config: Store settings; read from the environment if None
    """

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        config = store_config or StoreConfig.from_env()
        app.state.store = Store.open(config)
        logger.info(f"Serving store at {config.data_dir}")
        try:
            yield
        finally:
            app.state.store.close()

    app = FastAPI(title="MetaCache API", version=__version__, lifespan=lifespan)
    app.include_router(router)
    return app


app = create_app()


if __name__ == "__main__":
    uvicorn.run(app, host="0.0.0.0", port=8000)
