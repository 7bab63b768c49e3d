"""FastAPI service wrapping the comparison engine."""

from .app import create_app

__all__ = ["create_app"]
