"""HTTP/JSON service exposing the analysis engine.

Sessions hold the exploratory state (loaded ensemble, compiled
measures, window, selection, settings); every numeric result comes from
the same engine functions the CLI uses.
"""

from .app import create_app
from .sessions import Settings, SessionState, Store

__all__ = ["create_app", "Store", "SessionState", "Settings"]
