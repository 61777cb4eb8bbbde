"""In-memory session and ensemble store.

Mutations of one session (measures, window, selection, settings) are
serialized by a per-session lock; computations work from an immutable
snapshot taken under that lock, so concurrent evaluations never observe
half-applied state. Nothing persists across process restarts; measures
travel via session export/import.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from ..dsl import CompiledMeasure
from ..ensemble import Ensemble
from ..errors import DataValidationError
from ..heatmap import Selection, SelectionOrigin


@dataclass(frozen=True)
class Settings:
    """Per-session analysis defaults."""

    histogram_bins: int = 20
    recurrence_width: int = 10
    pca_threshold: float = 0.999
    pca_max_components: int = 8
    time_weighted: bool = False
    color_by: str = "d"


_EMPTY_SELECTION = Selection(frozenset(), SelectionOrigin.SINGLE_POINT)


@dataclass(frozen=True)
class SessionSnapshot:
    """Immutable view of a session for one computation."""

    session_id: str
    ensemble_id: str
    ensemble: Ensemble
    measures: dict[str, CompiledMeasure]
    window: tuple[float, float] | None
    selection: Selection
    settings: Settings


class SessionState:
    """One exploratory session bound to a loaded ensemble."""

    def __init__(self, session_id: str, ensemble_id: str, ensemble: Ensemble,
                 settings: Settings):
        self.id = session_id
        self.ensemble_id = ensemble_id
        self.ensemble = ensemble
        self.settings = settings
        self.measures: dict[str, CompiledMeasure] = {}
        self.window: tuple[float, float] | None = None
        self.selection: Selection = _EMPTY_SELECTION
        self.lock = threading.Lock()

    def snapshot(self) -> SessionSnapshot:
        with self.lock:
            return SessionSnapshot(
                session_id=self.id,
                ensemble_id=self.ensemble_id,
                ensemble=self.ensemble,
                measures=dict(self.measures),
                window=self.window,
                selection=self.selection,
                settings=self.settings,
            )

    def put_measure(self, measure: CompiledMeasure) -> None:
        with self.lock:
            self.measures[measure.name] = measure

    def set_window(self, window: tuple[float, float] | None) -> None:
        with self.lock:
            self.window = window

    def set_selection(self, selection: Selection) -> None:
        with self.lock:
            self.selection = selection

    def update_settings(self, **changes) -> Settings:
        with self.lock:
            applied = {k: v for k, v in changes.items() if v is not None}
            self.settings = replace(self.settings, **applied)
            return self.settings


@dataclass
class Store:
    """Process-wide registry of ensembles and sessions."""

    data_root: Path | None = None
    ensembles: dict[str, Ensemble] = field(default_factory=dict)
    sessions: dict[str, SessionState] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _counter: int = 0

    def resolve_path(self, raw: str) -> Path:
        """Resolve a client-supplied path, confined to the data root
        when one is configured."""
        path = Path(raw)
        if self.data_root is not None:
            root = self.data_root.resolve()
            candidate = (root / path).resolve() if not path.is_absolute() else path.resolve()
            if not candidate.is_relative_to(root):
                raise DataValidationError(f"path {raw!r} escapes the data root")
            return candidate
        return path.resolve()

    def _next_id(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}-{self._counter:04d}"

    def add_ensemble(self, ensemble: Ensemble) -> str:
        with self._lock:
            ensemble_id = self._next_id("ens")
            self.ensembles[ensemble_id] = ensemble
            return ensemble_id

    def get_ensemble(self, ensemble_id: str) -> Ensemble | None:
        return self.ensembles.get(ensemble_id)

    def create_session(self, ensemble_id: str, settings: Settings) -> SessionState:
        with self._lock:
            ensemble = self.ensembles.get(ensemble_id)
            if ensemble is None:
                raise KeyError(ensemble_id)
            session = SessionState(self._next_id("ses"), ensemble_id, ensemble, settings)
            self.sessions[session.id] = session
            return session

    def get_session(self, session_id: str) -> SessionState | None:
        return self.sessions.get(session_id)
