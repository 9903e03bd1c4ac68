"""Durable storage for annotation sessions and ratings.

Append-only JSONL logs (one document per line) plus in-memory indexes
rebuilt at startup. Ratings are immutable once accepted; a session's
cursor is the count of its accepted ratings.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path


class RatingStore:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_path = self.data_dir / "sessions.jsonl"
        self.ratings_path = self.data_dir / "ratings.jsonl"
        self._lock = threading.Lock()
        self.sessions: dict[str, dict] = {}
        self.ratings: list[dict] = []
        self._replay()

    def _replay(self) -> None:
        if self.sessions_path.exists():
            for line in self.sessions_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    doc = json.loads(line)
                    self.sessions[doc["session_id"]] = doc
        if self.ratings_path.exists():
            for line in self.ratings_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self.ratings.append(json.loads(line))

    @staticmethod
    def _append(path: Path, doc: dict) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
            fh.flush()

    def add_session(self, doc: dict) -> None:
        with self._lock:
            self._append(self.sessions_path, doc)
            self.sessions[doc["session_id"]] = doc

    def add_rating(self, doc: dict) -> None:
        doc = dict(doc)
        doc.setdefault("timestamp", time.time())
        with self._lock:
            self._append(self.ratings_path, doc)
            self.ratings.append(doc)

    def session_ratings(self, session_id: str) -> list[dict]:
        return [r for r in self.ratings if r["session_id"] == session_id]

    def cursor(self, session_id: str) -> int:
        return len(self.session_ratings(session_id))

    def find_session_by_key(self, annotator_id: str, seed: int) -> dict | None:
        for doc in self.sessions.values():
            if doc["annotator_id"] == annotator_id and doc["seed"] == seed:
                return doc
        return None
