"""HTTP service for the expert annotation protocol.

Endpoints:
    POST /sessions                         create (idempotent per annotator+seed)
    GET  /sessions/{id}/next               current item, without advancing
    POST /sessions/{id}/ratings            submit the cursor item's rating
    GET  /sessions/{id}/media/{item}/{asset}   bundle.json / audio.wav /
                                               spectrogram.png / frame_NNNN.png
    GET  /export/ratings.csv               agreement-schema CSV
    GET  /manifest                         configured item manifest, if any

Rating rules are enforced server-side: Likert ranges, the secondary-score
gate at primary <= 3, the playback cap, and strict cursor order. Playback
enforcement counts audio fetches for the current item (a server cannot see
local replays, so capping fetches is the strongest honest check) and
re-validates the client-reported counter at submission.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..corpus import load_corpus
from ..errors import MediaRenderError
from ..scoring import (
    ExpertRating,
    RatingValidationError,
    binarize,
    clear_case_label,
    combined_expert_score,
)
from .items import build_item_manifest, parse_item_id
from .media import render_media
from .sessions import DUPLICATE_FRACTION, build_session_doc, manifest_digest
from .store import RatingStore

PLAYBACK_CAP = 6
EXPORT_VALUES = ("primary", "secondary", "combined", "binary", "clear")


@dataclass
class ServiceConfig:
    data_dir: Path
    listen_host: str = "127.0.0.1"
    listen_port: int = 8080
    playback_cap: int = PLAYBACK_CAP
    duplicate_fraction: float = DUPLICATE_FRACTION
    corpus_root: Path | None = None
    target_class: str = "velar"
    substitution_class: str = "alveolar"
    manifest_path: Path | None = None


def parse_config_file(path: Path) -> ServiceConfig:
    """key=value lines: listen_host, listen_port, data_dir, playback_cap,
    duplicate_fraction, corpus_root, target_class, substitution_class,
    manifest."""
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    if "data_dir" not in values:
        raise ValueError(f"{path}: config must set data_dir")
    return ServiceConfig(
        data_dir=Path(values["data_dir"]),
        listen_host=values.get("listen_host", "127.0.0.1"),
        listen_port=int(values.get("listen_port", "8080")),
        playback_cap=int(values.get("playback_cap", str(PLAYBACK_CAP))),
        duplicate_fraction=float(values.get("duplicate_fraction", str(DUPLICATE_FRACTION))),
        corpus_root=Path(values["corpus_root"]) if "corpus_root" in values else None,
        target_class=values.get("target_class", "velar"),
        substitution_class=values.get("substitution_class", "alveolar"),
        manifest_path=Path(values["manifest"]) if "manifest" in values else None,
    )


class ItemModel(BaseModel):
    item_id: str
    utterance_id: str
    phone_index: int
    speaker: str = ""
    word: str = ""
    phone_label: str = ""
    phone_start: float = 0.0
    phone_end: float = 0.0
    word_start: float = 0.0
    word_end: float = 0.0
    target_prompt: str = ""
    substitution_prompt: str = ""


class CreateSessionRequest(BaseModel):
    annotator_id: str
    seed: int = 0
    items: list[ItemModel]


class RatingRequest(BaseModel):
    item_id: str
    occurrence: int = 1
    primary: int
    secondary: int | None = None
    comment: str | None = None
    playbacks_used: int = 0


def _rejection(reason: str, status: int = 422) -> JSONResponse:
    return JSONResponse(status_code=status, content={"accepted": False, "reason": reason})


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="annotation service")
    store = RatingStore(config.data_dir)
    corpus = load_corpus(config.corpus_root) if config.corpus_root else None
    # transient per-process playback accounting: {(session_id, entry_index): count}
    audio_fetches: dict[tuple[str, int], int] = {}

    manifest: list[dict] | None = None
    if config.manifest_path:
        manifest = json.loads(Path(config.manifest_path).read_text(encoding="utf-8"))
    elif corpus is not None:
        manifest = build_item_manifest(corpus, config.target_class, config.substitution_class)

    def current_entry(session: dict):
        cursor = store.cursor(session["session_id"])
        playlist = session["playlist"]
        if cursor >= len(playlist):
            return cursor, None
        return cursor, playlist[cursor]

    @app.get("/manifest")
    def get_manifest():
        if manifest is None:
            return JSONResponse(status_code=404, content={"detail": "no manifest configured"})
        return {"items": manifest, "count": len(manifest)}

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest):
        if not req.items:
            return _rejection("empty item manifest", status=422)
        items = [i.model_dump() for i in req.items]
        digest = manifest_digest(items)
        existing = store.find_session_by_key(req.annotator_id, req.seed)
        if existing is not None:
            if existing["manifest_digest"] != digest:
                return JSONResponse(status_code=409, content={
                    "detail": "session exists for this annotator and seed with a different manifest"})
            doc = existing
        else:
            doc = build_session_doc(req.annotator_id, items, req.seed,
                                    config.duplicate_fraction)
            store.add_session(doc)
        return {
            "session_id": doc["session_id"],
            "annotator_id": doc["annotator_id"],
            "num_items": len(doc["items"]),
            "num_entries": len(doc["playlist"]),
            "num_duplicates": doc["num_duplicates"],
            "state": "complete" if store.cursor(doc["session_id"]) >= len(doc["playlist"])
                     else "active",
        }

    @app.get("/sessions/{session_id}/next")
    def next_item(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"detail": "unknown session"})
        cursor, entry = current_entry(session)
        total = len(session["playlist"])
        if entry is None:
            return {"complete": True, "position": cursor, "total": total}
        item_index, occurrence = entry
        item = session["items"][item_index]
        return {
            "complete": False,
            "position": cursor,
            "total": total,
            "occurrence": occurrence,
            "item": item,
            "media": {
                "bundle": f"/sessions/{session_id}/media/{item['item_id']}/bundle.json",
            },
            "playback_cap": config.playback_cap,
        }

    @app.post("/sessions/{session_id}/ratings")
    def submit_rating(session_id: str, req: RatingRequest):
        session = store.sessions.get(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"detail": "unknown session"})
        cursor, entry = current_entry(session)
        if entry is None:
            return _rejection("session complete", status=409)
        item_index, occurrence = entry
        item = session["items"][item_index]
        if req.item_id != item["item_id"] or req.occurrence != occurrence:
            return _rejection("out of order", status=409)
        try:
            ExpertRating(primary=req.primary, secondary=req.secondary).validate()
        except RatingValidationError as exc:
            msg = str(exc)
            if "requires a secondary" in msg:
                return _rejection("secondary required")
            if "forbids a secondary" in msg:
                return _rejection("secondary forbidden")
            return _rejection(msg)
        if req.playbacks_used > config.playback_cap:
            return _rejection("playback limit")
        store.add_rating({
            "session_id": session_id,
            "annotator_id": session["annotator_id"],
            "item_id": req.item_id,
            "occurrence": req.occurrence,
            "primary": req.primary,
            "secondary": req.secondary,
            "comment": req.comment,
            "playbacks_used": req.playbacks_used,
        })
        new_cursor = cursor + 1
        return {"accepted": True, "position": new_cursor,
                "complete": new_cursor >= len(session["playlist"])}

    @app.get("/sessions/{session_id}/media/{item_id}/{asset}")
    def media_asset(session_id: str, item_id: str, asset: str):
        session = store.sessions.get(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"detail": "unknown session"})
        cursor, entry = current_entry(session)
        if entry is None:
            return JSONResponse(status_code=409, content={"detail": "session complete"})
        item = session["items"][entry[0]]
        if item["item_id"] != item_id:
            return JSONResponse(status_code=409,
                                content={"detail": "media available only for the current item"})
        if corpus is None:
            return JSONResponse(status_code=404, content={"detail": "no corpus configured"})
        utt_id, _ = parse_item_id(item_id)
        utterance = corpus.utterances.get(utt_id)
        if utterance is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown utterance {utt_id}"})
        try:
            bundle = render_media(utterance, item)
        except MediaRenderError as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})

        if asset == "bundle.json":
            base = f"/sessions/{session_id}/media/{item_id}"
            return {
                "audio": f"{base}/audio.wav",
                "spectrogram": f"{base}/spectrogram.png",
                "frames": [f"{base}/frame_{i:04d}.png" for i in range(len(bundle.frame_pngs))],
                "timing": bundle.timing(),
                "target_prompt": item["target_prompt"],
                "substitution_prompt": item["substitution_prompt"],
                "word": item["word"],
                "playback_cap": config.playback_cap,
            }
        if asset == "audio.wav":
            key = (session_id, cursor)
            count = audio_fetches.get(key, 0)
            if count >= config.playback_cap:
                return JSONResponse(status_code=429, content={"detail": "playback limit"})
            audio_fetches[key] = count + 1
            return Response(content=bundle.audio_wav, media_type="audio/wav")
        if asset == "spectrogram.png":
            return Response(content=bundle.spectrogram_png, media_type="image/png")
        if asset.startswith("frame_") and asset.endswith(".png"):
            index = int(asset[len("frame_"):-len(".png")])
            if not 0 <= index < len(bundle.frame_pngs):
                return JSONResponse(status_code=404, content={"detail": "no such frame"})
            return Response(content=bundle.frame_pngs[index], media_type="image/png")
        return JSONResponse(status_code=404, content={"detail": f"unknown asset {asset!r}"})

    @app.get("/export/ratings.csv")
    def export_ratings(value: str = "primary", annotator: str | None = None):
        if value not in EXPORT_VALUES:
            return JSONResponse(status_code=422,
                                content={"detail": f"value must be one of {EXPORT_VALUES}"})
        rows = []
        for r in store.ratings:
            if annotator is not None and r["annotator_id"] != annotator:
                continue
            rating = ExpertRating(primary=r["primary"], secondary=r["secondary"])
            if value == "primary":
                cell = r["primary"]
            elif value == "secondary":
                if r["secondary"] is None:
                    continue
                cell = r["secondary"]
            elif value == "combined":
                cell = repr(combined_expert_score(rating))
            elif value == "binary":
                cell = binarize(combined_expert_score(rating), 0.0)
            else:  # clear
                label = clear_case_label(rating)
                if label is None:
                    continue
                cell = label
            rows.append((r["annotator_id"], r["item_id"], cell, r["occurrence"]))
        rows.sort(key=lambda t: (t[0], t[1], t[3]))
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["annotator", "item", "value", "occurrence"])
        writer.writerows(rows)
        return Response(content=buf.getvalue(), media_type="text/csv")

    return app
