from .app import ServiceConfig, create_app, parse_config_file
from .items import build_item_manifest, item_id_for, parse_item_id
from .media import MediaBundle, render_media
from .sessions import build_playlist, build_session_doc
from .store import RatingStore

__all__ = [
    "ServiceConfig",
    "create_app",
    "parse_config_file",
    "build_item_manifest",
    "item_id_for",
    "parse_item_id",
    "MediaBundle",
    "render_media",
    "build_playlist",
    "build_session_doc",
    "RatingStore",
]
