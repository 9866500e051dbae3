"""Session-oriented HTTP service tying the engine together.

Per session: image upload starts background embedding and feature-stack
jobs; prompting, label edits, training, segmentation/uncertainty downloads
and classifier import/export all run against in-memory state. Reads never
take the writer lock (results swap in atomically), writers are serialized
per session, and errors never mutate state. Sessions evict after an idle
TTL (SAMBA_SESSION_TTL_MIN, default 60).
"""

import os
import secrets
import threading
import time

import numpy as np
from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import forest as forest_mod
from . import smart as smart_mod
from .errors import (
    EmbeddingNotReady,
    EngineError,
    FeatureMismatch,
    FeaturesNotReady,
    InconsistentStack,
    MalformedFile,
    MalformedModel,
    NoLabels,
    NotTrained,
    OutOfBounds,
    TrainingInProgress,
    UnknownSession,
    UnsupportedDepth,
    UnsupportedVersion,
)
from .features import FeatureConfig, build_feature_stack
from .image_io import GrayImage, decode_image, encode_png, encode_png_rgb, to_grayscale
from .labels import SOURCES, LabelMap, apply_delta, extract_training_set, rasterize_brush, rasterize_polygon
from .labels import LabelDelta
from .rle import RleMask, decode_mask, encode_mask
from .smart import PromptPoint

TTL_ENV = "SAMBA_SESSION_TTL_MIN"
STATIC_ENV = "SAMBA_STATIC_DIR"

_ERROR_STATUS = {
    MalformedFile: 400,
    UnsupportedDepth: 400,
    InconsistentStack: 400,
    OutOfBounds: 400,
    MalformedModel: 400,
    UnsupportedVersion: 400,
    UnknownSession: 404,
    EmbeddingNotReady: 409,
    FeaturesNotReady: 409,
    NotTrained: 409,
    TrainingInProgress: 409,
    FeatureMismatch: 409,
    NoLabels: 422,
}


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


def _status_for(exc: EngineError) -> int:
    for cls in type(exc).__mro__:
        if cls in _ERROR_STATUS:
            return _ERROR_STATUS[cls]
    return 500


class Session:
    def __init__(self, session_id, stack, cfg):
        self.session_id = session_id
        self.stack = stack
        self.grays = [to_grayscale(s) for s in stack.slices]
        self.cfg = cfg
        self.label_maps = [
            LabelMap(width=stack.width, height=stack.height, slice_index=i)
            for i in range(stack.n_slices)
        ]
        self.embedding_status = ["pending"] * stack.n_slices
        self.embeddings = [None] * stack.n_slices
        self.features_status = "pending"
        self.feature_stacks = None
        self.model = None
        self.segmentations = None
        self.training = False
        self.lock = threading.RLock()
        self.touched = time.monotonic()

    def touch(self):
        self.touched = time.monotonic()


def create_app(
    max_sessions: int = 32,
    ttl_min: float | None = None,
    backend=None,
    feature_config: FeatureConfig | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    if ttl_min is None:
        ttl_min = float(os.environ.get(TTL_ENV, "60"))
    if backend is None:
        backend = smart_mod.get_backend()
    cfg = feature_config or FeatureConfig()

    app = FastAPI(title="samba", docs_url=None, redoc_url=None)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    # ------------------------------------------------------------- plumbing

    def _evict_expired():
        deadline = time.monotonic() - ttl_min * 60.0
        with registry_lock:
            for sid in [s for s, sess in sessions.items() if sess.touched < deadline]:
                del sessions[sid]

    def _get_session(sid: str) -> Session:
        _evict_expired()
        with registry_lock:
            sess = sessions.get(sid)
        if sess is None:
            raise UnknownSession(f"no session {sid!r}")
        sess.touch()
        return sess

    def _embed_worker(sess: Session):
        for i, raster in enumerate(sess.stack.slices):
            try:
                emb = smart_mod.compute_embedding(raster, backend)
                sess.embeddings[i] = emb
                sess.embedding_status[i] = "ready"
            except EngineError:
                sess.embedding_status[i] = "failed"

    def _features_worker(sess: Session):
        try:
            stacks = [build_feature_stack(g, cfg) for g in sess.grays]
            sess.feature_stacks = stacks
            sess.features_status = "ready"
        except Exception:
            sess.features_status = "failed"

    def _slice_index(sess: Session, value, field="slice") -> int:
        try:
            k = int(value)
        except (TypeError, ValueError):
            raise ApiError(400, "BadRequest", f"{field} must be an integer") from None
        if not 0 <= k < sess.stack.n_slices:
            raise OutOfBounds(f"{field} {k} outside 0..{sess.stack.n_slices - 1}")
        return k

    def _int_field(payload, name):
        v = payload.get(name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or int(v) != v:
            raise ApiError(400, "BadRequest", f"{name} must be an integer")
        return int(v)

    def _parse_delta(sess: Session, rec) -> tuple[int, LabelDelta]:
        if not isinstance(rec, dict):
            raise ApiError(400, "BadRequest", "each delta must be an object")
        source = rec.get("source")
        if source not in SOURCES:
            raise ApiError(400, "BadRequest", f"source must be one of {SOURCES}")
        k = _slice_index(sess, rec.get("slice", 0))
        w, h = sess.stack.width, sess.stack.height
        class_id = 0 if source == "eraser" else rec.get("class_id")
        if source != "eraser":
            if not isinstance(class_id, int) or not 1 <= class_id <= 255:
                raise ApiError(400, "BadRequest", "class_id must be an integer in 1..255")
        try:
            if "pixels" in rec:
                px = np.asarray(rec["pixels"], dtype=np.int64).reshape(-1, 2)
                if px.size and (
                    px[:, 0].min() < 0 or px[:, 0].max() >= w
                    or px[:, 1].min() < 0 or px[:, 1].max() >= h
                ):
                    raise OutOfBounds("pixels outside the image")
                delta = LabelDelta(pixels=px, class_id=class_id, source=source)
            elif source in ("brush", "eraser"):
                path = rec.get("path")
                radius = rec.get("radius", 0)
                if not isinstance(path, list) or not path:
                    raise ApiError(400, "BadRequest", "brush/eraser need a non-empty path")
                delta = rasterize_brush(path, float(radius), class_id, w, h, source=source)
            elif source == "polygon":
                vertices = rec.get("vertices")
                if not isinstance(vertices, list):
                    raise ApiError(400, "BadRequest", "polygon needs vertices")
                delta = rasterize_polygon(vertices, class_id, w, h)
            else:  # smart_mask
                mask_doc = rec.get("mask")
                if not isinstance(mask_doc, dict):
                    raise ApiError(400, "BadRequest", "smart_mask needs a mask")
                rle = RleMask.from_json(mask_doc)
                if (rle.width, rle.height) != (w, h):
                    raise OutOfBounds("mask dimensions differ from the image")
                mask = decode_mask(rle)
                ys, xs = np.nonzero(mask)
                delta = LabelDelta(
                    pixels=np.column_stack((xs, ys)), class_id=class_id, source=source
                )
        except (ValueError, TypeError, KeyError) as e:
            raise ApiError(400, "BadRequest", f"bad delta record: {e}") from None
        return k, delta

    # ------------------------------------------------------------ endpoints

    @app.exception_handler(ApiError)
    async def _api_error(_req, exc: ApiError):
        return JSONResponse({"error": exc.error, "detail": exc.detail}, status_code=exc.status)

    @app.exception_handler(EngineError)
    async def _engine_error(_req, exc: EngineError):
        return JSONResponse(
            {"error": type(exc).__name__, "detail": str(exc)},
            status_code=_status_for(exc),
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/session")
    async def create_session(request: Request):
        data = await request.body()
        hint = request.headers.get("content-type")
        _evict_expired()
        with registry_lock:
            if len(sessions) >= max_sessions:
                raise ApiError(503, "TooManySessions", "session capacity reached")
        stack = decode_image(data, hint=hint)
        sid = secrets.token_hex(16)
        sess = Session(sid, stack, cfg)
        with registry_lock:
            if len(sessions) >= max_sessions:
                raise ApiError(503, "TooManySessions", "session capacity reached")
            sessions[sid] = sess
        threading.Thread(target=_embed_worker, args=(sess,), daemon=True).start()
        threading.Thread(target=_features_worker, args=(sess,), daemon=True).start()
        return {
            "session_id": sid,
            "width": stack.width,
            "height": stack.height,
            "n_slices": stack.n_slices,
        }

    @app.get("/session/{sid}/status")
    def session_status(sid: str):
        sess = _get_session(sid)
        return {
            "embedding_status": list(sess.embedding_status),
            "features_ready": sess.features_status == "ready",
            "model_trained": sess.model is not None,
        }

    @app.post("/session/{sid}/prompt")
    def prompt(sid: str, payload: dict = Body(...)):
        sess = _get_session(sid)
        k = _slice_index(sess, payload.get("slice", 0))
        x = _int_field(payload, "x")
        y = _int_field(payload, "y")
        scale_index = payload.get("scale_index", 0)
        if not isinstance(scale_index, int):
            raise ApiError(400, "BadRequest", "scale_index must be an integer")
        if not (0 <= x < sess.stack.width and 0 <= y < sess.stack.height):
            raise OutOfBounds(f"prompt ({x},{y}) outside the image")
        if sess.embedding_status[k] != "ready":
            raise EmbeddingNotReady(f"slice {k} embedding is {sess.embedding_status[k]}")
        point = PromptPoint(x=x, y=y, slice_index=k)
        triple = smart_mod.prompt_masks(sess.embeddings[k], point, backend)
        chosen = smart_mod.select_scale(triple, scale_index)
        return {
            "mask": encode_mask(chosen.mask).to_json(),
            "scale_rank": chosen.scale_rank,
            "quality": chosen.quality,
        }

    @app.post("/session/{sid}/labels")
    def post_labels(sid: str, payload: dict = Body(...)):
        sess = _get_session(sid)
        records = payload.get("deltas")
        if not isinstance(records, list):
            raise ApiError(400, "BadRequest", "body must contain a deltas list")
        parsed = [_parse_delta(sess, rec) for rec in records]
        with sess.lock:
            new_maps = list(sess.label_maps)
            for k, delta in parsed:
                new_maps[k] = apply_delta(new_maps[k], delta)
            sess.label_maps = new_maps
            count = sum(m.labelled_count() for m in new_maps)
        return {"labelled_pixel_count": count}

    @app.get("/session/{sid}/labels")
    def get_labels(sid: str, slice: int = 0):
        sess = _get_session(sid)
        k = _slice_index(sess, slice)
        return Response(content=encode_png(sess.label_maps[k]), media_type="image/png")

    @app.post("/session/{sid}/train")
    def train(sid: str, payload: dict = Body(default={})):
        sess = _get_session(sid)
        overrides = payload.get("params") or {}
        if not isinstance(overrides, dict):
            raise ApiError(400, "BadRequest", "params must be an object")
        allowed = {"n_trees", "max_depth", "min_samples_split", "features_per_split", "seed"}
        bad = set(overrides) - allowed
        if bad:
            raise ApiError(400, "BadRequest", f"unknown params: {sorted(bad)}")
        try:
            params = forest_mod.ForestParams(**{k: int(v) for k, v in overrides.items()})
        except (TypeError, ValueError) as e:
            raise ApiError(400, "BadRequest", f"bad params: {e}") from None

        with sess.lock:
            if sess.training:
                raise TrainingInProgress("a training job is already running")
            if sess.features_status != "ready":
                raise FeaturesNotReady(f"feature stack is {sess.features_status}")
            maps = [m.copy() for m in sess.label_maps]
            stacks = sess.feature_stacks
            sess.training = True
        try:
            ts = extract_training_set(stacks, maps)
            model = forest_mod.train_forest(ts, params)
            acc = forest_mod.train_accuracy(model, ts)
            segs = [forest_mod.segment(model, st) for st in stacks]
            with sess.lock:
                sess.model = model
                sess.segmentations = segs
        finally:
            with sess.lock:
                sess.training = False
        return {"trained": True, "train_accuracy": acc}

    def _require_trained(sess: Session):
        if sess.model is None or sess.segmentations is None:
            raise NotTrained("no trained classifier in this session")

    @app.get("/session/{sid}/segmentation")
    def get_segmentation(sid: str, slice: int = 0):
        sess = _get_session(sid)
        k = _slice_index(sess, slice)
        _require_trained(sess)
        return Response(
            content=encode_png(sess.segmentations[k].class_map), media_type="image/png"
        )

    @app.get("/session/{sid}/uncertainty")
    def get_uncertainty(sid: str, slice: int = 0):
        sess = _get_session(sid)
        k = _slice_index(sess, slice)
        _require_trained(sess)
        seg = sess.segmentations[k]
        gray = GrayImage(width=seg.uncertainty.shape[1], height=seg.uncertainty.shape[0],
                         data=seg.uncertainty)
        return Response(content=encode_png(gray), media_type="image/png")

    @app.get("/session/{sid}/image")
    def get_image(sid: str, slice: int = 0):
        sess = _get_session(sid)
        k = _slice_index(sess, slice)
        raster = sess.stack.slices[k]
        if raster.channels == 3:
            png = encode_png_rgb(raster.data)
        else:
            png = encode_png(sess.grays[k])
        return Response(content=png, media_type="image/png")

    @app.get("/session/{sid}/classifier")
    def get_classifier(sid: str):
        sess = _get_session(sid)
        _require_trained(sess)
        return Response(
            content=forest_mod.serialize_model(sess.model),
            media_type="application/json",
            headers={"Content-Disposition": "attachment; filename=classifier.json"},
        )

    @app.post("/session/{sid}/classifier")
    async def post_classifier(sid: str, request: Request):
        sess = _get_session(sid)
        data = await request.body()
        model = forest_mod.deserialize_model(data)
        expected = list(sess.feature_stacks[0].names) if sess.feature_stacks else None
        if expected is None:
            raise FeaturesNotReady(f"feature stack is {sess.features_status}")
        if list(model.feature_names) != expected:
            raise FeatureMismatch("classifier was trained with a different feature configuration")
        with sess.lock:
            if sess.training:
                raise TrainingInProgress("a training job is already running")
            segs = [forest_mod.segment(model, st) for st in sess.feature_stacks]
            sess.model = model
            sess.segmentations = segs
        return {"applied": True}

    # Optional static frontend under /
    resolved_static = static_dir or os.environ.get(STATIC_ENV) or os.path.join(
        os.getcwd(), "frontend", "dist"
    )
    if os.path.isdir(resolved_static):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=resolved_static, html=True), name="static")

    return app
