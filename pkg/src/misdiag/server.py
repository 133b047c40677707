"""HTTP service for the interactive erase-and-reclassify loop.

The session snapshot (model, channel stats, dataset, precomputed test
predictions) is immutable after startup; every request is a pure
computation over it, so concurrent requests are safe and responses are
reproducible. The intervention endpoint returns the exact JSON bytes the
CLI ``intervene`` subcommand writes for the same inputs.
"""

import base64
import io
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from . import confusion, netgraph
from .classifier import load_model, load_model_metadata
from .dataset import ChannelStats, normalize_image
from .intervention import InterventionSpec, do_intervention, result_to_json
from .pipeline import classify_images
from .planted import load_planted_dataset, rle_to_mask
from .saliency import OcclusionConfig, gradient_saliency, model_scorer, occlusion_saliency


@dataclass(frozen=True)
class SessionState:
    params: object
    stats: ChannelStats
    images: dict        # id -> LabeledImage (test split)
    records: dict       # id -> ClassificationRecord
    info: dict          # id -> PlantedInfo (ground-truth masks)
    order: tuple        # stable id listing order
    theta: float
    model_id: str


def build_session(model_path, dataset_dir, theta: float = 0.3,
                  model_id: str = "builtin") -> SessionState:
    params = load_model(model_path)
    meta = load_model_metadata(model_path)
    stats = ChannelStats(mean=np.array(meta["channel_mean"]),
                         std=np.array(meta["channel_std"]))
    ds = load_planted_dataset(dataset_dir)
    records = classify_images(params, stats, ds.test, model_id=model_id)
    return SessionState(
        params=params, stats=stats,
        images={img.id: img for img in ds.test},
        records={r.image_id: r for r in records},
        info=ds.info,
        order=tuple(img.id for img in ds.test),
        theta=theta, model_id=model_id)


class InterveneRequest(BaseModel):
    id: str
    p: float = 0.05
    dx: int = 7
    dy: int = 7
    spare_mask: list | str | None = None  # RLE runs, "ground-truth", or null


def _png_b64(image: np.ndarray) -> str:
    from PIL import Image
    buf = io.BytesIO()
    Image.fromarray(np.transpose(image, (1, 2, 0)), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()


def create_app(model_path, dataset_dir, theta: float = 0.3,
               model_id: str = "builtin") -> FastAPI:
    session = build_session(model_path, dataset_dir, theta, model_id)
    app = FastAPI(title="misdiag explorer service")

    def get_image(image_id):
        img = session.images.get(image_id)
        if img is None:
            raise HTTPException(status_code=404, detail=f"unknown image id {image_id!r}")
        return img

    @app.get("/api/images")
    def list_images(page: int = 0, page_size: int = 50):
        if page < 0 or page_size < 1:
            raise HTTPException(status_code=400, detail="bad pagination parameters")
        start = page * page_size
        ids = session.order[start:start + page_size]
        return {
            "total": len(session.order),
            "page": page,
            "page_size": page_size,
            "items": [
                {
                    "id": i,
                    "label": session.records[i].true_label,
                    "predicted": session.records[i].predicted_label,
                    "misclassified": session.records[i].misclassified,
                    "interference": bool(session.info[i].interference)
                    if i in session.info else False,
                }
                for i in ids
            ],
        }

    @app.get("/api/image/{image_id:path}")
    def image_detail(image_id: str):
        img = get_image(image_id)
        r = session.records[image_id]
        return {
            "id": img.id,
            "label": img.label,
            "predicted": r.predicted_label,
            "scores": list(r.scores),
            "png_b64": _png_b64(img.image),
        }

    @app.get("/api/saliency/{image_id:path}")
    def saliency_grid(image_id: str, method: str = "gradient"):
        img = get_image(image_id)
        if method == "gradient":
            smap = gradient_saliency(session.params,
                                     normalize_image(img.image, session.stats))
        elif method == "occlusion":
            smap = occlusion_saliency(model_scorer(session.params), img.image,
                                      session.stats, OcclusionConfig())
        else:
            raise HTTPException(status_code=400,
                                detail="method must be 'gradient' or 'occlusion'")
        return {
            "id": img.id,
            "method": method,
            "target_class": smap.target_class,
            "grid": [[float(x) for x in row] for row in smap.values],
        }

    @app.post("/api/intervene")
    def intervene(req: InterveneRequest):
        img = get_image(req.id)
        if req.spare_mask is None:
            spare = None
        elif req.spare_mask == "ground-truth":
            info = session.info.get(req.id)
            spare = info.object_mask if info else None
        elif isinstance(req.spare_mask, list):
            try:
                spare = rle_to_mask(req.spare_mask)
            except (TypeError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=f"bad spare mask: {exc}")
        else:
            raise HTTPException(status_code=400, detail="bad spare_mask value")
        try:
            spec = InterventionSpec(top_p=req.p, box_width=req.dx, box_height=req.dy,
                                    spare_mask=spare)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        result = do_intervention(session.params, session.stats, img, spec,
                                 model_id=session.model_id)
        return Response(content=result_to_json(result), media_type="application/json")

    @app.get("/api/stats")
    def stats_summary():
        counts = confusion.tally(list(session.records.values()))
        u, u_def = confusion.misclass_rates(counts)
        v, _ = confusion.conditional_rates(counts)
        network = netgraph.build_network(v, session.theta, model_id=session.model_id)
        return {
            "counts": counts.counts.tolist(),
            "u": [float(x) for x in u],
            "u_defined": [bool(x) for x in u_def],
            "v": [[float(x) for x in row] for row in v],
            "theta": session.theta,
            "edges": netgraph.network_to_dict(network)["edges"],
        }

    return app
