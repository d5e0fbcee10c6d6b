"""JSON-over-HTTP session API wrapping the elicitation loop.

All endpoints live under /v1. Sessions are kept in an in-memory store
with TTL eviction; one exclusive lock per session serializes its
requests, while distinct sessions proceed concurrently.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import Body, FastAPI, HTTPException

from pere import engine
from pere.behavior import Rating
from pere.data import Config
from pere.dpp import build_ensemble

log = logging.getLogger("pere.service")

DEFAULT_TTL_SECONDS = 3600.0


@dataclass
class _Entry:
    session: engine.Session
    id_of: dict            # item index -> public item id
    index_of: dict         # public item id -> item index
    rng: np.random.Generator
    lock: threading.Lock = field(default_factory=threading.Lock)
    expires_at: float = 0.0
    state: str = "burn_in"
    token: int = 0
    replay_token: int = -1
    replay_digest: str = ""
    replay_response: dict | None = None


def _digest(payload: dict) -> str:
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _cards(entry: _Entry, indices) -> list[dict]:
    return [{"id": entry.id_of[int(i)], "name": entry.id_of[int(i)],
             "image_url": None} for i in indices]


def _region_summary(entry: _Entry) -> dict | None:
    region = entry.session.region
    if region is None:
        return None
    return {"round": entry.session.round, "radius": float(region.radius)}


def _batch_payload(entry: _Entry, indices) -> dict:
    return {"token": entry.token, "items": _cards(entry, indices)}


def create_app(catalog=None, config: Config | None = None,
               ttl_seconds: float = DEFAULT_TTL_SECONDS,
               clock=time.monotonic) -> FastAPI:
    app = FastAPI(title="pere", version="1")
    config = config or Config()
    store: dict[str, _Entry] = {}
    store_lock = threading.Lock()
    shared: dict = {}

    def _shared_assets():
        """Burn-in batch and DPP ensemble, computed once per app."""
        if "burn_in" not in shared:
            plan = engine.plan_for_strategy(config.strategy, config.K,
                                            config.m, config.T)
            shared["plan"] = plan
            shared["burn_in"] = engine.burn_in(
                catalog, plan.k_burn, config.P,
                strategy=plan.burn_strategy, seed=config.seed)
            shared["ensemble"] = build_ensemble(
                catalog.embeddings, catalog.weights, config.P)
        return shared["plan"], shared["burn_in"], shared["ensemble"]

    def _sweep(now: float) -> None:
        dead = [sid for sid, e in store.items() if e.expires_at <= now]
        for sid in dead:
            del store[sid]

    def _get_entry(session_id: str) -> _Entry:
        now = clock()
        with store_lock:
            _sweep(now)
            entry = store.get(session_id)
            if entry is None:
                raise HTTPException(404, "unknown session")
            entry.expires_at = now + ttl_seconds
            return entry

    @app.get("/healthz")
    @app.get("/v1/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        if catalog is None:
            raise HTTPException(503, "no catalog loaded")
        plan, burn, ensemble = _shared_assets()
        session = engine.Session(catalog, config, burn_in_items=list(burn),
                                 ensemble=ensemble)
        session_id = uuid.uuid4().hex
        entry = _Entry(
            session=session,
            id_of={i: catalog.ids[i] for i in range(catalog.n_items)},
            index_of={catalog.ids[i]: i for i in range(catalog.n_items)},
            rng=np.random.default_rng([config.seed,
                                       int(session_id[:12], 16)]),
        )
        now = clock()
        entry.expires_at = now + ttl_seconds
        with store_lock:
            _sweep(now)
            store[session_id] = entry
        log.info("session %s created (K=%d)", session_id, len(burn))
        return {
            "session_id": session_id,
            "state": entry.state,
            "batch": _batch_payload(entry, session.outstanding),
            "region": _region_summary(entry),
        }

    @app.post("/v1/sessions/{session_id}/ratings")
    def submit_ratings(session_id: str, payload: dict = Body(...)):
        entry = _get_entry(session_id)
        with entry.lock:
            token = payload.get("token")
            ratings_raw = payload.get("ratings")
            if not isinstance(token, int) or not isinstance(ratings_raw, dict):
                raise HTTPException(
                    422, "body must be {token: int, ratings: {id: rating}}")
            digest = _digest(payload)
            if (token == entry.replay_token
                    and digest == entry.replay_digest
                    and entry.replay_response is not None):
                return entry.replay_response
            if entry.state == "done":
                raise HTTPException(409, "session complete")
            if token != entry.token:
                raise HTTPException(
                    409, f"stale batch token {token}; expected {entry.token}")

            session = entry.session
            outstanding = set(session.outstanding or ())
            converted = {}
            for item_id, value in ratings_raw.items():
                try:
                    rating = Rating(value)
                except ValueError:
                    raise HTTPException(
                        422, f"bad rating {value!r} for {item_id!r}; "
                             f"use +1, -1 or NA") from None
                index = entry.index_of.get(item_id)
                if index is None or index not in outstanding:
                    raise HTTPException(
                        409, f"item {item_id!r} is not outstanding")
                converted[index] = rating

            session.submit_ratings(converted)
            plan = shared["plan"]
            response = {"state": entry.state, "batch": None,
                        "recommendations": None}
            if session.round < plan.rounds:
                batch = engine.round_batch(session, plan, config.m,
                                            entry.rng)
                entry.state = "adaptive"
                entry.token += 1
                response["state"] = entry.state
                response["batch"] = _batch_payload(entry, batch)
            else:
                entry.state = "done"
                response["state"] = entry.state
                response["recommendations"] = _cards(
                    entry, session.recommend(config.k_rec))
            response["region"] = _region_summary(entry)
            entry.replay_token = token
            entry.replay_digest = digest
            entry.replay_response = response
            return response

    @app.get("/v1/sessions/{session_id}/region")
    def region(session_id: str, debug: bool = False):
        entry = _get_entry(session_id)
        with entry.lock:
            session = entry.session
            summary = {
                "round": session.round,
                "radius": (float(session.region.radius)
                           if session.region is not None else None),
                "center_history": len(session.center_history),
            }
            if debug and session.region is not None:
                summary["center"] = [float(x) for x in session.region.center]
            return summary

    return app
