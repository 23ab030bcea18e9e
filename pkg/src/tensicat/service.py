"""Thin HTTP/JSON facade for the interactive explorer.

Sessions own a framework plus its solver caches.  The drag endpoint
continues a single tracked equilibrium along the straight control segment
from the last position, the fast path that makes live dragging possible;
a full stability re-solve plus energy descent only runs when the tracked
branch dies (the jump).  Witness sets build on a background thread and the
catastrophe endpoint answers 503 with a retry hint until they are ready.
"""

from __future__ import annotations

import json
import re
import threading
import time
import traceback
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from .catastrophe import PseudoWitnessSet, sample_catastrophe, witness_on_generic_line
from .frameworks import FrameworkError, FrameworkModel, load_framework
from .lifting import post_jump
from .oracles import make_oracle
from .stability import CriticalPoint, SeedCache, certify_stability, stability_set
from .tracking import REGULAR, TrackerConfig, parameter_homotopy

__all__ = ["serve", "make_server", "SessionStore"]


@dataclass
class Session:
    id: str
    model: FrameworkModel
    cache: SeedCache
    cfg: TrackerConfig
    drag_lock: threading.Lock = field(default_factory=threading.Lock)
    current: CriticalPoint | None = None
    last_y: np.ndarray | None = None
    witness: PseudoWitnessSet | None = None
    witness_status: str = "none"  # none | building | ready | failed
    witness_error: str = ""
    catastrophe_cache: dict = field(default_factory=dict)


class SessionStore:
    def __init__(self, cfg: TrackerConfig | None = None):
        self.cfg = cfg or TrackerConfig()
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, doc: dict) -> Session:
        model, _ = load_framework(doc)
        cache = SeedCache(model, self.cfg)
        cache.seed(tuple(range(len(model.framework.cables))))
        s = Session(id=uuid.uuid4().hex[:12], model=model, cache=cache, cfg=self.cfg)
        with self._lock:
            self._sessions[s.id] = s
        return s

    def get(self, sid: str) -> Session | None:
        with self._lock:
            return self._sessions.get(sid)

    def ensure_witness(self, s: Session) -> None:
        """Kick off the witness build in the background, once."""
        with self._lock:
            if s.witness_status in ("building", "ready"):
                return
            s.witness_status = "building"

        def build():
            try:
                s.witness = witness_on_generic_line(s.model, s.cfg, s.cache)
                s.witness_status = "ready"
            except Exception as exc:
                s.witness_status = "failed"
                s.witness_error = str(exc)

        threading.Thread(target=build, daemon=True).start()


def _drag(store: SessionStore, s: Session, y_new) -> dict:
    y_new = np.asarray([float(v) for v in y_new])
    if y_new.shape != (s.model.n_control,) or not np.all(np.isfinite(y_new)):
        raise _HttpError(422, f"y must be {s.model.n_control} finite numbers")
    if s.current is None:
        report = stability_set(s.model, list(y_new), s.cache, s.cfg)
        if not report.stable:
            raise _HttpError(422, "no stable equilibrium at the requested controls")
        s.current, _ = report.stable[0]
        s.last_y = y_new
        return {"jumped": False, "initialized": True,
                "n_stable": report.n_stable,
                "point": _payload_with_y(s, s.current, True)}
    if np.allclose(y_new, s.last_y):
        return {"jumped": False, "point": _payload_with_y(s, s.current, True)}

    crit = s.model.critical_system(s.current.stratum)
    res = parameter_homotopy(crit.system, list(s.last_y),
                             s.current.raw.reshape(1, -1), list(y_new), s.cfg)
    sol = res.raw[0]
    jumped = True
    event = None
    landed = None
    if sol.status == REGULAR:
        from .stability import real_filter

        pts = real_filter(s.model, [sol], list(y_new), s.current.stratum)
        if pts:
            cand = pts[0]
            from .stability import _physical

            ok, _ = _physical(s.model, cand, list(y_new))
            if ok and np.max(np.abs(cand.x - s.current.x)) < 0.5:
                try:
                    cert = certify_stability(s.model, cand, list(y_new))
                    if cert.verdict == "stable":
                        landed = cand
                        jumped = False
                except Exception:
                    pass
    if landed is None:
        succ = post_jump(s.model, list(y_new), s.current, s.cache, s.cfg)
        if succ is None:
            raise _HttpError(422, "no stable equilibrium at the requested controls")
        landed = succ[0]
        event = {
            "kind": "jump",
            "dx": float(np.max(np.abs(landed.x - s.current.x))),
        }
        # a continuation that lands softly on another point is not a jump
        if event["dx"] < 1e-6:
            jumped = False
            event = None
    s.current = landed
    s.last_y = y_new
    out = {"jumped": jumped, "point": _payload_with_y(s, landed, True)}
    if event:
        out["event"] = event
    return out


def _payload_with_y(s: Session, p: CriticalPoint, stable: bool) -> dict:
    y = s.last_y if s.last_y is not None else np.zeros(s.model.n_control)
    return {
        "x": [float(v) for v in p.x],
        "delta": [float(v) for v in p.delta],
        "energy": p.energy,
        "tension": list(p.tension),
        "stable": stable,
        "stratum": list(p.stratum),
        "positions": s.model.positions(p.x, y).tolist(),
    }


class _HttpError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def make_server(port: int = 8473, cfg: TrackerConfig | None = None,
                static_dir: str | None = None) -> ThreadingHTTPServer:
    store = SessionStore(cfg)
    static_root = None
    if static_dir:
        from pathlib import Path

        static_root = Path(static_dir).resolve()

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet
            pass

        # -- plumbing ---------------------------------------------------

        def _send(self, code: int, payload, content_type="application/json",
                  extra_headers=()):
            body = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
            self.send_response(code)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            for k, v in extra_headers:
                self.send_header(k, v)
            self.end_headers()
            self.wfile.write(body)

        def _json_body(self) -> dict:
            n = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(n) if n else b"{}"
            try:
                return json.loads(raw or b"{}")
            except json.JSONDecodeError as exc:
                raise _HttpError(400, f"bad JSON body: {exc}")

        def _session(self, sid: str) -> Session:
            s = store.get(sid)
            if s is None:
                raise _HttpError(404, f"no session {sid}")
            return s

        def do_OPTIONS(self):
            self._send(204, b"")

        # -- routes -----------------------------------------------------

        def do_POST(self):
            try:
                path = urlparse(self.path).path
                if path == "/sessions":
                    doc = self._json_body()
                    try:
                        s = store.create(doc)
                    except (FrameworkError, KeyError) as exc:
                        raise _HttpError(422, f"bad framework: {exc}")
                    self._send(201, {"id": s.id, "witness": s.witness_status,
                                     "n_control": s.model.n_control})
                    return
                m = re.fullmatch(r"/sessions/([0-9a-f]+)/drag", path)
                if m:
                    s = self._session(m.group(1))
                    if not s.drag_lock.acquire(blocking=False):
                        raise _HttpError(409, "a drag update is already in flight")
                    try:
                        doc = self._json_body()
                        if "y" not in doc:
                            raise _HttpError(422, "body needs a 'y' array")
                        out = _drag(store, s, doc["y"])
                    finally:
                        s.drag_lock.release()
                    self._send(200, out)
                    return
                raise _HttpError(404, f"no route {path}")
            except _HttpError as exc:
                self._send(exc.code, {"error": exc.message})
            except Exception as exc:
                self._send(500, {"error": f"{type(exc).__name__}: {exc}",
                                 "trace": traceback.format_exc(limit=4)})

        def do_GET(self):
            try:
                url = urlparse(self.path)
                path = url.path
                qs = parse_qs(url.query)
                m = re.fullmatch(r"/sessions/([0-9a-f]+)/stability", path)
                if m:
                    s = self._session(m.group(1))
                    y = _parse_y(qs, s.model.n_control)
                    report = stability_set(s.model, y, s.cache, s.cfg)
                    self._send(200, report.as_dict())
                    return
                m = re.fullmatch(r"/sessions/([0-9a-f]+)/witness", path)
                if m:
                    s = self._session(m.group(1))
                    out = {"status": s.witness_status}
                    if s.witness_status == "ready":
                        out["degree"] = s.witness.degree
                    if s.witness_status == "failed":
                        out["error"] = s.witness_error
                    self._send(200, out)
                    return
                m = re.fullmatch(r"/sessions/([0-9a-f]+)/catastrophe", path)
                if m:
                    s = self._session(m.group(1))
                    rect = tuple(float(v) for v in qs.get("rect", ["-4,4,-4,4"])[0].split(","))
                    lines = int(qs.get("lines", ["150"])[0])
                    if len(rect) != 4:
                        raise _HttpError(422, "rect needs x0,x1,y0,y1")
                    store.ensure_witness(s)
                    if s.witness_status == "failed":
                        raise _HttpError(500, f"witness failed: {s.witness_error}")
                    if s.witness_status != "ready":
                        self._send(503, {"status": s.witness_status,
                                         "retry_after_s": 5},
                                   extra_headers=[("Retry-After", "5")])
                        return
                    key = (rect, lines)
                    if key not in s.catastrophe_cache:
                        pts = sample_catastrophe(s.model, s.witness, rect, lines, s.cfg)
                        s.catastrophe_cache[key] = {
                            "degree": s.witness.degree,
                            "points": [
                                {"y": [float(v) for v in p.y], "is_C": p.is_C,
                                 "delta_min": p.delta_min}
                                for p in pts
                            ],
                        }
                    self._send(200, s.catastrophe_cache[key])
                    return
                m = re.fullmatch(r"/sessions/([0-9a-f]+)/energy_profile", path)
                if m:
                    s = self._session(m.group(1))
                    y = _parse_y(qs, s.model.n_control)
                    try:
                        oracle = make_oracle(s.model)
                    except ValueError as exc:
                        raise _HttpError(422, str(exc))
                    prof = oracle.profile(y)
                    if s.current is not None and s.last_y is not None:
                        prof["current"] = _current_marker(s, oracle)
                    self._send(200, prof)
                    return
                if static_root is not None:
                    self._serve_static(path)
                    return
                if path == "/":
                    self._send(200, {"service": "tensicat", "endpoints": [
                        "POST /sessions", "GET /sessions/{id}/stability?y=..",
                        "POST /sessions/{id}/drag", "GET /sessions/{id}/witness",
                        "GET /sessions/{id}/catastrophe?rect=..&lines=..",
                        "GET /sessions/{id}/energy_profile?y=..",
                    ]})
                    return
                raise _HttpError(404, f"no route {path}")
            except _HttpError as exc:
                self._send(exc.code, {"error": exc.message})
            except Exception as exc:
                self._send(500, {"error": f"{type(exc).__name__}: {exc}",
                                 "trace": traceback.format_exc(limit=4)})

        def _serve_static(self, path: str):
            rel = path.lstrip("/") or "index.html"
            target = (static_root / rel).resolve()
            if not str(target).startswith(str(static_root)) or not target.is_file():
                raise _HttpError(404, f"no file {rel}")
            ctype = {
                ".html": "text/html", ".js": "text/javascript",
                ".css": "text/css", ".json": "application/json",
                ".svg": "image/svg+xml",
            }.get(target.suffix, "application/octet-stream")
            self._send(200, target.read_bytes(), content_type=ctype)

    def _current_marker(s: Session, oracle):
        if hasattr(oracle, "theta_of"):
            return {"theta": oracle.theta_of(s.current.x)}
        phi, branch = oracle.branch_of(list(s.last_y), s.current.x)
        return {"phi": phi, "branch": branch}

    def _parse_y(qs, m):
        if "y" not in qs:
            raise _HttpError(422, "query needs y=v1,v2,...")
        vals = [float(v) for v in qs["y"][0].split(",")]
        if len(vals) != m or not all(np.isfinite(vals)):
            raise _HttpError(422, f"y must be {m} finite numbers")
        return vals

    server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
    server.store = store
    return server


def serve(port: int = 8473, cfg: TrackerConfig | None = None,
          static_dir: str | None = None) -> None:
    server = make_server(port, cfg, static_dir)
    print(f"tensicat service on http://127.0.0.1:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
