"""HTTP gateway for the web lure and evaluation tooling.

Four JSON endpoints plus static file serving for the dashboard bundle.
Every single request, including static hits and 404s, lands in the event
log exactly once: parseable login posts as "web-login" (credentials kept
verbatim; they are attacker input, not secrets), everything else as
"web-raw".
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import secrets
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

logger = logging.getLogger(__name__)

LEGAL_NOTICE = "This computer system is for authorized use only."
MAX_BODY_BYTES = 1 << 20
MAX_PASS_HOURS = 168.0

FALLBACK_PAGE = """<!DOCTYPE html>
<html>
<head><meta charset="utf-8"><title>{name}</title></head>
<body style="font-family: sans-serif; max-width: 40em; margin: 4em auto;">
<h1>{logo} - {name}</h1>
<p>Mission operations portal. Authorized operators can sign in to view
live telemetry and the ground-station pass schedule.</p>
<p><a href="/api/mission">Mission information</a></p>
<hr>
<p><small>{notice}</small></p>
</body>
</html>
"""


class TokenStore:
    def __init__(self):
        self._tokens: set = set()
        self._lock = threading.Lock()

    def issue(self) -> str:
        token = secrets.token_hex(16)
        with self._lock:
            self._tokens.add(token)
        return token

    def valid(self, token: Optional[str]) -> bool:
        with self._lock:
            return token in self._tokens


class ApiContext:
    """Everything the request handlers read; shared across threads."""

    def __init__(self, ground_cfg, log, clock, hub=None, beacon_fn=None,
                 static_dir: str = ""):
        self.cfg = ground_cfg
        self.log = log
        self.clock = clock
        self.hub = hub
        self.beacon_fn = beacon_fn
        self.static_dir = os.path.abspath(static_dir) if static_dir else ""
        self.tokens = TokenStore()


def _iso(epoch_s: float) -> str:
    return datetime.fromtimestamp(epoch_s, tz=timezone.utc).isoformat(
        timespec="seconds").replace("+00:00", "Z")


class GatewayHandler(BaseHTTPRequestHandler):
    server_version = "nginx"
    sys_version = ""
    protocol_version = "HTTP/1.1"

    def version_string(self) -> str:
        # The default joins server/sys versions with a space; the trailing
        # space on "nginx " would fingerprint the server as a fake.
        return self.server_version

    # -------------------------------------------------------------- plumbing

    @property
    def ctx(self) -> ApiContext:
        return self.server.ctx

    def log_message(self, fmt, *args):
        pass

    def _peer(self) -> str:
        return f"{self.client_address[0]}:{self.client_address[1]}"

    def _read_body(self) -> bytes:
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            return b""
        if length <= 0:
            return b""
        return self.rfile.read(min(length, MAX_BODY_BYTES))

    def _send_json(self, status: int, obj) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_bytes(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _log_raw(self, status: int, body_bytes: int = 0) -> None:
        # One event per request: handlers log before replying so an aborted
        # connection cannot suppress the record, and the error path cannot
        # add a second one.
        if getattr(self, "_request_logged", False):
            return
        self._request_logged = True
        self.ctx.log.append("web-raw", {
            "method": self.command, "path": self.path,
            "status": status, "body_bytes": body_bytes,
        }, peer=self._peer())

    def _authorized(self) -> bool:
        header = self.headers.get("Authorization", "")
        if header.startswith("Bearer "):
            return self.ctx.tokens.valid(header[7:].strip())
        return False

    # --------------------------------------------------------------- routes

    def do_GET(self):
        self._request_logged = False    # keep-alive reuses the handler
        try:
            path = self.path.split("?", 1)[0]
            if path == "/api/mission":
                self._get_mission()
            elif path == "/api/passes":
                self._get_passes()
            elif path == "/api/telemetry/latest":
                self._get_telemetry()
            else:
                self._get_static(path)
        except BrokenPipeError:
            pass
        except Exception:
            logger.exception("request handler failed")
            self._log_raw(500)
            try:
                self._send_json(500, {"error": "internal error"})
            except OSError:
                pass

    def do_POST(self):
        self._request_logged = False
        try:
            path = self.path.split("?", 1)[0]
            if path == "/api/login":
                self._post_login()
            else:
                body = self._read_body()
                self._log_raw(404, len(body))
                self._send_json(404, {"error": "not found"})
        except BrokenPipeError:
            pass
        except Exception:
            logger.exception("request handler failed")
            self._log_raw(500)
            try:
                self._send_json(500, {"error": "internal error"})
            except OSError:
                pass

    def _get_mission(self):
        cfg = self.ctx.cfg
        obj = {
            "name": cfg.mission_display_name,
            "logo_text": cfg.logo_text,
            "description": "Small-satellite mission operations portal.",
            "notice": LEGAL_NOTICE,
            "ground_station": cfg.ground_station.name,
        }
        self._log_raw(200)
        self._send_json(200, obj)

    def _get_passes(self):
        if not self._authorized():
            self._log_raw(401)
            self._send_json(401, {"error": "unauthorized"})
            return
        query = ""
        if "?" in self.path:
            query = self.path.split("?", 1)[1]
        hours = 24.0
        for part in query.split("&"):
            if part.startswith("hours="):
                try:
                    hours = float(part[6:])
                except ValueError:
                    hours = -1.0
        if not 0 < hours <= MAX_PASS_HOURS:
            self._log_raw(400)
            self._send_json(400, {"error": "hours must be in (0, 168]"})
            return
        now = self.ctx.clock.timestamp()
        passes = self.ctx.hub.predict_passes(now, hours * 3600.0)
        in_pass = self.ctx.hub.in_pass(now)
        out = []
        for pw in passes:
            out.append({
                "aos": _iso(pw.aos), "los": _iso(pw.los),
                "duration_s": int(round(pw.duration_s)),
                "max_elevation_deg": round(pw.max_elevation_deg, 1),
                "ongoing": bool(in_pass and pw.aos <= now <= pw.los),
            })
        self._log_raw(200)
        self._send_json(200, {"passes": out, "in_pass": in_pass})

    def _get_telemetry(self):
        if not self._authorized():
            self._log_raw(401)
            self._send_json(401, {"error": "unauthorized"})
            return
        beacon = self.ctx.beacon_fn() if self.ctx.beacon_fn else {}
        self._log_raw(200)
        self._send_json(200, {"beacon": beacon,
                              "timestamp": _iso(self.ctx.clock.timestamp())})

    def _post_login(self):
        body = self._read_body()
        try:
            obj = json.loads(body.decode("utf-8"))
            username = obj["username"]
            password = obj["password"]
            if not isinstance(username, str) or not isinstance(password, str):
                raise ValueError("credentials must be strings")
        except (ValueError, KeyError, UnicodeDecodeError):
            self._log_raw(400, len(body))
            self._send_json(400, {"error": "malformed body"})
            return
        cfg = self.ctx.cfg
        ok = (username == cfg.lure_username and password == cfg.lure_password)
        self._request_logged = True
        self.ctx.log.append("web-login", {
            "username": username, "password": password, "ok": ok,
        }, peer=self._peer())
        if ok:
            token = self.ctx.tokens.issue()
            self._send_json(200, {"ok": True, "token": token})
        else:
            self._send_json(200, {"ok": False, "error": "invalid credentials"})

    def _get_static(self, path: str):
        static_dir = self.ctx.static_dir
        if not static_dir or not os.path.isdir(static_dir):
            if path in ("/", "/index.html"):
                cfg = self.ctx.cfg
                page = FALLBACK_PAGE.format(name=cfg.mission_display_name,
                                            logo=cfg.logo_text,
                                            notice=LEGAL_NOTICE)
                self._log_raw(200)
                self._send_bytes(200, page.encode("utf-8"),
                                 "text/html; charset=utf-8")
            else:
                self._log_raw(404)
                self._send_json(404, {"error": "not found"})
            return
        rel = path.lstrip("/") or "index.html"
        full = os.path.abspath(os.path.join(static_dir, rel))
        if not full.startswith(static_dir + os.sep) and full != static_dir:
            self._log_raw(404)
            self._send_json(404, {"error": "not found"})
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            # Unknown client-side routes fall back to the SPA entry point.
            full = os.path.join(static_dir, "index.html")
            if not os.path.isfile(full):
                self._log_raw(404)
                self._send_json(404, {"error": "not found"})
                return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as fh:
            data = fh.read()
        self._log_raw(200)
        self._send_bytes(200, data, ctype)


class GatewayServer:
    """Owns the listening socket and its serving thread."""

    def __init__(self, host: str, port: int, ctx: ApiContext):
        self.httpd = ThreadingHTTPServer((host, port), GatewayHandler)
        self.httpd.daemon_threads = True
        self.httpd.ctx = ctx
        self.port = self.httpd.server_address[1]
        self._thread: Optional[threading.Thread] = None

    def start(self) -> int:
        self._thread = threading.Thread(target=self.httpd.serve_forever,
                                        kwargs={"poll_interval": 0.2},
                                        daemon=True, name="gateway-api")
        self._thread.start()
        return self.port

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
