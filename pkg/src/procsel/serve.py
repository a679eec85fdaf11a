"""JSON-over-HTTP facade around the selection pipeline.

The registry and lexicon are loaded once at startup and never mutated;
every request works against that immutable snapshot, so concurrent
handling needs no locking. Endpoints:

    POST /select            body {"bpmn": "<xml>", "config": {...}}
    GET  /services          projections of all registered services
    GET  /services/<key>    one full service record incl. QoS history

A /select response body is byte-identical to the CLI `select` output for
the same effective config. Domain errors map to 400 with the same
diagnostic text the CLI prints; 500 is reserved for genuine bugs.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .bpmn import parse_bpmn
from .config import AppConfig, config_from_dict
from .errors import ProcselError
from .lexicon import SynonymLexicon
from .ranking import select_for_process, serialize_report
from .registry import ServiceRegistry, service_to_dict


def service_projection(category_name: str, service) -> dict:
    return {
        "serviceKey": service.service_key,
        "name": service.name,
        "category": category_name,
        "operationCount": len(service.operations),
    }


class SelectionServer(ThreadingHTTPServer):
    def __init__(
        self,
        address: tuple[str, int],
        registry: ServiceRegistry,
        lexicon: SynonymLexicon,
        config: AppConfig,
    ):
        super().__init__(address, _Handler)
        self.registry = registry
        self.lexicon = lexicon
        self.config = config


class _Handler(BaseHTTPRequestHandler):
    server: SelectionServer

    def log_message(self, format: str, *args) -> None:
        pass  # request logging is noise for a facade driven by pipelines

    def _send(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, data) -> None:
        self._send(status, (json.dumps(data, indent=2) + "\n").encode("utf-8"))

    def do_GET(self) -> None:
        registry = self.server.registry
        if self.path == "/services":
            self._send_json(
                200,
                [
                    service_projection(category.name, service)
                    for category, service in registry.iter_services()
                ],
            )
            return
        if self.path.startswith("/services/"):
            key = self.path[len("/services/"):]
            for category, service in registry.iter_services():
                if service.service_key == key:
                    record = {"category": category.name}
                    record.update(service_to_dict(service))
                    self._send_json(200, record)
                    return
            self._send_json(404, {"error": f"unknown serviceKey {key!r}"})
            return
        self._send_json(404, {"error": f"unknown path {self.path!r}"})

    def do_POST(self) -> None:
        if self.path != "/select":
            self._send_json(404, {"error": f"unknown path {self.path!r}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            payload = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            self._send_json(400, {"error": f"request body is not valid JSON: {exc}"})
            return
        if not isinstance(payload, dict) or not isinstance(payload.get("bpmn"), str) or not payload["bpmn"]:
            self._send_json(400, {"error": "request body must be {\"bpmn\": \"<xml>\", ...}"})
            return

        try:
            config = self.server.config
            overrides = payload.get("config")
            if overrides is not None:
                if not isinstance(overrides, dict):
                    raise ProcselError("'config' must be an object")
                if "lexicon_path" in overrides or "registry_path" in overrides:
                    raise ProcselError("lexicon_path/registry_path cannot be overridden over HTTP")
                config = config_from_dict(overrides, base=config, source="request config")
            process = parse_bpmn(payload["bpmn"])
            report = select_for_process(process, self.server.registry, self.server.lexicon, config)
        except ProcselError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send(200, (serialize_report(report) + "\n").encode("utf-8"))


def make_server(
    registry: ServiceRegistry,
    lexicon: SynonymLexicon,
    config: AppConfig,
    host: str = "127.0.0.1",
    port: int = 8080,
) -> SelectionServer:
    return SelectionServer((host, port), registry, lexicon, config)
