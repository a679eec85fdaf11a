from __future__ import annotations

import json
import threading
from http.client import HTTPConnection

import pytest

from procsel import DEFAULT_CONFIG, ServiceRegistry, load_lexicon, load_registry, parse_bpmn, select_for_process, serialize_report
from procsel.config import config_from_dict
from procsel.serve import make_server

from conftest import LEXICON_FILE, SENDMAIL_BPMN, SENDMAIL_REGISTRY


@pytest.fixture()
def server():
    registry = load_registry(SENDMAIL_REGISTRY)
    lexicon = load_lexicon(LEXICON_FILE)
    srv = make_server(registry, lexicon, DEFAULT_CONFIG, host="127.0.0.1", port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()
    thread.join(timeout=5)


def _request(srv, method, path, body=None):
    conn = HTTPConnection("127.0.0.1", srv.server_address[1], timeout=10)
    payload = json.dumps(body).encode("utf-8") if body is not None else None
    conn.request(method, path, body=payload, headers={"Content-Type": "application/json"})
    response = conn.getresponse()
    data = response.read()
    conn.close()
    return response.status, data


def test_list_services(server):
    status, body = _request(server, "GET", "/services")
    assert status == 200
    services = json.loads(body)
    assert [s["serviceKey"] for s in services] == [
        "ws.15.09.2013.08.43.40",
        "ws.15.09.2013.09.43.45",
    ]
    assert all(s["category"] == "communication" for s in services)
    assert all(s["operationCount"] == 2 for s in services)


def test_get_service_record(server):
    status, body = _request(server, "GET", "/services/ws.15.09.2013.08.43.40")
    assert status == 200
    record = json.loads(body)
    assert record["category"] == "communication"
    assert record["name"] == "authentication"
    assert len(record["operations"]) == 2
    assert len(record["operations"][0]["qos"]) == 2


def test_get_unknown_service_is_404(server):
    status, body = _request(server, "GET", "/services/nope")
    assert status == 404
    assert "nope" in json.loads(body)["error"]


def test_unknown_path_is_404(server):
    status, _ = _request(server, "GET", "/everything")
    assert status == 404
    status, _ = _request(server, "POST", "/everything", body={})
    assert status == 404


def test_list_services_on_empty_registry():
    srv = make_server(ServiceRegistry(), load_lexicon(LEXICON_FILE), DEFAULT_CONFIG, port=0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        status, body = _request(srv, "GET", "/services")
        assert status == 200
        assert json.loads(body) == []
    finally:
        srv.shutdown()
        srv.server_close()
        thread.join(timeout=5)


def test_select_endpoint_matches_pipeline(server):
    bpmn = SENDMAIL_BPMN.read_text(encoding="utf-8")
    status, body = _request(server, "POST", "/select", body={"bpmn": bpmn})
    assert status == 200
    report = select_for_process(
        parse_bpmn(bpmn), server.registry, server.lexicon, DEFAULT_CONFIG
    )
    assert body == (serialize_report(report) + "\n").encode("utf-8")


def test_select_endpoint_applies_config_overrides(server):
    bpmn = SENDMAIL_BPMN.read_text(encoding="utf-8")
    overrides = {"functional_weight": 1.0}
    status, body = _request(server, "POST", "/select", body={"bpmn": bpmn, "config": overrides})
    assert status == 200
    merged = config_from_dict(overrides, base=DEFAULT_CONFIG)
    report = select_for_process(parse_bpmn(bpmn), server.registry, server.lexicon, merged)
    assert body == (serialize_report(report) + "\n").encode("utf-8")
    assert json.loads(body)["config"]["functional_weight"] == 1.0


def test_select_endpoint_rejects_malformed_xml(server):
    status, body = _request(server, "POST", "/select", body={"bpmn": "<definitions"})
    assert status == 400
    assert "malformed" in json.loads(body)["error"]


def test_select_endpoint_rejects_bad_json(server):
    conn = HTTPConnection("127.0.0.1", server.server_address[1], timeout=10)
    conn.request("POST", "/select", body=b"{nope", headers={"Content-Type": "application/json"})
    response = conn.getresponse()
    status, body = response.status, response.read()
    conn.close()
    assert status == 400
    assert "JSON" in json.loads(body)["error"]


def test_select_endpoint_requires_bpmn_string(server):
    status, body = _request(server, "POST", "/select", body={"config": {}})
    assert status == 400
    assert "bpmn" in json.loads(body)["error"]


def test_select_endpoint_rejects_path_overrides(server):
    bpmn = SENDMAIL_BPMN.read_text(encoding="utf-8")
    status, body = _request(
        server, "POST", "/select", body={"bpmn": bpmn, "config": {"registry_path": "/etc/x"}}
    )
    assert status == 400
    assert "registry_path" in json.loads(body)["error"]


def test_select_endpoint_rejects_invalid_override_values(server):
    bpmn = SENDMAIL_BPMN.read_text(encoding="utf-8")
    status, body = _request(
        server, "POST", "/select", body={"bpmn": bpmn, "config": {"functional_weight": 9}}
    )
    assert status == 400
    assert "functional_weight" in json.loads(body)["error"]
