"""Service registry: categories, services, operations and QoS histories.

The registry is a plain JSON file (see load_registry / save_registry for
the schema). Keywords and datatypes are normalized once at load time so
that all later comparisons are plain string work. A loaded registry is
treated as an immutable snapshot during selection; mutation (snapshot
appends, imports) happens between selections.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import RegistryError
from .lexicon import extract_keywords

# Normalization targets for parameter datatypes. Unknown types pass through
# lowercased with any namespace prefix stripped. Without this table,
# trivially equivalent WSDL/annotation types (xsd:int vs integer) would
# never score as matching.
DATATYPE_ALIASES = {
    "string": "string",
    "str": "string",
    "int": "integer",
    "integer": "integer",
    "long": "integer",
    "bool": "boolean",
    "boolean": "boolean",
    "double": "double",
    "float": "double",
    "decimal": "double",
}


def normalize_datatype(raw: str) -> str:
    """Map a raw datatype string onto its normalized alias."""
    local = raw.strip().lower().rpartition(":")[2]
    return DATATYPE_ALIASES.get(local, local)


@dataclass
class Parameter:
    name: str
    datatype: str


@dataclass
class QosSnapshot:
    timestamp: datetime
    availability: float
    execution_time_ms: float
    total_calls: int
    extra: dict[str, float] = field(default_factory=dict)


@dataclass
class Operation:
    name: str
    inputs: list[Parameter] = field(default_factory=list)
    outputs: list[Parameter] = field(default_factory=list)
    qos_history: list[QosSnapshot] = field(default_factory=list)


@dataclass
class WebService:
    name: str
    business_name: str
    business_key: str
    service_key: str
    url: str
    version: str
    operations: list[Operation] = field(default_factory=list)
    security_note: str | None = None


@dataclass
class ServiceCategory:
    name: str
    keywords: set[str]
    services: list[WebService] = field(default_factory=list)


@dataclass
class ServiceRegistry:
    categories: list[ServiceCategory] = field(default_factory=list)

    def iter_services(self):
        for category in self.categories:
            for service in category.services:
                yield category, service

    def find_service(self, service_key: str) -> tuple[ServiceCategory, WebService]:
        for category, service in self.iter_services():
            if service.service_key == service_key:
                return category, service
        raise RegistryError(f"unknown serviceKey {service_key!r}")


# --- timestamps ------------------------------------------------------------

def parse_timestamp(raw: str, context: str = "timestamp") -> datetime:
    """Parse ISO-8601; a missing offset means UTC."""
    try:
        parsed = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except (ValueError, TypeError) as exc:
        raise RegistryError(f"{context}: invalid ISO-8601 timestamp {raw!r}") from exc
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed


def format_timestamp(value: datetime) -> str:
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


# --- loading ---------------------------------------------------------------

def _expect(data: dict, key: str, kinds, path: str, default=None, required=True):
    if key not in data:
        if required:
            raise RegistryError(f"{path}: missing required field {key!r}")
        return default
    value = data[key]
    if kinds is not None and not isinstance(value, kinds):
        raise RegistryError(f"{path}: field {key!r} has wrong type")
    return value


def _number(data: dict, key: str, path: str) -> float:
    value = _expect(data, key, (int, float), path)
    if isinstance(value, bool):
        raise RegistryError(f"{path}: field {key!r} has wrong type")
    return float(value)


def _snapshot_from_dict(data: dict, path: str) -> QosSnapshot:
    if not isinstance(data, dict):
        raise RegistryError(f"{path}: snapshot must be an object")
    timestamp = parse_timestamp(_expect(data, "timestamp", str, path), path)
    availability = _number(data, "availability", path)
    if not 0.0 <= availability <= 1.0:
        raise RegistryError(f"{path}: availability {availability} outside [0, 1]")
    execution_time_ms = _number(data, "executionTimeMs", path)
    if execution_time_ms <= 0.0:
        raise RegistryError(f"{path}: executionTimeMs must be positive")
    total_calls = _expect(data, "totalCalls", int, path)
    if isinstance(total_calls, bool) or total_calls < 0:
        raise RegistryError(f"{path}: totalCalls must be a non-negative integer")
    extra_raw = _expect(data, "extra", dict, path, default={}, required=False)
    extra: dict[str, float] = {}
    for name, value in extra_raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise RegistryError(f"{path}: extra attribute {name!r} must be numeric")
        extra[str(name)] = float(value)
    return QosSnapshot(timestamp, availability, execution_time_ms, total_calls, extra)


def _parameter_from_dict(data: dict, path: str) -> Parameter:
    if not isinstance(data, dict):
        raise RegistryError(f"{path}: parameter must be an object")
    name = _expect(data, "name", str, path)
    if not name.strip():
        raise RegistryError(f"{path}: parameter name is empty")
    datatype = normalize_datatype(_expect(data, "datatype", str, path))
    if not datatype:
        raise RegistryError(f"{path}: parameter {name!r} has an empty datatype")
    return Parameter(name=name, datatype=datatype)


def _operation_from_dict(data: dict, path: str) -> Operation:
    if not isinstance(data, dict):
        raise RegistryError(f"{path}: operation must be an object")
    name = _expect(data, "name", str, path)
    if not name.strip():
        raise RegistryError(f"{path}: operation name is empty")
    inputs = [
        _parameter_from_dict(p, f"{path}.inputs[{i}]")
        for i, p in enumerate(_expect(data, "inputs", list, path, default=[], required=False))
    ]
    outputs = [
        _parameter_from_dict(p, f"{path}.outputs[{i}]")
        for i, p in enumerate(_expect(data, "outputs", list, path, default=[], required=False))
    ]
    history = [
        _snapshot_from_dict(s, f"{path}.qos[{i}]")
        for i, s in enumerate(_expect(data, "qos", list, path, default=[], required=False))
    ]
    for earlier, later in zip(history, history[1:]):
        if later.timestamp <= earlier.timestamp:
            raise RegistryError(
                f"{path}.qos: timestamps must be strictly increasing "
                f"({format_timestamp(later.timestamp)} follows {format_timestamp(earlier.timestamp)})"
            )
    return Operation(name=name, inputs=inputs, outputs=outputs, qos_history=history)


def _keywords_from_list(raw: list, path: str) -> set[str]:
    keywords: set[str] = set()
    for entry in raw:
        if not isinstance(entry, str):
            raise RegistryError(f"{path}: keywords must be strings")
        keywords.update(extract_keywords(entry))
    if not keywords:
        raise RegistryError(f"{path}: keywords are empty after normalization")
    return keywords


def _service_from_dict(data: dict, path: str) -> WebService:
    if not isinstance(data, dict):
        raise RegistryError(f"{path}: service must be an object")
    service_key = _expect(data, "serviceKey", str, path)
    if not service_key:
        raise RegistryError(f"{path}: serviceKey is empty")
    operations = [
        _operation_from_dict(o, f"{path}.operations[{i}]")
        for i, o in enumerate(_expect(data, "operations", list, path))
    ]
    if not operations:
        raise RegistryError(f"{path}: service {service_key!r} has no operations")
    seen_ops: set[str] = set()
    for operation in operations:
        if operation.name in seen_ops:
            raise RegistryError(f"{path}: duplicate operation name {operation.name!r}")
        seen_ops.add(operation.name)
    return WebService(
        name=_expect(data, "name", str, path),
        business_name=_expect(data, "businessName", str, path, default="", required=False),
        business_key=_expect(data, "businessKey", str, path, default="", required=False),
        service_key=service_key,
        url=_expect(data, "url", str, path, default="", required=False),
        version=_expect(data, "version", str, path, default="", required=False),
        operations=operations,
        security_note=_expect(data, "securityNote", str, path, default=None, required=False),
    )


def registry_from_dict(data, source: str = "registry") -> ServiceRegistry:
    """Build and validate a registry from parsed JSON data."""
    if not isinstance(data, dict):
        raise RegistryError(f"{source}: top level must be an object")
    categories = []
    for i, cat in enumerate(_expect(data, "categories", list, source)):
        path = f"{source}: categories[{i}]"
        if not isinstance(cat, dict):
            raise RegistryError(f"{path}: category must be an object")
        services = [
            _service_from_dict(s, f"{path}.services[{j}]")
            for j, s in enumerate(_expect(cat, "services", list, path, default=[], required=False))
        ]
        categories.append(
            ServiceCategory(
                name=_expect(cat, "name", str, path),
                keywords=_keywords_from_list(_expect(cat, "keywords", list, path), path),
                services=services,
            )
        )
    registry = ServiceRegistry(categories=categories)
    seen_keys: dict[str, str] = {}
    for category, service in registry.iter_services():
        if service.service_key in seen_keys:
            raise RegistryError(
                f"{source}: duplicate serviceKey {service.service_key!r} "
                f"(categories {seen_keys[service.service_key]!r} and {category.name!r})"
            )
        seen_keys[service.service_key] = category.name
    return registry


def load_registry(path: str | Path) -> ServiceRegistry:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RegistryError(f"cannot read registry file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegistryError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return registry_from_dict(data, source=str(path))


# --- saving ----------------------------------------------------------------

def snapshot_to_dict(snapshot: QosSnapshot) -> dict:
    data = {
        "timestamp": format_timestamp(snapshot.timestamp),
        "availability": snapshot.availability,
        "executionTimeMs": snapshot.execution_time_ms,
        "totalCalls": snapshot.total_calls,
    }
    if snapshot.extra:
        data["extra"] = {name: snapshot.extra[name] for name in sorted(snapshot.extra)}
    return data


def operation_to_dict(operation: Operation) -> dict:
    return {
        "name": operation.name,
        "inputs": [{"name": p.name, "datatype": p.datatype} for p in operation.inputs],
        "outputs": [{"name": p.name, "datatype": p.datatype} for p in operation.outputs],
        "qos": [snapshot_to_dict(s) for s in operation.qos_history],
    }


def service_to_dict(service: WebService) -> dict:
    data = {
        "name": service.name,
        "businessName": service.business_name,
        "businessKey": service.business_key,
        "serviceKey": service.service_key,
        "url": service.url,
        "version": service.version,
        "operations": [operation_to_dict(o) for o in service.operations],
    }
    if service.security_note is not None:
        data["securityNote"] = service.security_note
    return data


def registry_to_dict(registry: ServiceRegistry) -> dict:
    return {
        "categories": [
            {
                "name": category.name,
                "keywords": sorted(category.keywords),
                "services": [service_to_dict(s) for s in category.services],
            }
            for category in registry.categories
        ]
    }


def save_registry(registry: ServiceRegistry, path: str | Path) -> None:
    """Write the registry as JSON; load_registry(save_registry(r)) == r."""
    payload = json.dumps(registry_to_dict(registry), indent=2) + "\n"
    try:
        Path(path).write_text(payload, encoding="utf-8")
    except OSError as exc:
        raise RegistryError(f"cannot write registry file {path}: {exc.strerror}") from exc


# --- mutation --------------------------------------------------------------

def append_snapshot(
    registry: ServiceRegistry,
    service_key: str,
    operation_name: str,
    snapshot: QosSnapshot,
) -> ServiceRegistry:
    """Append a QoS snapshot to one operation, keeping history chronological."""
    _, service = registry.find_service(service_key)
    for operation in service.operations:
        if operation.name == operation_name:
            break
    else:
        raise RegistryError(
            f"service {service_key!r} has no operation {operation_name!r}"
        )
    if not 0.0 <= snapshot.availability <= 1.0:
        raise RegistryError(f"availability {snapshot.availability} outside [0, 1]")
    if snapshot.execution_time_ms <= 0.0:
        raise RegistryError("executionTimeMs must be positive")
    if snapshot.total_calls < 0:
        raise RegistryError("totalCalls must be non-negative")
    if operation.qos_history and snapshot.timestamp <= operation.qos_history[-1].timestamp:
        raise RegistryError(
            f"snapshot timestamp {format_timestamp(snapshot.timestamp)} is not after "
            f"the last recorded {format_timestamp(operation.qos_history[-1].timestamp)}"
        )
    operation.qos_history.append(snapshot)
    return registry


# --- WSDL import -----------------------------------------------------------

_WSDL_NS = "http://schemas.xmlsoap.org/wsdl/"
_SOAP_NS = "http://schemas.xmlsoap.org/wsdl/soap/"
_SOAP12_NS = "http://schemas.xmlsoap.org/wsdl/soap12/"


def _local(ref: str) -> str:
    return ref.rpartition(":")[2]


def import_wsdl(xml_text: str, loaded_at: datetime | None = None) -> WebService:
    """Extract a WebService from a WSDL 1.1 document.

    Operation inputs/outputs come from message parts; datatypes are mapped
    through the alias table. QoS history starts empty. The serviceKey is
    synthesized as ws.<ISO-8601 load timestamp>.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise RegistryError(f"WSDL is not well-formed XML: {exc}") from exc

    messages: dict[str, list[Parameter]] = {}
    for message in root.iter(f"{{{_WSDL_NS}}}message"):
        name = message.get("name", "")
        parts = []
        for part in message.findall(f"{{{_WSDL_NS}}}part"):
            part_name = part.get("name", "")
            datatype_raw = part.get("type") or part.get("element") or ""
            if not part_name or not datatype_raw:
                raise RegistryError(
                    f"WSDL message {name!r}: part {part_name!r} lacks a name or type"
                )
            parts.append(Parameter(name=part_name, datatype=normalize_datatype(datatype_raw)))
        messages[name] = parts

    port_types = list(root.iter(f"{{{_WSDL_NS}}}portType"))
    if not port_types:
        raise RegistryError("WSDL contains no portType")

    def resolve(ref: str, op_name: str) -> list[Parameter]:
        message_name = _local(ref)
        if message_name not in messages:
            raise RegistryError(
                f"WSDL operation {op_name!r} references unknown message {message_name!r}"
            )
        return list(messages[message_name])

    operations: list[Operation] = []
    seen: set[str] = set()
    for port_type in port_types:
        for op_el in port_type.findall(f"{{{_WSDL_NS}}}operation"):
            op_name = op_el.get("name", "")
            if not op_name or op_name in seen:
                continue
            seen.add(op_name)
            inputs: list[Parameter] = []
            outputs: list[Parameter] = []
            input_el = op_el.find(f"{{{_WSDL_NS}}}input")
            if input_el is not None and input_el.get("message"):
                inputs = resolve(input_el.get("message", ""), op_name)
            output_el = op_el.find(f"{{{_WSDL_NS}}}output")
            if output_el is not None and output_el.get("message"):
                outputs = resolve(output_el.get("message", ""), op_name)
            operations.append(Operation(name=op_name, inputs=inputs, outputs=outputs))
    if not operations:
        raise RegistryError("WSDL defines no operations")

    service_el = root.find(f"{{{_WSDL_NS}}}service")
    name = (service_el.get("name") if service_el is not None else None) or root.get("name") or port_types[0].get("name", "")
    url = ""
    if service_el is not None:
        for ns in (_SOAP_NS, _SOAP12_NS):
            address = service_el.find(f"{{{_WSDL_NS}}}port/{{{ns}}}address")
            if address is not None:
                url = address.get("location", "")
                break

    stamp = loaded_at if loaded_at is not None else datetime.now(timezone.utc).replace(microsecond=0)
    return WebService(
        name=name,
        business_name="",
        business_key="",
        service_key=f"ws.{format_timestamp(stamp)}",
        url=url,
        version="",
        operations=operations,
    )
