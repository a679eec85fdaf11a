"""Command-line entry point.

Exit codes: 0 success, 1 domain error (diagnostic on stderr), 2 usage
error. The config file may be given with --config or the PROCSEL_CONFIG
environment variable; individual flags override config-file values.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import serve as serve_mod
from .bpmn import bind_requirements, parse_bpmn
from .config import AppConfig, DEFAULT_CONFIG, load_config
from .errors import ProcselError
from .lexicon import EMPTY_LEXICON, SynonymLexicon, extract_keywords, load_lexicon
from .ranking import SelectionReport, explain, select_for_process, serialize_report
from .registry import (
    QosSnapshot,
    ServiceCategory,
    ServiceRegistry,
    append_snapshot,
    import_wsdl,
    load_registry,
    parse_timestamp,
    save_registry,
)

CONFIG_ENV_VAR = "PROCSEL_CONFIG"


def _read_text(path: str, kind: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProcselError(f"cannot read {kind} file {path}: {exc.strerror}") from exc


def _resolve_config(args) -> AppConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    config = load_config(path) if path else DEFAULT_CONFIG
    return config


def _resolve_lexicon(args, config: AppConfig) -> SynonymLexicon:
    path = getattr(args, "lexicon", None) or config.lexicon_path
    return load_lexicon(path) if path else EMPTY_LEXICON


def _resolve_registry(args, config: AppConfig, parser: argparse.ArgumentParser) -> ServiceRegistry:
    path = getattr(args, "registry", None) or config.registry_path
    if not path:
        parser.error("--registry is required (or set registry_path in the config file)")
    return load_registry(path)


def _render_text(report: SelectionReport) -> str:
    lines = [f"process {report.process_id}"]
    for task in report.tasks:
        lines.append(f"task {task.requirement.task_id} ({task.requirement.task_name}):")
        for c in task.candidates:
            rated = "" if c.qos.rated else "  [unrated]"
            lines.append(
                f"  {c.rank}. {c.service_name} / {c.operation_name}"
                f"  global={c.global_score:.4f} fp={c.functional.total}"
                f" nfp={c.qos.nfp:.4f}{rated}"
            )
        for diagnostic in task.diagnostics:
            lines.append(f"  ! {diagnostic}")
    return "\n".join(lines)


# --- subcommand handlers -----------------------------------------------------

def _cmd_select(args, parser) -> int:
    config = _resolve_config(args)
    registry = _resolve_registry(args, config, parser)
    lexicon = _resolve_lexicon(args, config)
    process = parse_bpmn(_read_text(args.bpmn, "BPMN"))
    report = select_for_process(process, registry, lexicon, config)
    if args.format == "text":
        payload = _render_text(report) + "\n"
    else:
        payload = serialize_report(report) + "\n"
    if args.out:
        try:
            Path(args.out).write_bytes(payload.encode("utf-8"))
        except OSError as exc:
            raise ProcselError(f"cannot write report file {args.out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_validate(args, parser) -> int:
    process = parse_bpmn(_read_text(args.bpmn, "BPMN"))
    requirements = bind_requirements(process)
    print(f"process {process.id}: {len(requirements)} service tasks, all bound")
    for req in requirements:
        print(
            f"  {req.task_id} ({req.task_name}): {len(req.inputs)} inputs, "
            f"{len(req.outputs)} outputs, context: {', '.join(sorted(req.context_keywords))}"
        )
    return 0


def _cmd_import_wsdl(args, parser) -> int:
    registry = load_registry(args.into)
    service = import_wsdl(_read_text(args.wsdl, "WSDL"))
    for category in registry.categories:
        if category.name == args.category:
            break
    else:
        keywords = set(extract_keywords(args.category)) | set(extract_keywords(service.name))
        if not keywords:
            raise ProcselError(f"category name {args.category!r} yields no keywords")
        category = ServiceCategory(name=args.category, keywords=keywords, services=[])
        registry.categories.append(category)
    for _, existing in registry.iter_services():
        if existing.service_key == service.service_key:
            raise ProcselError(f"serviceKey {service.service_key!r} already present")
    category.services.append(service)
    save_registry(registry, args.into)
    print(f"imported {service.name!r} ({service.service_key}) into category {category.name!r}")
    return 0


def _cmd_snapshot(args, parser) -> int:
    registry = load_registry(args.into)
    timestamp = (
        parse_timestamp(args.timestamp, "--timestamp")
        if args.timestamp
        else datetime.now(timezone.utc).replace(microsecond=0)
    )
    snapshot = QosSnapshot(
        timestamp=timestamp,
        availability=args.availability,
        execution_time_ms=args.exec_ms,
        total_calls=args.calls,
    )
    append_snapshot(registry, args.service, args.op, snapshot)
    save_registry(registry, args.into)
    print(f"recorded snapshot for {args.service}/{args.op}")
    return 0


def _cmd_explain(args, parser) -> int:
    import json as _json

    text = _read_text(args.report, "report")
    try:
        data = _json.loads(text)
    except _json.JSONDecodeError as exc:
        raise ProcselError(f"{args.report}: not valid JSON: {exc}") from exc
    print(explain(data, args.task, args.rank))
    return 0


def _cmd_serve(args, parser) -> int:
    config = _resolve_config(args)
    registry = _resolve_registry(args, config, parser)
    lexicon = _resolve_lexicon(args, config)
    server = serve_mod.make_server(registry, lexicon, config, host=args.host, port=args.port)
    print(f"listening on http://{args.host}:{server.server_address[1]}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procsel",
        description="Rank candidate service operations for the tasks of an annotated BPMN process.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="run selection and emit a report")
    p_select.add_argument("--bpmn", required=True, help="BPMN 2.0 process file")
    p_select.add_argument("--registry", help="service registry JSON file")
    p_select.add_argument("--config", help="config JSON file")
    p_select.add_argument("--lexicon", help="synonym lexicon JSON file")
    p_select.add_argument("--out", help="write the report here instead of stdout")
    p_select.add_argument("--format", choices=("json", "text"), default="json")
    p_select.set_defaults(handler=_cmd_select)

    p_validate = sub.add_parser("validate", help="parse a BPMN file and bind its annotations")
    p_validate.add_argument("--bpmn", required=True)
    p_validate.set_defaults(handler=_cmd_validate)

    p_registry = sub.add_parser("registry", help="registry maintenance")
    reg_sub = p_registry.add_subparsers(dest="registry_command", required=True)

    p_import = reg_sub.add_parser("import-wsdl", help="add a service from a WSDL 1.1 file")
    p_import.add_argument("wsdl", help="WSDL file to import")
    p_import.add_argument("--into", required=True, help="registry JSON file to update")
    p_import.add_argument("--category", default="imported", help="target category name")
    p_import.set_defaults(handler=_cmd_import_wsdl)

    p_snapshot = reg_sub.add_parser("snapshot", help="append a QoS snapshot to an operation")
    p_snapshot.add_argument("--into", required=True, help="registry JSON file to update")
    p_snapshot.add_argument("--service", required=True, help="serviceKey")
    p_snapshot.add_argument("--op", required=True, help="operation name")
    p_snapshot.add_argument("--availability", required=True, type=float)
    p_snapshot.add_argument("--exec-ms", required=True, type=float, dest="exec_ms")
    p_snapshot.add_argument("--calls", required=True, type=int)
    p_snapshot.add_argument("--timestamp", help="ISO-8601, defaults to now (UTC)")
    p_snapshot.set_defaults(handler=_cmd_snapshot)

    p_explain = sub.add_parser("explain", help="break down one ranked candidate of a report")
    p_explain.add_argument("--report", required=True, help="report JSON file")
    p_explain.add_argument("--task", required=True, help="task id")
    p_explain.add_argument("--rank", required=True, type=int)
    p_explain.set_defaults(handler=_cmd_explain)

    p_serve = sub.add_parser("serve", help="serve selection over HTTP")
    p_serve.add_argument("--registry", help="service registry JSON file")
    p_serve.add_argument("--config", help="config JSON file")
    p_serve.add_argument("--lexicon", help="synonym lexicon JSON file")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args, parser)
    except ProcselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
