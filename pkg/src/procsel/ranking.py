"""Pipeline orchestration: per-task gating, scoring, ranking, reporting.

Selection is local per task: each task's gated pool is scored and ranked
independently, with no cross-task constraints. The functional total is
min-max normalized over the gated pool before being blended with the
non-functional score, so the functional weight acts as a genuine
trade-off knob between two [0, 1] quantities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .bpmn import BusinessProcess, TaskRequirement, bind_requirements
from .config import AppConfig, config_echo
from .errors import ReportError
from .functional import FunctionalScore, gate_candidates, match_context
from .lexicon import SynonymLexicon
from .qos import QosScores, normalize_pool, score_pool
from .registry import ServiceRegistry

NO_CONTEXT_MATCH = "no category matched context"
NO_GATED_OPERATION = "no operation passed functional gate"


@dataclass(frozen=True)
class Candidate:
    service_key: str
    service_name: str
    operation_name: str
    functional: FunctionalScore
    qos: QosScores
    fp_norm: float
    global_score: float
    rank: int = 0


@dataclass
class TaskSelection:
    requirement: TaskRequirement
    candidates: list[Candidate]
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class SelectionReport:
    process_id: str
    tasks: list[TaskSelection]
    config: dict


def global_score(fp_norm: float, nfp: float, functional_weight: float) -> float:
    """Blend normalized functional score with the non-functional score."""
    return functional_weight * fp_norm + (1.0 - functional_weight) * nfp


def rank_candidates(candidates: list[Candidate]) -> list[Candidate]:
    """Sort by global score and assign ranks 1..k.

    Ties break by functional total (descending), then serviceKey and
    operation name (ascending), a total order since operation names are
    unique per service; input order therefore never matters.
    """
    ordered = sorted(
        candidates,
        key=lambda c: (-c.global_score, -c.functional.total, c.service_key, c.operation_name),
    )
    return [replace(c, rank=position) for position, c in enumerate(ordered, start=1)]


def select_for_process(
    process: BusinessProcess,
    registry: ServiceRegistry,
    lexicon: SynonymLexicon,
    config: AppConfig,
) -> SelectionReport:
    """Run the full selection pipeline for every task of a process."""
    tasks = []
    for requirement in bind_requirements(process):
        gated = gate_candidates(requirement, registry, lexicon, config.score_table)
        diagnostics: list[str] = []
        if not gated:
            if any(match_context(requirement, c, lexicon) for c in registry.categories):
                diagnostics.append(NO_GATED_OPERATION)
            else:
                diagnostics.append(NO_CONTEXT_MATCH)

        qos_scores = score_pool([op for _, op, _ in gated], config.qos)
        fp_norms = normalize_pool(
            [float(score.total) for _, _, score in gated], config.qos.epsilon
        )
        candidates = [
            Candidate(
                service_key=service.service_key,
                service_name=service.name,
                operation_name=op.name,
                functional=score,
                qos=qos,
                fp_norm=fp_norm,
                global_score=global_score(fp_norm, qos.nfp, config.functional_weight),
            )
            for (service, op, score), qos, fp_norm in zip(gated, qos_scores, fp_norms)
        ]
        tasks.append(
            TaskSelection(
                requirement=requirement,
                candidates=rank_candidates(candidates),
                diagnostics=diagnostics,
            )
        )
    return SelectionReport(process_id=process.id, tasks=tasks, config=config_echo(config))


# --- serialization ----------------------------------------------------------

def _candidate_to_dict(candidate: Candidate) -> dict:
    fp = candidate.functional
    return {
        "rank": candidate.rank,
        "serviceKey": candidate.service_key,
        "serviceName": candidate.service_name,
        "operation": candidate.operation_name,
        "scores": {
            "fp": {
                "nbInput": fp.nb_input,
                "nbOutput": fp.nb_output,
                "strInputName": fp.str_input_name,
                "strOutputName": fp.str_output_name,
                "strInputDatatype": fp.str_input_datatype,
                "strOutputDatatype": fp.str_output_datatype,
                "total": fp.total,
                "minAcceptable": fp.min_acceptable,
            },
            "fpNorm": candidate.fp_norm,
            "uf_series": list(candidate.qos.uf_series),
            "changes": list(candidate.qos.changes),
            "score_ac": candidate.qos.aggregate_change,
            "uf_norm": candidate.qos.uf_latest_norm,
            "nfp": candidate.qos.nfp,
            "global": candidate.global_score,
        },
        "rated": candidate.qos.rated,
    }


def report_to_dict(report: SelectionReport) -> dict:
    return {
        "processId": report.process_id,
        "tasks": [
            {
                "taskId": task.requirement.task_id,
                "taskName": task.requirement.task_name,
                "candidates": [_candidate_to_dict(c) for c in task.candidates],
                "diagnostics": list(task.diagnostics),
            }
            for task in report.tasks
        ],
        "config": report.config,
    }


def serialize_report(report: SelectionReport | dict) -> str:
    """Deterministic JSON text (no trailing newline); same input, same bytes."""
    data = report_to_dict(report) if isinstance(report, SelectionReport) else report
    return json.dumps(data, indent=2)


# --- explanation ------------------------------------------------------------

def explain(report: SelectionReport | dict, task_id: str, rank: int) -> str:
    """Human-readable breakdown of one ranked candidate's scores."""
    data = report_to_dict(report) if isinstance(report, SelectionReport) else report
    try:
        tasks = data["tasks"]
    except (TypeError, KeyError):
        raise ReportError("not a selection report (missing 'tasks')") from None
    for task in tasks:
        if task.get("taskId") == task_id:
            break
    else:
        raise ReportError(f"report has no task {task_id!r}")
    for candidate in task.get("candidates", []):
        if candidate.get("rank") == rank:
            break
    else:
        raise ReportError(f"task {task_id!r} has no candidate at rank {rank}")

    config = data.get("config", {})
    stability = config.get("qos", {}).get("stability_weight", "?")
    functional_weight = config.get("functional_weight", "?")
    scores = candidate["scores"]
    fp = scores["fp"]
    lines = [
        f"task {task_id} ({task.get('taskName', '')}) — rank {rank}: "
        f"{candidate['serviceName']} / {candidate['operation']} [{candidate['serviceKey']}]",
        "",
        "functional components:",
        f"  nbInput           = {fp['nbInput']}  (input-count comparison: equal > user-has-more > user-has-fewer)",
        f"  nbOutput          = {fp['nbOutput']}  (output-count comparison: equal > op-offers-more > op-offers-fewer)",
        f"  strInputName      = {fp['strInputName']}  (matched input names x string-same points)",
        f"  strOutputName     = {fp['strOutputName']}  (matched output names x string-same points)",
        f"  strInputDatatype  = {fp['strInputDatatype']}  (matched input datatypes x string-same points)",
        f"  strOutputDatatype = {fp['strOutputDatatype']}  (matched output datatypes x string-same points)",
        f"  SCORE_FP = {fp['total']}  (sum of the six components)",
        f"  SCORE_min_FP = {fp['minAcceptable']}  (gate: unfavorable + favorable "
        "+ 2*same*min(input counts) + 2*same*requested outputs)",
        "",
        "dynamic QoS:",
        f"  rated    = {str(candidate['rated']).lower()}  (false: no QoS history recorded yet)",
        f"  UF series = {scores['uf_series']}  (weighted pool z-scores per time gap, oldest to newest)",
        f"  changes   = {scores['changes']}  (relative UF change between consecutive gaps)",
        f"  SCORE_AC  = {scores['score_ac']}  (sum of changes)",
        f"  uf_norm   = {scores['uf_norm']}  (latest UF min-max normalized over the rated pool)",
        f"  SCORE_NFP = {scores['nfp']}  ({stability} * uf_norm + {_complement(stability)} * normalized SCORE_AC)",
        "",
        "global:",
        f"  fpNorm = {scores['fpNorm']}  (SCORE_FP min-max normalized over the gated pool)",
        f"  global score = {scores['global']}  ({functional_weight} * fpNorm "
        f"+ {_complement(functional_weight)} * SCORE_NFP)",
    ]
    return "\n".join(lines)


def _complement(weight) -> str:
    if isinstance(weight, (int, float)):
        return repr(round(1.0 - weight, 12))
    return "?"
