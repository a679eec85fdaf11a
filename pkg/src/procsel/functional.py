"""Functional matching: context filter, parameter pairing and the gate.

A candidate operation is scored on six components: how its input/output
parameter counts compare to the request, and how many input/output names
and datatypes can be matched. Candidates whose total falls below the
minimum acceptable score (the score of the weakest acceptable shape: all
requested outputs covered with at least partial input agreement) are
dropped before QoS scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bpmn import TaskRequirement
from .errors import ConfigError
from .lexicon import SynonymLexicon, extract_keywords, keyword_sets_match, terms_match
from .registry import Operation, Parameter, ServiceCategory, ServiceRegistry, WebService


@dataclass(frozen=True)
class ScoreTable:
    """Points awarded per comparison.

    Count comparisons award nb_equal for identical counts, nb_favorable
    for the tolerable direction (user requests more inputs / fewer
    outputs than the operation offers) and nb_unfavorable otherwise.
    String comparisons award string_same per matched pair and
    string_different per compared-but-unmatched slot.
    """

    nb_equal: int = 3
    nb_favorable: int = 2
    nb_unfavorable: int = 1
    string_same: int = 2
    string_different: int = 0

    def validate(self) -> "ScoreTable":
        if not self.nb_equal > self.nb_favorable > self.nb_unfavorable:
            raise ConfigError(
                "score_table requires nb_equal > nb_favorable > nb_unfavorable"
            )
        if not self.string_same > self.string_different >= 0:
            raise ConfigError(
                "score_table requires string_same > string_different >= 0"
            )
        return self


DEFAULT_SCORE_TABLE = ScoreTable()


@dataclass(frozen=True)
class Pairing:
    """A maximum matching between user and operation parameter indices."""

    pairs: tuple[tuple[int, int], ...]
    matched_count: int


@dataclass(frozen=True)
class FunctionalScore:
    nb_input: int
    nb_output: int
    str_input_name: int
    str_output_name: int
    str_input_datatype: int
    str_output_datatype: int
    total: int
    min_acceptable: int
    passed: bool


def match_context(
    requirement: TaskRequirement, category: ServiceCategory, lexicon: SynonymLexicon
) -> bool:
    """First filter: does any task context keyword match a category keyword?"""
    return keyword_sets_match(requirement.context_keywords, category.keywords, lexicon)


def _names_match(a: str, b: str, lexicon: SynonymLexicon) -> bool:
    # Token-wise with a coverage rule: every token of one name must find a
    # matching token in the other (in at least one direction).
    ta = extract_keywords(a)
    tb = extract_keywords(b)
    if not ta or not tb:
        return False

    def covers(xs: tuple[str, ...], ys: tuple[str, ...]) -> bool:
        return all(any(terms_match(x, y, lexicon) for y in ys) for x in xs)

    return covers(ta, tb) or covers(tb, ta)


def pair_parameters(
    user: list[Parameter],
    op: list[Parameter],
    lexicon: SynonymLexicon,
    compare_by: str,
) -> Pairing:
    """Maximum-cardinality matching between two parameter lists.

    compare_by is "name" (token-wise, synonym-aware) or "datatype" (exact
    equality of normalized datatype strings). User indices are processed
    in ascending order, candidate operation indices tried in ascending
    order, which makes the returned pairing deterministic; the matched
    count is the true maximum regardless of parameter order.
    """
    if compare_by == "name":
        def edge(u: Parameter, o: Parameter) -> bool:
            return _names_match(u.name, o.name, lexicon)
    elif compare_by == "datatype":
        def edge(u: Parameter, o: Parameter) -> bool:
            return u.datatype == o.datatype
    else:
        raise ValueError(f"compare_by must be 'name' or 'datatype', got {compare_by!r}")

    adjacency = [
        [j for j, o in enumerate(op) if edge(u, o)]
        for u in user
    ]
    matched_user_for_op: list[int] = [-1] * len(op)

    def augment(u: int, visited: list[bool]) -> bool:
        for j in adjacency[u]:
            if visited[j]:
                continue
            visited[j] = True
            if matched_user_for_op[j] == -1 or augment(matched_user_for_op[j], visited):
                matched_user_for_op[j] = u
                return True
        return False

    for u in range(len(user)):
        augment(u, [False] * len(op))

    pairs = tuple(
        sorted((u, j) for j, u in enumerate(matched_user_for_op) if u != -1)
    )
    return Pairing(pairs=pairs, matched_count=len(pairs))


def min_acceptable_score(
    n_user_inputs: int, n_op_inputs: int, n_user_outputs: int, table: ScoreTable
) -> int:
    """Gate threshold: the score of the weakest acceptable candidate.

    That candidate covers every requested output (plus possibly more) and
    matches whatever inputs both sides share: unfavorable input count +
    favorable output count + name and datatype points for min(inputs)
    matched inputs and all requested outputs.
    """
    return (
        table.nb_unfavorable
        + table.nb_favorable
        + 2 * table.string_same * min(n_user_inputs, n_op_inputs)
        + 2 * table.string_same * n_user_outputs
    )


def score_functional(
    requirement: TaskRequirement,
    op: Operation,
    lexicon: SynonymLexicon,
    table: ScoreTable = DEFAULT_SCORE_TABLE,
) -> FunctionalScore:
    """Score one operation against one task requirement."""
    n_user_in, n_op_in = len(requirement.inputs), len(op.inputs)
    n_user_out, n_op_out = len(requirement.outputs), len(op.outputs)

    if n_user_in == n_op_in:
        nb_input = table.nb_equal
    elif n_user_in > n_op_in:
        nb_input = table.nb_favorable  # extra user inputs may be optional to the op
    else:
        nb_input = table.nb_unfavorable
    if n_user_out == n_op_out:
        nb_output = table.nb_equal
    elif n_user_out < n_op_out:
        nb_output = table.nb_favorable  # surplus outputs can be filtered by the user
    else:
        nb_output = table.nb_unfavorable

    def string_score(user: list[Parameter], op_params: list[Parameter], by: str) -> int:
        matched = pair_parameters(user, op_params, lexicon, by).matched_count
        comparable = min(len(user), len(op_params))
        return table.string_same * matched + table.string_different * (comparable - matched)

    str_input_name = string_score(requirement.inputs, op.inputs, "name")
    str_output_name = string_score(requirement.outputs, op.outputs, "name")
    str_input_datatype = string_score(requirement.inputs, op.inputs, "datatype")
    str_output_datatype = string_score(requirement.outputs, op.outputs, "datatype")

    total = (
        nb_input
        + nb_output
        + str_input_name
        + str_output_name
        + str_input_datatype
        + str_output_datatype
    )
    min_acceptable = min_acceptable_score(n_user_in, n_op_in, n_user_out, table)
    return FunctionalScore(
        nb_input=nb_input,
        nb_output=nb_output,
        str_input_name=str_input_name,
        str_output_name=str_output_name,
        str_input_datatype=str_input_datatype,
        str_output_datatype=str_output_datatype,
        total=total,
        min_acceptable=min_acceptable,
        passed=total >= min_acceptable,
    )


def gate_candidates(
    requirement: TaskRequirement,
    registry: ServiceRegistry,
    lexicon: SynonymLexicon,
    table: ScoreTable = DEFAULT_SCORE_TABLE,
) -> list[tuple[WebService, Operation, FunctionalScore]]:
    """Context filter + functional gate over the whole registry.

    Every operation of every service in every context-matching category is
    scored; only candidates at or above their minimum acceptable score are
    returned, in registry order.
    """
    candidates = []
    for category in registry.categories:
        if not match_context(requirement, category, lexicon):
            continue
        for service in category.services:
            for op in service.operations:
                score = score_functional(requirement, op, lexicon, table)
                if score.passed:
                    candidates.append((service, op, score))
    return candidates
