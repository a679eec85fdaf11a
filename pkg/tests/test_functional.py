from __future__ import annotations

import copy
import random
from itertools import combinations, permutations

import pytest

from procsel import (
    ConfigError,
    DEFAULT_SCORE_TABLE,
    EMPTY_LEXICON,
    Operation,
    Parameter,
    ScoreTable,
    SynonymLexicon,
    gate_candidates,
    load_registry,
    match_context,
    pair_parameters,
    score_functional,
)
from procsel.bpmn import TaskRequirement
from procsel.registry import ServiceCategory

from conftest import SENDMAIL_REGISTRY
from generators import DATATYPES, WORDS, gen_case_fixture


def _req(inputs, outputs, context=frozenset({"ctx"})):
    return TaskRequirement("task", "task", inputs, outputs, set(context))


def _params(*specs):
    return [Parameter(name, datatype) for name, datatype in specs]


# --- context filter -----------------------------------------------------------

def test_match_context_direct_hit():
    req = _req([], _params(("reply", "boolean")), {"authentication", "login"})
    category = ServiceCategory("auth", {"system", "authentication", "login"})
    assert match_context(req, category, EMPTY_LEXICON)


def test_match_context_disjoint():
    req = _req([], _params(("reply", "boolean")), {"payment"})
    category = ServiceCategory("auth", {"system", "authentication", "login"})
    assert not match_context(req, category, EMPTY_LEXICON)


def test_match_context_via_synonym():
    req = _req([], _params(("reply", "boolean")), {"signin"})
    category = ServiceCategory("auth", {"login"})
    assert match_context(req, category, SynonymLexicon({"signin": ["login"]}))


# --- pairing -------------------------------------------------------------------

def test_pairing_order_does_not_matter():
    user = _params(("username", "string"), ("password", "string"))
    op = _params(("password", "string"), ("username", "string"))
    pairing = pair_parameters(user, op, EMPTY_LEXICON, "name")
    assert pairing.matched_count == 2


def test_pairing_empty_user_side():
    assert pair_parameters([], _params(("x", "string")), EMPTY_LEXICON, "name").matched_count == 0


def test_pairing_synonym_edge():
    lex = SynonymLexicon({"addr": ["address"]})
    pairing = pair_parameters(_params(("addr", "string")), _params(("address", "string")), lex, "name")
    assert pairing.matched_count == 1


def test_pairing_datatype_is_exact_match_only():
    lex = SynonymLexicon({"string": ["integer"]})  # synonyms must not affect datatypes
    pairing = pair_parameters(_params(("a1", "string")), _params(("b1", "integer")), lex, "datatype")
    assert pairing.matched_count == 0


def test_pairing_multi_token_coverage():
    user = _params(("userName", "string"),)
    op = _params(("name_of_user", "string"),)
    assert pair_parameters(user, op, EMPTY_LEXICON, "name").matched_count == 1


def test_pairing_rejects_unknown_mode():
    with pytest.raises(ValueError):
        pair_parameters([], [], EMPTY_LEXICON, "colour")


def _brute_force_max(user, op, lexicon, by):
    def edge(u, o):
        return pair_parameters([u], [o], lexicon, by).matched_count == 1

    best = 0
    indices_u, indices_o = range(len(user)), range(len(op))
    for r in range(min(len(user), len(op)), 0, -1):
        for chosen_u in combinations(indices_u, r):
            for chosen_o in permutations(indices_o, r):
                if all(edge(user[u], op[o]) for u, o in zip(chosen_u, chosen_o)):
                    return r
    return best


def test_pairing_is_maximum_against_brute_force():
    rng = random.Random(21)
    lex = SynonymLexicon({"customer": ["client"], "price": ["cost"]})
    pool = WORDS[:10] + ["client", "cost"]
    for _ in range(60):
        user = [Parameter(rng.choice(pool), rng.choice(DATATYPES)) for _ in range(rng.randint(0, 6))]
        op = [Parameter(rng.choice(pool), rng.choice(DATATYPES)) for _ in range(rng.randint(0, 6))]
        for by in ("name", "datatype"):
            got = pair_parameters(user, op, lex, by).matched_count
            assert got == _brute_force_max(user, op, lex, by)


def test_pairing_pairs_are_injective():
    rng = random.Random(33)
    for _ in range(50):
        user = [Parameter(rng.choice(WORDS[:6]), rng.choice(DATATYPES)) for _ in range(rng.randint(0, 5))]
        op = [Parameter(rng.choice(WORDS[:6]), rng.choice(DATATYPES)) for _ in range(rng.randint(0, 5))]
        pairing = pair_parameters(user, op, EMPTY_LEXICON, "name")
        used_u = [u for u, _ in pairing.pairs]
        used_o = [o for _, o in pairing.pairs]
        assert len(set(used_u)) == len(used_u)
        assert len(set(used_o)) == len(used_o)
        assert pairing.matched_count == len(pairing.pairs) <= min(len(user), len(op))


# --- scoring --------------------------------------------------------------------

def test_case1_login_exact_match():
    req = _req(
        _params(("username", "string"), ("password", "string")),
        _params(("authentication", "boolean")),
        {"authentication", "login"},
    )
    op = Operation(
        "login",
        _params(("username", "string"), ("password", "string")),
        _params(("authentication", "boolean")),
    )
    score = score_functional(req, op, EMPTY_LEXICON)
    assert (
        score.nb_input,
        score.nb_output,
        score.str_input_name,
        score.str_output_name,
        score.str_input_datatype,
        score.str_output_datatype,
    ) == (3, 3, 4, 2, 4, 2)
    assert score.total == 18
    assert score.min_acceptable == 15
    assert score.passed


def test_case4_boundary_equality():
    req = _req(_params(("alpha", "string")), _params(("beta", "boolean")))
    op = Operation(
        "op",
        _params(("alpha", "string"), ("extra", "integer")),
        _params(("beta", "boolean"), ("bonus", "double")),
    )
    score = score_functional(req, op, EMPTY_LEXICON)
    assert score.total == 11
    assert score.min_acceptable == 11
    assert score.passed


def test_case5_rejected():
    req = _req(_params(("alpha", "string")), _params(("beta", "boolean"), ("gamma", "double")))
    op = Operation("op", _params(("alpha", "string")), _params(("beta", "boolean")))
    score = score_functional(req, op, EMPTY_LEXICON)
    assert score.total == 12
    assert score.min_acceptable == 15
    assert not score.passed


def test_total_equals_component_sum_randomized():
    rng = random.Random(5)
    for _ in range(200):
        case = rng.randint(1, 6)
        req, op = gen_case_fixture(rng, case)
        score = score_functional(req, op, EMPTY_LEXICON)
        assert score.total == (
            score.nb_input
            + score.nb_output
            + score.str_input_name
            + score.str_output_name
            + score.str_input_datatype
            + score.str_output_datatype
        )
        assert score.passed == (score.total >= score.min_acceptable)


def test_six_case_gate_soundness_sample():
    rng = random.Random(6)
    for case in range(1, 7):
        for _ in range(25):
            req, op = gen_case_fixture(rng, case)
            score = score_functional(req, op, EMPTY_LEXICON)
            assert score.passed == (case <= 4), (case, score)


def test_synonym_substitution_leaves_score_unchanged():
    rng = random.Random(8)
    lex = SynonymLexicon({word: [f"alt{word}"] for word in WORDS})
    for _ in range(100):
        req, op = gen_case_fixture(rng, rng.randint(1, 6))
        baseline = score_functional(req, op, lex)
        mutated = copy.deepcopy(op)
        candidates = mutated.inputs + mutated.outputs
        if not candidates:
            continue
        param = rng.choice(candidates)
        param.name = f"alt{param.name}"
        assert score_functional(req, mutated, lex) == baseline


def test_parameter_order_invariance():
    rng = random.Random(9)
    for _ in range(100):
        req, op = gen_case_fixture(rng, rng.randint(1, 6))
        baseline = score_functional(req, op, EMPTY_LEXICON)
        shuffled_req = TaskRequirement(
            req.task_id,
            req.task_name,
            rng.sample(req.inputs, len(req.inputs)),
            rng.sample(req.outputs, len(req.outputs)),
            req.context_keywords,
        )
        shuffled_op = Operation(
            op.name,
            rng.sample(op.inputs, len(op.inputs)),
            rng.sample(op.outputs, len(op.outputs)),
        )
        assert score_functional(shuffled_req, shuffled_op, EMPTY_LEXICON) == baseline


def test_string_different_override_counts_unmatched_slots():
    table = ScoreTable(string_different=1)
    req = _req(_params(("alpha", "string"), ("beta", "string")), _params(("gamma", "boolean")))
    op = Operation("op", _params(("alpha", "string"), ("zz", "integer")), _params(("gamma", "boolean")))
    score = score_functional(req, op, EMPTY_LEXICON, table)
    # one matched input name (2 points) + one compared-but-different slot (1 point)
    assert score.str_input_name == 3


# --- gate ------------------------------------------------------------------------

def test_gate_sendmail_auth_task(fixture_lexicon):
    registry = load_registry(SENDMAIL_REGISTRY)
    req = _req(
        _params(("username", "string"), ("password", "string")),
        _params(("authentication", "boolean")),
        {"authentication", "login"},
    )
    # brute-force oracle: score all four fixture operations unconditionally
    all_scores = {
        op.name: score_functional(req, op, fixture_lexicon)
        for _, svc in registry.iter_services()
        for op in svc.operations
    }
    assert {name for name, s in all_scores.items() if s.passed} == {"login"}
    passing = gate_candidates(req, registry, fixture_lexicon)
    assert [(svc.name, op.name) for svc, op, _ in passing] == [("authentication", "login")]


def test_gate_no_matching_category(sendmail_registry):
    req = _req([], _params(("reply", "boolean")), {"astronomy"})
    assert gate_candidates(req, sendmail_registry, EMPTY_LEXICON) == []


def test_gate_keeps_duplicate_services(sendmail_registry):
    twin = copy.deepcopy(sendmail_registry.categories[0].services[0])
    twin.service_key = "ws.twin"
    sendmail_registry.categories[0].services.append(twin)
    req = _req(
        _params(("username", "string"), ("password", "string")),
        _params(("authentication", "boolean")),
        {"login"},
    )
    passing = gate_candidates(req, sendmail_registry, EMPTY_LEXICON)
    assert [svc.service_key for svc, _, _ in passing] == ["ws.15.09.2013.08.43.40", "ws.twin"]


def test_gate_results_in_registry_order(sendmail_registry):
    req = _req(
        _params(("senderAddress", "string"), ("receiverAddress", "string"), ("emailContent", "string")),
        _params(("reply", "boolean")),
        {"email"},
    )
    passing = gate_candidates(req, sendmail_registry, EMPTY_LEXICON)
    assert [op.name for _, op, _ in passing] == ["sendEmail", "sendEmailWithAttachment"]


# --- score table -------------------------------------------------------------------

def test_score_table_validation():
    DEFAULT_SCORE_TABLE.validate()
    with pytest.raises(ConfigError):
        ScoreTable(nb_equal=1, nb_favorable=2).validate()
    with pytest.raises(ConfigError):
        ScoreTable(string_same=0).validate()
