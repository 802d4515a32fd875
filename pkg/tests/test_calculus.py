"""
Tests for CL12 rules, proof checking and proof search.
"""

import json
from importlib import resources

import pytest

from gameproof.calculus import (
    ChooseAll,
    ChooseDisj,
    Proof,
    ProofStep,
    Replicate,
    Unprovable,
    Wait,
    check_proof,
    check_step,
    choose_premise,
    dump_proof,
    is_conservative_case,
    load_proof,
    proof_from_json,
    prove,
    wait_premises,
)
from gameproof.errors import ProofFormatError
from gameproof.syntax import format_sequent, parse_sequent, sequents_alpha_equal

PROVABLE = [
    "=> (Ax: p(x)) -> !x: p(x)",
    "=> !x: ?y: (p(x) -> p(y))",
    "p & q => (p & q) /\\ (p & q)",
    "?x: !y: p(x, y) => ?x: ((!y: p(x, y)) /\\ (!y: p(x, y)))",
]

UNPROVABLE = [
    "=> (!x: p(x)) -> Ax: p(x)",
    "=> ?y: !x: (p(x) -> p(y))",
    "=> (p & q) -> (p & q) /\\ (p & q)",
    "=> !x: ?y: y = f(x)",
    "=> (?x: !y: p(x, y)) -> ?x: ((!y: p(x, y)) /\\ (!y: p(x, y)))",
]

ELEMENTARY = [
    "=> p \\/ ~p",
    "=> p",
    "=> (Ax: p(x)) -> p(0)",
    "=> p(0) -> Ax: p(x)",
    "p(0), Ax: (~p(x) \\/ q(x)) => q(0)",
    "p, q => p /\\ q",
    "p => q",
    "=> 0 = 0",
    "=> 0 = 1",
    "=> Ex: x = x",
    "=> Ax: Ay: (~(x = y) \\/ f(x) = f(y))",
    "10 = 11, p(10) => p(11)",
    "=> (Ex: Ay: r(x, y)) -> Ay: Ex: r(x, y)",
    "=> (Ay: Ex: r(x, y)) -> Ex: Ay: r(x, y)",
    "Ax: (p(x) -> q(x)), Ax: p(x) => Ax: q(x)",
    "Ex: p(x) => Ax: p(x)",
    "=> (p -> q) \\/ (q -> p)",
    "p /\\ ~p => q",
    "p \\/ q => p",
    "=> Ax: (p(x) \\/ ~p(x))",
]


def cube_json():
    text = resources.files("gameproof.corpus").joinpath("cube.json").read_text(encoding="utf-8")
    return json.loads(text)


class TestRules:
    """Test the premises each rule demands."""

    def test_wait_premises_for_choice_conjunction(self):
        premises = [format_sequent(p) for _, p in wait_premises(parse_sequent("=> p & q"))]
        assert premises == ["=> p", "=> q"]

    def test_wait_premise_uses_fresh_variable(self):
        [(link, premise)] = wait_premises(parse_sequent("=> !x: p(x)"))
        assert link.var is not None
        assert premise.succedent.args[0].name == link.var

    def test_choose_disjunct(self):
        premise = choose_premise(parse_sequent("=> p | q"), ChooseDisj((), 1))
        assert format_sequent(premise) == "=> q"

    def test_choose_all_in_antecedent(self):
        premise = choose_premise(parse_sequent("!x: p(x) => q"), ChooseAll(0, (), "10"))
        assert format_sequent(premise) == "p(10) => q"

    def test_replicate_appends_a_copy(self):
        premise = choose_premise(parse_sequent("p & q => q"), Replicate(0))
        assert len(premise.antecedent) == 2

    def test_choice_inside_choice_is_not_surface(self):
        with pytest.raises(ValueError):
            choose_premise(parse_sequent("=> (p | q) & r"), ChooseDisj((0,), 0))

    def test_wait_on_unstable_sequent(self):
        violation = check_step(parse_sequent("=> p | q"), Wait(), [])
        assert violation.kind == "unstable"

    def test_wait_missing_premise(self):
        violation = check_step(parse_sequent("=> p & q"), Wait(), [parse_sequent("=> p")])
        assert violation.kind == "missing-premise"


class TestChecker:
    """Test whole-proof checking."""

    def test_cube_proof(self, cube_proof):
        assert len(cube_proof) == 10
        assert check_proof(cube_proof) is None

    def test_copycat_proof(self, copycat_proof):
        assert check_proof(copycat_proof) is None

    def test_wrong_term_is_caught_at_its_step(self):
        data = cube_json()
        data[1]["params"]["term"] = "s"
        index, violation = check_proof(proof_from_json(data))
        assert index == 1
        assert violation.kind == "mismatch"

    def test_premises_must_come_first(self):
        data = cube_json()
        data[0]["premises"] = [1]
        index, violation = check_proof(proof_from_json(data))
        assert index == 0
        assert violation.kind == "premise-order"

    def test_file_round_trip(self, cube_proof, temp_dir):
        path = temp_dir / "cube.json"
        dump_proof(cube_proof, path)
        assert load_proof(path) == cube_proof

    def test_unknown_rule(self):
        with pytest.raises(ProofFormatError, match="Unknown rule"):
            proof_from_json([{"seq": "=> p", "rule": "cut", "params": {}, "premises": []}])

    def test_not_a_list(self):
        with pytest.raises(ProofFormatError):
            proof_from_json({"seq": "=> p"})

    def test_bad_sequent_text(self):
        with pytest.raises(ProofFormatError, match="step 0"):
            proof_from_json([{"seq": "=> p(", "rule": "wait"}])


class TestSearch:
    """Test backward proof search."""

    @pytest.mark.parametrize("text", PROVABLE)
    def test_provable(self, text):
        s = parse_sequent(text)
        proof = prove(s)
        assert isinstance(proof, Proof)
        assert sequents_alpha_equal(proof.conclusion, s)
        assert check_proof(proof) is None

    @pytest.mark.parametrize("text", UNPROVABLE)
    def test_unprovable(self, text):
        assert isinstance(prove(parse_sequent(text)), Unprovable)

    def test_cube_is_rediscovered(self, cube_sequent):
        proof = prove(cube_sequent)
        assert isinstance(proof, Proof)
        assert check_proof(proof) is None

    def test_conservativity_needs_elementary_input(self):
        with pytest.raises(ValueError):
            is_conservative_case(parse_sequent("=> p | q"))

    def test_single_wait_step_proof(self):
        """An elementary valid sequent is proved by Wait with no premises."""
        s = parse_sequent("=> p \\/ ~p")
        assert check_proof(Proof((ProofStep(s, Wait(), ()),))) is None


class TestConservativity:
    """On elementary sequents, provability coincides with classical validity."""

    @pytest.mark.parametrize("text", ELEMENTARY)
    def test_agrees_with_classical_validity(self, text):
        assert is_conservative_case(parse_sequent(text)) is True

    def test_suite_mixes_valid_and_invalid(self):
        found = [prove(parse_sequent(text)) for text in ELEMENTARY]
        assert any(isinstance(f, Proof) for f in found)
        assert any(isinstance(f, Unprovable) for f in found)
