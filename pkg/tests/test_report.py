"""
Tests for text reports.
"""

from gameproof.corpus import CorpusResult
from gameproof.counterstrategy import refute
from gameproof.report import ReportRenderer
from gameproof.runtime import DoNothing, ScriptedEnvironment, get_solution, play
from gameproof.syntax import parse_sequent


class TestRenderer:
    """Test each report template."""

    def test_proof(self, copycat_proof):
        text = ReportRenderer().render_proof(copycat_proof)
        assert text.startswith("Proof of ∘– ⊓x⊔y(¬p(x) ∨ p(y))")
        assert "choose-exists" in text
        assert "term=s" in text
        assert text.rstrip().endswith("3 steps")

    def test_record(self, standard):
        rec = play(get_solution("double"), ScriptedEnvironment([(0, "#11")]),
                   parse_sequent("=> !x: ?y: y = x + x"), standard)
        text = ReportRenderer().render_record(rec)
        assert "Winner: ⊤" in text
        assert "amplitude 3" in text

    def test_refutation(self):
        ref = refute(parse_sequent("=> p | q"), DoNothing())
        text = ReportRenderer().render_refutation(ref)
        assert text.startswith("Refutation of ∘– p ⊔ q")
        assert "Verified: yes" in text

    def test_corpus(self):
        results = [CorpusResult("a", True, "fine", 0.5), CorpusResult("b", False, "broken", 1.0)]
        text = ReportRenderer().render_corpus(results)
        assert text.startswith("Corpus: 1/2 passed")
        assert "[FAIL] b" in text

    def test_user_template_overrides(self, temp_dir, copycat_proof):
        (temp_dir / "proof.txt.j2").write_text("{{ steps | length }} steps only\n")
        text = ReportRenderer(temp_dir).render_proof(copycat_proof)
        assert text == "3 steps only\n"


class TestWrite:
    def test_creates_parents(self, temp_dir):
        path = ReportRenderer.write(temp_dir / "nested" / "out.txt", "hello\n")
        assert path.read_text(encoding="utf-8") == "hello\n"
