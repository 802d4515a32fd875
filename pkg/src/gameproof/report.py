"""
Text reports for proofs, plays, refutations and corpus runs.
"""

import logging
from pathlib import Path
from typing import Final, Iterable, Optional, Union

from jinja2 import ChoiceLoader, Environment, FileSystemLoader, PackageLoader, select_autoescape

from .calculus import Proof, rule_name
from .counterstrategy import Refutation
from .runtime import RunRecord
from .semantics import show_run
from .syntax import pretty_sequent

LOGGER: Final = logging.getLogger(__name__)


class ReportRenderer:
    """Renders reports from the package templates, optionally overridden by a user directory."""

    def __init__(self, template_dir: Optional[Union[str, Path]] = None):
        loaders = [PackageLoader("gameproof", "templates")]
        if template_dir is not None:
            loaders.insert(0, FileSystemLoader(str(template_dir)))
        self.env = Environment(
            loader=ChoiceLoader(loaders),
            autoescape=select_autoescape(),
            keep_trailing_newline=True,
        )
        self.env.filters["sequent"] = pretty_sequent
        self.env.filters["run"] = show_run

    def _render(self, template_name: str, **context) -> str:
        template = self.env.get_template(template_name)
        return template.render(**context)

    def render_proof(self, proof: Proof) -> str:
        steps = [
            {
                "index": index,
                "sequent": step.sequent,
                "rule": rule_name(step.rule),
                "params": {k: v for k, v in vars(step.rule).items()},
                "premises": list(step.premises),
            }
            for index, step in enumerate(proof.steps)
        ]
        return self._render("proof.txt.j2", conclusion=proof.conclusion, steps=steps)

    def render_record(self, rec: RunRecord) -> str:
        return self._render("record.txt.j2", rec=rec, monitored=rec.meters.moves)

    def render_refutation(self, ref: Refutation) -> str:
        return self._render(
            "refutation.txt.j2",
            ref=ref,
            interpretation=ref.interpretation.to_dict(),
        )

    def render_corpus(self, results: Iterable) -> str:
        results = list(results)
        passed = sum(1 for r in results if r.passed)
        return self._render("corpus.txt.j2", results=results, passed=passed, total=len(results))

    @staticmethod
    def write(path: Union[str, Path], text: str) -> Path:
        """Write a report, creating parent directories."""
        file_path = Path(path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(text, encoding="utf-8")
        LOGGER.info("wrote %s", file_path)
        return file_path
