import logging
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel

from mathkg.core.paths import ProjectPaths as PP
from mathkg.formula.parser import parse_with_diagnostics

logger = logging.getLogger(__name__)


class CorpusFailure(BaseModel):
    line: int
    formula: str
    message: str

    def to_tsv(self) -> str:
        return f"{self.line}\t{self.formula}\t{self.message}"


class CorpusReport(BaseModel):
    total: int
    parsed: int
    failures: list[CorpusFailure]

    @property
    def success_rate(self) -> float:
        return self.parsed / self.total if self.total else 1.0

    def to_tsv(self) -> str:
        return "".join(f.to_tsv() + "\n" for f in self.failures)


def read_corpus(path: str | Path = PP.FORMULA_CORPUS) -> list[str]:
    """One formula per line; blank lines are kept out."""
    return [line for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]


def validate_corpus(formulas: Iterable[str]) -> CorpusReport:
    total = 0
    failures = []
    for number, formula in enumerate(formulas, start=1):
        total += 1
        node, diagnostics = parse_with_diagnostics(formula)
        if node is None:
            failures.append(
                CorpusFailure(line=number, formula=formula, message=diagnostics[0].message)
            )
    report = CorpusReport(total=total, parsed=total - len(failures), failures=failures)
    logger.info(
        f"Corpus validation: {report.parsed}/{report.total} parsed "
        f"({report.success_rate:.2%})"
    )
    return report
