"""
Management command to check a grammar file.
"""

from pathlib import Path

from autoflow.config import config
from autoflow.constants import TerminalKind
from autoflow.exceptions import GrammarError, GrammarValidationError
from autoflow.grammar import parse_grammar
from autoflow.management.base import AutoflowCommand
from autoflow.utils.checksum import grammar_hash


class Command(AutoflowCommand):
    help = 'Validate a workflow grammar and print a JSON report (exit 1 on any issue)'

    def add_arguments(self, parser):
        parser.add_argument('--grammar', type=str, help='Grammar file (default: AUTOFLOW_GRAMMAR_PATH)')

    def handle(self, *args, **options):
        path = Path(options.get('grammar') or config.grammar_path)
        try:
            text = path.read_text(encoding='utf-8')
        except FileNotFoundError:
            raise GrammarError(f"Grammar file {path} not found", error_code='GRAMMAR_NOT_FOUND')

        report = {'grammar': str(path), 'grammar_hash': grammar_hash(text)}
        try:
            grammar = parse_grammar(text)
        except GrammarValidationError as e:
            report.update(valid=False, issues=[issue.to_dict() for issue in e.issues])
            self.write_json(report)
            raise SystemExit(1)

        report.update(
            valid=True,
            issues=[],
            root=grammar.root,
            min_derivations=grammar.min_derivations,
            preprocessors=grammar.algorithms(TerminalKind.PREPROCESSING),
            classifiers=grammar.algorithms(TerminalKind.CLASSIFIER),
        )
        self.write_json(report)
