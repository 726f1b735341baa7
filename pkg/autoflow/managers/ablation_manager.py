"""
Ablation manager: runs a mode x seed matrix and compares the variants.
"""

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..config import RunConfigFile, resolve_engine_config
from ..constants import (
    ABLATION_SUMMARY_FILENAME,
    ABLATION_TABLE_FILENAME,
    ABLATION_TOLERANCE,
    RunMode,
)
from ..exceptions import AutoflowException, ValidationError
from ..grammar import load_grammar
from .optimization_manager import OptimizationManager

logger = logging.getLogger(__name__)

ABLATION_COLUMNS = (
    "mode", "seed", "test_balanced_accuracy", "test_macro_f1", "ensemble_size",
    "best_fitness", "termination", "error",
)

# (better mode, baseline mode): the better mode should not trail by more than the tolerance
DIRECTION_CHECKS = (
    (RunMode.FULL, RunMode.BASIC),
    (RunMode.ENS_ONLY, RunMode.TOP10),
)


def parse_seeds(text: str) -> List[int]:
    """
    Parse ``"1..5"`` (inclusive range) or ``"1,4,9"``.

    Raises:
        ValidationError: On malformed input
    """
    text = text.strip()
    try:
        if '..' in text:
            start, end = (int(part) for part in text.split('..', 1))
            seeds = list(range(start, end + 1))
        else:
            seeds = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ValidationError(f"Invalid seed list: {text!r}", error_code='INVALID_SEEDS')
    if not seeds or any(seed < 0 for seed in seeds):
        raise ValidationError(f"Seed list must hold non-negative integers: {text!r}", error_code='INVALID_SEEDS')
    return seeds


def parse_modes(text: str) -> List[RunMode]:
    modes = []
    for name in (part.strip() for part in text.split(',')):
        if not name:
            continue
        try:
            modes.append(RunMode(name))
        except ValueError:
            raise ValidationError(f"Unknown mode {name!r}", error_code='INVALID_MODE')
    if not modes:
        raise ValidationError("At least one mode is required", error_code='INVALID_MODE')
    return modes


@dataclass
class AblationRow:
    mode: str
    seed: int
    test_balanced_accuracy: Optional[float] = None
    test_macro_f1: Optional[float] = None
    ensemble_size: int = 0
    best_fitness: Optional[float] = None
    termination: str = ''
    error: str = ''

    def to_row(self) -> List[str]:
        def cell(value):
            return '' if value is None else repr(value) if isinstance(value, float) else str(value)
        return [cell(getattr(self, column)) for column in ABLATION_COLUMNS]


def summarize(rows: Sequence[AblationRow], tolerance: float = ABLATION_TOLERANCE) -> Dict[str, Any]:
    """Per-mode means plus the soft direction checks (flagged, never raised)."""
    means: Dict[str, Dict[str, Any]] = {}
    for mode in dict.fromkeys(row.mode for row in rows):
        scores = [row.test_balanced_accuracy for row in rows if row.mode == mode and row.test_balanced_accuracy is not None]
        f1 = [row.test_macro_f1 for row in rows if row.mode == mode and row.test_macro_f1 is not None]
        means[mode] = {
            'runs': sum(1 for row in rows if row.mode == mode),
            'completed': len(scores),
            'mean_balanced_accuracy': float(np.mean(scores)) if scores else None,
            'mean_macro_f1': float(np.mean(f1)) if f1 else None,
        }

    checks = []
    for better, baseline in DIRECTION_CHECKS:
        a = means.get(better.value, {}).get('mean_balanced_accuracy')
        b = means.get(baseline.value, {}).get('mean_balanced_accuracy')
        if a is None or b is None:
            continue
        passed = a >= b - tolerance
        checks.append({
            'check': f"{better.value} >= {baseline.value} - {tolerance}",
            'left': a,
            'right': b,
            'passed': passed,
        })
        if not passed:
            logger.warning(f"Ablation direction check failed: {better.value}={a:.4f} vs {baseline.value}={b:.4f}")
    return {'tolerance': tolerance, 'modes': means, 'checks': checks}


class AblationManager:
    """Runs every (mode, seed) combination on one run configuration."""

    def __init__(self):
        self.optimizer = OptimizationManager()

    def run(
        self,
        run_file: RunConfigFile,
        modes: Sequence[RunMode],
        seeds: Sequence[int],
        overrides: Optional[Dict[str, Any]] = None,
        output_dir: Optional[Path] = None,
    ) -> Dict[str, Any]:
        grammar = load_grammar(run_file.grammar)
        rows: List[AblationRow] = []
        for seed in seeds:
            train, test = self.optimizer.prepare_data(run_file, seed)
            for mode in modes:
                cfg = resolve_engine_config(run_file, {**(overrides or {}), 'mode': mode.value, 'seed': seed})
                row = AblationRow(mode=mode.value, seed=seed)
                logger.info(f"Ablation run: mode={mode.value} seed={seed}")
                try:
                    result = self.optimizer.optimize(cfg, grammar, train, test)
                except AutoflowException as e:
                    # A failed variant is reported in the table; the matrix carries on.
                    row.error = e.message
                    rows.append(row)
                    continue
                metrics = result.report.test_metrics.get('ensemble', {})
                row.test_balanced_accuracy = metrics.get('balanced_accuracy')
                row.test_macro_f1 = metrics.get('macro_f1')
                row.ensemble_size = len(result.ensemble)
                row.best_fitness = (result.report.best or {}).get('fitness')
                row.termination = result.report.termination_reason
                rows.append(row)

        summary = summarize(rows)
        output_dir = Path(output_dir or run_file.output)
        self.write(rows, summary, output_dir)
        return {'rows': rows, 'summary': summary, 'output_dir': output_dir}

    @staticmethod
    def write(rows: Sequence[AblationRow], summary: Dict[str, Any], output_dir: Path) -> None:
        output_dir.mkdir(parents=True, exist_ok=True)
        with (output_dir / ABLATION_TABLE_FILENAME).open('w', newline='', encoding='utf-8') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(ABLATION_COLUMNS)
            for row in rows:
                writer.writerow(row.to_row())
        (output_dir / ABLATION_SUMMARY_FILENAME).write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding='utf-8'
        )
        logger.info(f"Ablation table written to {output_dir / ABLATION_TABLE_FILENAME}")
