"""
Management command to run a workflow optimisation.
"""

from dataclasses import replace
from pathlib import Path

from autoflow.config import RunConfigFile
from autoflow.constants import RunMode
from autoflow.management.base import AutoflowCommand
from autoflow.managers.optimization_manager import OptimizationManager
from autoflow.utils.formatters import format_duration, format_fitness


class Command(AutoflowCommand):
    help = 'Search for workflows and write report.json, ensemble.json and generations.csv'

    def add_arguments(self, parser):
        parser.add_argument('--config', type=str, required=True, help='JSON run configuration file')
        parser.add_argument('--seed', type=int, help='Random seed (overrides the config file)')
        parser.add_argument('--mode', type=str, choices=[mode.value for mode in RunMode], help='Run mode')
        parser.add_argument('--budget', type=float, help='Total wall-clock budget in seconds')
        parser.add_argument('--output', type=str, help='Output directory (overrides the config file)')
        parser.add_argument('--threads', type=int, help='Parallel evaluations (default 1)')
        parser.add_argument(
            '--no-timings',
            action='store_true',
            help='Write zero elapsed times so same-seed runs give identical artifacts',
        )
        parser.add_argument('--record', action='store_true', help='Record the run in the database')

    def handle(self, *args, **options):
        run_file = RunConfigFile.load(options['config'])
        if options.get('output'):
            run_file = replace(run_file, output=Path(options['output']))
        overrides = {
            'seed': options.get('seed'),
            'mode': options.get('mode'),
            'budget': options.get('budget'),
            'threads': options.get('threads'),
            'record_timings': False if options.get('no_timings') else None,
        }

        result = OptimizationManager(record=options['record']).optimize_from_file(run_file, overrides)
        report = result.report

        self.stdout.write(self.style.SUCCESS(
            f"Run finished ({report.termination_reason}) in {format_duration(report.wall_clock)}"
        ))
        if report.best:
            self.stdout.write(f"  Best workflow: {report.best['workflow']} ({format_fitness(report.best['fitness'])})")
        self.stdout.write(f"  Ensemble members: {len(result.ensemble)}")
        metrics = report.test_metrics.get('ensemble')
        if metrics:
            self.stdout.write(f"  Test balanced accuracy: {metrics['balanced_accuracy']:.4f}")
        self.stdout.write(f"  Artifacts: {result.output_dir}")
