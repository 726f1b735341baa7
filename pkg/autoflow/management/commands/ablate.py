"""
Management command to compare run modes over several seeds.
"""

from autoflow.config import RunConfigFile
from autoflow.management.base import AutoflowCommand
from autoflow.managers.ablation_manager import AblationManager, parse_modes, parse_seeds


class Command(AutoflowCommand):
    help = 'Run every (mode, seed) pair and write ablation.csv and ablation_summary.json'

    def add_arguments(self, parser):
        parser.add_argument('--config', type=str, required=True, help='JSON run configuration file')
        parser.add_argument('--modes', type=str, required=True, help='Comma-separated run modes, e.g. full,basic')
        parser.add_argument('--seeds', type=str, required=True, help='Seed range "1..5" or list "1,4,9"')
        parser.add_argument('--budget', type=float, help='Wall-clock budget per run in seconds')
        parser.add_argument('--output', type=str, help='Output directory (overrides the config file)')

    def handle(self, *args, **options):
        run_file = RunConfigFile.load(options['config'])
        modes = parse_modes(options['modes'])
        seeds = parse_seeds(options['seeds'])
        overrides = {'budget': options.get('budget')}

        self.stdout.write(f"Running {len(modes)} mode(s) x {len(seeds)} seed(s)...")
        outcome = AblationManager().run(run_file, modes, seeds, overrides, output_dir=options.get('output'))

        for mode, stats in outcome['summary']['modes'].items():
            mean = stats['mean_balanced_accuracy']
            shown = f"{mean:.4f}" if mean is not None else 'n/a'
            self.stdout.write(f"  {mode}: {stats['completed']}/{stats['runs']} completed, mean balanced accuracy {shown}")
        for check in outcome['summary']['checks']:
            line = f"  {check['check']}: {'ok' if check['passed'] else 'FLAGGED'}"
            self.stdout.write(self.style.SUCCESS(line) if check['passed'] else self.style.WARNING(line))
        self.stdout.write(self.style.SUCCESS(f"Results written to {outcome['output_dir']}"))
