"""
Management command to score a saved ensemble on a labelled CSV.
"""

from autoflow.constants import Metric
from autoflow.management.base import AutoflowCommand
from autoflow.services.ensemble_service import Ensemble
from autoflow.utils.datasets import load_csv
from autoflow.utils.metrics import METRICS


class Command(AutoflowCommand):
    help = 'Evaluate a persisted ensemble and print the metric as JSON'

    def add_arguments(self, parser):
        parser.add_argument('--ensemble', type=str, required=True, help='ensemble.json written by optimize')
        parser.add_argument('--data', type=str, required=True, help='CSV file with a header row')
        parser.add_argument('--label', type=str, required=True, help='Label column name')
        parser.add_argument(
            '--metric',
            type=str,
            default=Metric.BALANCED_ACCURACY.value,
            choices=[metric.value for metric in Metric],
        )

    def handle(self, *args, **options):
        ensemble = Ensemble.load(options['ensemble'])
        data = load_csv(options['data'], options['label'], class_names=ensemble.class_names)
        predictions = ensemble.predict(data.features)
        metric = options['metric']
        self.write_json({
            'metric': metric,
            'value': METRICS[metric](data.labels, predictions),
            'samples': data.n_samples,
            'members': len(ensemble),
        })
