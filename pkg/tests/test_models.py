import uuid

import pytest

from autoflow import standalone
from autoflow.constants import RunStatus
from autoflow.managers.optimization_manager import GenerationStats, OptimizationManager
from autoflow.models import GenerationRecord, OptimizationRun
from autoflow.signals import generation_completed, run_finished, run_started


@pytest.mark.django_db
class TestRecording:

    def test_recorded_run(self, grammar, blobs, small_config):
        result = OptimizationManager(record=True).optimize(small_config, grammar, blobs, test=blobs)
        run = OptimizationRun.objects.get()
        assert run.status == RunStatus.COMPLETED.value
        assert run.seed == small_config.seed
        assert run.config == small_config.to_dict()
        assert run.best_fitness == result.report.best['fitness']
        assert run.ensemble_size == len(result.ensemble)
        assert run.test_balanced_accuracy == result.report.test_metrics['ensemble']['balanced_accuracy']
        assert run.finished_at is not None
        assert list(run.generations.values_list('generation', flat=True)) == [1, 2]

    def test_unrecorded_run_leaves_no_rows(self, grammar, blobs, small_config):
        OptimizationManager().optimize(small_config, grammar, blobs)
        assert not OptimizationRun.objects.exists()
        assert not GenerationRecord.objects.exists()

    def test_failed_run(self, small_config):
        run_id = uuid.uuid4()
        run_started.send(sender=self.__class__, run_id=run_id, config=small_config, grammar_hash='abc')
        run_finished.send(sender=self.__class__, run_id=run_id, status=RunStatus.FAILED.value,
                          report=None, error='every refit failed')
        run = OptimizationRun.objects.get(id=run_id)
        assert run.status == RunStatus.FAILED.value
        assert run.error_message == 'every refit failed'
        assert run.best_fitness is None

    def test_generation_without_run_id_is_ignored(self):
        generation_completed.send(sender=self.__class__, run_id=None,
                                  record=GenerationStats(1, 0.9, 0.5, 0.7, 0.0))
        assert not GenerationRecord.objects.exists()

    def test_unknown_run_finishing_is_ignored(self):
        run_finished.send(sender=self.__class__, run_id=uuid.uuid4(), status=RunStatus.COMPLETED.value,
                          report=None, error=None)
        assert not OptimizationRun.objects.exists()

    def test_string_forms(self, small_config):
        run = OptimizationRun.objects.create(mode='full', seed=3, config=small_config.to_dict())
        record = GenerationRecord.objects.create(
            run=run, generation=1, best_fitness=0.91234, mean_fitness=0.5, archive_min_divfit=0.4, elapsed=0.0,
        )
        assert str(run).startswith('full run ')
        assert str(record).endswith('best 0.9123')
        assert run.test_balanced_accuracy is None


class TestStandalone:

    def test_alias_dispatches_to_command(self, monkeypatch):
        calls = []
        monkeypatch.setattr(standalone, 'execute_from_command_line', calls.append)
        standalone.main(['autoflow', 'validate-grammar', '--grammar', 'my.bnf'])
        assert calls == [['autoflow', 'validate_grammar', '--grammar', 'my.bnf']]

    @pytest.mark.parametrize('argv', [['autoflow'], ['autoflow', 'shell']])
    def test_unknown_command(self, argv, capsys):
        with pytest.raises(SystemExit) as excinfo:
            standalone.main(argv)
        assert excinfo.value.code == 1
        assert 'usage: autoflow' in capsys.readouterr().err

    def test_logging_config_targets_autoflow_logger(self):
        assert standalone.logging_config('DEBUG')['loggers']['autoflow']['level'] == 'DEBUG'
