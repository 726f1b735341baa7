import logging

from django.db import transaction
from django.dispatch import receiver
from django.utils import timezone

from autoflow.models import GenerationRecord, OptimizationRun
from autoflow.signals import generation_completed, run_finished, run_started

logger = logging.getLogger(__name__)


@receiver(run_started)
def record_run_started(sender, run_id=None, config=None, grammar_hash='', **kwargs):
    """Create the run record when a recorded run starts."""
    if run_id is None:
        return
    OptimizationRun.objects.create(
        id=run_id,
        mode=config.mode,
        seed=config.seed,
        config=config.to_dict(),
        grammar_hash=grammar_hash,
    )
    logger.info(f"Recording run {run_id}")


@receiver(generation_completed)
def record_generation(sender, run_id=None, record=None, **kwargs):
    if run_id is None or record is None:
        return
    GenerationRecord.objects.create(
        run_id=run_id,
        generation=record.gen,
        best_fitness=record.best_fit,
        mean_fitness=record.mean_fit,
        archive_min_divfit=record.archive_min_divfit,
        elapsed=record.elapsed_s,
    )


@receiver(run_finished)
def record_run_finished(sender, run_id=None, status='', report=None, error=None, output_dir=None, **kwargs):
    """
    Store the outcome of a recorded run.
    Failed runs keep their error message; completed runs their summary metrics.
    """
    if run_id is None:
        return
    run = OptimizationRun.objects.filter(id=run_id).first()
    if run is None:
        logger.warning(f"Run {run_id} finished but has no record")
        return

    with transaction.atomic():
        run.status = status
        run.finished_at = timezone.now()
        if error:
            run.error_message = error
        if report is not None:
            run.termination_reason = report.termination_reason
            run.best_fitness = (report.best or {}).get('fitness')
            run.archive_size = len(report.archive)
            run.ensemble_size = len(report.ensemble)
            run.test_metrics = report.test_metrics
        if output_dir is not None:
            run.output_dir = str(output_dir)
        run.save()
