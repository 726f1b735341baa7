"""
Database models for recorded optimisation runs.
"""

import uuid

from django.db import models

from .constants import RunMode, RunStatus, TerminationReason


class OptimizationRun(models.Model):
    """
    One recorded search run.
    Created only when a run is started with recording enabled.
    """
    STATUS_CHOICES = [(status.value, status.value.title()) for status in RunStatus]
    MODE_CHOICES = [(mode.value, mode.value) for mode in RunMode]
    TERMINATION_CHOICES = [(reason.value, reason.value) for reason in TerminationReason]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default=RunStatus.RUNNING.value, db_index=True)
    mode = models.CharField(max_length=20, choices=MODE_CHOICES, default=RunMode.FULL.value)
    seed = models.BigIntegerField(default=0)
    config = models.JSONField(default=dict, help_text="Effective engine configuration")
    grammar_hash = models.CharField(max_length=64, blank=True, help_text="SHA-256 of the grammar text")

    termination_reason = models.CharField(max_length=20, choices=TERMINATION_CHOICES, blank=True)
    best_fitness = models.FloatField(null=True, blank=True)
    archive_size = models.PositiveIntegerField(default=0)
    ensemble_size = models.PositiveIntegerField(default=0)
    test_metrics = models.JSONField(default=dict, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    error_message = models.TextField(blank=True)

    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        db_table = 'autoflow_runs'
        ordering = ['-created_at']
        verbose_name = 'Optimization Run'
        verbose_name_plural = 'Optimization Runs'
        indexes = [
            models.Index(fields=['mode', 'seed'], name='autoflow_run_mode_seed_idx'),
        ]

    def __str__(self):
        return f"{self.mode} run {self.id} ({self.status})"

    @property
    def test_balanced_accuracy(self):
        return (self.test_metrics or {}).get('ensemble', {}).get('balanced_accuracy')


class GenerationRecord(models.Model):
    """Per-generation statistics of a recorded run."""
    run = models.ForeignKey(OptimizationRun, on_delete=models.CASCADE, related_name='generations')
    generation = models.PositiveIntegerField()
    best_fitness = models.FloatField()
    mean_fitness = models.FloatField()
    archive_min_divfit = models.FloatField()
    elapsed = models.FloatField(help_text="Seconds since the run started")
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'autoflow_generations'
        ordering = ['run', 'generation']
        unique_together = [('run', 'generation')]

    def __str__(self):
        return f"Generation {self.generation} of {self.run_id}: best {self.best_fitness:.4f}"
