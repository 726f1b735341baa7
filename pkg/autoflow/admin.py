"""
Django admin configuration for recorded optimisation runs.
"""

from django.contrib import admin
from django.utils.html import format_html

from .models import GenerationRecord, OptimizationRun


class GenerationRecordInline(admin.TabularInline):
    model = GenerationRecord
    extra = 0
    readonly_fields = ['generation', 'best_fitness', 'mean_fitness', 'archive_min_divfit', 'elapsed']
    can_delete = False
    ordering = ['generation']

    def has_add_permission(self, request, obj):
        return False


@admin.register(OptimizationRun)
class OptimizationRunAdmin(admin.ModelAdmin):
    list_display = [
        'id', 'mode', 'seed', 'status_badge', 'best_fitness', 'test_accuracy_display',
        'termination_reason', 'created_at',
    ]
    list_filter = ['status', 'mode', 'termination_reason', 'created_at']
    search_fields = ['id', 'grammar_hash', 'output_dir']
    readonly_fields = [
        'id', 'status', 'mode', 'seed', 'config', 'grammar_hash', 'termination_reason',
        'best_fitness', 'archive_size', 'ensemble_size', 'test_metrics', 'output_dir',
        'error_message', 'created_at', 'updated_at', 'finished_at',
    ]
    inlines = [GenerationRecordInline]

    def test_accuracy_display(self, obj):
        value = obj.test_balanced_accuracy
        return '-' if value is None else f"{value:.4f}"
    test_accuracy_display.short_description = 'Test BA'

    def status_badge(self, obj):
        colors = {
            'COMPLETED': 'green',
            'RUNNING': 'orange',
            'FAILED': 'red',
        }
        color = colors.get(obj.status, 'gray')
        return format_html(
            '<span style="background-color: {}; color: white; padding: 2px 8px; border-radius: 3px;">{}</span>',
            color, obj.status
        )
    status_badge.short_description = 'Status'


@admin.register(GenerationRecord)
class GenerationRecordAdmin(admin.ModelAdmin):
    list_display = ['run', 'generation', 'best_fitness', 'mean_fitness', 'archive_min_divfit', 'elapsed']
    list_filter = ['run__mode']
    search_fields = ['run__id']
