# Generated by Django 5.0 on 2026-10-17 09:12

import uuid

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='OptimizationRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('COMPLETED', 'Completed'), ('FAILED', 'Failed')], db_index=True, default='RUNNING', max_length=20)),
                ('mode', models.CharField(choices=[('full', 'full'), ('basic', 'basic'), ('op_only', 'op_only'), ('ens_only', 'ens_only'), ('top10', 'top10'), ('top10w', 'top10w'), ('best_single', 'best_single')], default='full', max_length=20)),
                ('seed', models.BigIntegerField(default=0)),
                ('config', models.JSONField(default=dict, help_text='Effective engine configuration')),
                ('grammar_hash', models.CharField(blank=True, help_text='SHA-256 of the grammar text', max_length=64)),
                ('termination_reason', models.CharField(blank=True, choices=[('generations', 'generations'), ('budget', 'budget')], max_length=20)),
                ('best_fitness', models.FloatField(blank=True, null=True)),
                ('archive_size', models.PositiveIntegerField(default=0)),
                ('ensemble_size', models.PositiveIntegerField(default=0)),
                ('test_metrics', models.JSONField(blank=True, default=dict)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('error_message', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'verbose_name': 'Optimization Run',
                'verbose_name_plural': 'Optimization Runs',
                'db_table': 'autoflow_runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['mode', 'seed'], name='autoflow_run_mode_seed_idx')],
            },
        ),
        migrations.CreateModel(
            name='GenerationRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('generation', models.PositiveIntegerField()),
                ('best_fitness', models.FloatField()),
                ('mean_fitness', models.FloatField()),
                ('archive_min_divfit', models.FloatField()),
                ('elapsed', models.FloatField(help_text='Seconds since the run started')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='generations', to='autoflow.optimizationrun')),
            ],
            options={
                'db_table': 'autoflow_generations',
                'ordering': ['run', 'generation'],
                'unique_together': {('run', 'generation')},
            },
        ),
    ]
