"""
Signals for optimisation run events.
"""
from django.dispatch import Signal

# Sent when a run starts
# Provides arguments:
# - run_id: UUID of the run record, or None when the run is not recorded
# - config: effective EngineConfig
# - grammar_hash: SHA-256 of the grammar text
run_started = Signal()

# Sent after every completed generation
# - run_id, record: GenerationStats
generation_completed = Signal()

# Sent when a run ends (status COMPLETED or FAILED)
# - run_id, status, report: RunReport or None, error: message or None
run_finished = Signal()
