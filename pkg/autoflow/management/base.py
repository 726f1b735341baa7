"""
Shared behaviour of the autoflow management commands.
"""

import json
import logging

from django.core.management.base import BaseCommand

from ..exceptions import AutoflowException

logger = logging.getLogger(__name__)

VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.INFO, 2: logging.DEBUG, 3: logging.DEBUG}


class AutoflowCommand(BaseCommand):
    """
    Base command: maps ``--verbosity`` onto the ``autoflow`` logger and turns
    AutoflowException into a JSON error on stderr plus a non-zero exit
    (1 for validation problems, 2 for runtime failures).
    """

    def execute(self, *args, **options):
        logging.getLogger('autoflow').setLevel(VERBOSITY_LEVELS.get(options.get('verbosity', 1), logging.INFO))
        try:
            return super().execute(*args, **options)
        except AutoflowException as e:
            logger.error(f"{type(e).__name__}: {e.message}")
            self.stderr.write(json.dumps({'error': e.to_dict()}, default=str))
            raise SystemExit(e.exit_code)

    def write_json(self, payload) -> None:
        self.stdout.write(json.dumps(payload, indent=2, sort_keys=True, default=str))
