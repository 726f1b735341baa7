"""
Wall-clock budgets with cooperative checkpoints.
"""

import time
from typing import Callable, Optional

from ..exceptions import EvaluationTimeout


class Deadline:
    """
    Tracks a wall-clock budget; ``check()`` raises once it is spent.

    A ``None`` budget never expires.
    """

    def __init__(self, seconds: Optional[float], clock: Callable[[], float] = time.perf_counter):
        self.seconds = seconds
        self._clock = clock
        self.started = clock()

    @property
    def elapsed(self) -> float:
        return self._clock() - self.started

    @property
    def expired(self) -> bool:
        return self.seconds is not None and self.elapsed > self.seconds

    def check(self, where: str = '') -> None:
        if self.expired:
            raise EvaluationTimeout(
                f"Budget of {self.seconds}s exceeded{' ' + where if where else ''}",
                error_code='TIMEOUT',
                details={'elapsed': self.elapsed, 'budget': self.seconds},
            )
