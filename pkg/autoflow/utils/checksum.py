"""
Content hashes recorded in run metadata.
"""

import hashlib
import json
from typing import Any, Dict


def grammar_hash(text: str) -> str:
    """
    SHA-256 of a grammar file with line endings and trailing blanks normalised.

    Args:
        text: Grammar file contents

    Returns:
        Hex digest
    """
    canonical = "\n".join(line.rstrip() for line in text.splitlines()).strip()
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def config_fingerprint(payload: Dict[str, Any]) -> str:
    """Stable hash of a JSON-serialisable configuration."""
    # Sort keys for consistent hashing
    serialized = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(serialized.encode('utf-8')).hexdigest()
