"""Worker-count policy shared by sweeps and the Monte-Carlo oracle."""
import os

from .errors import ParameterError


def worker_count() -> int:
    """CPU count, capped by the ``PHOTOMECH_THREADS`` environment variable."""
    n = os.cpu_count() or 1
    env = os.environ.get("PHOTOMECH_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError as exc:
            raise ParameterError(f"PHOTOMECH_THREADS must be an integer, got {env!r}") from exc
    return n
