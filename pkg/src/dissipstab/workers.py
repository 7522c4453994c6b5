import logging
import os

from .errors import ConfigError

logger = logging.getLogger(__name__)

THREADS_ENV = "DISSIPSTAB_THREADS"


def resolve_threads(threads=None):
    """--threads, else DISSIPSTAB_THREADS, else 1."""
    if threads is None:
        value = os.environ.get(THREADS_ENV)
        if value is None:
            return 1
        try:
            threads = int(value)
        except ValueError:
            raise ConfigError("{}={!r} is not an integer.".format(THREADS_ENV, value))
        logger.info("Using {} worker threads from {}.".format(threads, THREADS_ENV))
    if threads < 1:
        raise ConfigError("Thread count must be positive, got {!r}.".format(threads))
    return threads
