import logging
import os
import sys


def setup_logger(name):
    """Configure and return a logger (stderr, level from QLG_LOG_LEVEL)"""
    logger = logging.getLogger(name)
    level = getattr(logging, os.environ.get('QLG_LOG_LEVEL', 'INFO').upper(), logging.INFO)
    logger.setLevel(level)

    # One handler per logger, even when modules are re-imported
    if logger.handlers:
        return logger

    # Console handler; stdout is reserved for command results
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)

    # Format
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    handler.setFormatter(formatter)

    logger.addHandler(handler)
    logger.propagate = False
    return logger
