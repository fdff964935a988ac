"""
Spectral Multiplier Lab
Discretized Schrodinger operators, spectral multipliers and the harmonic
analysis constants that control them
"""
import logging
import os
import sys

# Package version

__version__ = "1.0.0"

_log_file = os.getenv("LOG_FILE", "logs/spectral_lab.log")
_handlers = [logging.StreamHandler(sys.stdout)]
if _log_file:
    os.makedirs(os.path.dirname(_log_file) or ".", exist_ok=True)
    _handlers.append(logging.FileHandler(_log_file, mode='a'))

# Configure package-level logging
logging.basicConfig(
    level=getattr(logging, os.getenv("LOG_LEVEL", "INFO").upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=_handlers
    )
# Suppress verbose logs from third-party libraries
logging.getLogger('matplotlib').setLevel(logging.WARNING)
logging.getLogger('numexpr').setLevel(logging.WARNING)
logging.getLogger('asyncio').setLevel(logging.WARNING)
