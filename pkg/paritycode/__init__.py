# Parity-code toolkit: classical parity codes, their logical operator
# mappings, and simulation of fault-tolerant logical gate protocols.
from paritycode.config import __version__, config

__all__ = ['__version__', 'config']
