"""Doppler-resilient CAZAC waveform design and radar simulation."""

__version__ = "0.1.0"

from .classes import *
from .sequences import *
from .correlation import *
from .design import *
from .radar import *
from .config import *
from .experiments import *
from .utils import log
