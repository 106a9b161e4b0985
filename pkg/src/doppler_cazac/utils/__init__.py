from .colors import color, colors_supported
from .logger import Logger, format_elapsed_time, log
from .numbertheory import *
