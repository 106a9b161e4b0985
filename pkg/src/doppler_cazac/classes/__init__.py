from .base import *
from .defaults import *
from .exceptions import *
