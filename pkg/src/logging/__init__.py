# Command-line and logging module
from .logger import RunConsole, configure_logging
