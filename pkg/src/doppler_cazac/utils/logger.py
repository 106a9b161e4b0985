import datetime
import json
import logging
import logging.handlers
import sys
from time import time
from typing import Any, Dict, List, Optional

import numpy as np

from .colors import color, colors_supported

LOGGER_LEVEL_COLORS = {
    "TRACE": color.bold(color.cyan("TRACE")),
    "DEBUG": color.bold(color.cyan("DEBUG")),
    "INFO": color.bold(color.white("INFO ")),
    "DONE": color.bold(color.green("DONE ")),
    "SUCCESS": color.bold(color.italic(color.green("SUCES"))),
    "COMPLETED": color.bold(color.bg_green("COMPL")),
    "WARNING": color.bold(color.orange("WARN ")),
    "ERROR": color.bold(color.red("ERROR")),
    "FAILED": color.bold(color.italic(color.red("FAIL "))),
    "CRITICAL": color.bold(color.bg_light_red("CRITI")),
}

# Custom levels sit between the standard ones
LOGGER_LEVELS = {
    "TRACE": logging.DEBUG - 1,
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "DONE": logging.INFO + 1,
    "COMPLETED": logging.INFO + 3,
    "SUCCESS": logging.INFO + 4,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "FAILED": logging.ERROR + 1,
    "CRITICAL": logging.CRITICAL,
}

for _name, _value in LOGGER_LEVELS.items():
    logging.addLevelName(_value, _name)


def format_elapsed_time(start_time: float, end_time: float) -> str:
    """Format elapsed time as <h>h, <m>min, <s>s, <ms>ms

    Args:
        start_time (float): Start time in epoch format
        end_time (float): Finish time in epoch format

    Returns:
        str: Formatted elapsed time
    """
    elapsed_time = end_time - start_time
    result = ""
    hours = int(elapsed_time // 3600)
    if hours > 0:
        result += f"{hours}h, "
    elapsed_time %= 3600
    minutes = int(elapsed_time // 60)
    if minutes > 0:
        result += f"{minutes}min, "
    elapsed_time %= 60
    seconds = int(elapsed_time)
    if seconds > 0:
        result += f"{seconds}s, "
    milliseconds = int((elapsed_time - int(elapsed_time)) * 1000)
    if milliseconds > 0 or not result:
        result += f"{milliseconds}ms"
    return result.rstrip(", ")


class LoggerFormatter(logging.Formatter):
    """
    Formatter with optional colors and nested-step prefixes.

    Lines logged with ``start_sub`` open a bracket, lines with ``end_sub``
    close it; everything in between is indented with a vertical rule.

    Attributes:
        show_level (bool): Whether to show the log level
        show_date (bool): Whether to show the timestamp
        show_file (bool): Whether to show file name and line number
        show_env (bool): Whether to show the environment name
        colors (bool): Whether to emit ANSI colors
    """

    START_PREFIX = "╭○ "
    END_PREFIX = "╰● "
    SUB_PREFIX = "│ "

    def __init__(self, colors: bool = True, depth: int = 0, **flags: bool):
        super().__init__()
        self.show_level = flags.get("level", True)
        self.show_date = flags.get("date", True)
        self.show_file = flags.get("file", False)
        self.show_env = flags.get("env", True)
        self.colors = colors
        self.depth = depth

    def __style__(self, text: str, record: logging.LogRecord, bold: bool) -> str:
        if not self.colors:
            return text
        if bold:
            text = color.bold(text)
        if record.levelname in ("SUCCESS", "COMPLETED"):
            text = color.green(text)
        elif record.levelname == "FAILED":
            text = color.red(text)
        return text

    def format(self, record: logging.LogRecord) -> str:
        start_sub = getattr(record, "start_sub", False)
        end_sub = getattr(record, "end_sub", False)
        env = getattr(record, "env", "default")
        bold = start_sub or end_sub

        if end_sub and self.depth > 0:
            self.depth -= 1
        indent = self.SUB_PREFIX * self.depth
        if start_sub:
            body = indent + self.START_PREFIX
            self.depth += 1
        elif end_sub:
            body = indent + self.END_PREFIX
        else:
            body = indent

        message = record.getMessage()
        lines = [body + self.__style__(line, record, bold) for line in message.splitlines() or [""]]

        prefix: List[str] = []
        timestamp = datetime.datetime.fromtimestamp(record.created).isoformat(timespec="milliseconds")
        if self.colors:
            if self.show_date:
                prefix.append(color.dark_blue(timestamp))
            if self.show_env:
                prefix.append(color.purple(f"({env})"))
            if self.show_level:
                prefix.append(LOGGER_LEVEL_COLORS.get(record.levelname, color.bold(record.levelname)))
            if self.show_file:
                prefix.append(f"{color.dark_green(record.filename)}{color.orange(':')}{color.dark_green(str(record.lineno))}")
            head = " ".join(prefix)
            return "\n".join(f"{head} {line}" for line in lines)

        if self.show_date:
            prefix.append(timestamp)
        if self.show_env:
            prefix.append(f"({env})")
        if self.show_level:
            prefix.append(f"{record.levelname:9s}")
        if self.show_file:
            prefix.append(f"{record.filename}:{record.lineno}")
        head = " ".join(prefix)
        return "\n".join(f"{head} | {line}" for line in lines)


class Logger:
    """Logger helper that pretty formats steps and times long-running tasks."""

    def __init__(
        self,
        env: str,
        log_file: Optional[str] = None,
        max_log_size_mb: int = 10,
        backup_count: int = 5,
        colors: Optional[bool] = None,
    ):
        """
        Initializes the logger.

        Args:
            env (str): Environment tag shown on every line (experiment name).
            log_file (str, optional): Path to a log file. If None, file logging is disabled.
            max_log_size_mb (int, optional): Maximum log file size in MB before rotation.
            backup_count (int, optional): Number of rotated log files to keep.
            colors (bool, optional): Force colors on/off; autodetected when None.
        """
        self.env = env
        self.v_separator = " "
        self.flags = {"file": False, "date": True, "env": True, "level": True}
        self.__colors__ = colors_supported() if colors is None else colors
        self.__log_file__ = log_file
        self.__max_log_size__ = max_log_size_mb
        self.__backup_count__ = backup_count
        self.__tasks__: Dict[int, Dict[str, Any]] = {}
        self.__total_tasks__ = 0

        self.logger = logging.getLogger("doppler_cazac")
        self.logger.setLevel(LOGGER_LEVELS["TRACE"])
        self.logger.propagate = False
        self.console_handler: Optional[logging.Handler] = None
        self.file_handler: Optional[logging.Handler] = None
        self.__console_level__ = logging.INFO
        self.__custom_formatters__()

    def __custom_formatters__(self):
        depth = self.console_handler.formatter.depth if self.console_handler else 0
        if self.console_handler is not None:
            self.logger.removeHandler(self.console_handler)
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(LoggerFormatter(colors=self.__colors__, depth=depth, **self.flags))
        console_handler.setLevel(self.__console_level__)
        self.console_handler = console_handler
        self.logger.addHandler(console_handler)

        if self.__log_file__:
            if self.file_handler is not None:
                self.logger.removeHandler(self.file_handler)
            file_handler = logging.handlers.RotatingFileHandler(
                self.__log_file__,
                maxBytes=self.__max_log_size__ * 1024 * 1024,
                backupCount=self.__backup_count__,
                encoding="utf-8",
                delay=True,
            )
            file_handler.setFormatter(LoggerFormatter(colors=False, **{**self.flags, "file": True}))
            file_handler.setLevel(LOGGER_LEVELS["TRACE"])
            self.file_handler = file_handler
            self.logger.addHandler(file_handler)

    def __get_message__(self, *messages) -> str:
        res = []
        for msg in messages:
            if isinstance(msg, (dict, list)):
                res.append(json.dumps(msg, default=_json_default))
            else:
                res.append(str(msg))
        return self.v_separator.join(res)

    def set_env(self, env: str):
        self.env = env

    def set_level(self, level: str):
        """Set the logging level for the console handler."""
        level = level.upper()
        if level == "WARN":
            level = "WARNING"
        if level not in LOGGER_LEVELS:
            raise ValueError(f"Invalid log level: {level}")
        self.__console_level__ = LOGGER_LEVELS[level]
        if self.console_handler is not None:
            self.console_handler.setLevel(self.__console_level__)

    def set_log_file(self, log_file: Optional[str]):
        if self.file_handler is not None:
            self.logger.removeHandler(self.file_handler)
            self.file_handler.close()
            self.file_handler = None
        self.__log_file__ = log_file
        self.__custom_formatters__()

    def enable_colors(self, enable: bool = True):
        self.__colors__ = enable
        self.__custom_formatters__()

    def log(self, level: str, *messages, start_sub: bool = False, end_sub: bool = False):
        level_value = LOGGER_LEVELS.get(level.upper())
        if level_value is None:
            raise ValueError(f"Invalid log level: {level}")
        self.logger.log(
            level_value,
            self.__get_message__(*messages),
            extra={"env": self.env, "start_sub": start_sub, "end_sub": end_sub},
            stacklevel=3,
        )

    def trace(self, *messages, start_sub=False, end_sub=False):
        self.log("TRACE", *messages, start_sub=start_sub, end_sub=end_sub)

    def debug(self, *messages, start_sub=False, end_sub=False):
        self.log("DEBUG", *messages, start_sub=start_sub, end_sub=end_sub)

    def info(self, *messages, start_sub=False, end_sub=False):
        self.log("INFO", *messages, start_sub=start_sub, end_sub=end_sub)

    def done(self, *messages, start_sub=False, end_sub=False):
        self.log("DONE", *messages, start_sub=start_sub, end_sub=end_sub)

    def success(self, *messages, start_sub=False, end_sub=False):
        self.log("SUCCESS", *messages, start_sub=start_sub, end_sub=end_sub)

    def failed(self, *messages, start_sub=False, end_sub=False):
        self.log("FAILED", *messages, start_sub=start_sub, end_sub=end_sub)

    def warn(self, *messages, start_sub=False, end_sub=False):
        self.log("WARNING", *messages, start_sub=start_sub, end_sub=end_sub)

    def error(self, *messages, start_sub=False, end_sub=False):
        self.log("ERROR", *messages, start_sub=start_sub, end_sub=end_sub)

    def critical(self, *messages, start_sub=False, end_sub=False):
        self.log("CRITICAL", *messages, start_sub=start_sub, end_sub=end_sub)

    def start(self, *messages) -> int:
        """Open a timed task and return its id."""
        self.__total_tasks__ += 1
        task_id = self.__total_tasks__
        message = self.__get_message__(*messages)
        self.__tasks__[task_id] = {"message": message, "start_time": time()}
        self.log("INFO", f"Running: {message}", start_sub=True)
        return task_id

    def finish(self, task_id: int, *messages, success: bool = True) -> float:
        """Close a task opened by start() and log its duration.

        Returns:
            float: Elapsed seconds, 0.0 if the task id is unknown
        """
        task = self.__tasks__.pop(task_id, None)
        if task is None:
            return 0.0
        end = time()
        postfix = self.__get_message__(*messages)
        postfix = f" {postfix}" if postfix.strip() else ""
        elapsed = format_elapsed_time(task["start_time"], end)
        if success:
            self.log("COMPLETED", f"{task['message']} ({elapsed}){postfix}", end_sub=True)
        else:
            self.log("FAILED", f"{task['message']} ({elapsed}){postfix}", end_sub=True)
        return end - task["start_time"]


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


log = Logger("doppler-cazac")
