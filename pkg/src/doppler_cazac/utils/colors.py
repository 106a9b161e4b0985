import os
import sys

CODES = {
    "end": "\033[0m",
    "bold": "\033[1m",
    "italic": "\033[3m",
    "bg_green": "\033[42m",
    "bg_light_red": "\033[101m",
    "red": "\033[91m",
    "green": "\033[92m",
    "orange": "\033[33m",
    "dark_blue": "\033[34m",
    "dark_green": "\033[32m",
    "purple": "\033[95m",
    "cyan": "\033[96m",
    "white": "\033[97m",
}


def colors_supported(stream=None) -> bool:
    """Colors are on for TTYs, off for NO_COLOR, forced by FORCE_COLOR."""
    if os.environ.get("NO_COLOR"):
        return False
    if os.environ.get("FORCE_COLOR"):
        return True
    stream = stream or sys.stdout
    return hasattr(stream, "isatty") and stream.isatty()


def paint(text: str, *styles: str) -> str:
    """Wrap text in the ANSI codes of the given style names."""
    prefix = "".join(CODES[style] for style in styles)
    return f"{prefix}{text}{CODES['end']}"


class color:
    @staticmethod
    def bold(text: str) -> str:
        return paint(text, "bold")

    @staticmethod
    def italic(text: str) -> str:
        return paint(text, "italic")

    @staticmethod
    def red(text: str) -> str:
        return paint(text, "red")

    @staticmethod
    def green(text: str) -> str:
        return paint(text, "green")

    @staticmethod
    def orange(text: str) -> str:
        return paint(text, "orange")

    @staticmethod
    def cyan(text: str) -> str:
        return paint(text, "cyan")

    @staticmethod
    def purple(text: str) -> str:
        return paint(text, "purple")

    @staticmethod
    def white(text: str) -> str:
        return paint(text, "white")

    @staticmethod
    def dark_blue(text: str) -> str:
        return paint(text, "dark_blue")

    @staticmethod
    def dark_green(text: str) -> str:
        return paint(text, "dark_green")

    @staticmethod
    def bg_green(text: str) -> str:
        return paint(text, "bg_green")

    @staticmethod
    def bg_light_red(text: str) -> str:
        return paint(text, "bg_light_red")
