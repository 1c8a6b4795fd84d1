class NgramatchError(Exception):
    """Base class for errors raised by this package."""


class FormatError(NgramatchError, ValueError):
    """A file or payload does not follow its documented format."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
