"""Exception hierarchy.

Every error raised by the library derives from :class:`EmpcpError`, which is
itself a :class:`ValueError` so callers that only care about bad input can
catch that.
"""


class EmpcpError(ValueError):
    pass


class NonFiniteError(EmpcpError):
    def __init__(self, row: int, col: int):
        # 1-based, as reported to users
        self.row = row
        self.col = col
        super().__init__(f"non-finite value at row {row}, column {col}")


class TooSmallError(EmpcpError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"need at least 2 observations, got {n}")


class EmptyError(EmpcpError):
    def __init__(self):
        super().__init__("sample has no columns (d = 0)")


class DimensionMismatch(EmpcpError):
    pass


class LengthMismatch(EmpcpError):
    pass


class SimRequiresUnivariate(EmpcpError):
    pass


class InvalidN(EmpcpError):
    pass


class InvalidM(EmpcpError):
    pass


class OutOfRange(EmpcpError):
    pass


class SpecParseError(EmpcpError):
    """Malformed scenario/experiment file; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str, line: int | None = None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}: {message}{where}")
