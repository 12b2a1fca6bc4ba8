class FtscError(Exception):
    pass


class GraphParseError(FtscError):
    def __init__(self, message: str, line_number: int) -> None:
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class GraphFormatError(FtscError):
    pass


class NotStronglyConnectedError(FtscError):
    pass


class RankOutOfRangeError(FtscError):
    pass


class DeltaOutOfRangeError(FtscError):
    pass


class SeedError(FtscError):
    pass


class NoBadInstanceError(FtscError):
    pass


class EdgeBudgetExceeded(FtscError):
    pass


class CrossCheckMismatch(FtscError):
    pass


class MethodDescriptorError(FtscError):
    pass


class BenchmarkSuiteError(FtscError):
    pass
