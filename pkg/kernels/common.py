# kernels/common.py
import logging, sys
from enum import Enum


def setup_logger(name="settest"):
    logger = logging.getLogger(name)
    if logger.handlers:  # avoid duplicate handlers on reruns
        return logger
    logger.setLevel(logging.INFO)
    # stderr: stdout is reserved for decisions and reports
    h = logging.StreamHandler(sys.stderr)
    h.setFormatter(logging.Formatter("%(asctime)s | %(levelname)s | %(message)s"))
    logger.addHandler(h)
    return logger


class Decision(str, Enum):
    SAME = "Same"
    DIFFERENT = "Different"


# ---------- errors ----------
class SetTestError(ValueError): ...
class DimensionMismatch(SetTestError): ...
class NonFiniteInput(SetTestError): ...
class InsufficientData(SetTestError): ...
class DegenerateBandwidth(SetTestError): ...
class EmptySet(SetTestError): ...
class InfeasibleNu(SetTestError): ...
class DomainError(SetTestError): ...
class DegenerateVariance(SetTestError): ...
class OutputExists(SetTestError): ...


class SolverDidNotConverge(SetTestError):
    def __init__(self, message: str, alphas=None, objective: float | None = None, kkt_gap: float | None = None):
        super().__init__(message)
        self.alphas = alphas
        self.objective = objective
        self.kkt_gap = kkt_gap


class MalformedCsv(SetTestError):
    def __init__(self, line: int, detail: str = ""):
        super().__init__(f"MalformedCsv(line {line})" + (f": {detail}" if detail else ""))
        self.line = line


class ParseError(SetTestError):
    def __init__(self, line: int, column: int, cell: str = ""):
        super().__init__(f"ParseError(line {line}, column {column}): {cell!r} is not numeric")
        self.line = line
        self.column = column
