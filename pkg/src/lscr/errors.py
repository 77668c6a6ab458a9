"""Exception types raised across the package."""


class LscrError(Exception):
    """Base class for every error raised by lscr."""


# graph loading

class MalformedLine(LscrError):
    def __init__(self, lineno: int, text: str = ""):
        super().__init__(f"malformed triple on line {lineno}: {text!r}")
        self.lineno = lineno


class TooManyLabels(LscrError):
    def __init__(self, count: int):
        super().__init__(f"{count} distinct predicates; at most 64 are supported")
        self.count = count


class EmptyGraph(LscrError):
    pass


class UnknownClass(LscrError):
    pass


# constraints

class ConstraintSyntaxError(LscrError):
    pass


class UnknownVertexName(LscrError):
    pass


class UnknownLabelName(LscrError):
    pass


class FocusUnused(LscrError):
    pass


# oracles / search

class BudgetExceeded(LscrError):
    pass


class InconsistentVSG(LscrError):
    pass


# index

class KTooLarge(LscrError):
    pass


class FormatError(LscrError):
    pass


class FingerprintMismatch(LscrError):
    pass


class IndexGraphMismatch(LscrError):
    pass


# workload

class SpecInvalid(LscrError):
    pass


class Timeout(LscrError):
    pass


class Unachievable(LscrError):
    pass
