"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
onto 1 (validation), 2 (I/O) and 3 (internal invariant violation).
"""


class BiomtError(Exception):
    exit_code = 3


class ValidationError(BiomtError, ValueError):
    exit_code = 1


class IOFailure(BiomtError, OSError):
    exit_code = 2

    def __init__(self, path, reason=""):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}" if reason else self.path)


class FixtureError(IOFailure):
    pass


class InvariantViolation(BiomtError):
    exit_code = 3


class UnknownLanguage(ValidationError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"unknown language code {code!r}")


class InvalidSegment(ValidationError):
    pass


class UnsupportedFormat(ValidationError):
    def __init__(self, fmt):
        self.format = fmt
        super().__init__(f"unsupported format tag {fmt!r}")


class LineCountMismatch(ValidationError):
    def __init__(self, src_n, tgt_n):
        self.src_n = src_n
        self.tgt_n = tgt_n
        super().__init__(f"source has {src_n} lines, target has {tgt_n}")


class AsymmetricBlank(ValidationError):
    def __init__(self, line_no):
        self.line_no = line_no
        super().__init__(f"line {line_no}: blank on one side only")


class MalformedRow(ValidationError):
    def __init__(self, line_no, reason="malformed row"):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class MissingColumn(ValidationError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"missing required column {column!r}")


class InvalidSpec(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class MixedPairs(ValidationError):
    pass


class PairCountMismatch(ValidationError):
    def __init__(self, n_hyp, n_ref):
        self.n_hyp = n_hyp
        self.n_ref = n_ref
        super().__init__(f"{n_hyp} hypotheses vs {n_ref} references")


class EmptyCorpus(ValidationError):
    def __init__(self, what="corpus"):
        super().__init__(f"empty {what}")
