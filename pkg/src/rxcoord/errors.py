"""Exception hierarchy shared across the package.

Every error carries a stable ``code`` string so the CLI can emit
machine-parsable ``error_code: message`` lines.
"""


class RxcoordError(Exception):
    """Base class for all package errors."""

    code = "internal_error"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InputError(RxcoordError):
    """Bad or missing input data; CLI exit code 2."""

    code = "bad_input"
    exit_code = 2


class MalformedRecord(InputError):
    code = "malformed_record"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyStructure(InputError):
    code = "empty_structure"


class InconsistentFrame(InputError):
    code = "inconsistent_frame"

    def __init__(self, message: str, frame: int):
        super().__init__(f"frame {frame}: {message}")
        self.frame = frame


class NonNumericValue(InputError):
    code = "non_numeric_value"

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


class DuplicateFrame(InputError):
    code = "duplicate_frame"


class SelectionParseError(InputError):
    code = "selection_parse_error"


class EmptySelection(InputError):
    code = "empty_selection"


class AtomOrderMismatch(InputError):
    code = "atom_order_mismatch"


class TooFewAtoms(InputError):
    code = "too_few_atoms"


class CollinearSelection(InputError):
    code = "collinear_selection"


class DegenerateAxes(InputError):
    code = "degenerate_axes"


class MissingCA(InputError):
    code = "missing_ca"

    def __init__(self, residue_seq: int):
        super().__init__(f"residue {residue_seq} has no CA atom")
        self.residue_seq = residue_seq


class DegenerateResult(RxcoordError):
    """Computation completed but produced no usable signal; CLI exit code 3."""

    code = "degenerate_result"
    exit_code = 3


class AllDegenerate(DegenerateResult):
    code = "all_degenerate"
