"""Exception types shared across the package.

The CLI maps these onto exit codes: data errors exit 1, config errors
exit 2, feasibility errors exit 3.
"""


class KqicError(Exception):
    """Base class for package-specific errors."""


class DataError(KqicError):
    """Invalid or unusable input data."""


class ParseError(DataError):
    """Malformed CSV content.

    ``problems`` holds (line_number, message) pairs, header line = 1.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        detail = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems)
        super().__init__(f"cannot parse input: {detail}")


class ValidationError(DataError):
    """Sample triples violating the data invariants.

    ``violations`` holds (position, message) pairs. The position is a row
    index for in-memory triples, or a file line number when raised by the
    CSV loader (see the message prefix).
    """

    def __init__(self, violations, where="index"):
        self.violations = list(violations)
        detail = "; ".join(f"{where} {ix}: {msg}" for ix, msg in self.violations)
        super().__init__(f"invalid samples: {detail}")


class DegenerateScaleError(DataError):
    """All pairwise distances vanish; no usable kernel scale."""


class SelectionError(DataError):
    """Bandwidth-selection split too small or without any events."""


class ConfigError(KqicError):
    """Invalid configuration (flags, config files, parameter values)."""


class FeasibilityError(KqicError):
    """A sampling or permutation scheme cannot produce valid draws."""
