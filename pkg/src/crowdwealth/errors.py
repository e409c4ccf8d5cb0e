"""Exception types shared across the package.

Every error raised by library code derives from CrowdWealthError so callers
can catch one base class. The CLI maps these onto process exit codes:
config/parse problems exit 1, runaway simulations exit 2, comparison
failures exit 3.
"""


class CrowdWealthError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(CrowdWealthError):
    """An operation received values outside its domain (NaN, wrong sign, ...)."""


class ConfigError(CrowdWealthError):
    """A scenario config failed validation.

    `field` carries a dotted path into the JSON document (e.g.
    "regime.shock_scale") so the CLI can point at the offending entry.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class SurveyFormatError(CrowdWealthError):
    """A bucketed survey file is malformed. `row` is the 1-based data row."""

    def __init__(self, row: int, message: str):
        self.row = row
        self.message = message
        super().__init__(f"row {row}: {message}")


class InsufficientDataError(CrowdWealthError):
    """Not enough usable points for a fit or classification."""


class UnboundedRunError(CrowdWealthError):
    """A simulation exceeded the magnitude guard and was aborted."""
