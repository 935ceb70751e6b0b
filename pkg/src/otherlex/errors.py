"""Exceptions that map onto the CLI exit-code contract.

Usage errors (bad flags, invalid combinations) are argparse's business and
exit 1; these classes cover the other two lanes.
"""


class DataError(Exception):
    """Malformed or inconsistent input data (corpora, parses, lexicons, models)."""

    exit_code = 2


class NumericalError(Exception):
    """Non-finite losses, failed convergence, degenerate linear algebra."""

    exit_code = 3
