"""Adapter error taxonomy.

DataError marks unreadable or invalid inputs and unavailable backends
(CLI exit 2). BackendParseError marks a per-document parser failure; the
adapter converts it into a placeholder block instead of aborting.
"""


class DataError(Exception):
    pass


class BackendParseError(Exception):
    pass
