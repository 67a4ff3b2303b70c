"""Error types shared across the package."""


class FormatError(ValueError):
    """A file or byte stream does not conform to one of the documented formats."""
