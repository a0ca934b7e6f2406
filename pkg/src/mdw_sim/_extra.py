"""
This module handles the optional dependency aiostream.
Without it the batch runner processes its jobs one after another and the stream operators are unavailable.
"""

from typing import Any, NoReturn

try:
    # pylint: disable=unused-import
    import aiostream

    IS_AIOSTREAM_INSTALLED = True
except ImportError:
    IS_AIOSTREAM_INSTALLED = False


# pylint: disable=too-few-public-methods
class _NotInstalled:
    """
    Stands in for a stream operator when aiostream is not installed. Using it raises an ImportError.
    """

    def __getattr__(self, item: str) -> Any:
        if item in ("pipe", "raw"):
            raise_import_error()
        raise AttributeError(item)

    def __call__(self, *args: Any, **kwargs: Any) -> NoReturn:
        raise_import_error()


def raise_import_error() -> NoReturn:
    """
    Raises an ImportError if aiostream is not installed but a feature that requires it is used.
    """
    raise ImportError(
        "aiostream not found. This feature needs aiostream installed. "
        "Consider using `pip install mdw-sim[aiostream]`."
    )
