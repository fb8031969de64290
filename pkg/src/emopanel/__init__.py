"""Firm-day emotion panels from social-media messages and fixed-effects return regressions."""

from importlib.metadata import PackageNotFoundError, version

from .emotions import EMOTIONS, EmotionTuple

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"

__all__ = ["EMOTIONS", "EmotionTuple", "__version__"]
