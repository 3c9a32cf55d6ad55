"""Latent-space attribution and explanation synthesis for audio classifiers."""

from ._axg import *  # noqa: F401,F403
from ._axg import __version__  # noqa: F401
