"""Shapes of binary cubic forms: enumeration, reduction and equidistribution tools."""

from .forms import X_MINUS, X_PLUS, act, disc, pairing
from .reduction import canonical, reduce

__all__ = ["X_PLUS", "X_MINUS", "act", "disc", "pairing", "canonical", "reduce"]
__version__ = "0.1.0"
