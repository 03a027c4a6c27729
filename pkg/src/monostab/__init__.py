"""Steady states of -Lap u = f(u) with positive reactions: shooting, spectra and grids."""
from .reaction import Cubic, DoubleHump, Interpolated, KppClass, Logistic, Reaction

__all__ = ["Reaction", "KppClass", "Logistic", "Cubic", "DoubleHump", "Interpolated"]
