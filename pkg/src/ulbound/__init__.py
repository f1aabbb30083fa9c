"""Universal lower bounds for the energy of spherical codes."""

__version__ = "0.1.0"
