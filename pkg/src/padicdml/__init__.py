"""Return sets of orbits in varieties, decided through p-adic interpolation."""

__version__ = "0.1.0"
