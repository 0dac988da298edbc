"""Center-focus analysis of monodromic singularities of planar vector fields."""

__version__ = "0.1.0"
