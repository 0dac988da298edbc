"""Shared builders for the test suite."""

import math

import numpy as np

from centerfocus.blowup import polar_components
from centerfocus.diagram import VectorField, newton_diagram
from centerfocus.suite import load_entry


def corpus_field(name, **params):
    """Vector field of a bundled system with some parameters overridden."""
    return load_entry(name).field({k: str(v) for k, v in params.items()})


def last_chart(X):
    return polar_components(X, newton_diagram(X).weights[-1])


def linear_focus(lam):
    return VectorField.from_terms([[1, 0, "lam"], [0, 1, "-1"]], [[1, 0, "1"], [0, 1, "lam"]], {"lam": lam})


def phi_grid(n=256):
    return np.linspace(0.0, 2.0 * math.pi, n)
