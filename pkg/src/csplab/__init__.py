"""Inverse-scattering laboratory for the complex short pulse equation."""

__version__ = "0.1.0"

from . import asymptotics, errors, pde, profile, scatter, soliton  # noqa: F401
