"""Geometry, screening and fitting tools for double-oblique shadow-evaporated junctions."""

from shadowfab.errors import ConfigurationError, DomainError, InputError

__version__ = "0.1.0"

__all__ = ["ConfigurationError", "DomainError", "InputError", "__version__"]
