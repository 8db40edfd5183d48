"""Tunneling splittings, bounce maps, and barrier Husimi projections
for six families of 2D double-well billiards."""

__version__ = "0.1.0"

from .geometry import Region, ShapeSpec, build_double_well  # noqa: F401
