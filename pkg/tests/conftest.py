"""Shared pytest configuration for the suite."""

from hypothesis import settings

# The first call into a jitted kernel pays compile-or-load cost that
# would otherwise trip hypothesis' per-example deadline.
settings.register_profile("topocore", deadline=None)
settings.load_profile("topocore")
