"""Test package for annealtune."""
