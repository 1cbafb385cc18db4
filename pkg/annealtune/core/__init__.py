"""Core package for annealtune."""
