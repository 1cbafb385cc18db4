"""Services package for annealtune."""
