"""annealtune - fixed-embedding parameter tuning for simulated quantum annealers."""

__version__ = "0.1.0"
__description__ = "Spin reversal, anneal offset and chain weight tuning by differential evolution over problem classes"
