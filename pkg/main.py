#!/usr/bin/env python3
"""
annealtune - fixed-embedding parameter tuning for a simulated annealer
"""

from annealtune.cli import cli

if __name__ == "__main__":
    cli()
