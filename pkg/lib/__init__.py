"""GbSB: simulated bifurcation toolkit for Ising / MAX-CUT problems."""

__version__ = "0.1.0"
