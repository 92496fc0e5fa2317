"""Free-energy upper bound for a dilute Bose gas on the torus in the
Gross-Pitaevskii scaling, assembled term by term, with brute-force oracles."""

__version__ = "0.1.0"
