"""Computable invariants of low-dimensional Reeb flows and disk twist maps.

Subpackages cover exact rotation/partition combinatorics, orbit-set and
curve bookkeeping with tower audits, ellipsoid action spectra with the
volume asymptotics, and the lattice-path chain complex of monotone twist
maps with its spectral invariants.
"""

__version__ = "0.1.0"
