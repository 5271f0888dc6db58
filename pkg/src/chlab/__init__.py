"""chlab: arbitrary-precision laboratory for multi-soliton and multi-peakon
solutions of the dispersive shallow-water wave equation, with verification
suites for the determinant identities behind them and a small-dispersion
convergence harness.
"""

__version__ = "0.1.0"
