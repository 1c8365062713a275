"""
FormLab - Source Modules
Finite-space laboratory for form inequalities of symmetric contraction semigroups
"""

__version__ = "0.4.0"
