"""Reversible-circuit synthesis for qudits.

Compiles permutations of the d**n basis states of n qudits either into a
short program of (n-1)-qudit block operations, or into a gate-level circuit
of two-qudit and multi-controlled gates using one clean ancilla, with
brute-force verification and gate-count accounting.
"""

__version__ = "0.1.0"
