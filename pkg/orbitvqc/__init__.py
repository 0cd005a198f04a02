"""
Orbit VQC Package

A hybrid variational quantum classifier toolkit for learning entanglement
orbits of pure multi-qubit states with exact statevector simulation.
"""

__version__ = "1.0.0"
