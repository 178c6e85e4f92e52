"""Unified (alpha, mu)-entropies and entropic quantum speed limits.

Subpackages:
    linalg       density matrices, Schatten norms, partial traces, exponentials
    entropy      unified entropy family and its property checks
    qsl          integrated entropy bound, relative error and QSL time
    channels     Kraus channels and amplitude damping
    nonhermitian non-Hermitian evolution and the PT-symmetric qubit
    manybody     XXZ chain with Neel-based mixed states
"""

__version__ = "0.1.0"
