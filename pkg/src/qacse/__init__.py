"""Statevector solver for the anti-Hermitian contracted Schrodinger equation.

Modules: ``pauli`` (Pauli algebra, Jordan-Wigner), ``simulator`` (statevectors),
``hamiltonian`` (FCIDUMP, reduced Hamiltonian), ``rdm`` (reduced density
matrices), ``solver`` (residuals and iteration), ``bloch`` (one-qubit
geometry), ``oracle`` (dense references) and ``cli``.
"""

from qacse.solver import AcseConfig, AcseTrajectory, solve

__version__ = "0.1.0"
__all__ = ["AcseConfig", "AcseTrajectory", "solve", "__version__"]
