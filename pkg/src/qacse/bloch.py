"""One-qubit version of the solver, written directly in Bloch-sphere geometry.

With ``H = (h . sigma) / 2`` and a pure state with Bloch vector ``r``, the
residual over the Pauli generators is ``i (h x r)`` and the update
``exp(eps * A_hat)`` rotates ``r`` about ``h x r`` by ``2 eps |h x r|``.
The factor of 2 is the spin-1/2 double cover; it makes :func:`bloch_solve`
reproduce :func:`qacse.solver.solve_qubit` step for step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qacse.solver import AcseConfig, LineSearchError, minimize_along

ROTATION_FACTOR = 2.0


@dataclass(frozen=True)
class BlochPoint:
    r: np.ndarray
    energy: float
    residual_norm: float
    epsilon: float


@dataclass
class BlochTrajectory:
    points: list[BlochPoint] = field(default_factory=list)
    # "converged", "stationary_excited", "stalled" or "max_iterations"
    status: str = "max_iterations"

    @property
    def iterations(self) -> int:
        return len(self.points) - 1

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.points])

    def to_text(self) -> str:
        lines = ["iteration\tx\ty\tz\tenergy\tresidual_norm"]
        for n, p in enumerate(self.points):
            x, y, z = p.r
            lines.append(
                f"{n}\t{x:.12f}\t{y:.12f}\t{z:.12f}\t{p.energy:.12f}\t{p.residual_norm:.6e}"
            )
        return "\n".join(lines) + "\n"


def bloch_residual(h, r) -> np.ndarray:
    """``h x r``: orthogonal to the plane of the Hamiltonian and state vectors."""
    return np.cross(np.asarray(h, dtype=float), np.asarray(r, dtype=float))


def bloch_energy(h, r) -> float:
    return 0.5 * float(np.dot(h, r))


def rotate(r: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation of ``r`` about the unit vector ``axis``."""
    c, s = np.cos(angle), np.sin(angle)
    return r * c + np.cross(axis, r) * s + axis * np.dot(axis, r) * (1 - c)


def bloch_step(r, a, epsilon: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    a = np.asarray(a, dtype=float)
    norm = np.linalg.norm(a)
    if norm == 0:
        raise ValueError("rotation axis is the zero vector")
    return rotate(r, a / norm, ROTATION_FACTOR * epsilon * norm)


def bloch_solve(
    h,
    r0,
    tolerance: float = 1e-6,
    max_iter: int = 100,
    cfg: AcseConfig | None = None,
) -> BlochTrajectory:
    """Iterate residual and line search from ``r0`` until ``|h x r| <= tolerance``.

    Starting parallel to ``h`` (the excited state) is a stationary point; the
    run stops at once with status ``"stationary_excited"``.
    """
    h = np.asarray(h, dtype=float)
    r = np.asarray(r0, dtype=float)
    if h.shape != (3,) or r.shape != (3,):
        raise ValueError("h and r0 must be 3-vectors")
    if abs(np.linalg.norm(r) - 1) > 1e-12:
        raise ValueError("r0 must be a unit vector (pure state)")
    cfg = cfg or AcseConfig(residual_mode="exact")

    traj = BlochTrajectory()
    e = bloch_energy(h, r)
    eps = 0.0
    for it in range(max_iter + 1):
        a = bloch_residual(h, r)
        norm = float(np.linalg.norm(a))
        traj.points.append(BlochPoint(r.copy(), e, norm, eps))
        if norm <= tolerance:
            traj.status = "converged" if np.dot(h, r) <= 0 else "stationary_excited"
            break
        if it == max_iter:
            break
        try:
            eps, e = minimize_along(
                lambda x: bloch_energy(h, bloch_step(r, a, x)), e, cfg
            )
        except LineSearchError:
            traj.status = "stalled"
            break
        r = bloch_step(r, a, eps)
    return traj
