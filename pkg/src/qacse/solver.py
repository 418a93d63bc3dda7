"""Contracted-Schrodinger-equation eigensolver.

Each iteration measures the anti-Hermitian residual
``A[ij;kl] = <psi|[a†_i a†_j a_l a_k, H]|psi>`` of the current state, then
moves along ``|psi'> = exp(eps * A_hat)|psi>`` with ``eps`` chosen by a
trust-region line search on the energy.

Three ways of obtaining the residual are available (``residual_mode``):

``quantum``
    Propagate ``exp(i delta H)|psi>`` and read off the imaginary part of its
    2-RDM, divided by ``delta``. Requires real amplitudes, as for molecular
    Hamiltonians started from a determinant.
``exact``
    Expectation value of the commutator, computed directly.
``classical``
    Tensor functional of the 1-, 2- and cumulant-reconstructed 3-RDM.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from qacse.hamiltonian import TwoBodyTensor, anti_hermitize, antisymmetrize
from qacse.pauli import PauliString, PauliSum, map_two_body_tensor
from qacse.rdm import (
    RDM1,
    RDM2,
    RDM3,
    ResidualTensor,
    energy,
    frobenius_norm,
    measure_rdm1,
    measure_rdm2,
    measure_rdm2_imag,
    reconstruct_rdm3_cumulant,
    transition_rdm2,
)
from qacse.simulator import (
    StateVector,
    apply_exponential,
    apply_pauli_string,
    apply_pauli_sum,
    expectation,
)

RESIDUAL_MODES = ("quantum", "exact", "classical")
PROPAGATORS = ("trotter", "exact")


class LineSearchError(RuntimeError):
    """No trial step lowered the energy."""


@dataclass(frozen=True)
class AcseConfig:
    delta: float = 1e-3
    epsilon_max: float = 0.5
    residual_tolerance: float = 1e-6
    max_iterations: int = 100
    trotter_steps: int = 1
    residual_mode: str = "quantum"
    # "exact" swaps the Trotter product for a dense matrix exponential
    propagator: str = "trotter"
    max_halvings: int = 30
    newton_iterations: int = 8
    newton_tolerance: float = 1e-10

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.epsilon_max <= 0:
            raise ValueError("epsilon_max must be positive")
        if self.residual_tolerance <= 0:
            raise ValueError("residual_tolerance must be positive")
        if self.max_iterations < 0 or self.trotter_steps < 1:
            raise ValueError("max_iterations must be >= 0 and trotter_steps >= 1")
        if self.residual_mode not in RESIDUAL_MODES:
            raise ValueError(f"residual_mode must be one of {RESIDUAL_MODES}")
        if self.propagator not in PROPAGATORS:
            raise ValueError(f"propagator must be one of {PROPAGATORS}")


@dataclass(frozen=True)
class IterationRecord:
    """State ``n`` of a run: its energy, residual norm, and the step that produced it."""

    iteration: int
    energy: float
    residual_norm: float
    epsilon: float
    wall_time: float


@dataclass
class AcseTrajectory:
    records: list[IterationRecord]
    final_state: StateVector
    status: str  # "converged", "stalled" or "max_iterations"
    final_rdm2: RDM2 | None = None
    final_energy: float = math.nan
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def iterations(self) -> int:
        return len(self.records) - 1

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    @property
    def final_residual_norm(self) -> float:
        return self.records[-1].residual_norm

    def to_text(self) -> str:
        """Tab-separated trace: one row per iterate, no timing columns."""
        lines = ["iteration\tenergy\tresidual_norm\tepsilon"]
        for r in self.records:
            lines.append(f"{r.iteration}\t{r.energy:.12f}\t{r.residual_norm:.6e}\t{r.epsilon:.8f}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- residuals


def residual_exact(s: StateVector, h: PauliSum) -> ResidualTensor:
    """``<s|[a†_i a†_j a_l a_k, H]|s>`` for every index tuple.

    Uses ``<s|[O, H]|s> = <s|O|Hs> - <Hs|O|s>`` with ``Hs`` from the Pauli image of ``H``.
    """
    n = s.n_qubits
    hs = apply_pauli_sum(s, h)
    r = transition_rdm2(s.amplitudes, hs, n) - transition_rdm2(hs, s.amplitudes, n)
    return ResidualTensor(n, r)


def residual_quantum(
    s: StateVector, h: PauliSum, delta: float, steps: int = 1
) -> ResidualTensor:
    """Residual from the imaginary 2-RDM of the auxiliary state ``exp(i delta H)|s>``."""
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    aux = apply_exponential(s, h, 1j * delta, steps)
    raw = TwoBodyTensor(s.n_qubits, measure_rdm2_imag(aux) / delta)
    projected = anti_hermitize(antisymmetrize(raw))
    return ResidualTensor(s.n_qubits, projected.values)


def residual_from_rdms(d2: RDM2, d3: RDM3, k2: TwoBodyTensor) -> ResidualTensor:
    """``<[a†_i a†_j a_l a_k, H]>`` as a contraction of the 2- and 3-RDM.

    Normal ordering ``O H`` and ``H O`` leaves two- and three-body pieces; the
    four-body pieces are identical and cancel.
    """
    k = k2.values
    g2 = d2.values
    g3 = d3.values
    oh = np.einsum("klst,ijst->ijkl", k - k.transpose(1, 0, 2, 3), g2)
    oh -= np.einsum("kqst,ijqstl->ijkl", k, g3)
    oh += np.einsum("pkst,ijpstl->ijkl", k, g3)
    oh += np.einsum("lqst,ijqstk->ijkl", k, g3)
    oh -= np.einsum("plst,ijpstk->ijkl", k, g3)

    ho = np.einsum("pqij,pqkl->ijkl", k - k.transpose(0, 1, 3, 2), g2)
    ho -= np.einsum("pqit,pqjklt->ijkl", k, g3)
    ho += np.einsum("pqjt,pqiklt->ijkl", k, g3)
    ho += np.einsum("pqsi,pqjkls->ijkl", k, g3)
    ho -= np.einsum("pqsj,pqikls->ijkl", k, g3)
    return ResidualTensor(k2.n_spin_orbitals, oh - ho)


def residual_classical(d1: RDM1, d2: RDM2, k2: TwoBodyTensor) -> ResidualTensor:
    """Residual with the 3-RDM replaced by its cumulant reconstruction."""
    return residual_from_rdms(d2, reconstruct_rdm3_cumulant(d1, d2), k2)


def generator_from_residual(a: TwoBodyTensor) -> PauliSum:
    """Qubit image of ``A_hat = sum conj(A[pq;st]) a†_p a†_q a_t a_s``.

    For real states the residual is real and this is the residual itself; the
    conjugate keeps ``dE/d eps = -||A||^2`` for complex states too.
    """
    return map_two_body_tensor(np.conj(a.values), a.n_spin_orbitals)


# --------------------------------------------------------------------------- line search


def _quadratic_minimizer(xs: Sequence[float], es: Sequence[float]) -> float | None:
    """Stationary point of the parabola through three points, if it is a minimum."""
    (x0, x1, x2), (e0, e1, e2) = xs, es
    d01 = (e1 - e0) / (x1 - x0)
    d12 = (e2 - e1) / (x2 - x1)
    curvature = (d12 - d01) / (x2 - x0)
    if curvature <= 0:
        return None
    return 0.5 * (x0 + x1) - d01 / (2 * curvature)


def minimize_along(
    energy_at: Callable[[float], float], e0: float, cfg: AcseConfig
) -> tuple[float, float]:
    """Model-trust Newton minimization of ``E(eps)`` over ``0 < eps <= epsilon_max``.

    Fits a parabola to ``E`` at ``{0, tau/2, tau}``, takes its minimizer
    clamped to ``[0, tau]``, and halves ``tau`` while nothing beats ``E(0)``.
    The accepted point is then polished with finite-difference Newton steps
    that stay inside the trust region. Returns ``(eps, E(eps))`` with
    ``E(eps) < e0``; raises :class:`LineSearchError` otherwise.
    """
    cache = {0.0: e0}

    def f(x: float) -> float:
        if x not in cache:
            cache[x] = energy_at(x)
        return cache[x]

    tau = cfg.epsilon_max
    for _ in range(cfg.max_halvings + 1):
        e_half, e_full = f(tau / 2), f(tau)
        x = _quadratic_minimizer((0.0, tau / 2, tau), (e0, e_half, e_full))
        if x is not None and 0 < x < tau:
            f(x)
        best = min((k for k in cache if k <= tau), key=cache.__getitem__)
        if cache[best] < e0:
            break
        tau /= 2
    else:
        raise LineSearchError(
            f"no descent after {cfg.max_halvings} halvings of the trust radius"
        )

    h = 1e-4 * tau
    for _ in range(cfg.newton_iterations):
        if best - h <= 0 or best + h > tau:
            break
        lo, mid, hi = f(best - h), f(best), f(best + h)
        curvature = (hi - 2 * mid + lo) / h**2
        if curvature <= 0:
            break
        step = -(hi - lo) / (2 * h) / curvature
        trial = min(max(best + step, h), tau)
        if abs(trial - best) < cfg.newton_tolerance:
            break
        if f(trial) >= mid:
            break
        best = trial
    best = min(cache, key=cache.__getitem__)
    return best, cache[best]


def _propagate(s: StateVector, gen: PauliSum, eps: float, cfg: AcseConfig) -> StateVector:
    if cfg.propagator == "exact":
        mat = _dense_operator(gen)
        return StateVector.normalized(s.n_qubits, scipy.linalg.expm(eps * mat) @ s.amplitudes)
    return apply_exponential(s, gen, eps, cfg.trotter_steps)


def _dense_operator(op: PauliSum) -> np.ndarray:
    dim = 2**op.n_qubits
    return np.stack([apply_pauli_sum(col, op) for col in np.eye(dim, dtype=complex)], axis=1)


def line_search_epsilon(
    s: StateVector,
    a: TwoBodyTensor | PauliSum,
    h: PauliSum,
    cfg: AcseConfig,
    core: float = 0.0,
) -> tuple[float, StateVector, float]:
    """Choose ``eps`` for ``exp(eps * A_hat)|s>`` and return ``(eps, state, energy)``.

    ``a`` is either a residual tensor (mapped through
    :func:`generator_from_residual`) or a ready anti-Hermitian generator.
    """
    gen = a if isinstance(a, PauliSum) else generator_from_residual(a)
    if len(gen) == 0:
        raise ValueError("zero generator: the residual vanishes, nothing to search")
    states: dict[float, StateVector] = {}

    def energy_at(eps: float) -> float:
        states[eps] = _propagate(s, gen, eps, cfg)
        return expectation(states[eps], h).real + core

    e0 = expectation(s, h).real + core
    eps, e_next = minimize_along(energy_at, e0, cfg)
    return eps, states[eps], e_next


# --------------------------------------------------------------------------- main loop


def _run(
    initial: StateVector,
    h: PauliSum,
    core: float,
    residual: Callable[[StateVector], object],
    generator: Callable[[object], PauliSum],
    cfg: AcseConfig,
) -> AcseTrajectory:
    start = time.perf_counter()
    s = initial
    e = expectation(s, h).real + core
    eps_used = 0.0
    records: list[IterationRecord] = []
    status, message = "max_iterations", ""
    for it in range(cfg.max_iterations + 1):
        r = residual(s)
        norm = frobenius_norm(r)
        records.append(IterationRecord(it, e, norm, eps_used, time.perf_counter() - start))
        if norm <= cfg.residual_tolerance:
            status = "converged"
            break
        if it == cfg.max_iterations:
            message = f"residual norm {norm:.3e} above tolerance after {it} iterations"
            break
        try:
            eps_used, s, e = line_search_epsilon(s, generator(r), h, cfg, core)
        except LineSearchError as exc:
            status = "stalled"
            message = f"iteration {it}: {exc} (residual norm {norm:.3e})"
            break
    return AcseTrajectory(records, s, status, message=message)


def solve(
    initial: StateVector, k2: TwoBodyTensor, core: float, cfg: AcseConfig = AcseConfig()
) -> AcseTrajectory:
    """Iterate residual, line search and 2-RDM measurement until ``||A|| <= tol``."""
    if initial.n_qubits != k2.n_spin_orbitals:
        raise ValueError("state and Hamiltonian sizes differ")
    h = map_two_body_tensor(k2, k2.n_spin_orbitals)

    if cfg.residual_mode == "quantum":
        def residual(s):
            return residual_quantum(s, h, cfg.delta, cfg.trotter_steps)
    elif cfg.residual_mode == "exact":
        def residual(s):
            return residual_exact(s, h)
    else:
        def residual(s):
            return residual_classical(measure_rdm1(s), measure_rdm2(s), k2)

    traj = _run(initial, h, core, residual, generator_from_residual, cfg)
    traj.final_rdm2 = measure_rdm2(traj.final_state)
    traj.final_energy = energy(k2, traj.final_rdm2, core)
    return traj


def single_qubit_pool(n_qubits: int) -> list[PauliString]:
    pool = []
    for q in range(n_qubits):
        for axis in "XYZ":
            pool.append(PauliString("I" * q + axis + "I" * (n_qubits - q - 1)))
    return pool


def qubit_residual(s: StateVector, h: PauliSum, pool: Sequence[PauliString]) -> np.ndarray:
    """``<s|[P, H]|s>`` for every ``P`` in ``pool`` (purely imaginary)."""
    hs = apply_pauli_sum(s, h)
    out = np.empty(len(pool), dtype=complex)
    for n, p in enumerate(pool):
        ps = apply_pauli_string(s, p)
        bra_h = np.vdot(ps, hs)  # <s|P H|s>, P Hermitian
        out[n] = bra_h - np.conj(bra_h)
    return out


def solve_qubit(
    initial: StateVector,
    h: PauliSum,
    cfg: AcseConfig = AcseConfig(residual_mode="exact"),
    pool: Sequence[PauliString] | None = None,
) -> AcseTrajectory:
    """Same iteration for a qubit Hamiltonian over a pool of Pauli generators.

    The residual is ``<[P, H]>`` per pool element and the generator is
    ``sum conj(R_P) P``; only the exact residual is available here.
    """
    if cfg.residual_mode != "exact":
        raise ValueError("solve_qubit supports residual_mode='exact' only")
    pool = list(pool) if pool is not None else single_qubit_pool(h.n_qubits)

    def generator(r: np.ndarray) -> PauliSum:
        return PauliSum.from_strings(zip(np.conj(r), pool), h.n_qubits)

    traj = _run(initial, h, 0.0, lambda s: qubit_residual(s, h, pool), generator, cfg)
    traj.final_energy = expectation(traj.final_state, h).real
    return traj
