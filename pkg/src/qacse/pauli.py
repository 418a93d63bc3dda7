"""Pauli-string algebra and the Jordan-Wigner map.

Conventions used throughout the package:

* ``axes[j]`` is the Pauli factor acting on qubit ``j``; qubit ``j`` is bit ``j``
  (least significant first) of a computational basis index.
* Qubit ``j`` holds spin orbital ``j``; occupied means bit set.
* ``a_p = Z_0 ... Z_{p-1} (X_p + i Y_p) / 2``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np
from scipy import sparse

DROP_TOLERANCE = 1e-12

_UNITS = (1, 1j, -1, -1j)

# (left, right) -> (phase, product) for single-qubit Paulis
_MUL_TABLE: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in "IXYZ":
    _MUL_TABLE[("I", _a)] = (1, _a)
    _MUL_TABLE[(_a, "I")] = (1, _a)
    _MUL_TABLE[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL_TABLE[(_a, _b)] = (1j, _c)
    _MUL_TABLE[(_b, _a)] = (-1j, _c)


@dataclass(frozen=True)
class PauliString:
    """A Pauli string with a unit phase, e.g. ``-i * XIZ``."""

    axes: str
    phase: complex = 1

    def __post_init__(self):
        if any(a not in "IXYZ" for a in self.axes):
            raise ValueError(f"invalid Pauli axes {self.axes!r}")
        phase = complex(self.phase)
        for unit in _UNITS:
            if abs(phase - unit) < 1e-14:
                object.__setattr__(self, "phase", complex(unit))
                break
        else:
            raise ValueError(f"phase must be one of 1, i, -1, -i; got {self.phase}")

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    def __mul__(self, other: PauliString) -> PauliString:
        return pauli_mul(self, other)

    def __str__(self) -> str:
        labels = {1: "", 1j: "i*", -1: "-", -1j: "-i*"}
        return labels[self.phase] + self.axes


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p @ q`` with the accumulated phase."""
    if len(p.axes) != len(q.axes):
        raise ValueError(
            f"Pauli strings act on different registers ({len(p.axes)} vs {len(q.axes)})"
        )
    phase = p.phase * q.phase
    out = []
    for a, b in zip(p.axes, q.axes):
        ph, c = _MUL_TABLE[(a, b)]
        phase *= ph
        out.append(c)
    return PauliString("".join(out), phase)


class PauliSum:
    """A linear combination of Pauli strings, keyed by axes pattern.

    Instances are treated as immutable. Coefficients smaller than
    ``drop_tolerance`` in magnitude are discarded on construction.
    """

    def __init__(
        self,
        terms: Mapping[str, complex] | None = None,
        n_qubits: int | None = None,
        drop_tolerance: float = DROP_TOLERANCE,
    ):
        terms = dict(terms or {})
        if n_qubits is None:
            if not terms:
                raise ValueError("n_qubits is required for an empty PauliSum")
            n_qubits = len(next(iter(terms)))
        for axes in terms:
            if len(axes) != n_qubits or any(a not in "IXYZ" for a in axes):
                raise ValueError(f"invalid axes {axes!r} for {n_qubits} qubits")
        self.n_qubits = n_qubits
        self.drop_tolerance = drop_tolerance
        self.terms: dict[str, complex] = {
            k: complex(v) for k, v in terms.items() if abs(v) >= drop_tolerance
        }

    @classmethod
    def from_strings(
        cls, items: Iterable[tuple[complex, PauliString]], n_qubits: int
    ) -> PauliSum:
        acc: dict[str, complex] = {}
        for coeff, p in items:
            acc[p.axes] = acc.get(p.axes, 0) + coeff * p.phase
        return cls(acc, n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls({"I" * n_qubits: coeff}, n_qubits)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[str, complex]]:
        return iter(self.terms.items())

    def __add__(self, other: PauliSum) -> PauliSum:
        self._check(other)
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, 0) + v
        return PauliSum(acc, self.n_qubits, self.drop_tolerance)

    def __sub__(self, other: PauliSum) -> PauliSum:
        return self + (-1) * other

    def __rmul__(self, scalar: complex) -> PauliSum:
        return PauliSum(
            {k: scalar * v for k, v in self.terms.items()},
            self.n_qubits,
            self.drop_tolerance,
        )

    def __mul__(self, other):
        if not isinstance(other, PauliSum):
            return self.__rmul__(other)
        self._check(other)
        acc: dict[str, complex] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                p = pauli_mul(PauliString(ka), PauliString(kb))
                acc[p.axes] = acc.get(p.axes, 0) + va * vb * p.phase
        return PauliSum(acc, self.n_qubits, self.drop_tolerance)

    def commutator(self, other: PauliSum) -> PauliSum:
        return self * other - other * self

    def adjoint(self) -> PauliSum:
        return PauliSum(
            {k: np.conj(v) for k, v in self.terms.items()},
            self.n_qubits,
            self.drop_tolerance,
        )

    def hermitian(self, atol: float = 1e-10) -> bool:
        return all(abs(v.imag) <= atol for v in self.terms.values())

    def anti_hermitian(self, atol: float = 1e-10) -> bool:
        return all(abs(v.real) <= atol for v in self.terms.values())

    def sorted_terms(self) -> list[tuple[str, complex]]:
        """Terms in lexicographic order of their axes pattern."""
        return sorted(self.terms.items())

    def trotter_terms(self) -> list[tuple[str, complex]]:
        """Terms ordered by bit-flip pattern, then lexicographically by axes.

        Terms sharing a flip pattern are adjacent. Each such group holds the
        matrix elements of the operator between basis states differing by that
        pattern, so it conserves every diagonal symmetry the full operator
        conserves (particle number, S_z), and for an operator with all-real or
        all-imaginary matrix elements its members commute.
        """
        return sorted(self.terms.items(), key=lambda kv: (flip_pattern(kv[0]), kv[0]))

    def allclose(self, other: PauliSum, atol: float = 1e-12) -> bool:
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= atol for k in keys
        )

    def _check(self, other: PauliSum) -> None:
        if self.n_qubits != other.n_qubits:
            raise ValueError(
                f"PauliSums act on different registers ({self.n_qubits} vs {other.n_qubits})"
            )

    @functools.cached_property
    def compiled(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[str]]:
        """Bit-mask form ``(x_masks, z_masks, coeffs, axes)`` in Trotter order.

        ``coeffs`` already include the ``i**n_Y`` factor from ``Y = i X Z``.
        """
        axes = [k for k, _ in self.trotter_terms()]
        x = np.zeros(len(axes), dtype=np.int64)
        z = np.zeros(len(axes), dtype=np.int64)
        c = np.zeros(len(axes), dtype=complex)
        for n, key in enumerate(axes):
            ny = 0
            for j, a in enumerate(key):
                if a in "XY":
                    x[n] |= 1 << j
                if a in "YZ":
                    z[n] |= 1 << j
                ny += a == "Y"
            c[n] = self.terms[key] * 1j**ny
        return x, z, c, axes

    def __repr__(self) -> str:
        body = " + ".join(f"({v:.6g})*{k}" for k, v in self.sorted_terms()[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"PauliSum({body or '0'}{more}; n_qubits={self.n_qubits})"


def flip_pattern(axes: str) -> str:
    """``'F'`` where the Pauli flips the qubit (X or Y), ``'-'`` elsewhere."""
    return "".join("F" if a in "XY" else "-" for a in axes)


@dataclass(frozen=True)
class FermionTerm:
    """``coefficient * a†_{c0} a†_{c1} ... a_{a0} a_{a1} ...`` (left to right)."""

    coefficient: complex
    creations: tuple[int, ...] = field(default_factory=tuple)
    annihilations: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "creations", tuple(self.creations))
        object.__setattr__(self, "annihilations", tuple(self.annihilations))
        for name in ("creations", "annihilations"):
            idx = getattr(self, name)
            if len(set(idx)) != len(idx):
                raise ValueError(f"repeated index in {name}: {idx}")
            if any(i < 0 for i in idx):
                raise ValueError(f"negative index in {name}: {idx}")


@functools.lru_cache(maxsize=None)
def _ladder(site: int, dagger: bool, n_qubits: int) -> tuple[tuple[complex, str], ...]:
    prefix = "Z" * site
    suffix = "I" * (n_qubits - site - 1)
    sign = -1 if dagger else 1
    return ((0.5, prefix + "X" + suffix), (0.5j * sign, prefix + "Y" + suffix))


@functools.lru_cache(maxsize=65536)
def _jw_product(
    ops: tuple[tuple[int, bool], ...], n_qubits: int
) -> tuple[tuple[str, complex], ...]:
    acc: dict[str, complex] = {"I" * n_qubits: 1.0}
    for site, dagger in ops:
        nxt: dict[str, complex] = {}
        for axes, coeff in acc.items():
            left = PauliString(axes)
            for c, factor in _ladder(site, dagger, n_qubits):
                p = pauli_mul(left, PauliString(factor))
                nxt[p.axes] = nxt.get(p.axes, 0) + coeff * c * p.phase
        acc = nxt
    return tuple((k, v) for k, v in acc.items() if abs(v) >= DROP_TOLERANCE)


def jordan_wigner(term: FermionTerm, n_qubits: int) -> PauliSum:
    """Qubit image of a product of fermionic ladder operators."""
    for i in term.creations + term.annihilations:
        if i >= n_qubits:
            raise ValueError(f"spin-orbital index {i} out of range for {n_qubits} qubits")
    ops = tuple((i, True) for i in term.creations) + tuple(
        (i, False) for i in term.annihilations
    )
    image = _jw_product(ops, n_qubits)
    return PauliSum({k: term.coefficient * v for k, v in image}, n_qubits)


@functools.lru_cache(maxsize=8)
def _two_body_image(n_qubits: int) -> tuple[list[str], sparse.csr_matrix]:
    """Sparse linear map from flattened ``t[p,q,s,t]`` to Pauli coefficients."""
    index: dict[str, int] = {}
    rows, cols, vals = [], [], []
    n = n_qubits
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            for s in range(n):
                for t in range(n):
                    if s == t:
                        continue
                    ops = ((p, True), (q, True), (t, False), (s, False))
                    col = ((p * n + q) * n + s) * n + t
                    for axes, v in _jw_product(ops, n):
                        rows.append(index.setdefault(axes, len(index)))
                        cols.append(col)
                        vals.append(v)
    mat = sparse.csr_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)), shape=(len(index), n**4)
    )
    return list(index), mat


def map_two_body_tensor(values: np.ndarray, n_qubits: int) -> PauliSum:
    """Jordan-Wigner image of ``sum_{pqst} t[p,q,s,t] a†_p a†_q a_t a_s``.

    ``values`` may be a raw ``(n, n, n, n)`` array or any object with a
    ``values`` attribute holding one (e.g. a ``TwoBodyTensor``).
    """
    values = np.asarray(getattr(values, "values", values))
    if values.shape != (n_qubits,) * 4:
        raise ValueError(
            f"tensor shape {values.shape} does not match {n_qubits} spin orbitals"
        )
    axes, mat = _two_body_image(n_qubits)
    coeffs = mat @ values.reshape(-1).astype(complex)
    return PauliSum(dict(zip(axes, coeffs)), n_qubits)
