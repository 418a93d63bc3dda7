"""Molecular integrals, FCIDUMP I/O and the two-electron reduced Hamiltonian.

Two-body tensors are indexed ``[p, q, s, t]`` and pair with the operator
``a†_p a†_q a_t a_s``, so that ``H = sum K[p,q,s,t] a†_p a†_q a_t a_s``.
Spin orbitals are interleaved: spatial orbital ``i`` gives ``2i`` (alpha)
and ``2i + 1`` (beta).
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np


class FcidumpError(ValueError):
    """Malformed FCIDUMP input; the message carries the line number."""


@dataclass(frozen=True, eq=False)
class MolecularIntegrals:
    """Spatial-orbital integrals; ``two_body`` is in chemists' notation (pq|rs)."""

    n_spatial: int
    n_electrons: int
    core_energy: float
    one_body: np.ndarray
    two_body: np.ndarray
    ms2: int = 0

    def __post_init__(self):
        n = self.n_spatial
        if self.one_body.shape != (n, n) or self.two_body.shape != (n,) * 4:
            raise ValueError("integral shapes do not match n_spatial")
        if not np.allclose(self.one_body, self.one_body.T, atol=1e-10):
            raise ValueError("one-body integrals are not symmetric")
        g = self.two_body
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=1e-10):
                raise ValueError("two-body integrals lack 8-fold permutational symmetry")

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_spatial


@dataclass(frozen=True, eq=False)
class TwoBodyTensor:
    n_spin_orbitals: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.n_spin_orbitals,) * 4:
            raise ValueError(
                f"tensor shape {vals.shape} does not match {self.n_spin_orbitals} spin orbitals"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, n_spin_orbitals: int) -> TwoBodyTensor:
        return cls(n_spin_orbitals, np.zeros((n_spin_orbitals,) * 4))

    def adjoint_values(self) -> np.ndarray:
        """``values[st;pq]*`` laid out as ``[pq;st]``."""
        return self.values.transpose(2, 3, 0, 1).conj()

    def is_antisymmetric(self, atol: float = 1e-10) -> bool:
        v = self.values
        return np.allclose(v, -v.transpose(1, 0, 2, 3), atol=atol) and np.allclose(
            v, -v.transpose(0, 1, 3, 2), atol=atol
        )

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return np.allclose(self.values, self.adjoint_values(), atol=atol)

    def is_anti_hermitian(self, atol: float = 1e-10) -> bool:
        return np.allclose(self.values, -self.adjoint_values(), atol=atol)

    def __add__(self, other: TwoBodyTensor) -> TwoBodyTensor:
        return TwoBodyTensor(self.n_spin_orbitals, self.values + other.values)

    def __rmul__(self, scalar: complex) -> TwoBodyTensor:
        return TwoBodyTensor(self.n_spin_orbitals, scalar * self.values)


def antisymmetrize(t: TwoBodyTensor) -> TwoBodyTensor:
    """Project onto the component odd under ``p<->q`` and under ``s<->t``."""
    v = t.values
    out = (v - v.transpose(1, 0, 2, 3) - v.transpose(0, 1, 3, 2) + v.transpose(1, 0, 3, 2)) / 4
    return TwoBodyTensor(t.n_spin_orbitals, out)


def anti_hermitize(t: TwoBodyTensor) -> TwoBodyTensor:
    return TwoBodyTensor(t.n_spin_orbitals, (t.values - t.adjoint_values()) / 2)


# --------------------------------------------------------------------------- FCIDUMP

_HEADER_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=")


def _header_fields(header: str) -> dict[str, str]:
    keys = list(_HEADER_KEY.finditer(header))
    fields = {}
    for m, nxt in zip(keys, keys[1:] + [None]):
        end = nxt.start() if nxt else len(header)
        fields[m.group(1).upper()] = header[m.end() : end].strip().strip(",").strip()
    return fields


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise FcidumpError(f"line {lineno}: non-numeric value {token!r}") from None


def _parse_int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FcidumpError(f"line {lineno}: non-integer index {token!r}") from None


def _set_checked(store: dict, key: tuple, value: float, lineno: int) -> None:
    old = store.get(key)
    if old is not None and abs(old - value) > 1e-10:
        raise FcidumpError(
            f"line {lineno}: entry {tuple(i + 1 for i in key)} = {value!r} conflicts "
            f"with symmetry-equivalent value {old!r}"
        )
    store[key] = value


def parse_fcidump(source: str | TextIO) -> MolecularIntegrals:
    """Parse FCIDUMP text (Knowles-Handy layout, 1-based indices).

    ``source`` is the file contents or an open text stream.
    """
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()

    header_parts: list[str] = []
    body_start = None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not header_parts and not stripped.upper().startswith("&FCI"):
            if not stripped:
                continue
            raise FcidumpError(f"line {lineno}: expected '&FCI' header, got {stripped!r}")
        if stripped.upper() in ("/", "&END", "$END", "&"):
            body_start = lineno
            break
        header_parts.append(stripped)
        if stripped.endswith("/") or stripped.upper().endswith("&END"):
            body_start = lineno
            header_parts[-1] = re.sub(r"(/|&END)$", "", stripped, flags=re.I)
            break
    if body_start is None:
        raise FcidumpError(f"line {len(lines)}: header terminator ('/' or '&END') not found")

    header = " ".join(header_parts)
    header = re.sub(r"^&FCI", "", header, flags=re.I)
    fields = _header_fields(header)
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
        ms2 = int(fields.get("MS2", "0"))
    except KeyError as exc:
        raise FcidumpError(f"line 1: header is missing {exc.args[0]}") from None
    except ValueError:
        raise FcidumpError("line 1: NORB/NELEC/MS2 must be integers") from None
    if norb < 1 or nelec < 0:
        raise FcidumpError(f"line 1: invalid NORB={norb} or NELEC={nelec}")

    one: dict[tuple[int, int], float] = {}
    two: dict[tuple[int, int, int, int], float] = {}
    core = 0.0
    for lineno in range(body_start + 1, len(lines) + 1):
        tokens = lines[lineno - 1].split()
        if not tokens:
            continue
        if len(tokens) != 5:
            raise FcidumpError(f"line {lineno}: expected 'value i j k l', got {len(tokens)} fields")
        value = _parse_float(tokens[0], lineno)
        i, j, k, l = (_parse_int(t, lineno) for t in tokens[1:])
        if any(x < 0 or x > norb for x in (i, j, k, l)):
            raise FcidumpError(f"line {lineno}: index out of range 1..{norb}")
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {lineno}: malformed one-body indices")
            for key in ((i - 1, j - 1), (j - 1, i - 1)):
                _set_checked(one, key, value, lineno)
        elif 0 in (i, j, k, l):
            raise FcidumpError(f"line {lineno}: malformed two-body indices")
        else:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for key in (
                (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
            ):
                _set_checked(two, key, value, lineno)

    h = np.zeros((norb, norb))
    g = np.zeros((norb,) * 4)
    for key, v in one.items():
        h[key] = v
    for key, v in two.items():
        g[key] = v
    return MolecularIntegrals(norb, nelec, core, h, g, ms2)


def read_fcidump(path: str | Path) -> MolecularIntegrals:
    with open(path) as fh:
        return parse_fcidump(fh)


def write_fcidump(m: MolecularIntegrals, stream: TextIO | None = None) -> str:
    """Emit ``m`` as FCIDUMP text (unique entries only); returns the text."""
    out = io.StringIO()
    n = m.n_spatial
    out.write(f" &FCI NORB={n},NELEC={m.n_electrons},MS2={m.ms2},\n /\n")
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    v = m.two_body[i, j, k, l]
                    if v != 0:
                        out.write(f"{float(v)!r} {i + 1} {j + 1} {k + 1} {l + 1}\n")
    for i in range(n):
        for j in range(i + 1):
            v = m.one_body[i, j]
            if v != 0:
                out.write(f"{float(v)!r} {i + 1} {j + 1} 0 0\n")
    out.write(f"{float(m.core_energy)!r} 0 0 0 0\n")
    text = out.getvalue()
    if stream is not None:
        stream.write(text)
    return text


# --------------------------------------------------------------------------- reduced Hamiltonian


def spin_orbital_integrals(m: MolecularIntegrals) -> tuple[np.ndarray, np.ndarray]:
    """One-body ``h[P,Q]`` and physicists' ``<PQ|RS>`` over interleaved spin orbitals."""
    n = m.n_spin_orbitals
    spatial = np.arange(n) // 2
    spin = np.arange(n) % 2
    same = spin[:, None] == spin[None, :]
    h = m.one_body[np.ix_(spatial, spatial)] * same
    # <PQ|RS> = (PR|QS) with spin(P)=spin(R), spin(Q)=spin(S)
    g = m.two_body[np.ix_(spatial, spatial, spatial, spatial)]  # (PQ|RS) over spin labels
    g = g * same[:, :, None, None] * same[None, None, :, :]
    phys = g.transpose(0, 2, 1, 3)
    return h, phys


def build_reduced_hamiltonian(m: MolecularIntegrals) -> TwoBodyTensor:
    """Antisymmetrized ``2K`` with the one-body part folded in via ``1/(N-1)``.

    For any ``N``-electron state ``<H> = sum K[pq;st] 2D[pq;st] + core``.
    """
    if m.n_electrons < 2:
        raise ValueError(
            f"reduced Hamiltonian needs at least 2 electrons, got {m.n_electrons}"
        )
    h, phys = spin_orbital_integrals(m)
    n = m.n_spin_orbitals
    eye = np.eye(n)
    # a†_p a_s = sum_q a†_p a†_q a_q a_s / (N-1) on N-electron states
    one = np.einsum("ps,qt->pqst", h, eye) / (m.n_electrons - 1)
    # 1/2 sum <pq|st> a†_p a†_q a_t a_s
    k = one + 0.5 * phys
    return antisymmetrize(TwoBodyTensor(n, k))
