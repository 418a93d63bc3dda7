"""Regenerate the FCIDUMP fixtures under ``fixtures/``.

Needs pyscf, which is *not* a dependency of the package; the generated files
are checked in so the test suite never imports it::

    pip install pyscf
    python tools/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from pyscf import fci, gto, scf
from pyscf.tools import fcidump

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

H2_DISTANCES = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0]
H3_DISTANCES = [0.7, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5]


def _run(name: str, atoms: str, spin: int, distance: float) -> dict:
    mol = gto.M(atom=atoms, basis="sto-3g", spin=spin, unit="Angstrom", verbose=0)
    mf = scf.ROHF(mol) if spin else scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    if not mf.converged:
        raise RuntimeError(f"SCF did not converge for {name} at R={distance}")
    ci = fci.FCI(mf)
    ci.conv_tol = 1e-12
    e_fci = ci.kernel()[0]
    filename = f"{name}_r{distance:.2f}.fcidump"
    fcidump.from_scf(mf, str(ROOT / name / filename), tol=1e-14)
    return {
        "distance_angstrom": distance,
        "file": filename,
        "e_hf": float(mf.e_tot),
        "e_fci": float(e_fci),
    }


def main() -> None:
    records = [
        _run("h2", f"H 0 0 0; H 0 0 {r}", 0, r) for r in H2_DISTANCES
    ]
    (ROOT / "h2" / "manifest.json").write_text(
        json.dumps({"basis": "sto-3g", "geometries": records}, indent=2) + "\n"
    )
    records = [
        _run("h3", f"H 0 0 {-r}; H 0 0 0; H 0 0 {r}", 1, r) for r in H3_DISTANCES
    ]
    (ROOT / "h3" / "manifest.json").write_text(
        json.dumps({"basis": "sto-3g", "geometries": records}, indent=2) + "\n"
    )


if __name__ == "__main__":
    main()
