"""Command-line front end: ``qacse single|scan|bloch``.

Runs are described by an INI file; command-line flags override it. Example::

    [run]
    residual_mode = quantum
    out = h3_scan.tsv

    [solver]
    delta = 1e-3
    max_iterations = 1000

    [geometries]
    0.70 = fixtures/h3/h3_r0.70.fcidump
    1.00 = fixtures/h3/h3_r1.00.fcidump

Relative fixture paths are resolved against the config file's directory.
Exit status: 0 success, 1 solver non-convergence, 2 input error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from qacse.bloch import bloch_solve
from qacse.hamiltonian import FcidumpError, build_reduced_hamiltonian, read_fcidump
from qacse.oracle import fci_ground
from qacse.rdm import dump_rdm
from qacse.simulator import init_reference
from qacse.solver import RESIDUAL_MODES, AcseConfig, solve

log = logging.getLogger("qacse")

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INPUT = 0, 1, 2

SCAN_HEADER = "R_angstrom\tE_acse\tE_fci\terror\titerations\tconverged\tstatus"


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    mode: str
    fixtures: list[tuple[str, Path]] = field(default_factory=list)
    solver: AcseConfig = field(default_factory=AcseConfig)
    out: Path | None = None
    dump_rdm: Path | None = None
    workers: int = 1
    bloch_h: tuple[float, float, float] = (1.0, -1.0, 1.0)
    bloch_r0: tuple[float, float, float] = (0.0, 0.0, 1.0)


_SOLVER_FIELDS = {
    "delta": float,
    "epsilon_max": float,
    "residual_tolerance": float,
    "max_iterations": int,
    "trotter_steps": int,
    "residual_mode": str,
    "propagator": str,
}


def _vector(text: str) -> tuple[float, float, float]:
    try:
        values = tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise InputError(f"invalid vector {text!r}") from None
    if len(values) != 3 or not all(np.isfinite(values)):
        raise InputError(f"expected three finite components, got {text!r}")
    return values


def load_config(mode: str, path: Path | None, args: argparse.Namespace) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";",))
    base = Path.cwd()
    if path is not None:
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        try:
            parser.read(path)
        except configparser.Error as exc:
            raise InputError(f"cannot parse {path}: {exc}") from None
        base = path.resolve().parent

    solver_kwargs: dict = {}
    sections = [s for s in ("run", "solver") if parser.has_section(s)]
    for section in sections:
        for key, value in parser.items(section):
            if key in _SOLVER_FIELDS:
                try:
                    solver_kwargs[key] = _SOLVER_FIELDS[key](value)
                except ValueError:
                    raise InputError(f"[{section}] {key}: invalid value {value!r}") from None
    overrides = {
        "residual_mode": getattr(args, "residual_mode", None),
        "delta": getattr(args, "delta", None),
        "residual_tolerance": getattr(args, "tolerance", None),
        "max_iterations": getattr(args, "max_iter", None),
        "trotter_steps": getattr(args, "trotter_steps", None),
        "epsilon_max": getattr(args, "epsilon_max", None),
    }
    solver_kwargs.update({k: v for k, v in overrides.items() if v is not None})
    try:
        solver = AcseConfig(**solver_kwargs)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid solver settings: {exc}") from None

    cfg = RunConfig(mode=mode, solver=solver)
    run = parser["run"] if parser.has_section("run") else {}

    def _path(value: str | None, rel: Path) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else rel / p

    cfg.out = Path(args.out) if getattr(args, "out", None) else _path(run.get("out"), base)
    cfg.dump_rdm = (
        Path(args.dump_rdm) if getattr(args, "dump_rdm", None) else _path(run.get("dump_rdm"), base)
    )
    cfg.workers = getattr(args, "workers", None) or int(run.get("workers", 1))

    if getattr(args, "fixture", None):
        cfg.fixtures = [(getattr(args, "label", None) or "-", Path(args.fixture))]
    elif parser.has_section("geometries"):
        cfg.fixtures = [(label, _path(p, base)) for label, p in parser.items("geometries")]
    elif run.get("fixture"):
        cfg.fixtures = [(run.get("label", "-"), _path(run["fixture"], base))]

    if mode == "bloch":
        section = parser["bloch"] if parser.has_section("bloch") else {}
        h = getattr(args, "h", None) or section.get("h")
        r0 = getattr(args, "r0", None) or section.get("r0")
        if h is not None:
            cfg.bloch_h = _vector(h)
        if r0 is not None:
            cfg.bloch_r0 = _vector(r0)
    else:
        if not cfg.fixtures:
            raise InputError("no fixture given (use --fixture or a [geometries] section)")
        for _, p in cfg.fixtures:
            if not p.is_file():
                raise InputError(f"fixture not found: {p}")
    return cfg


@dataclass
class PointResult:
    label: str
    e_acse: float
    e_fci: float
    iterations: int
    status: str
    trace: str = ""
    rdm2: object = None

    @property
    def row(self) -> str:
        converged = "yes" if self.status == "converged" else "no"
        return (
            f"{self.label}\t{self.e_acse:.12f}\t{self.e_fci:.12f}\t"
            f"{self.e_acse - self.e_fci:.6e}\t{self.iterations}\t{converged}\t{self.status}"
        )


def run_point(label: str, fixture: Path, solver: AcseConfig) -> PointResult:
    """Solve one geometry from its Hartree-Fock determinant; never raises."""
    try:
        m = read_fcidump(fixture)
        k2 = build_reduced_hamiltonian(m)
        e_fci, _ = fci_ground(k2, m.core_energy, m.n_electrons)
        start = init_reference(k2.n_spin_orbitals, range(m.n_electrons))
        traj = solve(start, k2, m.core_energy, solver)
    except (OSError, ValueError) as exc:
        return PointResult(label, float("nan"), float("nan"), 0, f"error: {exc}")
    return PointResult(
        label, traj.final_energy, e_fci, traj.iterations, traj.status,
        traj.to_text(), traj.final_rdm2,
    )


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def run_single(cfg: RunConfig) -> int:
    (label, fixture), = cfg.fixtures[:1]
    result = run_point(label, fixture, cfg.solver)
    if result.status.startswith("error"):
        print(f"{fixture}: {result.status}", file=sys.stderr)
        return EXIT_INPUT
    _write(cfg.out, result.trace)
    if cfg.dump_rdm is not None:
        dump_rdm(result.rdm2, cfg.dump_rdm)
    print(f"final energy  {result.e_acse:.12f} Eh")
    print(f"FCI energy    {result.e_fci:.12f} Eh")
    print(f"error vs FCI  {result.e_acse - result.e_fci:.3e} Eh")
    print(f"status        {result.status} after {result.iterations} iterations")
    return EXIT_OK if result.status == "converged" else EXIT_NOT_CONVERGED


def _scan_job(job: tuple[str, Path, AcseConfig]) -> str:
    return run_point(*job).row


def run_scan(cfg: RunConfig) -> int:
    labels = [label for label, _ in cfg.fixtures]
    if len(set(labels)) != len(labels):
        raise InputError("geometry labels must be unique")
    jobs = [(label, path, cfg.solver) for label, path in cfg.fixtures]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_scan_job, jobs))
    else:
        rows = [_scan_job(job) for job in jobs]
    _write(cfg.out, "\n".join([SCAN_HEADER, *rows]) + "\n")
    ok = all(row.endswith("\tconverged") for row in rows)
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


def run_bloch(cfg: RunConfig) -> int:
    h = np.array(cfg.bloch_h)
    r0 = np.array(cfg.bloch_r0)
    if np.linalg.norm(h) == 0:
        raise InputError("h must be nonzero")
    norm = np.linalg.norm(r0)
    if norm == 0:
        raise InputError("r0 must be nonzero")
    if abs(norm - 1) > 1e-12:
        log.warning("normalizing r0 (norm %.6g) onto the Bloch sphere", norm)
        r0 = r0 / norm
    traj = bloch_solve(
        h, r0, cfg.solver.residual_tolerance, cfg.solver.max_iterations, cfg.solver
    )
    _write(cfg.out, traj.to_text())
    last = traj.points[-1]
    if traj.status == "stationary_excited":
        print(
            "r0 is parallel to h: stationary point (highest-energy state), "
            f"energy {last.energy:.12f}"
        )
        return EXIT_NOT_CONVERGED
    print(f"final energy  {last.energy:.12f}  ({traj.status}, {traj.iterations} iterations)")
    return EXIT_OK if traj.status == "converged" else EXIT_NOT_CONVERGED


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI run description")
    p.add_argument("--residual-mode", choices=RESIDUAL_MODES)
    p.add_argument("--delta", type=float)
    p.add_argument("--tolerance", type=float, help="residual norm tolerance")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--trotter-steps", type=int)
    p.add_argument("--epsilon-max", type=float, help="line-search trust radius")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qacse", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    single = sub.add_parser("single", help="one geometry, iteration trace")
    _add_solver_flags(single)
    single.add_argument("--fixture", type=Path, help="FCIDUMP file")
    single.add_argument("--dump-rdm", type=Path, help="write the final 2-RDM here")

    scan = sub.add_parser("scan", help="potential-energy curve over [geometries]")
    _add_solver_flags(scan)
    scan.add_argument("--fixture", type=Path, help="single-geometry scan")
    scan.add_argument("--label", help="geometry label for --fixture")
    scan.add_argument("--workers", type=int, help="parallel worker processes")

    bloch = sub.add_parser("bloch", help="one-qubit trajectory on the Bloch sphere")
    _add_solver_flags(bloch)
    bloch.add_argument("--h", help="Hamiltonian vector, e.g. '1,-1,1'")
    bloch.add_argument("--r0", help="initial Bloch vector, e.g. '0,0,1'")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.command, args.config, args)
        if args.command == "bloch":
            return run_bloch(cfg)
        if args.command == "single":
            return run_single(cfg)
        return run_scan(cfg)
    except (InputError, FcidumpError) as exc:
        print(f"qacse: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
