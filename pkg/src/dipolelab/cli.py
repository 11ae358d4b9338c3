"""Batch command-line front end.

Subcommands
-----------
spectrum      converged per-sector energy levels (CSV or JSON)
brackets      the symbolic bracket/quantization report
fractional-j  angular-momentum report with the guiding-center K ladder
kinetic-j     zero-density (rho = 0) kinetic ladder and numeric cross-check
duality       dipole model vs charged twin, exact map and spectra
phases        topological phases Phi_AC and the twin's Phi_AB

Parameters come from ``--params FILE`` (key=value lines) with individual
flags overriding file values.  Parameter flags take exact literals — things
like ``0.5``, ``1/3`` or ``3*pi/5`` — so derived constants stay exact all
the way into reports.

Outputs are deterministic: identical configuration gives byte-identical
files.  Every file starts with a provenance header (tool version, resolved
parameters, tolerances, conventions).  Energies are reported in the kinetic
convention: the divergence-coupling constant hbar*Omega/2, when the model
includes it, is subtracted and the header says so.

Exit codes: 0 success, 2 validation/usage error, 3 convergence failure.

Sectors whose effective index nu is 0 converge only logarithmically; when
such a sector cannot meet the requested tolerance the run retries it at the
documented floor of 5e-4 and records that in the header instead of failing.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, angular, radial
from .model import ZeroDensityRegimeError, ModelParams, build_constraints, kinetic_momenta, load_params
from .parsing import ParseError, format_expr, parse_expr
from .phase_space import (
    PhaseSpaceExpr,
    build_constraint_system,
    dirac_bracket,
    poisson_bracket,
    quantize_quadratic,
)

__all__ = ["RunConfig", "run", "emit_plot_data", "main", "EXIT_OK", "EXIT_VALIDATION", "EXIT_CONVERGENCE"]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3

LOG_SECTOR_FLOOR = 5e-4

_PARAM_FLAGS = ("mu", "lam", "rho", "K", "hbar", "mass", "c", "eps0")


@dataclass
class RunConfig:
    """Resolved invocation: command, parameters, ranges, output plumbing."""

    command: str
    params: ModelParams
    sectors: list[int]
    levels: int
    tol: float
    out_dir: Path
    fmt: str = "csv"
    k_ladder: list[str] = field(default_factory=list)
    plots: bool = True
    symbolic: bool = False


def _parse_sectors(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        return list(range(lo, hi + 1))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _fmt_num(x) -> str:
    return repr(float(x))


def _build_params(args) -> ModelParams:
    overrides = {}
    for flag in _PARAM_FLAGS:
        value = getattr(args, flag)
        if value is not None:
            overrides["m" if flag == "mass" else flag] = value
    if args.divergence_term is not None:
        overrides["include_divergence_term"] = args.divergence_term
    if getattr(args, "symbolic", False):
        return ModelParams.symbolic(**overrides)
    if args.params:
        base = load_params(args.params)
        return dataclasses.replace(base, **overrides) if overrides else base
    return ModelParams(**overrides)


def _provenance(config: RunConfig, notes: list[str]) -> dict:
    params = config.params
    derived: dict = {}
    if params.omega is not None:
        derived["Omega"] = str(params.omega)
    if params.alpha is not None:
        derived["alpha"] = str(params.alpha)
    out = {
        "tool": f"dipolelab {__version__}",
        "command": config.command,
        "params": params.resolved(),
        "derived": derived,
        "tolerance": config.tol,
        "notes": list(notes),
    }
    return out


def _header_lines(prov: dict) -> list[str]:
    lines = [f"# {prov['tool']} -- {prov['command']}"]
    lines.append(
        "# params: "
        + " ".join(f"{key}={value}" for key, value in prov["params"].items())
    )
    if prov["derived"]:
        lines.append(
            "# derived: "
            + " ".join(f"{key}={value}" for key, value in prov["derived"].items())
        )
    lines.append(f"# tolerance: {prov['tolerance']:g}")
    for note in prov["notes"]:
        lines.append(f"# note: {note}")
    return lines


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, prov: dict, payload: dict) -> None:
    body = {"_provenance": prov}
    body.update(payload)
    _write_text(path, json.dumps(body, indent=2) + "\n")


def _write_csv(path: Path, prov: dict, columns: list[str], rows: list[list[str]]) -> None:
    lines = _header_lines(prov)
    lines.append(",".join(columns))
    lines.extend(",".join(row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def _solve_sector(params: ModelParams, sector: int, levels: int, tol: float):
    """Converged solve with the logarithmic-sector floor policy.

    Sectors with nu = 0 cannot certify tolerances below the documented
    floor; they are retried at the floor and the relaxation is reported.
    """
    try:
        return radial.converge(params, sector, levels, tol), tol, None
    except radial.ConvergenceError:
        nu = float(params.nu(sector))
        scheme, _, _ = radial._select_scheme(abs(nu))
        if scheme == "log" and tol < LOG_SECTOR_FLOOR:
            result = radial.converge(params, sector, levels, LOG_SECTOR_FLOOR)
            note = (
                f"sector {sector} (nu = {nu:g}) converges logarithmically;"
                f" tolerance relaxed to {LOG_SECTOR_FLOOR:g}"
            )
            return result, LOG_SECTOR_FLOOR, note
        raise


def _spectrum_payload(config: RunConfig) -> tuple[dict, list[str]]:
    params = config.params
    params.require_numeric()
    div = float(params.divergence_constant)
    notes = [
        "energies use the kinetic convention: divergence constant "
        f"{params.divergence_constant} subtracted"
        if params.include_divergence_term
        else "model has no divergence term; energies are kinetic as-is"
    ]
    sectors_out = []
    for sector in config.sectors:
        result, tol_used, note = _solve_sector(params, sector, config.levels, config.tol)
        if note:
            notes.append(note)
        energies = [float(e) - div for e in result.eigenvalues]
        sectors_out.append(
            {
                "sector": sector,
                "nu": float(params.nu(sector)),
                "tol": tol_used,
                "energies": energies,
                "residuals": [float(r) for r in result.residuals],
            }
        )
    return {"command": "spectrum", "sectors": sectors_out}, notes


def _emit_spectrum(config: RunConfig, payload: dict, prov: dict) -> None:
    if config.fmt == "json":
        _write_json(config.out_dir / "spectrum.json", prov, payload)
        return
    rows = []
    for block in payload["sectors"]:
        for n, (energy, residual) in enumerate(
            zip(block["energies"], block["residuals"])
        ):
            rows.append(
                [
                    str(block["sector"]),
                    _fmt_num(block["nu"]),
                    str(n),
                    _fmt_num(energy),
                    _fmt_num(residual),
                ]
            )
    _write_csv(
        config.out_dir / "spectrum.csv",
        prov,
        ["sector", "nu", "n", "energy", "residual"],
        rows,
    )


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------


def _brackets_payload(config: RunConfig) -> dict:
    params = config.params
    pi1, pi2 = kinetic_momenta(params)
    momentum_bracket = poisson_bracket(pi1, pi2)
    system = build_constraint_system(build_constraints(params))
    x1, x2 = PhaseSpaceExpr.var("x1"), PhaseSpaceExpr.var("x2")
    dirac_xx = dirac_bracket(x1, x2, system)
    reduced = angular.reduced_j_spectrum(params)
    mass_inv = parse_expr("1/(2*m)").substitute_params(params.exact_subs())
    kin_energy = quantize_quadratic(
        (pi1 * pi1 + pi2 * pi2) * mass_inv,
        (pi1, pi2),
        poisson_bracket,
        hbar=angular._hbar_expr(params),
    )
    j_full = parse_expr("x1*p2 - x2*p1")
    from .model import build_hamiltonian

    h_full = build_hamiltonian(params)
    conservation_full = poisson_bracket(j_full, h_full)
    return {
        "command": "brackets",
        "kinetic_momentum_bracket": format_expr(momentum_bracket),
        "constraint_matrix": [
            [format_expr(entry) for entry in row] for row in system.bracket_matrix
        ],
        "classification": system.classification,
        "dirac_x1_x2": format_expr(dirac_xx),
        "reduced_j_spectrum": {
            "offset": format_expr(reduced.offset),
            "step": format_expr(reduced.hbar_eff * reduced.freq),
            "rule": f"(n + 1/2)*{format_expr(reduced.hbar_eff * reduced.freq)}"
            + (
                ""
                if reduced.offset.is_zero()
                else f" + {format_expr(reduced.offset)}"
            ),
        },
        "kinetic_energy_spectrum": {
            "offset": format_expr(kin_energy.offset),
            "step": format_expr(kin_energy.hbar_eff * kin_energy.freq),
        },
        "conservation": {
            "poisson_J_H": format_expr(conservation_full),
        },
    }


def _emit_brackets(config: RunConfig, payload: dict, prov: dict) -> None:
    if config.fmt == "json":
        _write_json(config.out_dir / "brackets.json", prov, payload)
        return
    rows = [
        ["kinetic_momentum_bracket", payload["kinetic_momentum_bracket"]],
        ["classification", payload["classification"]],
        ["dirac_x1_x2", payload["dirac_x1_x2"]],
        ["reduced_j_rule", payload["reduced_j_spectrum"]["rule"]],
        ["kinetic_energy_step", payload["kinetic_energy_spectrum"]["step"]],
        ["poisson_J_H", payload["conservation"]["poisson_J_H"]],
    ]
    quoted = [[row[0], '"' + row[1] + '"'] for row in rows]
    _write_csv(config.out_dir / "brackets.csv", prov, ["quantity", "value"], quoted)


# ---------------------------------------------------------------------------
# fractional-j / kinetic-j / duality / phases
# ---------------------------------------------------------------------------


def _fractional_payload(config: RunConfig) -> dict:
    report = angular.angular_report(
        config.params,
        sectors=config.sectors,
        k_ladder=config.k_ladder,
        tol=config.tol,
    )
    return {"command": "fractional-j", **angular.report_json_dict(report)}


def _emit_fractional(config: RunConfig, payload: dict, prov: dict) -> None:
    _write_json(config.out_dir / "fractional_j.json", prov, payload)
    rows = [
        [
            str(row["sector"]),
            _fmt_num(row["K"]),
            _fmt_num(row["t"]),
            _fmt_num(row["measured"]),
            _fmt_num(row["deviation"]),
            str(row["band_mixing"]).lower(),
            _fmt_num(row["tol"]),
        ]
        for row in payload["numeric_check"]
    ]
    if rows:
        _write_csv(
            config.out_dir / "fractional_j_ladder.csv",
            prov,
            ["sector", "K", "t", "measured", "deviation", "band_mixing", "tol"],
            rows,
        )


def _kinetic_payload(config: RunConfig) -> dict:
    rule = angular.kinetic_j_spectrum(config.params)
    payload = {
        "command": "kinetic-j",
        "rule": rule.rule_text(),
        "offset": format_expr(rule.offset),
        "step": format_expr(rule.step),
        "numeric_check": [],
    }
    if config.sectors and not config.symbolic and float(config.params.K) > 0:
        payload["numeric_check"] = angular.kinetic_j_numeric_check(
            config.params, config.sectors
        )
    return payload


def _emit_kinetic(config: RunConfig, payload: dict, prov: dict) -> None:
    if config.fmt == "json":
        _write_json(config.out_dir / "kinetic_j.json", prov, payload)
        return
    rows = [["rule", '"' + payload["rule"] + '"']]
    for row in payload["numeric_check"]:
        rows.append(
            [
                f"sector_{row['sector']}",
                _fmt_num(row["measured"]),
            ]
        )
    _write_csv(config.out_dir / "kinetic_j.csv", prov, ["quantity", "value"], rows)


def _duality_payload(config: RunConfig) -> dict:
    report = angular.duality_report(
        config.params,
        numeric_sectors=tuple(config.sectors),
        levels=config.levels,
        tol=config.tol,
    )
    return {
        "command": "duality",
        "map": {"qB": str(report.dual.B), "qPhi": str(report.dual.Phi)},
        "entries": report.entries,
        "numeric": report.numeric,
    }


def _emit_duality(config: RunConfig, payload: dict, prov: dict) -> None:
    if config.fmt == "json":
        _write_json(config.out_dir / "duality.json", prov, payload)
        return
    rows = [
        [entry["quantity"], '"' + entry["dipole"] + '"', '"' + entry["twin"] + '"', ""]
        for entry in payload["entries"]
    ]
    for block in payload["numeric"]:
        rows.append(
            [f"spectrum m={block['sector']}", "", "", _fmt_num(block["max_gap"])]
        )
    _write_csv(
        config.out_dir / "duality.csv",
        prov,
        ["quantity", "dipole", "twin", "max_gap"],
        rows,
    )


def _phases_payload(config: RunConfig) -> dict:
    phases = angular.topological_phases(config.params)
    two_pi = float(2 * math.pi)
    return {
        "command": "phases",
        "phi_ac": {
            "exact": str(phases["phi_ac"]),
            "value": float(phases["phi_ac"]),
            "over_2pi": float(phases["phi_ac"]) / two_pi,
        },
        "phi_ab_equiv": {
            "exact": str(phases["phi_ab_equiv"]),
            "value": float(phases["phi_ab_equiv"]),
            "over_2pi": float(phases["phi_ab_equiv"]) / two_pi,
        },
    }


def _emit_phases(config: RunConfig, payload: dict, prov: dict) -> None:
    if config.fmt == "json":
        _write_json(config.out_dir / "phases.json", prov, payload)
        return
    rows = [
        ["phi_ac", '"' + payload["phi_ac"]["exact"] + '"', _fmt_num(payload["phi_ac"]["value"]), _fmt_num(payload["phi_ac"]["over_2pi"])],
        ["phi_ab_equiv", '"' + payload["phi_ab_equiv"]["exact"] + '"', _fmt_num(payload["phi_ab_equiv"]["value"]), _fmt_num(payload["phi_ab_equiv"]["over_2pi"])],
    ]
    _write_csv(
        config.out_dir / "phases.csv",
        prov,
        ["quantity", "exact", "value", "over_2pi"],
        rows,
    )


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------


def emit_plot_data(payload: dict, out_dir: Path, header_lines: list[str] | None = None) -> list[Path]:
    """Two-column whitespace-separated .dat files for the report's curves.

    spectrum: one file per level index (energy vs sector, the fan chart);
    fractional-j: one file per sector (deviation vs K) with the fitted
    log-log slope in the header.  Returns the written paths in order.
    """
    out_dir = Path(out_dir)
    header_lines = list(header_lines or [])
    written: list[Path] = []
    if payload.get("command") == "spectrum":
        blocks = payload["sectors"]
        n_levels = min(len(block["energies"]) for block in blocks) if blocks else 0
        for n in range(n_levels):
            lines = list(header_lines)
            lines.append(f"# level n = {n}: energy vs sector")
            for block in blocks:
                lines.append(f"{block['sector']} {_fmt_num(block['energies'][n])}")
            path = out_dir / f"spectrum_level_{n}.dat"
            _write_text(path, "\n".join(lines) + "\n")
            written.append(path)
    elif payload.get("command") == "fractional-j":
        rows = payload.get("numeric_check", [])
        sectors = sorted({row["sector"] for row in rows})
        for sector in sectors:
            pts = [(row["K"], row["deviation"]) for row in rows if row["sector"] == sector]
            lines = list(header_lines)
            lines.append(f"# sector m = {sector}: deviation vs K")
            if len(pts) >= 2 and all(p[1] > 0 for p in pts):
                slope = float(
                    np.polyfit(
                        np.log([p[0] for p in pts]), np.log([p[1] for p in pts]), 1
                    )[0]
                )
                lines.append(f"# fitted log-log slope: {_fmt_num(slope)}")
            for k_val, dev in pts:
                lines.append(f"{_fmt_num(k_val)} {_fmt_num(dev)}")
            path = out_dir / f"fractional_j_m{sector}.dat"
            _write_text(path, "\n".join(lines) + "\n")
            written.append(path)
    return written


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------


_NEEDS_SECTORS = {"spectrum", "fractional-j"}

_BUILDERS = {
    "spectrum": _spectrum_payload,
    "brackets": _brackets_payload,
    "fractional-j": _fractional_payload,
    "kinetic-j": _kinetic_payload,
    "duality": _duality_payload,
    "phases": _phases_payload,
}

_EMITTERS = {
    "spectrum": _emit_spectrum,
    "brackets": _emit_brackets,
    "fractional-j": _emit_fractional,
    "kinetic-j": _emit_kinetic,
    "duality": _emit_duality,
    "phases": _emit_phases,
}


def run(config: RunConfig) -> int:
    """Execute one command; write artifacts; return the exit code."""
    try:
        if config.tol <= 0:
            raise ValueError("tolerance must be positive")
        if config.levels < 1:
            raise ValueError("levels must be at least 1")
        if config.command in _NEEDS_SECTORS and not config.sectors:
            raise ValueError("empty sector range")
        if config.command not in _BUILDERS:
            raise ValueError(f"unknown command {config.command!r}")
        if config.symbolic and config.command not in ("brackets", "kinetic-j"):
            raise ValueError(
                f"--symbolic applies to brackets and kinetic-j, not {config.command}"
            )
        notes: list[str] = []
        if config.command == "spectrum":
            payload, notes = _spectrum_payload(config)
        else:
            payload = _BUILDERS[config.command](config)
        prov = _provenance(config, notes)
        config.out_dir.mkdir(parents=True, exist_ok=True)
        _EMITTERS[config.command](config, payload, prov)
        if config.plots:
            emit_plot_data(payload, config.out_dir, _header_lines(prov))
        return EXIT_OK
    except radial.ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValueError, ParseError, ZeroDensityRegimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def _preprocess_argv(argv: list[str]) -> list[str]:
    """Glue negative-looking values onto their flags so argparse accepts
    things like ``--sectors -2..4`` and ``--lam -1/2``."""
    value_flags = {"--sectors", "--k-ladder"} | {f"--{name}" for name in _PARAM_FLAGS}
    out: list[str] = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if (
            tok in value_flags
            and i + 1 < len(argv)
            and argv[i + 1].startswith("-")
            and argv[i + 1] not in value_flags
        ):
            out.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dipolelab",
        description="Spectra, brackets and angular-momentum reports for a "
        "magnetic dipole in radial electric fields.",
    )
    parser.add_argument("--version", action="version", version=f"dipolelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, extra in (
        ("spectrum", "converged per-sector energy levels"),
        ("brackets", "symbolic bracket and quantization report"),
        ("fractional-j", "fractional angular-momentum report with K ladder"),
        ("kinetic-j", "zero-density kinetic angular-momentum ladder"),
        ("duality", "dipole model vs charged twin"),
        ("phases", "topological phases"),
    ):
        p = sub.add_parser(name, help=extra)
        p.add_argument("--params", type=Path, default=None, help="key=value parameter file")
        for flag in _PARAM_FLAGS:
            p.add_argument(f"--{flag}", type=str, default=None,
                           help=f"exact value for {'m' if flag == 'mass' else flag}")
        p.add_argument("--divergence-term", dest="divergence_term",
                       action=argparse.BooleanOptionalAction, default=None,
                       help="include the dipole divergence coupling")
        p.add_argument("--sectors", type=str, default=None,
                       help="angular sectors, e.g. -2..4 or 0,1,3")
        p.add_argument("--levels", type=int, default=4, help="levels per sector")
        p.add_argument("--tol", type=float, default=1e-6, help="convergence tolerance")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default="json" if name in ("brackets", "fractional-j", "phases") else "csv",
                       help="output format")
        p.add_argument("--k-ladder", type=str, default=None,
                       help="comma-separated K values for the guiding-center ladder")
        p.add_argument("--no-plots", dest="plots", action="store_false",
                       help="skip .dat plot files")
        if name == "brackets":
            p.add_argument("--symbolic", action="store_true", default=True,
                           help="keep unset parameters symbolic (default)")
        else:
            p.add_argument("--symbolic", action="store_true", default=False,
                           help="keep unset parameters symbolic")
    return parser


_DEFAULT_SECTORS = {
    "fractional-j": "1..5",
    "duality": "",
    "kinetic-j": "",
    "spectrum": None,  # required
}

_DEFAULT_LADDER = {"fractional-j": "1e-2,1e-3,1e-4"}


def build_config(args) -> RunConfig:
    params = _build_params(args)
    sectors_text = args.sectors
    if sectors_text is None:
        sectors_text = _DEFAULT_SECTORS.get(args.command) or ""
    sectors = _parse_sectors(sectors_text) if sectors_text else []
    ladder_text = args.k_ladder
    if ladder_text is None:
        ladder_text = _DEFAULT_LADDER.get(args.command, "")
    k_ladder = [tok.strip() for tok in ladder_text.split(",") if tok.strip()]
    return RunConfig(
        command=args.command,
        params=params,
        sectors=sectors,
        levels=args.levels,
        tol=args.tol,
        out_dir=args.out,
        fmt=args.fmt,
        k_ladder=k_ladder,
        plots=args.plots,
        symbolic=getattr(args, "symbolic", False),
    )


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_preprocess_argv(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = build_config(args)
    except (ValueError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
