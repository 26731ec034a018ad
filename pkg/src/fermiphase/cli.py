"""Command-line entry point.

Subcommands: tf, wigner, husimi, converge, kparticle, energy, verify.
Exit codes: 0 success, 1 assertion failure (reports still written), 2 usage
or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import diagnostics
from .diagnostics import ConvergenceReport, RunConfig, converge_suite, energy_suite, theorem3_suite, write_report
from .density import gamma1, density_from_gamma
from .grids import SpatialGrid, dump_grid_function, fourier_phase
from .husimi import MollifierSpec, mollify
from .norms import lp_norm
from .orbitals import InteractionSpec
from .thomas_fermi import classical_state, tf_solve, vlasov_energy
from .wigner import laguerre_oracle, wigner_transform

_SECTION_KEYS = {
    "run.d": ("d", int),
    "run.N": ("N_list", "intlist"),
    "run.seed": ("seed", int),
    "run.jobs": ("jobs", int),
    "trap.kind": ("trap", str),
    "interaction.kind": ("interaction", str),
    "interaction.strength": ("interaction_strength", float),
    "interaction.width": ("interaction_width", float),
    "grid.L_x": ("L_x", float),
    "grid.L_p": ("L_p", float),
    "grid.n_x": ("n_x", int),
    "grid.n_p": ("n_p", int),
    "grid.spatial": ("spatial", "auto_or_int"),
    "norms.p": ("p_list", "floatlist"),
    "norms.s": ("s_list", "floatlist"),
    "norms.alpha": ("alpha", float),
    "norms.moment_m": ("moment_m", float),
    "kparticle.k": ("k_list", "intlist"),
    "output.dir": ("out_dir", str),
}


class UsageError(Exception):
    pass


def _coerce(value, kind):
    if kind is int:
        return int(value)
    if kind is float:
        return float(value)
    if kind is str:
        return str(value)
    if kind == "intlist":
        if isinstance(value, str):
            value = [v for v in value.strip("[] ").split(",") if v]
        return tuple(int(v) for v in value)
    if kind == "floatlist":
        if isinstance(value, str):
            value = [v for v in value.strip("[] ").split(",") if v]
        return tuple(float(v) for v in value)
    if kind == "auto_or_int":
        if value == "auto":
            return "auto"
        return int(value)
    raise UsageError(f"cannot coerce {value!r}")


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    data: dict[str, object] = {}
    if path is not None:
        try:
            import tomli
        except ImportError:  # pragma: no cover
            raise UsageError("config files need the tomli package")
        p = Path(path)
        if not p.exists():
            raise UsageError(f"config file not found: {path}")
        with open(p, "rb") as fh:
            raw = tomli.load(fh)
        for section, body in raw.items():
            if not isinstance(body, dict):
                raise UsageError(f"top-level key {section!r} must be a section")
            for key, value in body.items():
                data[f"{section}.{key}"] = value
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"--set needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        data[key.strip()] = value.strip()
    kwargs = {}
    for dotted, value in data.items():
        if dotted not in _SECTION_KEYS:
            raise UsageError(f"unknown config key: {dotted}")
        field_name, kind = _SECTION_KEYS[dotted]
        kwargs[field_name] = _coerce(value, kind)
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _apply_cli_overrides(config: RunConfig, args) -> RunConfig:
    if args.out is not None:
        config.out_dir = args.out
    if args.jobs is not None:
        config.jobs = args.jobs
    if args.seed is not None:
        config.seed = args.seed
    return config


def _print_config(config: RunConfig) -> None:
    for dotted, (field_name, _) in _SECTION_KEYS.items():
        print(f"{dotted} = {getattr(config, field_name)}")


def _cmd_tf(config: RunConfig, args) -> int:
    grid = SpatialGrid(config.d, config.L_x, max(config.n_x, 2048) if config.d == 1 else config.n_x)
    sol = tf_solve(config.trap_spec(), config.interaction_spec(), config.d, grid)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "mu": sol.mu,
        "e_tf": sol.e_tf,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "grid": {"d": config.d, "L_x": config.L_x, "n": grid.n},
    }
    with open(out / "tf_solution.json", "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    dump_grid_function(sol.rho, out, "tf_rho")
    print(f"mu = {sol.mu:.6f}  e_tf = {sol.e_tf:.6f}  residual = {sol.residual:.2e}")
    return 0


def _state_for(config: RunConfig, N: int):
    return diagnostics.build_state(config, N)


def _cmd_wigner(config: RunConfig, args) -> int:
    pgrid = config.phase_grid()
    out = Path(config.out_dir)
    for N in config.N_list:
        state = _state_for(config, N)
        f = wigner_transform(gamma1(state), pgrid)
        dump_grid_function(f, out, f"wigner_N{N}")
        dump_grid_function(density_from_gamma(gamma1(state)), out, f"rho_N{N}")
        print(f"N={N}: ||f||_2 = {lp_norm(f, 2):.6f}")
    return 0


def _cmd_husimi(config: RunConfig, args) -> int:
    pgrid = config.phase_grid()
    out = Path(config.out_dir)
    for N in config.N_list:
        state = _state_for(config, N)
        f = wigner_transform(gamma1(state), pgrid)
        m = mollify(f, state.hbar, MollifierSpec(config.alpha))
        dump_grid_function(m, out, f"husimi_N{N}")
        print(f"N={N}: husimi range [{m.values.min():.3e}, {m.values.max():.6f}]")
    return 0


def _cmd_converge(config: RunConfig, args) -> int:
    report = converge_suite(config)
    paths = write_report(report, config.out_dir)
    failed = [k for k, v in report.assertions.items() if not v["passed"]]
    for name, entry in sorted(report.assertions.items()):
        print(f"{'PASS' if entry['passed'] else 'FAIL'} {name}")
    print(f"report: {paths['report']}")
    return 0 if not failed else 1


def _cmd_kparticle(config: RunConfig, args) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for k in config.k_list:
        rows.extend(theorem3_suite(config.N_list, k, d=config.d, numeric_check=True))
    report = ConvergenceReport(config=config, krows=rows)
    (out / "kparticle.csv").write_text(report.k_csv())
    for row in rows:
        if "note" in row:
            print(f"N={row['N']} k={row['k']}: {row['note']}")
        else:
            print(f"N={row['N']} k={row['k']}: value={row['value_formula']:.4f} gap={row['gap']:.4f}")
    return 0


def _cmd_energy(config: RunConfig, args) -> int:
    rows = energy_suite(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = list(rows[0].keys()) if rows else []
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(diagnostics._fmt(row.get(c)) for c in cols))
    (out / "energy.csv").write_text("\n".join(lines) + "\n")
    for row in rows:
        print(f"N={row['N']}: E/N = {row['energy_per_N']:.6f}  ratio = {row['ratio']:.4f}")
    return 0


def _cmd_verify(config: RunConfig, args) -> int:
    """Exact-identity suite; --quick restricts to the small-N core."""
    t0 = time.time()
    failures = []

    def check(name, ok, detail=""):
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
        if not ok:
            failures.append(name)

    N_set = (8, 16) if args.quick else tuple(config.N_list)
    pgrid = config.phase_grid()
    for N in N_set:
        state = _state_for(config, N)
        gamma = gamma1(state)
        check(f"trace_N{N}", abs(gamma.trace() - N) <= 1e-8 * N)
        proj = np.abs(gamma.compose(gamma) - gamma.values).max() * gamma.grid.cell_volume
        check(f"projection_N{N}", proj <= 1e-8)
        check(f"hs_norm_N{N}", abs(gamma.hs_norm() - np.sqrt(N)) <= 1e-8 * np.sqrt(N))
        f = wigner_transform(gamma, pgrid)
        mass = float(np.sum(f.values) * pgrid.cell_volume) / (2 * np.pi) ** config.d
        check(f"mass_N{N}", abs(mass - 1.0) <= 1e-8, f"(err {mass-1:+.2e})")
        fhat = fourier_phase(f)
        check(f"groenewold_N{N}", np.abs(fhat.values).max() <= 1 + 1e-8)
        if config.trap == "harmonic" and config.interaction == "none" and N <= 32:
            oracle = laguerre_oracle(N, state.hbar, pgrid)
            sup = np.abs(f.values - oracle.values).max()
            check(f"laguerre_N{N}", sup <= 1e-6, f"(sup {sup:.2e})")
        m = mollify(f, state.hbar, MollifierSpec(config.alpha))
        mmass = float(np.sum(m.values) * pgrid.cell_volume) / (2 * np.pi) ** config.d
        check(f"husimi_mass_N{N}", abs(mmass - 1.0) <= 1e-8)
    sol = tf_solve(config.trap_spec(), InteractionSpec("none"), 1, pgrid.spatial)
    check("tf_mu", abs(sol.mu - 2.0) <= 1e-3, f"(mu {sol.mu:.6f})")
    check("tf_e", abs(sol.e_tf - 1.0) <= 1e-3, f"(e {sol.e_tf:.6f})")
    check("tf_el_residual", sol.residual <= 1e-6)
    fr = classical_state(sol.rho, pgrid, 1)
    v = vlasov_energy(fr.f, config.trap_spec(), InteractionSpec("none"))
    e = tf_energy_of(sol, config)
    check("vlasov_identity", abs(v - e) <= 1e-3, f"(diff {v-e:+.2e})")
    print(f"elapsed: {time.time() - t0:.1f}s")
    return 0 if not failures else 1


def tf_energy_of(sol, config: RunConfig) -> float:
    from .thomas_fermi import tf_energy

    return tf_energy(sol.rho, config.trap_spec(), InteractionSpec("none"), config.d)


_COMMANDS = {
    "tf": _cmd_tf,
    "wigner": _cmd_wigner,
    "husimi": _cmd_husimi,
    "converge": _cmd_converge,
    "kparticle": _cmd_kparticle,
    "energy": _cmd_energy,
    "verify": _cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fermiphase",
                                     description="phase-space diagnostics for trapped fermions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE")
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--quick", action="store_true")
        p.add_argument("--dry-run", action="store_true")
        p.add_argument("--trap", default=None, help="shorthand for --set trap.kind=...")
        p.add_argument("--d", type=int, default=None, help="shorthand for --set run.d=...")
        p.add_argument("--N", default=None, help="shorthand for --set run.N=...")
    return parser


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    try:
        overrides = list(args.overrides)
        if args.trap is not None:
            overrides.append(f"trap.kind={args.trap}")
        if args.d is not None:
            overrides.append(f"run.d={args.d}")
        if args.N is not None:
            overrides.append(f"run.N={args.N}")
        config = load_config(args.config, overrides)
        config = _apply_cli_overrides(config, args)
        if args.quick and args.command in ("converge", "verify"):
            if args.command == "converge" and config.N_list == RunConfig().N_list:
                config.N_list = (8, 16)
        if args.dry_run:
            _print_config(config)
            return 0
        return _COMMANDS[args.command](config, args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:  # console-script entry
    sys.exit(run())


if __name__ == "__main__":
    main()
