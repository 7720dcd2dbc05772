"""Experiment CLI: operator verification, convergence studies, long runs
with diagnostics, Jacobian spectra, and the surface-flux comparison.

Exit codes: 0 on success, 1 when an internal check fails, 2 on usage
errors.  Output CSVs carry a versioned schema header; the output directory
resolves as --output-dir, then $SUBCELLSBP_OUTPUT_DIR, then the config's
[output] directory.
"""

from __future__ import annotations

import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import click
import numpy as np

from . import diagnostics as diag
from .csvio import write_csv
from .experiments import (ExperimentConfig, VAR_NAMES, parse_config, run_convergence,
                          run_experiment, run_flux_comparison, run_spectrum)
from .sbp_cell import gauss_lobatto_operator, gauss_radau_operator, operator_dump
from .subcell import assemble_subcell, existence_residuals, structural_check, verify_subcell
from .time_integration import IntegrationError

PRESETS = ("advection-table1", "euler-table2", "spectra-fig5", "flux-compare-fig8",
           "advection-longtime", "conservation-advection", "conservation-maxwell",
           "conservation-burgers")

# the degree-1 sub-cell operators on [-1,0] | [0,1] are known in closed form;
# the verify subcommand prints the comparison as a golden check
GOLDEN_LOBATTO = {
    "x": np.array([-1.0, 0.0, 0.0, 1.0]),
    "P": np.array([0.5, 0.5, 0.5, 0.5]),
    "D": np.kron(np.eye(2), np.array([[-1.0, 1.0], [-1.0, 1.0]])),
    "S": 0.5 * np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]])),
    "B": np.diag([-1.0, 1.0, -1.0, 1.0]),
}
GOLDEN_RADAU = {
    "x": np.array([-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0]),
    "P": np.array([0.25, 0.75, 0.75, 0.25]),
    "D": 1.5 * np.kron(np.eye(2), np.array([[-1.0, 1.0], [-1.0, 1.0]])),
    "S": 0.75 * np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]])),
    "B": 0.75 * np.block([
        [np.array([[-1.0, -1.0], [-1.0, 3.0]]), np.zeros((2, 2))],
        [np.zeros((2, 2)), np.array([[-3.0, 1.0], [1.0, 1.0]])],
    ]),
}


def ladder_tol(degree: int) -> float:
    return 1e-13 if degree <= 3 else 1e-11


def _load_config(config, preset) -> ExperimentConfig:
    if config and preset:
        raise click.UsageError("give either --config or --preset, not both")
    if preset:
        if preset not in PRESETS:
            raise click.UsageError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        with resources.as_file(resources.files("subcellsbp.presets") / f"{preset}.ini") as p:
            return parse_config(p)
    if config:
        try:
            return parse_config(config)
        except (ValueError, FileNotFoundError) as exc:
            raise click.UsageError(str(exc))
    raise click.UsageError("a --config file or --preset name is required")


def _apply_overrides(cfg: ExperimentConfig, degree, elements, flux, subcell_flux, coupling,
                     n_u, n_v, t_final) -> ExperimentConfig:
    if degree is not None:
        cfg = replace(cfg, degree=degree)
    if elements is not None:
        if "," in elements:
            raise click.UsageError("--elements takes one count; use --resolutions for sweeps")
        n = int(elements)
        cfg = replace(cfg, n_u=n, n_v=n)
    if n_u is not None:
        cfg = replace(cfg, n_u=n_u)
    if n_v is not None:
        cfg = replace(cfg, n_v=n_v)
    if flux is not None:
        cfg = replace(cfg, surface_flux=flux)
    if subcell_flux is not None:
        cfg = replace(cfg, subcell_flux=subcell_flux)
    if coupling is not None:
        cfg = replace(cfg, coupling=coupling)
    if t_final is not None:
        cfg = replace(cfg, t_final=t_final)
    return cfg


def _out_dir(cfg: ExperimentConfig, output_dir) -> Path:
    chosen = output_dir or os.environ.get("SUBCELLSBP_OUTPUT_DIR") or cfg.output_dir
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


_shared_options = [
    click.option("--config", type=click.Path(), default=None, help="INI config file"),
    click.option("--preset", default=None, help=f"named preset: {', '.join(PRESETS)}"),
    click.option("--degree", type=int, default=None),
    click.option("--elements", default=None, help="element count for both meshes"),
    click.option("--flux", default=None, help="surface flux override"),
    click.option("--subcell-flux", default=None, help="sub-cell-point flux override"),
    click.option("--coupling", type=click.Choice(["subcell", "baseline"]), default=None),
    click.option("--n-u", type=int, default=None),
    click.option("--n-v", type=int, default=None),
    click.option("--t-final", type=float, default=None),
    click.option("--output-dir", default=None),
]


def shared_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Sub-cell SBP overset-grid experiments."""


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

@main.command()
@click.option("--degrees", default="1,2,3,4,5,6", help="comma list of polynomial degrees")
@click.option("--families", default="lobatto,radau")
@click.option("--splits", default="-0.5,0,0.3", help="split points inside [-1, 1]")
@click.option("--machine-readable", is_flag=True, help="also print CSV rows")
def verify(degrees, families, splits, machine_readable):
    """Build sub-cell operators and check every defining condition."""
    degree_list = [int(d) for d in degrees.split(",")]
    family_list = [f.strip() for f in families.split(",")]
    split_list = [float(s) for s in splits.split(",")]
    failures = 0
    rows = []
    for degree in degree_list:
        tol = ladder_tol(degree)
        for family in family_list:
            for split in split_list:
                if family == "lobatto":
                    left = gauss_lobatto_operator(degree, (-1.0, split))
                    right = gauss_lobatto_operator(degree, (split, 1.0))
                else:
                    left = gauss_radau_operator(degree, (-1.0, split), "left")
                    right = gauss_radau_operator(degree, (split, 1.0), "right")
                op = assemble_subcell(left, right)
                report = verify_subcell(op, tol)
                r1, r2 = existence_residuals(op)
                report.add("existence condition 1", float(np.max(np.abs(r1))), tol)
                report.add("existence condition 2", float(np.max(np.abs(r2))), tol)
                structure = structural_check(op)
                report.checks.extend(structure.checks)
                tag = f"degree {degree}, {family}, split {split:+.2f}"
                status = "pass" if report.passed else "FAIL"
                click.echo(f"{status}  {tag}  (max residual {report.max_residual:.2e}, tol {tol:.0e})")
                if not report.passed:
                    failures += 1
                    click.echo(report.format())
                rows.extend((tag, *r[1:]) for r in report.rows())
    failures += _golden_checks()
    if machine_readable:
        click.echo("case,check,residual,tol,passed")
        for row in rows:
            click.echo(",".join(str(v) for v in row))
    sys.exit(1 if failures else 0)


def _golden_checks() -> int:
    failures = 0
    for name, family, golden in (("degree-1 Lobatto", "lobatto", GOLDEN_LOBATTO),
                                 ("degree-1 Radau", "radau", GOLDEN_RADAU)):
        if family == "lobatto":
            op = assemble_subcell(gauss_lobatto_operator(1, (-1.0, 0.0)),
                                  gauss_lobatto_operator(1, (0.0, 1.0)))
        else:
            op = assemble_subcell(gauss_radau_operator(1, (-1.0, 0.0), "left"),
                                  gauss_radau_operator(1, (0.0, 1.0), "right"))
        worst = max(
            float(np.max(np.abs(op.x - golden["x"]))),
            float(np.max(np.abs(op.p - golden["P"]))),
            float(np.max(np.abs(op.D - golden["D"]))),
            float(np.max(np.abs(op.S - golden["S"]))),
            float(np.max(np.abs(op.B - golden["B"]))),
        )
        ok = worst <= 1e-14
        click.echo(f"{'pass' if ok else 'FAIL'}  golden {name} (entrywise {worst:.2e})")
        if not ok:
            failures += 1
            click.echo(operator_dump(op.left_block()))
    return failures


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

@main.command()
@shared_options
@click.option("--resolutions", default="10,20,40,80", help="element counts to sweep")
def convergence(config, preset, degree, elements, flux, subcell_flux, coupling, n_u, n_v,
                t_final, output_dir, resolutions):
    """Error/EOC sweep against the exact or manufactured solution."""
    cfg = _apply_overrides(_load_config(config, preset), degree, elements, flux,
                           subcell_flux, coupling, n_u, n_v, t_final)
    res_list = [int(n) for n in resolutions.split(",")]
    try:
        result = run_convergence(cfg, res_list)
    except IntegrationError as exc:
        click.echo(f"integration failed: {exc}", err=True)
        sys.exit(1)
    rows = []
    click.echo(f"{'N':>5} {'variable':>8} {'L2 error':>14} {'EOC':>7}")
    for i, n in enumerate(result.resolutions):
        for var in result.var_names:
            order = result.orders[var][i]
            rows.append((n, var, result.errors[var][i], "" if order is None else order))
            order_txt = "  --- " if order is None else f"{order:6.2f}"
            click.echo(f"{n:>5} {var:>8} {result.errors[var][i]:>14.3e} {order_txt}")
    out = _out_dir(cfg, output_dir) / f"{cfg.prefix}_convergence.csv"
    write_csv(out, "convergence", ["N", "var", "error", "eoc"], rows)
    click.echo(f"wrote {out}  ({result.wall_time:.1f}s)")
    sys.exit(0)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _series_rows(result):
    law = result.law
    names = VAR_NAMES[law.name]
    cols = ["time"] + [f"integral_{n}" for n in names] + [
        "energy", "denergy_dt", "entropy", "dentropy_dt"]
    rows = []
    for rec in result.records:
        rows.append([rec.time, *rec.integral, rec.energy, rec.energy_rate,
                     rec.entropy, rec.entropy_rate])
    return cols, rows


def _error_rows(result):
    names = VAR_NAMES[result.law.name]
    cols = ["time"] + [f"l2_{n}" for n in names] + [f"linf_{n}" for n in names]
    rows = [[rec.time, *rec.error_l2, *rec.error_linf] for rec in result.records]
    return cols, rows


def _snapshot_rows(result):
    mesh = result.mesh
    names = VAR_NAMES[result.law.name]
    state = result.final_state2d
    rows = []
    for side, elems in (("u", mesh.u_elements), ("v", mesh.v_elements)):
        for e in elems:
            for i in range(e.n_nodes):
                rows.append([e.x[i], side, e.index, *state[e.offset + i]])
    return ["x", "mesh", "element", *names], rows


@main.command()
@shared_options
def run(config, preset, degree, elements, flux, subcell_flux, coupling, n_u, n_v,
        t_final, output_dir):
    """Integrate one configuration and write snapshot/diagnostics CSVs."""
    cfg = _apply_overrides(_load_config(config, preset), degree, elements, flux,
                           subcell_flux, coupling, n_u, n_v, t_final)
    out = _out_dir(cfg, output_dir)
    try:
        result = run_experiment(cfg)
    except IntegrationError as exc:
        click.echo(f"integration failed: {exc}", err=True)
        if len(exc.partial_times):
            write_csv(out / f"{cfg.prefix}_rates_partial.csv", "rate_series",
                      ["time"], [[t] for t in exc.partial_times])
        sys.exit(1)

    click.echo(result.mesh.summary())
    if not result.fully_upwind and not result.law.is_linear:
        click.echo("warning: sub-cell coupling is not fully upwind; conservation will drift")
    cols, rows = _series_rows(result)
    write_csv(out / f"{cfg.prefix}_rates.csv", "rate_series", cols, rows)
    cols, rows = _snapshot_rows(result)
    write_csv(out / f"{cfg.prefix}_snapshot.csv", "snapshot", cols, rows)
    wrote = [f"{cfg.prefix}_rates.csv", f"{cfg.prefix}_snapshot.csv"]
    if result.records[0].error_l2 is not None:
        cols, rows = _error_rows(result)
        write_csv(out / f"{cfg.prefix}_errors.csv", "error_series", cols, rows)
        wrote.append(f"{cfg.prefix}_errors.csv")

    drift = result.integral_drift()
    click.echo(f"steps: {result.trajectory.n_accepted} accepted, "
               f"{result.trajectory.n_rejected} rejected  ({result.wall_time:.1f}s)")
    init_norm = np.max(np.abs(result.trajectory.states[0]))
    if init_norm > 0:
        growth = float(np.max(np.abs(result.trajectory.states)) / init_norm)
        tag = "  (unstable: growing amplitude)" if growth > 2.0 else ""
        click.echo(f"max-norm growth over the run: {growth:.3g}x{tag}")
    click.echo("conservation drift per variable: " + " ".join(f"{d:.3e}" for d in drift))
    e_rates = [r.energy_rate for r in result.records if r.energy_rate is not None]
    if e_rates:
        click.echo(f"dE/dt range: [{min(e_rates):.3e}, {max(e_rates):.3e}]")
    s_lo, s_hi = result.entropy_rate_range()
    click.echo(f"dS/dt range: [{s_lo:.3e}, {s_hi:.3e}]")
    click.echo(f"wrote {', '.join(wrote)} in {out}")
    sys.exit(0)


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

@main.command()
@shared_options
def spectrum(config, preset, degree, elements, flux, subcell_flux, coupling, n_u, n_v,
             t_final, output_dir):
    """Eigenvalues of the right-hand-side Jacobian at the initial state."""
    cfg = _apply_overrides(_load_config(config, preset), degree, elements, flux,
                           subcell_flux, coupling, n_u, n_v, t_final)
    try:
        result = run_spectrum(cfg)
    except RuntimeError as exc:
        click.echo(f"spectrum failed: {exc}", err=True)
        sys.exit(1)
    out = _out_dir(cfg, output_dir) / f"{cfg.prefix}_spectrum.csv"
    rows = [[ev.real, ev.imag] for ev in result.eigenvalues]
    write_csv(out, "spectrum", ["re", "im"], rows)
    click.echo(f"n_dof {result.n_dof}, spectral abscissa {result.abscissa:.6e}")
    click.echo(f"wrote {out}  ({result.wall_time:.1f}s)")
    sys.exit(0)


# ---------------------------------------------------------------------------
# compare-fluxes
# ---------------------------------------------------------------------------

@main.command("compare-fluxes")
@shared_options
def compare_fluxes(config, preset, degree, elements, flux, subcell_flux, coupling, n_u, n_v,
                   t_final, output_dir):
    """Same run with HLL vs Rusanov at the sub-cell coupling points."""
    cfg = _apply_overrides(_load_config(config, preset), degree, elements, flux,
                           subcell_flux, coupling, n_u, n_v, t_final)
    out = _out_dir(cfg, output_dir)
    try:
        comparison = run_flux_comparison(cfg)
    except IntegrationError as exc:
        click.echo(f"integration failed: {exc}", err=True)
        sys.exit(1)
    for kind in comparison.kinds:
        result = comparison.results[kind]
        cols, rows = _series_rows(result)
        write_csv(out / f"{cfg.prefix}_{kind}_rates.csv", "rate_series", cols, rows)
        s_lo, s_hi = comparison.entropy_rates(kind)
        click.echo(f"{kind:>8}: max |I(t)-I(0)| = {comparison.drift(kind):.3e}, "
                   f"dS/dt in [{s_lo:.3e}, {s_hi:.3e}]")
    click.echo(f"wrote per-flux rate series in {out}")
    sys.exit(0)


if __name__ == "__main__":
    main()
