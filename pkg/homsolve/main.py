import functools
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console
from rich.table import Table

from homsolve.core.config import settings
from homsolve.core.monitoring import get_monitoring_data
from homsolve.dependencies.error_code import HomsolveError, RegimeMismatchError, ValidationError, get_error_response
from homsolve.logs.logging_config import setup_logging
from homsolve.models.scalar import Regime, Scalar, parse_scalar
from homsolve.models.system import HomogeneousSystem, enumerate_multi_indices, multi_index_count
from homsolve.schemas.instance import InstanceDoc, ReportDoc
from homsolve.schemas.solve_spec import SolveSpecDoc
from homsolve.schemas.system import SystemDoc
from homsolve.services.constraints import SolvableInstance, SolveMode, constraint_residuals, max_residual
from homsolve.services.dynamics import Trajectory, closed_form_trajectory, iterate
from homsolve.services.generator import random_solvable_instance
from homsolve.services.harness import (
    Verdict,
    VerificationReport,
    generator_sweep,
    run_example,
    solve_instance,
    summarize,
    verify_batch,
    verify_instance,
)
from homsolve.services.newton import finite_difference_jacobian, jacobian_relative_error, residual_jacobian
from homsolve.utils.documents import dump_document, load_document, load_init, save_document
from homsolve.utils.trajectory_csv import write_trajectory

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="homsolve",
    help="Construct, solve and verify explicitly solvable homogeneous polynomial difference systems.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

EXIT_MISMATCH = 1


class _Options:
    regime: Optional[Regime] = None


options = _Options()


def _handle_errors(command):
    """Map HomsolveError to its exit code and a JSON error document on stderr."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except HomsolveError as e:
            logger.debug(f"{command.__name__} failed: {e.message}")
            err_console.print_json(json.dumps(get_error_response(e.code, {"message": e.message, **e.details})))
            raise typer.Exit(code=e.exit_code)

    return wrapper


def _default_regime() -> Regime:
    return options.regime or Regime(settings.DEFAULT_REGIME)


def _apply_regime(system: HomogeneousSystem) -> HomogeneousSystem:
    """Honour an explicit ``--regime``: float converts exact documents, exact refuses float ones."""
    if options.regime is None or options.regime is system.regime:
        return system
    if options.regime is Regime.FLOAT:
        logger.info("Converting the exact system to the float regime")
        return system.to_float()
    raise RegimeMismatchError("--regime exact was requested but the system document is float")


def _parse_cli_scalar(text: str, regime: Regime) -> Scalar:
    """``RE`` or ``RE,IM``; exact parts as ``p/q``."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (1, 2) or not all(parts):
        raise ValidationError(f"expected RE or RE,IM, got {text!r}")
    return parse_scalar(parts[0], parts[1] if len(parts) == 2 else "0", regime)


def _emit_csv(trajectory: Trajectory, out: Optional[Path], digits: Optional[int], rational: bool) -> None:
    if out is None:
        write_trajectory(sys.stdout, trajectory, digits=digits, rational=rational)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as stream:
        rows = write_trajectory(stream, trajectory, digits=digits, rational=rational)
    err_console.print(f"Wrote {rows} row(s) to {out}")


def _report_truncation(trajectory: Trajectory) -> None:
    if trajectory.truncated:
        err_console.print(
            f"[yellow]Truncated at step {trajectory.truncated_at} "
            f"({trajectory.truncation_reason.value}); horizon {trajectory.achieved_horizon}/{trajectory.horizon}[/yellow]"
        )


def _emit_instance(instance: SolvableInstance, out: Optional[Path]) -> None:
    doc = InstanceDoc.from_domain(instance)
    if out is None:
        typer.echo(dump_document(doc), nl=False)
    else:
        save_document(out, doc)
        err_console.print(f"Wrote instance to {out}")


def _instance_summary(instance: SolvableInstance, title: str) -> Table:
    table = Table(title=title)
    table.add_column("field")
    table.add_column("value")
    table.add_row("N, M", f"{instance.system.n_vars}, {instance.system.degree}")
    table.add_row("regime", instance.regime.value)
    table.add_row("Z", str(instance.Z))
    table.add_row("z0", ", ".join(str(z) for z in instance.z0))
    table.add_row("max residual", f"{instance.certificate.max_residual:.3e}")
    table.add_row("mode", instance.certificate.mode)
    if instance.degenerate:
        table.add_row("degenerate", "Z = 0")
    return table


def _report_table(report: VerificationReport, title: str) -> Table:
    table = Table(title=f"{title}: {report.verdict.value}")
    table.add_column("step", justify="right")
    table.add_column("max |abs|", justify="right")
    table.add_column("max rel", justify="right")
    for d in report.steps:
        table.add_row(str(d.step), f"{d.max_abs:.3e}", f"{d.max_rel:.3e}")
    if report.first_mismatch is not None:
        step, component = report.first_mismatch
        table.caption = f"first mismatch at step {step}, component {component}"
    elif report.truncated_at is not None:
        table.caption = f"truncated at step {report.truncated_at} ({report.truncation_reason.value})"
    return table


def _exit_for(verdicts: List[Verdict]) -> None:
    if any(v is Verdict.MISMATCH for v in verdicts):
        raise typer.Exit(code=EXIT_MISMATCH)


def _print_metrics() -> None:
    err_console.print_json(json.dumps(get_monitoring_data(), default=str))


@app.callback()
def main(
    ctx: typer.Context,
    regime: Optional[Regime] = typer.Option(
        None, "--regime", case_sensitive=False, help="Arithmetic regime for regime-less inputs; float converts exact documents."
    ),
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Logging level (default from LOG_LEVEL)."),
    json_logs: Optional[bool] = typer.Option(None, "--json-logs/--plain-logs", help="JSON log lines on stderr."),
    metrics: bool = typer.Option(False, "--metrics", help="Print collected service metrics to stderr on exit."),
):
    setup_logging(level=log_level, json_logs=json_logs)
    options.regime = regime
    if metrics:
        ctx.call_on_close(_print_metrics)
    logger.debug(f"{settings.APP_NAME} v{settings.APP_VERSION} ({settings.ENVIRONMENT})")


@app.command("enumerate")
@_handle_errors
def enumerate_command(
    n: int = typer.Argument(..., help="Number of variables N"),
    m: int = typer.Argument(..., help="Degree M"),
    as_json: bool = typer.Option(False, "--json", help="Print the exponent lists as JSON."),
):
    """List the degree-M multi-indices in N variables in canonical descending-lex order."""
    if n < 1 or m < 0:
        raise ValidationError(f"need N >= 1 and M >= 0, got N={n}, M={m}")
    indices = enumerate_multi_indices(n, m)
    if as_json:
        typer.echo(json.dumps([list(mi) for mi in indices]))
        return
    table = Table(title=f"N={n}, M={m}: {multi_index_count(n, m)} multi-indices")
    table.add_column("#", justify="right")
    table.add_column("exponents")
    for position, mi in enumerate(indices, start=1):
        table.add_row(str(position), " ".join(str(e) for e in mi))
    console.print(table)


@app.command()
@_handle_errors
def generate(
    n: int = typer.Option(..., "--n", help="Number of variables N"),
    m: int = typer.Option(..., "--m", help="Degree M"),
    seed: int = typer.Option(..., "--seed"),
    mode: SolveMode = typer.Option(SolveMode.COEFFICIENTS, "--mode", help="coefficients or z-pivot"),
    density: float = typer.Option(1.0, "--density", help="Probability that a basis monomial is populated."),
    out: Optional[Path] = typer.Option(None, "--out", help="Instance JSON path (stdout when omitted)."),
):
    """Draw a certified solvable instance from a seed."""
    instance = random_solvable_instance(n, m, seed, regime=_default_regime(), density=density, mode=mode)
    _emit_instance(instance, out)
    if out is not None:
        console.print(_instance_summary(instance, f"seed {seed}"))


@app.command()
@_handle_errors
def solve(
    system: Path = typer.Option(..., "--system", help="System JSON document."),
    spec: Path = typer.Option(..., "--spec", help="Solve-spec JSON document."),
    init: Optional[Path] = typer.Option(None, "--init", help="Initial data JSON (coefficients and z-pivot modes)."),
    z: Optional[str] = typer.Option(None, "--z", help="Z as RE or RE,IM (coefficients mode)."),
    out: Optional[Path] = typer.Option(None, "--out", help="Instance JSON path (stdout when omitted)."),
    check_jacobian: bool = typer.Option(False, "--check-jacobian", help="Compare the analytic Jacobian with finite differences."),
):
    """Solve the constraints for the designated unknowns and certify the result."""
    sys_domain = _apply_regime(load_document(system, SystemDoc).to_domain())
    spec_domain = load_document(spec, SolveSpecDoc).to_domain(sys_domain.regime)
    z0 = load_init(init).to_domain(sys_domain.regime) if init is not None else None
    Z = _parse_cli_scalar(z, sys_domain.regime) if z is not None else None

    instance = solve_instance(sys_domain, spec_domain, z0=z0, Z=Z)
    _emit_instance(instance, out)
    err_console.print(_instance_summary(instance, f"{spec_domain.mode.value} solve"))

    if check_jacobian:
        flt = instance.to_float()
        unknowns = spec_domain.resolved_unknowns(flt.system.n_vars)
        analytic = residual_jacobian(flt.system, flt.Z, flt.ratios, unknowns)
        numeric = finite_difference_jacobian(flt.system, flt.Z, flt.ratios, unknowns)
        err_console.print(f"Jacobian relative error vs finite differences: {jacobian_relative_error(analytic, numeric):.3e}")


@app.command("iterate")
@_handle_errors
def iterate_command(
    system: Path = typer.Option(..., "--system", help="System JSON document."),
    init: Path = typer.Option(..., "--init", help="Initial data JSON."),
    steps: int = typer.Option(..., "--steps", help="Horizon S."),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV path (stdout when omitted)."),
    rational: bool = typer.Option(False, "--rational", help="Exact values as p/q."),
    digits: Optional[int] = typer.Option(None, "--digits", help="Significant digits for decimal output."),
):
    """Iterate the map and write the trajectory as CSV."""
    sys_domain = _apply_regime(load_document(system, SystemDoc).to_domain())
    z0 = load_init(init).to_domain(sys_domain.regime)
    trajectory = iterate(sys_domain, z0, steps, max_bits=settings.EXACT_MAX_BITS)
    _emit_csv(trajectory, out, digits, rational)
    _report_truncation(trajectory)


@app.command("closed-form")
@_handle_errors
def closed_form_command(
    init: Path = typer.Option(..., "--init", help="Initial data JSON."),
    z: str = typer.Option(..., "--z", help="Z as RE or RE,IM."),
    m: int = typer.Option(..., "--m", help="Degree M"),
    steps: int = typer.Option(..., "--steps", help="Horizon S."),
    out: Optional[Path] = typer.Option(None, "--out", help="CSV path (stdout when omitted)."),
    rational: bool = typer.Option(False, "--rational", help="Exact values as p/q."),
    digits: Optional[int] = typer.Option(None, "--digits", help="Significant digits for decimal output."),
):
    """Evaluate the closed-form solution and write it as CSV."""
    regime = _default_regime()
    z0 = load_init(init).to_domain(regime)
    trajectory = closed_form_trajectory(z0, _parse_cli_scalar(z, regime), m, steps, max_bits=settings.EXACT_MAX_BITS)
    _emit_csv(trajectory, out, digits, rational)
    _report_truncation(trajectory)


@app.command()
@_handle_errors
def verify(
    instance: Path = typer.Option(..., "--instance", help="Instance JSON bundle."),
    horizon: int = typer.Option(settings.VERIFY_HORIZON, "--horizon"),
    tol: float = typer.Option(settings.VERIFY_TOL, "--tol", help="Relative tolerance in the float regime."),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON."),
):
    """Compare iteration with the closed form step by step."""
    inst = load_document(instance, InstanceDoc).to_domain()
    if options.regime is Regime.FLOAT and inst.regime is Regime.EXACT:
        inst = inst.to_float()
    elif options.regime is Regime.EXACT and inst.regime is Regime.FLOAT:
        raise RegimeMismatchError("--regime exact was requested but the instance is float")
    residual = max_residual(constraint_residuals(inst.system, inst.Z, inst.ratios))
    logger.info(f"Constraint residual of the loaded instance: {residual:.3e}")

    report = verify_instance(inst, horizon, tol=tol)
    if as_json:
        typer.echo(ReportDoc.from_domain(report).model_dump_json(indent=2))
    else:
        console.print(_report_table(report, str(instance)))
    _exit_for([report.verdict])


@app.command()
@_handle_errors
def example(
    seed: int = typer.Option(settings.EXAMPLE_SEED, "--seed"),
    horizon: int = typer.Option(settings.EXAMPLE_HORIZON, "--horizon"),
):
    """The N=2, M=4 example in both coefficients and z-pivot modes."""
    result = run_example(seed=seed, horizon=horizon)
    console.print(_instance_summary(result.coefficients_instance, "coefficients mode"))
    console.print(_report_table(result.coefficients_report, "coefficients mode"))
    console.print(_instance_summary(result.pivot_instance, "z-pivot mode"))
    console.print(_report_table(result.pivot_report, "z-pivot mode"))
    _exit_for([result.coefficients_report.verdict, result.pivot_report.verdict])


@app.command()
@_handle_errors
def batch(
    count: int = typer.Option(100, "--count"),
    seed: int = typer.Option(settings.EXAMPLE_SEED, "--seed", help="Seed of the first instance; instance i uses seed + i."),
    horizon: int = typer.Option(settings.VERIFY_HORIZON, "--horizon"),
    workers: int = typer.Option(settings.BATCH_WORKERS, "--workers"),
    density: float = typer.Option(1.0, "--density"),
    tol: float = typer.Option(settings.VERIFY_TOL, "--tol"),
):
    """Generate a seeded sweep over N in 1..4, M in 2..4 and verify every instance."""
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    instances = generator_sweep(count, seed, regime=_default_regime(), density=density)
    reports = verify_batch(instances, horizon, tol=tol, workers=workers)
    counts = summarize(reports)

    table = Table(title=f"{count} instance(s), horizon {horizon}")
    table.add_column("verdict")
    table.add_column("count", justify="right")
    for verdict, n in counts.items():
        table.add_row(verdict, str(n))
    console.print(table)
    for i, report in enumerate(reports):
        if report.verdict is Verdict.MISMATCH:
            err_console.print(f"[red]instance {i} (seed {seed + i}) mismatched at {report.first_mismatch}[/red]")
    _exit_for([r.verdict for r in reports])


if __name__ == "__main__":
    app()
