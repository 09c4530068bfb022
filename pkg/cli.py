"""Command Line Interface for the Fano 2.22 K-stability verifier."""

import sys
from pathlib import Path
from typing import List, Optional

import click
import typer
from loguru import logger
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from config import settings
from engine.errors import KStabError, NonRationalValue, SchemaError, ScenarioReferenceError, UnknownCase
from engine.exact_core import format_rational, parse_rational
from engine.quartic_curve import branch_divisor, classify_lambda
from models import CaseResult, Report, Status
from verifier import ScenarioVerifier

app = typer.Typer(help="kstab-verify - exact checks of the K-stability computations for Fano threefold 2.22")
console = Console()

USAGE_ERROR = 3
STATUS_STYLE = {Status.PASS: "green", Status.FAIL: "red", Status.ERROR: "magenta"}


def setup_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)
    if settings.log_file:
        logger.add(settings.log_file, level="DEBUG")


def _load(scenario: Optional[Path]) -> ScenarioVerifier:
    path = scenario or settings.scenario_path
    if not path.exists():
        console.print(f"[red]Error: scenario file '{path}' does not exist![/red]")
        raise typer.Exit(USAGE_ERROR)
    try:
        return ScenarioVerifier.from_file(path)
    except (SchemaError, ScenarioReferenceError, NonRationalValue) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(USAGE_ERROR)


def _show(value) -> str:
    if value is None:
        return ""
    if isinstance(value, list):
        return "[" + ", ".join(value) + "]"
    return str(value)


def _results_table(results: List[CaseResult], title: str) -> Table:
    table = Table(title=title)
    table.add_column("Case", style="cyan")
    table.add_column("Computed", style="white")
    table.add_column("Expected", style="white")
    table.add_column("Status", width=8)
    table.add_column("Anchor", style="dim")
    for r in results:
        expected = " and ".join(([_show(r.expected)] if r.expected is not None else []) + r.predicates)
        color = STATUS_STYLE[Status(r.status)]
        table.add_row(r.id, _show(r.computed), expected, f"[{color}]{r.status}[/{color}]", r.anchor)
    return table


def _run_all(
    verifier: ScenarioVerifier,
    json_path: Optional[Path],
    md_path: Optional[Path],
    filter_tag: Optional[str],
    save: bool = False,
) -> int:
    if save:
        json_path = json_path or settings.output_dir / "report.json"
        md_path = md_path or settings.output_dir / "report.md"
    report: Report = verifier.run_all(filter_tag)
    console.print(_results_table(report.results, f"Cases ({verifier.scenario.source})"))

    for r in report.results:
        if r.status != Status.PASS:
            console.print(f"[red]{r.id}: {r.detail}[/red]")

    summary = report.summary
    color = "green" if report.exit_code == 0 else "red"
    console.print(Panel(
        f"[bold {color}]{summary.passed}/{summary.total} cases pass[/bold {color}]\n\n"
        f"Fail: {summary.failed}\n"
        f"Error: {summary.errors}"
    ))
    verifier.write_reports(report, json_path, md_path)
    if json_path:
        console.print(f"[dim]JSON report: {json_path}[/dim]")
    if md_path:
        console.print(f"[dim]Markdown report: {md_path}[/dim]")
    return report.exit_code


@app.command("run-all")
def run_all(
    json_path: Optional[Path] = typer.Option(None, "--json", help="Write the JSON report here"),
    md_path: Optional[Path] = typer.Option(None, "--md", help="Write the markdown report here"),
    filter_tag: Optional[str] = typer.Option(None, "--filter", help="Only run cases with this tag"),
    save: bool = typer.Option(False, "--save", help="Write report.json and report.md to KSTAB_OUTPUT_DIR"),
    scenario: Optional[Path] = typer.Option(None, "--scenario", "-s", help="Scenario file (default: KSTAB_SCENARIO)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Run every registered case and report the aggregate status."""
    setup_logging(verbose)
    raise typer.Exit(_run_all(_load(scenario), json_path, md_path, filter_tag, save))


@app.command()
def case(
    case_id: str = typer.Argument(..., help="Case id, e.g. prop-l12-total"),
    dump_chambers: bool = typer.Option(False, "--dump-chambers", help="Print the v-chambers at each piece midpoint"),
    scenario: Optional[Path] = typer.Option(None, "--scenario", "-s", help="Scenario file (default: KSTAB_SCENARIO)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Run a single case."""
    setup_logging(verbose)
    verifier = _load(scenario)
    try:
        result = verifier.run_case(case_id, dump_chambers=dump_chambers)
    except UnknownCase as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(USAGE_ERROR)

    console.print(_results_table([result], result.description or result.id))
    if result.detail:
        console.print(f"[red]{result.detail}[/red]")
    for note in result.notes:
        console.print(f"[yellow]note:[/yellow] {note}")

    for chamber_slice in result.chambers or []:
        table = Table(title=f"u = {chamber_slice['u']} (pseff limit {chamber_slice['pseff_limit']})")
        columns = list(chamber_slice["chambers"][0]) if chamber_slice["chambers"] else []
        for column in columns:
            table.add_column(column)
        for row in chamber_slice["chambers"]:
            table.add_row(*(row[column] for column in columns))
        console.print(table)

    raise typer.Exit({Status.PASS: 0, Status.FAIL: 1}.get(Status(result.status), 2))


@app.command()
def curve(
    lam: str = typer.Option(..., "--lambda", help="Rational parameter p/q of the curve u(x^3 + l x^2 y) = v(y^3 + l x y^2)"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Classify the quartic curve for one value of lambda."""
    setup_logging(verbose)
    try:
        value = parse_rational(lam)
    except NonRationalValue as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(USAGE_ERROR)

    try:
        info = classify_lambda(value)
        branch = branch_divisor(value)
    except KStabError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(2)

    table = Table(title=f"Quartic curve at lambda = {format_rational(value)}")
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Resultant", format_rational(info.resultant))
    table.add_row("Branch divisor", str(branch.form))
    table.add_row("Factors", ", ".join(f"({factor})^{m}" for factor, m in branch.factors))
    table.add_row("Distinct branch points", str(info.distinct_count))
    table.add_row("Classification", info.classification.value)
    console.print(table)
    raise typer.Exit(0)


@app.command("scenario")
def scenario_command(
    scenario_file: Path = typer.Argument(..., help="Scenario file (.json, .yaml or .yml)"),
    action: str = typer.Argument("run-all", help="Only run-all is supported"),
    json_path: Optional[Path] = typer.Option(None, "--json", help="Write the JSON report here"),
    md_path: Optional[Path] = typer.Option(None, "--md", help="Write the markdown report here"),
    filter_tag: Optional[str] = typer.Option(None, "--filter", help="Only run cases with this tag"),
    save: bool = typer.Option(False, "--save", help="Write report.json and report.md to KSTAB_OUTPUT_DIR"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Run the cases of a user-supplied scenario file."""
    setup_logging(verbose)
    if action != "run-all":
        console.print(f"[red]Error: unknown action '{action}', expected run-all[/red]")
        raise typer.Exit(USAGE_ERROR)
    raise typer.Exit(_run_all(_load(scenario_file), json_path, md_path, filter_tag, save))


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point with the 0/1/2/3 exit code contract."""
    try:
        code = app(args=argv, prog_name="kstab-verify", standalone_mode=False)
    except (click.ClickException, click.Abort) as e:
        message = e.format_message() if isinstance(e, click.ClickException) else "aborted"
        console.print(f"[red]Error: {message}[/red]")
        return USAGE_ERROR
    except (SchemaError, ScenarioReferenceError, NonRationalValue) as e:
        console.print(f"[red]Error: {e}[/red]")
        return USAGE_ERROR
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
