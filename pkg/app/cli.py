"""JSON-speaking command line: every command reads one input document and writes one output document."""
import logging
from contextlib import nullcontext

import click
from rich.console import Console
from rich.logging import RichHandler

from app.core.config import CLASSIFICATION_TOLS, overridden, settings
from app.core.exceptions import GeometryError, HedronometryError
from app.schemas.schemas import ConjectureName, InvolutionOp, document, dump_document, error_document, parse_input
from app.services import documents

logger = logging.getLogger(__name__)

err_console = Console(stderr=True)


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False, rich_tracebacks=True)],
        force=True,
    )
    logging.captureWarnings(True)


def _tolerances(tol):
    if tol is None:
        return nullcontext()
    return overridden(**{name: tol for name in CLASSIFICATION_TOLS})


def _fail(output, exc: HedronometryError) -> None:
    err_console.print(f"[bold red]{exc.code}[/bold red]: {exc}")
    if isinstance(exc, GeometryError):
        output.write(dump_document(error_document(exc.code, str(exc))))
    click.get_current_context().exit(exc.exit_code)


def _run(command: str, build, source, output, tol) -> None:
    with _tolerances(tol):
        try:
            body = build(parse_input(source.read()))
        except HedronometryError as exc:
            _fail(output, exc)
            return
    output.write(dump_document(document(command, body)))
    if "error" in body:
        err_console.print(f"[bold red]{body['error']}[/bold red]: {body.get('detail', '')}")
        click.get_current_context().exit(3)


input_option = click.option(
    "--input", "source", type=click.File("r"), default="-", show_default=True, help="Input JSON document (- for stdin)."
)
output_option = click.option(
    "--output", "output", type=click.File("w"), default="-", show_default=True, help="Output file (- for stdout)."
)
tol_option = click.option("--tol", type=float, default=None, help="Override the classification tolerances.")


def _document_command(name: str, build, help_text: str):
    @cli.command(name=name, help=help_text)
    @input_option
    @output_option
    @tol_option
    def command(source, output, tol):
        _run(name, build, source, output, tol)

    return command


@click.group()
@click.option("--log-level", default=None, help="Log level for the stderr log (defaults to LOG_LEVEL).")
def cli(log_level):
    """Tetrahedron geometry from distances, areas and natural parameters."""
    _configure_logging(log_level or settings.LOG_LEVEL)


_document_command("analyze", documents.analyze, "Derive every section available from one input.")
_document_command("reconstruct", documents.reconstruct, "Vertices from seven facial areas.")
_document_command("classify", documents.classify, "Validity, lattice node and degenerate classification.")
_document_command("canonical-planar", documents.canonical_planar, "Least-gyration planar realization of areas.")
_document_command("invert-areas", documents.invert_areas, "Witness distances for squared areas.")
_document_command("solve-2to2", documents.solve_2to2, "Degenerate naturals from (alpha, beta, gamma, delta, varsigma).")


@cli.command(name="involution")
@click.argument("operation", type=click.Choice([op.value for op in InvolutionOp]))
@input_option
@output_option
@tol_option
def involution(operation, source, output, tol):
    """Apply twin, fiedler, reciprocal or the twin/reciprocal orbit."""
    _run(f"involution {operation}", lambda doc: documents.involution(operation, doc), source, output, tol)


@cli.command(name="conjectures")
@click.argument("name", type=click.Choice([name.value for name in ConjectureName]))
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Number of trials (defaults to DEFAULT_TRIALS).")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Seed (defaults to DEFAULT_SEED).")
@click.option("--dim", type=click.IntRange(2, 4), default=3, show_default=True, help="Dimension for nsimplex.")
@output_option
@tol_option
def conjectures(name, trials, seed, dim, output, tol):
    """Run a seeded conjecture harness and report pass/fail counts."""
    with _tolerances(tol):
        try:
            body = documents.conjectures(name, trials=trials, seed=seed, dim=dim)
        except HedronometryError as exc:
            _fail(output, exc)
            return
    report = body["report"]
    err_console.print(f"{name}: {report.passed}/{report.trials} passed, worst residual {report.worst_residual:.3e}")
    output.write(dump_document(document(f"conjectures {name}", body)))


if __name__ == "__main__":
    cli()
