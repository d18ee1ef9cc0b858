"""Command-line interface for seqfold."""

# Standard library imports
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence

# Third-party imports
import click
import typer
from rich.console import Console
from rich.panel import Panel
from rich.pretty import Pretty
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
)
from rich.table import Table

# Local application imports
from seqfold.config import ConfigManager
from seqfold.data.generate import (
    generate_demo_dataset,
    generate_random_dataset,
)
from seqfold.models.report import EvalReport
from seqfold.models.settings import RunConfig, TaskId
from seqfold.network.checkpoint import load_checkpoint
from seqfold.network.model import FoldPolicyNet
from seqfold.numeric import GradCheckReport
from seqfold.selftest import (
    all_passed,
    check_gradients,
    run_selftest,
    tiny_config,
)
from seqfold.training.evaluation import (
    GridPoint,
    compare_to_untrained,
    evaluate,
    rollout_episode,
)
from seqfold.training.report import write_report
from seqfold.training.trainer import train as train_model
from seqfold.utils.exceptions import (
    CheckpointError,
    ConfigError,
    DatasetError,
    SeqfoldError,
)
from seqfold.utils.logger import setup_logger
from seqfold.utils.xdg import XDGPaths

# Create typer app
app = typer.Typer(
    name="seqfold",
    help="Sequential cloth folding with a space-time attention policy",
    add_completion=False,
    no_args_is_help=True,
)
console = Console()

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

ConfigOption = typer.Option(
    ...,
    "--config",
    "-c",
    envvar="SEQFOLD_CONFIG",
    help="Path to the JSON run configuration",
)
SeedOption = typer.Option(
    None, "--seed", help="Override every seed in the configuration"
)
OutOption = typer.Option(
    None, "--out", "-o", help="Output directory (default: XDG data dir)"
)
WorkersOption = typer.Option(
    1,
    "--workers",
    envvar="FOLDS_WORKERS",
    min=1,
    help="Parallel trajectories or episodes",
)
LogLevelOption = typer.Option(
    "INFO",
    "--log-level",
    help="Set logging level",
    case_sensitive=False,
    click_type=click.Choice(LOG_LEVELS),
)
VerboseOption = typer.Option(
    False, "--verbose", "-v", help="Show error details and tracebacks"
)


@dataclass
class RunContext:
    """What every subcommand starts from."""

    manager: ConfigManager
    settings: RunConfig
    out_dir: Path
    seed: Optional[int]


def _start(
    subcommand: str,
    config_path: Optional[Path],
    seed: Optional[int],
    out: Optional[Path],
    log_level: str,
) -> RunContext:
    """Load the config, pick the output directory and echo provenance."""
    setup_logger(log_level)
    manager = ConfigManager(config_path)
    settings = manager.override_seed(seed)
    out_dir = out or XDGPaths().new_run_dir(subcommand)
    out_dir.mkdir(parents=True, exist_ok=True)
    setup_logger(log_level, log_to_file=str(out_dir / "run.log"))
    manager.echo(out_dir, seed=seed, subcommand=subcommand)
    logging.getLogger(__name__).debug(
        f"{subcommand}: config={manager.path}, out={out_dir}, seed={seed}"
    )
    return RunContext(manager, settings, out_dir, seed)


@contextmanager
def _handle_errors(verbose: bool) -> Iterator[None]:
    """Report application errors on the console and exit with 1."""
    logger = logging.getLogger(__name__)
    try:
        yield
    except (typer.Exit, click.exceptions.ClickException):
        raise
    except ConfigError as e:
        logger.debug("Configuration error", exc_info=True)
        console.print(f"[bold red]Configuration Error:[/] {e.message}")
        if e.detail:
            console.print(f"[dim]{e.detail}[/dim]")
        raise typer.Exit(1)
    except DatasetError as e:
        logger.debug("Dataset error", exc_info=True)
        console.print(f"[bold red]Dataset Error:[/] {e.message}")
        if e.detail and verbose:
            console.print(f"[dim]{e.detail}[/dim]")
        raise typer.Exit(1)
    except CheckpointError as e:
        logger.debug("Checkpoint error", exc_info=True)
        console.print(f"[bold red]Checkpoint Error:[/] {e.message}")
        if e.detail and verbose:
            console.print(f"[dim]{e.detail}[/dim]")
        raise typer.Exit(1)
    except SeqfoldError as e:
        # Any of our exceptions not caught by a more specific handler
        logger.debug("Application error", exc_info=True)
        console.print(f"[bold red]Error:[/] {e.message}")
        if e.detail and verbose:
            console.print(f"[dim]{e.detail}[/dim]")
        raise typer.Exit(1)
    except Exception as e:
        logger.exception("Unexpected error:")
        console.print(
            "[bold red]Unexpected Error:[/] An unexpected error occurred"
        )
        console.print(f"[red]{str(e)}[/red]")
        if verbose:
            console.print("\n[bold]Traceback:[/]")
            console.print_exception(show_locals=False)
        raise typer.Exit(1)


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        console=console,
        transient=True,
    )


@app.command("gen-random")
def gen_random(
    config_path: Path = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    workers: int = WorkersOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Collect random-action trajectories into a dataset."""
    with _handle_errors(verbose):
        ctx = _start("gen-random", config_path, seed, out, log_level)
        data = ctx.settings.data
        with _progress() as progress:
            task = progress.add_task(
                "Random trajectories", total=data.random_trajectories
            )
            manifest = generate_random_dataset(
                ctx.settings,
                ctx.out_dir,
                workers=workers,
                progress=lambda n: progress.update(task, completed=n),
            )
        console.print(
            f"[bold green]Success![/] {len(manifest.trajectories)} "
            f"trajectories written to: {ctx.out_dir}"
        )


@app.command("gen-demos")
def gen_demos(
    config_path: Path = ConfigOption,
    task_ids: Optional[List[TaskId]] = typer.Option(
        None, "--task", help="Only these tasks (default: data.tasks)"
    ),
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    workers: int = WorkersOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Record scripted demonstrations, one dataset per task."""
    with _handle_errors(verbose):
        ctx = _start("gen-demos", config_path, seed, out, log_level)
        tasks = task_ids or ctx.settings.data.tasks
        with _progress() as progress:
            for task_id in tasks:
                bar = progress.add_task(
                    task_id.value, total=ctx.settings.data.demos_per_task
                )
                generate_demo_dataset(
                    ctx.settings,
                    task_id,
                    ctx.out_dir / task_id.value,
                    workers=workers,
                    progress=lambda n, b=bar: progress.update(
                        b, completed=n
                    ),
                )
        console.print(
            f"[bold green]Success![/] {len(tasks)} demo datasets written "
            f"to: {ctx.out_dir}"
        )


@app.command("train")
def train(
    config_path: Path = ConfigOption,
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    workers: int = WorkersOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Pretrain on random data, then fine-tune on demonstrations."""
    with _handle_errors(verbose):
        ctx = _start("train", config_path, seed, out, log_level)
        with Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]Training {task.fields[info]}"),
            console=console,
            transient=not verbose,
        ) as progress:
            task = progress.add_task("train", total=None, info="")
            result = train_model(
                ctx.settings,
                ctx.out_dir,
                on_step=lambda step, loss: progress.update(
                    task, info=f"step {step} loss {loss:.4f}"
                ),
            )
        console.print(
            f"[bold green]Success![/] {result.steps} steps, final loss "
            f"{result.final_loss:.5f}. Checkpoint: {result.checkpoint}"
        )


def _load_model(settings: RunConfig, checkpoint: Optional[Path]):
    path = checkpoint or settings.eval.checkpoint or settings.train.checkpoint
    if path is None:
        raise ConfigError(
            "No checkpoint given",
            detail="pass --checkpoint or set eval.checkpoint",
        )
    return load_checkpoint(path)


def _summary_table(report: EvalReport) -> Table:
    table = Table(title=f"{report.label} ({report.grid} grid)")
    table.add_column("Task")
    table.add_column("Episodes", justify="right")
    table.add_column("MPD mm", justify="right")
    table.add_column("MIoU", justify="right")
    table.add_column("Do-nothing MPD mm", justify="right")
    for s in report.summaries():
        table.add_row(
            s.task,
            str(s.episodes),
            f"{s.mpd_mean:.2f} ± {s.mpd_std:.2f}",
            f"{s.miou_mean:.3f}",
            f"{s.baseline_mpd_mean:.2f}",
        )
    return table


@app.command("eval")
def eval_command(
    config_path: Path = ConfigOption,
    checkpoint: Optional[Path] = typer.Option(
        None, "--checkpoint", help="Checkpoint (default: eval.checkpoint)"
    ),
    untrained: bool = typer.Option(
        False,
        "--untrained",
        help="Also evaluate a randomly initialized model",
    ),
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    workers: int = WorkersOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Evaluate a checkpoint on the configured cloth grid."""
    with _handle_errors(verbose):
        ctx = _start("eval", config_path, seed, out, log_level)
        settings = ctx.settings
        model = _load_model(settings, checkpoint)
        reports = [evaluate(model, settings, "policy", workers)]
        if untrained:
            baseline = FoldPolicyNet(model.config, seed=settings.eval.seed)
            reports.append(evaluate(baseline, settings, "untrained", workers))
        for report in reports:
            target = ctx.out_dir if report.label == "policy" else (
                ctx.out_dir / report.label
            )
            write_report(
                report,
                target,
                camera_height=settings.sim.camera_height,
                write_frames=settings.eval.write_frames,
            )
            console.print(_summary_table(report))
        if untrained:
            for ordering in compare_to_untrained(*reports):
                mark = "[green]holds[/]" if ordering.holds else "[red]fails[/]"
                console.print(
                    f"{ordering.task}: policy < untrained and do-nothing "
                    f"MPD {mark}"
                )
        console.print(
            f"[bold green]Success![/] Report saved to: {ctx.out_dir}"
        )


@app.command("rollout")
def rollout(
    config_path: Path = ConfigOption,
    task_id: TaskId = typer.Option(
        TaskId.DOUBLE_TRIANGLE, "--task", help="Task to fold"
    ),
    size: float = typer.Option(
        1.0, "--size", min=0.1, help="Cloth size as a factor of canonical"
    ),
    rotation: float = typer.Option(
        0.0, "--rotation", help="Cloth rotation in degrees"
    ),
    checkpoint: Optional[Path] = typer.Option(
        None, "--checkpoint", help="Checkpoint (default: eval.checkpoint)"
    ),
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Run one episode and write its frames."""
    with _handle_errors(verbose):
        ctx = _start("rollout", config_path, seed, out, log_level)
        settings = ctx.settings
        model = _load_model(settings, checkpoint)
        report = rollout_episode(
            model, task_id, settings, GridPoint(size, rotation)
        )
        row = report.rows[0]
        write_report(
            report, ctx.out_dir, camera_height=settings.sim.camera_height
        )
        console.print(
            f"[bold green]Success![/] {row.steps} steps, MPD "
            f"{row.mpd_mm:.2f} mm, MIoU {row.miou:.3f}. "
            f"Frames in: {ctx.out_dir / 'frames'}"
        )


def _gradcheck_panel(report: GradCheckReport) -> Panel:
    colour = "green" if report.passed else "red"
    return Panel.fit(
        f"max relative error: {report.max_relative_error:.3e}\n"
        f"worst parameter:    {report.worst_parameter}\n"
        f"coordinates:        {report.coordinates_checked}\n"
        f"tolerance:          {report.tolerance:.0e}",
        title="Gradient check",
        border_style=colour,
    )


@app.command("gradcheck")
def gradcheck(
    config_path: Path = ConfigOption,
    full: bool = typer.Option(
        False, "--full", help="Check the configured model, not the tiny one"
    ),
    coords: Optional[int] = typer.Option(
        4, "--coords", help="Coordinates sampled per parameter (0 = all)"
    ),
    seed: Optional[int] = SeedOption,
    out: Optional[Path] = OutOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Compare analytic and finite-difference gradients of the loss."""
    with _handle_errors(verbose):
        ctx = _start("gradcheck", config_path, seed, out, log_level)
        config = tiny_config(variant=ctx.settings.model.variant)
        if full:
            config = ctx.settings.model.model_copy(
                update={"dtype": "float64"}
            )
        report = check_gradients(
            config, max_coords=coords or None, seed=ctx.seed or 0
        )
        console.print(_gradcheck_panel(report))
        if not report.passed:
            raise typer.Exit(1)


@app.command("selftest")
def selftest(
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Run the numeric and simulator self-checks."""
    with _handle_errors(verbose):
        setup_logger(log_level)
        with Progress(
            SpinnerColumn(),
            TextColumn("[bold blue]Running self-checks..."),
            transient=True,
        ) as progress:
            progress.add_task("selftest", total=None)
            results = run_selftest()
        table = Table(title="Self-test")
        table.add_column("Check")
        table.add_column("Result")
        table.add_column("Detail")
        for r in results:
            mark = "[green]pass[/]" if r.passed else "[red]FAIL[/]"
            table.add_row(r.name, mark, r.detail)
        console.print(table)
        if not all_passed(results):
            raise typer.Exit(1)


@app.command("show-config")
def show_config(
    config_path: Path = ConfigOption,
    log_level: str = LogLevelOption,
    verbose: bool = VerboseOption,
) -> None:
    """Print the effective configuration."""
    with _handle_errors(verbose):
        setup_logger(log_level)
        manager = ConfigManager(config_path)
        console.print(
            Panel.fit(
                Pretty(manager.show_config()),
                title=f"Effective Configuration ({config_path})",
                border_style="blue",
            )
        )


def _usage() -> str:
    command = typer.main.get_command(app)
    with click.Context(command, info_name="seqfold") as ctx:
        return command.get_help(ctx)


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code.

    0 on success, 2 on a usage error, 1 on any runtime error.
    """
    args = list(sys.argv[1:] if argv is None else argv)
    if not args:
        typer.echo(_usage(), err=True)
        return 2
    try:
        result = app(args=args, standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return 2
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        return 1
    except SeqfoldError as e:
        typer.echo(f"Error: {e}", err=True)
        return 1
    except Exception as e:
        typer.echo(f"Unexpected error: {e}", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(dispatch())
