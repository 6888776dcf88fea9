"""Command-line entry point of the workbench.

Exit codes: 0 on success, 1 on a negative verdict, 2 on usage, parse or I/O errors.
Results go to stdout, logs to stderr.
"""

import functools
import json
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import click
from dotenv import load_dotenv

from checker import Derivation, check_derivation, set_extension
from constants import CLL, DERIVATION_SUFFIX, ILL, PROCESS_SUFFIX, SYSTEMS, ULL, ULLM
from core import process_size
from dynamics import run_closed, step
from errors import SessionForgeError, SyntaxFault
from harness import SUITES, GenConfig, run_property
from inference import InferenceBudget, infer, infer_all
from settings import SettingsManager
from syntax import parse_derivation, parse_judgment, parse_process, parse_type, print_derivation, print_judgment
from transform import (
    eliminate_moves, eliminate_nonstar, fragment_report, locality_diagnose, to_classical,
    to_intuitionistic, to_united,
)

logger = logging.getLogger(__name__)

TRANSLATIONS: Dict[Tuple[str, str], Callable] = {
    (ULL, ULLM): eliminate_nonstar,
    (ULLM, ULL): eliminate_moves,
    (ULL, CLL): to_classical,
    (CLL, ULL): to_united,
    (ULL, ILL): to_intuitionistic,
}


class InputError(click.ClickException):
    """Unreadable or unparsable input."""
    exit_code = 2


class Verdict(click.ClickException):
    """The library answered no."""
    exit_code = 1


def _guarded(command):
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except SyntaxFault as e:
            raise InputError(str(e))
        except SessionForgeError as e:
            raise Verdict(str(e))
        except (OSError, ValueError) as e:
            raise InputError(str(e))
    return wrapper


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _emit(ctx: click.Context, payload, text: str):
    if ctx.obj["json"]:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(text)


def _derivation(path: str, system: Optional[str] = None) -> Derivation:
    doc = parse_derivation(_read(path), path)
    if system is not None and doc.system != system:
        raise InputError(f"{path} holds a {doc.system} derivation, not {system}")
    return doc.derivation


def _budget(ctx: click.Context, max_depth: Optional[int], max_backtracks: Optional[int],
            types: Sequence[str]) -> InferenceBudget:
    settings = ctx.obj["settings"]
    return InferenceBudget(
        max_depth=settings.get("inference", "max_depth") if max_depth is None else max_depth,
        max_backtracks=settings.get("inference", "max_backtracks") if max_backtracks is None else max_backtracks,
        universe=tuple(parse_type(t) for t in types),
    )


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output on stdout.")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug logs.")
@click.option("--mix", is_flag=True, help="Enable the mix and empty rules.")
@click.pass_context
def cli(ctx, as_json, verbose, mix):
    """Session-typed process calculus workbench."""
    load_dotenv()
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s",
                        force=True)
    ctx.obj = {
        "json": as_json,
        "config": set_extension("mix" if mix else "none"),
        "mix": mix,
        "settings": SettingsManager(),
    }


_FILE = click.Path(exists=True, dir_okay=False)
_SYSTEM = click.Choice(SYSTEMS)


@cli.command()
@click.option("--system", type=_SYSTEM, default=None, help="System the input must belong to.")
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def check(ctx, system, path):
    """Validate a derivation document, or search for a derivation of a judgment."""
    config = ctx.obj["config"]
    if path.endswith(DERIVATION_SUFFIX):
        d = _derivation(path, system)
        violation = check_derivation(d, config)
        if violation is not None:
            _emit(ctx, {"valid": False, "path": list(violation.path), "rule": violation.rule,
                        "clause": violation.clause}, f"invalid: {violation}")
            ctx.exit(1)
        _emit(ctx, {"valid": True, "rules": d.size()}, f"valid {d.system} derivation ({d.size()} rules)")
        return
    j = parse_judgment(_read(path).strip(), system, path)
    d = infer(j, _budget(ctx, None, None, ()), config)
    _emit(ctx, {"valid": True, "rules": d.size()}, f"derivable: {print_judgment(j)}")


@cli.command("infer")
@click.option("--system", type=_SYSTEM, default=None, help="Target system.")
@click.option("--max-depth", type=int, default=None)
@click.option("--max-backtracks", type=int, default=None)
@click.option("--type", "types", multiple=True, help="Extra proposition for the type universe.")
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def infer_command(ctx, system, max_depth, max_backtracks, types, path):
    """Derive a judgment, or every judgment of a process file over the given types."""
    config = ctx.obj["config"]
    budget = _budget(ctx, max_depth, max_backtracks, types)
    if path.endswith(PROCESS_SUFFIX):
        process = parse_process(_read(path), path)
        found = infer_all(process, system or ULL, budget, config)
        payload = [{"judgment": print_judgment(j), "rules": sorted(d.rules())} for j, d in found]
        _emit(ctx, payload, "\n".join([print_judgment(j) for j, _ in found] +
                                      [f"{len(found)} derivations"]))
        if not found:
            ctx.exit(1)
        return
    j = parse_judgment(_read(path).strip(), system, path)
    d = infer(j, budget, config)
    click.echo(print_derivation(d), nl=False)


@cli.command()
@click.option("--steps", type=int, default=1, show_default=True, help="Reduce along first redexes.")
@click.option("--all-redexes", is_flag=True, help="List every one-step reduct instead.")
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def reduce(ctx, steps, all_redexes, path):
    """Rewrite a process by the reduction rules."""
    process = parse_process(_read(path), path)
    if all_redexes:
        found = step(process)
        payload = [dict(label.to_dict(), after=str(reduct)) for label, reduct in found]
        _emit(ctx, payload, "\n".join(f"{label.rule} at {'.'.join(label.position) or 'root'}: {reduct}"
                                      for label, reduct in found) or "no redex")
        return
    taken: List[dict] = []
    for _ in range(steps):
        found = step(process)
        if not found:
            break
        label, process = found[0]
        taken.append(dict(label.to_dict(), after=str(process)))
    _emit(ctx, {"steps": taken, "result": str(process)},
          "\n".join([f"{s['rule']}: {s['after']}" for s in taken] + [str(process)]))


@cli.command()
@click.option("--fuel", type=int, default=None, help="Step limit; defaults to a multiple of the size.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None,
              help="Write the reduction trace as JSON.")
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def run(ctx, fuel, trace_path, path):
    """Run a closed program to its final process."""
    d = _derivation(path)
    if fuel is None:
        fuel = ctx.obj["settings"].get("run", "fuel_factor") * process_size(d.conclusion.process)
    trace: List[dict] = []
    try:
        final = run_closed(d, fuel, trace, ctx.obj["config"])
    finally:
        if trace_path:
            with open(trace_path, "w", encoding="utf-8") as f:
                json.dump(trace, f, indent=2)
    _emit(ctx, {"steps": len(trace), "result": str(final)}, str(final))


@cli.command()
@click.option("--from", "source", type=_SYSTEM, required=True)
@click.option("--to", "target", type=_SYSTEM, required=True)
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def translate(ctx, source, target, path):
    """Translate a derivation between systems; prints a derivation document."""
    if (source, target) not in TRANSLATIONS:
        supported = ", ".join(f"{a}->{b}" for a, b in TRANSLATIONS)
        raise click.BadParameter(f"unsupported translation {source}->{target}; supported: {supported}")
    d = _derivation(path, source)
    click.echo(print_derivation(TRANSLATIONS[source, target](d, ctx.obj["config"])), nl=False)


@cli.command()
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def classify(ctx, path):
    """Report r-degrees and membership in the intuitionistic fragment."""
    report = fragment_report(_derivation(path, ULL), ctx.obj["config"])
    if report.ill_member:
        text = f"max r-degree {report.max_r_degree}; inside the intuitionistic fragment"
    else:
        where = ".".join(map(str, report.witness)) or "root"
        text = f"max r-degree {report.max_r_degree}; outside the intuitionistic fragment at node {where}"
    _emit(ctx, report.to_dict(), text)
    if not report.ill_member:
        ctx.exit(1)


@cli.command()
@click.argument("path", type=_FILE)
@click.pass_context
@_guarded
def diagnose(ctx, path):
    """List non-local uses of received names."""
    found = locality_diagnose(parse_process(_read(path), path))
    _emit(ctx, [d.to_dict() for d in found],
          "\n".join(f"{d.kind} {d.name}: {d.message}" for d in found) or "local")
    if found:
        ctx.exit(1)


@cli.command()
@click.option("--suite", "suites", type=click.Choice(SUITES), multiple=True,
              help="Suite to run; repeatable. Runs every suite by default.")
@click.option("--cases", type=int, default=None)
@click.option("--seed", type=int, default=None, help="Overridden by SESSIONFORGE_SEED.")
@click.option("--depth", type=int, default=None)
@click.pass_context
@_guarded
def fuzz(ctx, suites, cases, seed, depth):
    """Run property suites over generated derivations."""
    settings: SettingsManager = ctx.obj["settings"]
    cfg = GenConfig(
        seed=settings.fuzz_seed(seed),
        max_depth=settings.get("fuzz", "depth") if depth is None else depth,
        type_depth=settings.get("fuzz", "type_depth"),
        mix=ctx.obj["mix"],
        oracle_size=settings.get("oracle", "size_bound"),
        oracle_cap=settings.get("oracle", "cap"),
    )
    cases = settings.get("fuzz", "cases") if cases is None else cases
    reports = [run_property(name, cfg, cases) for name in (suites or SUITES)]
    lines = []
    for report in reports:
        lines.append(f"{report.name}: {report.cases} cases, {len(report.failures)} failures "
                     f"({report.wall_time:.2f}s)")
        lines += [f"  seed {f.seed}: {f.message}\n    {f.counterexample}" for f in report.failures]
    _emit(ctx, {"seed": cfg.seed, "reports": [r.to_dict() for r in reports]}, "\n".join(lines))
    if any(r.failures for r in reports):
        ctx.exit(1)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="sessionforge",
                      standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        return 2
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
