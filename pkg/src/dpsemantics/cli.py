"""Command-line interface.

Emits every table and curve the library computes as CSV, JSON, or SVG.
Relative --out paths resolve against $DPSEM_OUT_DIR when it is set.
Exit codes: 0 ok, 2 usage error, 3 I/O failure, 4 internal invariant
violation.
"""

from __future__ import annotations

import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import accountants, bayes, census, dgauss, svg
from .tradeoff import (
    GaussianExactCurve,
    gaussian_exact_power,
    pure_dp_power_bound,
    zcdp_power_bound,
)

LEVELS_TABLE = (0.01, 0.05, 0.10)


def _parse_grid(spec: str) -> list[float]:
    try:
        start, stop, points = spec.split(":")
        start_f, stop_f, n = float(start), float(stop), int(points)
    except ValueError:
        raise click.BadParameter(f"grid must be start:stop:points, got {spec!r}")
    if n < 2:
        raise click.BadParameter("grid needs at least 2 points")
    step = (stop_f - start_f) / (n - 1)
    return [start_f + i * step for i in range(n)]


def _mu_from(mu: float | None, rho: float | None) -> float:
    if (mu is None) == (rho is None):
        raise click.BadParameter("provide exactly one of --mu or --rho")
    if mu is not None:
        return mu
    return math.sqrt(2.0 * rho)


def _resolve_out(path: str) -> Path:
    base = os.environ.get("DPSEM_OUT_DIR")
    p = Path(path)
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        click.echo(text, nl=False)
        return
    try:
        _resolve_out(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot write {path}: {exc}", err=True)
        sys.exit(3)


def _render_points(
    points: list[tuple[float, float]],
    header: tuple[str, str],
    fmt: str,
    kind: str,
) -> str:
    if fmt == "csv":
        lines = [f"{header[0]},{header[1]}"]
        lines.extend(f"{x!r},{y!r}" for x, y in points)
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return (
            json.dumps(
                {"kind": kind, "columns": list(header), "points": points},
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
    return svg.line_chart(points, kind, header[0], header[1])


CURVE_KINDS = (
    "adp-gaussian",
    "pbdp-gaussian",
    "zcdp-bound",
    "tradeoff-pure",
    "tradeoff-gaussian",
    "tradeoff-zcdp",
    "bayes-known-rest",
    "bayes-arbitrary",
    "bayes-pbdp",
)


@click.group()
def main() -> None:
    """Differential-privacy semantics toolkit."""


@main.command()
@click.argument("kind", type=click.Choice(CURVE_KINDS))
@click.option("--mu", type=float, default=None, help="Gaussian separation parameter.")
@click.option("--rho", type=float, default=None, help="zCDP budget; mu = sqrt(2 rho).")
@click.option("--eps", type=float, default=None, help="pure-DP bound parameter.")
@click.option("--grid", "grid_spec", default=None, help="start:stop:points sampling grid.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "svg"]), default="csv")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def curve(kind, mu, rho, eps, grid_spec, fmt, out) -> None:
    """Sample one semantic curve onto a grid and serialize it."""
    if kind == "tradeoff-pure":
        if eps is None:
            raise click.BadParameter("tradeoff-pure needs --eps")
        grid = _parse_grid(grid_spec or "0:1:101")
        points = [(x, pure_dp_power_bound(eps, x)) for x in grid]
        header = ("level", "power")
    elif kind == "tradeoff-gaussian":
        m = _mu_from(mu, rho)
        grid = _parse_grid(grid_spec or "0:1:101")
        points = [(x, gaussian_exact_power(m, x)) for x in grid]
        header = ("level", "power")
    elif kind == "tradeoff-zcdp":
        if rho is None:
            raise click.BadParameter("tradeoff-zcdp needs --rho")
        grid = _parse_grid(grid_spec or "0:1:101")
        points = [(x, zcdp_power_bound(rho, x)) for x in grid]
        header = ("level", "power")
    elif kind == "adp-gaussian":
        m = _mu_from(mu, rho)
        grid = _parse_grid(grid_spec or "0:12:200")
        c = accountants.adp_gaussian_curve(m)
        points = [(x, c.delta(x)) for x in grid]
        header = ("eps", "delta")
    elif kind == "zcdp-bound":
        if rho is None:
            raise click.BadParameter("zcdp-bound needs --rho")
        grid = _parse_grid(grid_spec or "0:30:200")
        points = [(x, accountants.zcdp_to_delta(rho, x)) for x in grid]
        header = ("eps", "delta")
    elif kind == "bayes-known-rest":
        if rho is None:
            raise click.BadParameter("bayes-known-rest needs --rho")
        grid = _parse_grid(grid_spec or "0:30:200")
        profile = accountants.ZcdpProfile(rho)
        points = [(x, bayes.bayes_known_rest_delta(profile, x)) for x in grid]
        header = ("eps", "delta")
    elif kind == "bayes-arbitrary":
        if rho is None:
            raise click.BadParameter("bayes-arbitrary needs --rho")
        grid = _parse_grid(grid_spec or "0:30:200")
        profile = accountants.ZcdpProfile(rho)
        points = [(x, bayes.bayes_arbitrary_prior_delta(profile, x)) for x in grid]
        header = ("eps", "delta")
    else:  # pbdp-gaussian / bayes-pbdp: eps as a function of delta
        m = _mu_from(mu, rho)
        grid = _parse_grid(grid_spec or "1e-6:0.5:200")
        if kind == "pbdp-gaussian":
            points = [(d, accountants.gaussian_pbdp_epsilon(m, d)) for d in grid]
        else:
            tc = GaussianExactCurve(m)
            points = [(d, bayes.bayes_pbdp_epsilon(tc, d)) for d in grid]
        header = ("delta", "eps")
    _write_text(out, _render_points(points, header, fmt, kind))


@main.command()
def tables() -> None:
    """Print the reference power tables with provenance notes."""
    eps_grid = (0.1, 0.5, 1.0, 2.0, 4.0)
    click.echo("maximum power under pure eps-DP")
    click.echo("level    " + "  ".join(f"eps={e:<5g}" for e in eps_grid))
    for level in LEVELS_TABLE:
        row = "  ".join(f"{pure_dp_power_bound(e, level):<9.3f}" for e in eps_grid)
        click.echo(f"{level:<9.2f}{row}")
    click.echo(
        "note: widely circulated copies of this table print 0.820 at "
        "(eps=0.5, level=0.05) and 0.550 at (eps=4, level=0.01); the bound "
        "evaluates to 0.082 and 0.546."
    )
    click.echo("")

    table = census.production_table()
    rho = float(census.total_rho(table))
    click.echo(f"production release, rho = {rho:g}")
    click.echo("level    gaussian   zcdp-bound")
    mu = math.sqrt(2.0 * rho)
    for level in LEVELS_TABLE:
        click.echo(
            f"{level:<9.2f}{gaussian_exact_power(mu, level):<11.2f}"
            f"{zcdp_power_bound(rho, level):<10.2f}"
        )
    click.echo("")

    click.echo("scenario rho and power at levels 0.01 / 0.05 / 0.10")
    for s in census.builtin_scenarios():
        r = float(census.scenario_rho(table, s))
        powers = " / ".join(f"{census.scenario_power(r, lv):.2f}" for lv in LEVELS_TABLE)
        click.echo(f"{s.name}: rho = {r:.4f}  power = {powers}  ({s.narrative})")


@main.command()
@click.argument("name_or_file")
@click.option("--grid", "grid_spec", default="1e-6:0.5:200", help="delta grid for the eps curve.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "svg"]), default="csv")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def scenario(name_or_file, grid_spec, fmt, out) -> None:
    """Summarize one builtin (A-H) or file-defined scenario."""
    table = census.production_table()
    try:
        sc = census.builtin_scenario(name_or_file)
    except KeyError:
        path = Path(name_or_file)
        if not path.exists():
            raise click.UsageError(
                f"{name_or_file!r} is neither a builtin scenario nor a file"
            )
        try:
            sc = census.parse_scenario(path.read_text(encoding="utf-8"))
        except census.AllocationParseError as exc:
            raise click.UsageError(str(exc))
    rho = float(census.scenario_rho(table, sc))
    click.echo(f"scenario {sc.name}: rho = {rho:.6g}")
    if rho > 0:
        for level in LEVELS_TABLE:
            click.echo(
                f"power at level {level:.2f}: {census.scenario_power(rho, level):.4f}"
            )
        grid = _parse_grid(grid_spec)
        points = [(d, census.scenario_bayes_epsilon(rho, d)) for d in grid]
        if out is not None:
            _write_text(out, _render_points(points, ("delta", "eps"), fmt, f"scenario-{sc.name}"))
    else:
        click.echo("empty selection: non-informative release, power equals level")


@main.command()
@click.argument("allocation")
@click.option("--n", "n_samples", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--grid", "grid_spec", default="0:1:201", help="level grid for the ROC export.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def mc(allocation, n_samples, seed, grid_spec, out) -> None:
    """Monte Carlo ROC of the discrete Gaussian release.

    ALLOCATION is `production`, `scenario:A`..`scenario:H`, or `file:PATH`
    pointing at a scenario file.
    """
    table = census.production_table()
    if allocation == "production":
        queries = dgauss.affected_queries_from_table(table)
    elif allocation.startswith("scenario:"):
        try:
            sc = census.builtin_scenario(allocation.split(":", 1)[1])
        except KeyError as exc:
            raise click.UsageError(str(exc))
        queries = dgauss.affected_queries_from_table(table, sc)
    elif allocation.startswith("file:"):
        path = Path(allocation.split(":", 1)[1])
        if not path.exists():
            raise click.UsageError(f"scenario file {path} does not exist")
        try:
            sc = census.parse_scenario(path.read_text(encoding="utf-8"))
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except census.AllocationParseError as exc:
            raise click.UsageError(str(exc))
        queries = dgauss.affected_queries_from_table(table, sc)
    else:
        raise click.UsageError(f"unknown allocation {allocation!r}")
    try:
        roc = dgauss.mc_roc(queries, n_samples, seed)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    grid = _parse_grid(grid_spec)
    lines = ["level,power,se"]
    for level in grid:
        lines.append(f"{level!r},{roc.power_at(level)!r},{roc.standard_error(level)!r}")
    _write_text(out, "\n".join(lines) + "\n")
    manifest = roc.manifest()
    _write_text(out + ".manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    click.echo(f"wrote {out} ({n_samples} samples, seed {seed})")


@main.command()
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def allocation(out) -> None:
    """Emit the production allocation table for editing."""
    _write_text(out, census.emit_allocation(census.production_table()))


@main.group()
def odometer() -> None:
    """Budget odometer over a text ledger file."""


def _write_ledger(path: str, text: str) -> None:
    # ledger paths are state files, used verbatim on read and write alike,
    # so the $DPSEM_OUT_DIR convention does not apply
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot write {path}: {exc}", err=True)
        sys.exit(3)


@odometer.command("init")
@click.option("--cap", required=True)
@click.option("--ledger", type=click.Path(dir_okay=False), required=True)
def odometer_init(cap, ledger) -> None:
    try:
        odo = accountants.Odometer(Fraction(cap))
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"bad cap {cap!r}")
    _write_ledger(ledger, odo.to_ledger_text())


@odometer.command("register")
@click.argument("label")
@click.argument("rho")
@click.option("--ledger", type=click.Path(dir_okay=False, exists=True), required=True)
def odometer_register(label, rho, ledger) -> None:
    text = Path(ledger).read_text(encoding="utf-8")
    odo = accountants.Odometer.from_ledger_text(text)
    try:
        remaining = odo.register(label, Fraction(rho))
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"bad rho {rho!r}")
    except accountants.BudgetExceededError as exc:
        click.echo(f"refused: {exc}", err=True)
        sys.exit(2)
    _write_ledger(ledger, odo.to_ledger_text())
    click.echo(f"registered {label}: remaining budget {float(remaining):g}")


@odometer.command("show")
@click.option("--ledger", type=click.Path(dir_okay=False, exists=True), required=True)
def odometer_show(ledger) -> None:
    odo = accountants.Odometer.from_ledger_text(Path(ledger).read_text(encoding="utf-8"))
    click.echo(odo.to_ledger_text(), nl=False)
    click.echo(f"# spent {float(odo.spent):g}, remaining {float(odo.remaining):g}")


@main.group()
def convert() -> None:
    """Ad-hoc conversions between accounting frameworks."""


@convert.command("zcdp-delta")
@click.option("--rho", type=float, required=True)
@click.option("--eps", type=float, required=True)
def convert_zcdp_delta(rho, eps) -> None:
    try:
        click.echo(repr(accountants.zcdp_to_delta(rho, eps)))
    except ValueError as exc:
        raise click.BadParameter(str(exc))


@convert.command("pbdp-eps")
@click.option("--mu", type=float, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--delta", type=float, required=True)
def convert_pbdp_eps(mu, rho, delta) -> None:
    m = _mu_from(mu, rho)
    try:
        click.echo(repr(accountants.gaussian_pbdp_epsilon(m, delta)))
    except ValueError as exc:
        raise click.BadParameter(str(exc))


def run() -> None:
    """Entry point with the documented exit-code contract."""
    try:
        main.main(standalone_mode=True)
    except OSError as exc:  # pragma: no cover - exercised via _write_text
        click.echo(f"I/O error: {exc}", err=True)
        sys.exit(3)
    except AssertionError as exc:  # pragma: no cover
        click.echo(f"internal invariant violated: {exc}", err=True)
        sys.exit(4)


if __name__ == "__main__":
    run()
