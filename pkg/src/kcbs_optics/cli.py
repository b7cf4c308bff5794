"""Command-line entry point: ``kcbs-optics <command> [options]``.

Every command prints a one-line summary.  Tables go to ``--output`` or, when
that is omitted and ``KCBS_OUTPUT_DIR`` is set, to ``$KCBS_OUTPUT_DIR/<command>.<format>``.
Exit codes: 0 success, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import click
import numpy as np

from kcbs_optics import hidden_variables as hv
from kcbs_optics import photon_stats as ps
from kcbs_optics.kcbs import evaluate
from kcbs_optics.measurement import CSV_HEADER
from kcbs_optics.optics import (
    N_OBSERVABLES,
    OPTIMAL_THETA,
    bench_compile,
    kcbs_family,
    optimal_family,
    optimal_phis,
)
from kcbs_optics.sampler import (
    SWEEP_HEADER,
    COUNTS_HEADER,
    NoCoincidences,
    ShotConfig,
    estimate_s,
    loss_sweep,
    sample_experiment,
    counts_rows,
)
from kcbs_optics.states import InvalidState, PhotonNumberMixture, make_coherent, make_single_photon

OUTPUT_DIR_ENV = "KCBS_OUTPUT_DIR"
COMMANDS = ("ideal", "coherent", "fock", "mixture", "sample", "loss-sweep", "oracle", "bench")
EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    format: str = "csv"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.command in ("sample", "loss-sweep") and self.params.get("seed") is None:
            raise ConfigError(f"{self.command} requires --seed")
        if self.output is not None:
            parent = Path(self.output).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ConfigError(f"cannot write to {self.output}: directory missing or not writable")

    def output_path(self) -> Optional[Path]:
        if self.output is not None:
            return Path(self.output)
        directory = os.environ.get(OUTPUT_DIR_ENV)
        if directory:
            return Path(directory) / f"{self.command}.{self.format}"
        return None

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Artifact:
    summary: str
    header: list
    rows: list
    record: dict


def _fmt(x) -> str:
    return "nan" if x is None else f"{x:.10f}"


def _family(params: dict):
    theta, phis = params.get("theta"), params.get("phis")
    modes = params.get("modes", 3)
    if theta is None and phis is None:
        return optimal_family(modes)
    theta = OPTIMAL_THETA if theta is None else theta
    phis = optimal_phis() if phis is None else tuple(phis)
    if len(phis) != N_OBSERVABLES:
        raise ConfigError("--phis needs exactly five angles")
    family = kcbs_family(theta, phis, modes)
    if not family.is_orthogonal_cycle():
        raise ConfigError("adjacent click states are not orthogonal for these angles")
    return family


def _verdict_text(s_value: float) -> str:
    report = ps.nonclassicality_verdict(s_value)
    tag = "VIOLATION" if report.violates_kcbs else "no-violation"
    flag = " one-or-two-photon" if report.low_photon_number_flag else ""
    return f"{tag} verdict={report.verdict.value}{flag}"


def _run_ideal(p: dict) -> Artifact:
    family = _family(p)
    result = evaluate(family, make_single_photon(1, family.mode_count))
    summary = f"S={_fmt(result.s_value)} kappa={_fmt(result.kappa)} {_verdict_text(result.s_value)}"
    return Artifact(summary, CSV_HEADER, [t.csv_row() for t in result.per_context], result.to_json())


def _run_coherent(p: dict) -> Artifact:
    family = _family(p)
    alpha_sq = p["alpha_sq"]
    result = evaluate(family, make_coherent(math.sqrt(alpha_sq), family.mode_count))
    formula = ps.s_coherent(alpha_sq)
    summary = f"alpha_sq={_fmt(alpha_sq)} S={_fmt(result.s_value)} formula={_fmt(formula)} {_verdict_text(result.s_value)}"
    record = {"result": result.to_json(), "formula": formula}
    if p.get("sweep_max") is not None:
        grid = np.linspace(0.0, p["sweep_max"], p["sweep_steps"])
        rows = [list(r) for r in ps.coherent_sweep(grid)]
        record["sweep"] = rows
        return Artifact(summary, ["alpha_sq", "s_coherent"], rows, record)
    return Artifact(summary, CSV_HEADER, [t.csv_row() for t in result.per_context], record)


def _run_fock(p: dict) -> Artifact:
    n = p["n"]
    s = ps.s_fock(n)
    rows = [list(r) for r in ps.fock_table(max(n, p.get("table_max") or n))]
    return Artifact(f"n={n} S={_fmt(s)} {_verdict_text(s)}", ["n", "s_fock"], rows, {"S": s, "table": rows})


def _run_mixture(p: dict) -> Artifact:
    mixture = PhotonNumberMixture(np.array(p["populations"]))
    s = ps.s_mixture(mixture)
    rows = [[n, float(rho), ps.s_fock(n)] for n, rho in enumerate(mixture.populations)]
    return Artifact(f"S={_fmt(s)} {_verdict_text(s)}", ["n", "rho_nn", "s_fock"], rows, {"S": s})


def _shot_config(p: dict, loss_rate: float = 0.0) -> ShotConfig:
    return ShotConfig(p["shots"], p["reps"], p["seed"], loss_rate, p.get("monitor_loss", False))


def _run_sample(p: dict) -> Artifact:
    family = _family(p)
    config = _shot_config(p, p.get("loss_rate", 0.0))
    counts = sample_experiment(config, family)
    s_hat, sigma = estimate_s(counts)
    summary = f"S={_fmt(s_hat)} sigma={_fmt(sigma)} {_verdict_text(s_hat)}"
    record = {
        "S": s_hat,
        "sigma": sigma,
        "shot_config": config.to_json(),
        "family": {"theta": family.theta, "phis": list(family.phis)},
        "contexts": [c.to_json() for c in counts],
    }
    return Artifact(summary, COUNTS_HEADER, counts_rows(counts), record)


def _run_loss_sweep(p: dict) -> Artifact:
    family = _family(p)
    points = loss_sweep(p["grid"], _shot_config(p), family)
    rows = [pt.row() for pt in points]
    crossing = next((pt.loss_rate for pt in points if pt.s_ideal <= 2.0), None)
    summary = f"points={len(points)} first_loss_without_violation={_fmt(crossing)} threshold={_fmt(1 - ps.loss_threshold_single())}"
    record = {"points": rows, "family": {"theta": family.theta, "phis": list(family.phis)}}
    return Artifact(summary, SWEEP_HEADER, rows, record)


def _run_oracle(p: dict) -> Artifact:
    low, high = hv.classical_kappa_range()
    s_max = hv.classical_s_max()
    max_gap = max(abs(ps.generating_oracle(n) - ps.s_fock(n)) for n in range(ps.ORACLE_MAX_N + 1))
    summary = f"kappa_min={low} kappa_max={high} S_max={s_max} fock_oracle_max_gap={max_gap:.3e}"
    record = {"kappa_min": low, "kappa_max": high, "s_max": s_max, "fock_oracle_max_gap": max_gap}
    return Artifact(summary, hv.ASSIGNMENT_CSV_HEADER, hv.assignment_rows(), record)


def _run_bench(p: dict) -> Artifact:
    family = _family(p)
    contexts = [p["context"]] if p.get("context") else list(range(1, N_OBSERVABLES + 1))
    settings = [bench_compile(j, family) for j in contexts]
    rows = []
    for s in settings:
        for entry in s.to_json()["settings"]:
            rows.append([s.context, entry["element"], entry["modes"][0], entry["modes"][1],
                         entry["radians"], entry["degrees"], s.verified])
    ok = all(s.verified for s in settings)
    summary = f"contexts={len(settings)} verified={ok}"
    header = ["context", "element", "mode_a", "mode_b", "radians", "degrees", "verified"]
    return Artifact(summary, header, rows, {"settings": [s.to_json() for s in settings]})


_RUNNERS = {
    "ideal": _run_ideal,
    "coherent": _run_coherent,
    "fock": _run_fock,
    "mixture": _run_mixture,
    "sample": _run_sample,
    "loss-sweep": _run_loss_sweep,
    "oracle": _run_oracle,
    "bench": _run_bench,
}


def render(artifact: Artifact, config: RunConfig) -> str:
    if config.format == "json":
        return json.dumps({"config": config.to_json(), "summary": artifact.summary, **artifact.record}, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(artifact.header)
    writer.writerows(artifact.rows)
    return buf.getvalue()


def run(config: RunConfig) -> int:
    """Execute ``config``, write its table if a destination is set, return the exit code."""
    try:
        config.validate()
        artifact = _RUNNERS[config.command](config.params)
    except (ConfigError, InvalidState, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    except (NoCoincidences, RuntimeError, OSError) as exc:
        click.echo(f"runtime error: {exc}", err=True)
        return EXIT_RUNTIME
    path = config.output_path()
    if path is not None:
        try:
            path.write_text(render(artifact, config))
        except OSError as exc:
            click.echo(f"runtime error: {exc}", err=True)
            return EXIT_RUNTIME
    click.echo(artifact.summary)
    return EXIT_OK


# -- click surface ---------------------------------------------------------------


def _floats(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated numbers: {exc}") from exc


def _output_options(f):
    f = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(f)
    f = click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Table destination.")(f)
    return f


def _family_options(f):
    f = click.option("--degrees", is_flag=True, help="Read --theta/--phis in degrees.")(f)
    f = click.option("--phis", default=None, help="Five comma-separated phi_j (default 4 pi j / 5).")(f)
    f = click.option("--theta", type=float, default=None, help="Beam-splitter angle (default arccos 5^-1/4).")(f)
    f = click.option("--modes", type=click.IntRange(min=3), default=3, show_default=True)(f)
    return f


def _shot_options(f):
    f = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Required.")(f)
    f = click.option("--reps", type=click.IntRange(min=1), default=100, show_default=True)(f)
    f = click.option("--shots", type=click.IntRange(min=1), default=4100, show_default=True)(f)
    return f


def _family_params(modes, theta, phis, degrees) -> dict:
    phis = _floats(phis)
    if degrees:
        theta = None if theta is None else math.radians(theta)
        phis = None if phis is None else [math.radians(x) for x in phis]
    return {"modes": modes, "theta": theta, "phis": phis}


def _finish(command: str, params: dict, output, fmt) -> None:
    code = run(RunConfig(command, params, output, fmt))
    if code:
        sys.exit(code)


@click.group()
def main():
    """Simulate the linear-optical KCBS contextuality test."""


@main.command()
@_family_options
@_output_options
def ideal(modes, theta, phis, degrees, output, fmt):
    """Exact S and kappa for a single photon in mode 1."""
    _finish("ideal", _family_params(modes, theta, phis, degrees), output, fmt)


@main.command()
@click.option("--alpha-sq", type=float, default=None, help="Mean photon number |alpha|^2.")
@click.option("--alpha", type=float, default=None, help="Amplitude |alpha|.")
@click.option("--sweep-max", type=float, default=None, help="Emit an |alpha|^2 sweep table up to this value.")
@click.option("--sweep-steps", type=click.IntRange(min=2), default=201, show_default=True)
@_family_options
@_output_options
def coherent(alpha_sq, alpha, sweep_max, sweep_steps, modes, theta, phis, degrees, output, fmt):
    """S for a coherent state in mode 1, pipeline and closed form."""
    if (alpha_sq is None) == (alpha is None):
        raise click.UsageError("give exactly one of --alpha-sq and --alpha")
    if alpha is not None:
        alpha_sq = alpha * alpha
    if alpha_sq < 0:
        raise click.BadParameter("--alpha-sq must be >= 0")
    params = _family_params(modes, theta, phis, degrees)
    params.update(alpha_sq=alpha_sq, sweep_max=sweep_max, sweep_steps=sweep_steps)
    _finish("coherent", params, output, fmt)


@main.command()
@click.option("--n", "n", type=click.IntRange(min=0), required=True)
@click.option("--table-max", type=click.IntRange(min=0), default=None, help="Tabulate S for 0..table-max.")
@_output_options
def fock(n, table_max, output, fmt):
    """S for the Fock state |n> in mode 1."""
    _finish("fock", {"n": n, "table_max": table_max}, output, fmt)


@main.command()
@click.option("--populations", required=True, help="Comma-separated rho_00, rho_11, ...")
@_output_options
def mixture(populations, output, fmt):
    """S for a photon-number-diagonal input."""
    _finish("mixture", {"populations": _floats(populations)}, output, fmt)


@main.command()
@_shot_options
@click.option("--loss-rate", type=click.FloatRange(0.0, 1.0), default=0.0, show_default=True)
@click.option("--monitor-loss", is_flag=True, help="Count lost photons on D5 instead of post-selecting.")
@_family_options
@_output_options
def sample(shots, reps, seed, loss_rate, monitor_loss, modes, theta, phis, degrees, output, fmt):
    """Monte Carlo detector counts for the five contexts."""
    params = _family_params(modes, theta, phis, degrees)
    params.update(shots=shots, reps=reps, seed=seed, loss_rate=loss_rate, monitor_loss=monitor_loss)
    _finish("sample", params, output, fmt)


@main.command("loss-sweep")
@_shot_options
@click.option("--grid", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0", show_default=True)
@_family_options
@_output_options
def loss_sweep_cmd(shots, reps, seed, grid, modes, theta, phis, degrees, output, fmt):
    """S against photon-loss rate, ideal and sampled."""
    params = _family_params(modes, theta, phis, degrees)
    params.update(shots=shots, reps=reps, seed=seed, grid=_floats(grid))
    _finish("loss-sweep", params, output, fmt)


@main.command()
@_output_options
def oracle(output, fmt):
    """Classical bounds by enumeration and the Fock-series cross-check."""
    _finish("oracle", {}, output, fmt)


@main.command()
@click.option("--context", type=click.IntRange(1, 5), default=None, help="Single context (default all).")
@_family_options
@_output_options
def bench(context, modes, theta, phis, degrees, output, fmt):
    """Half-wave-plate angle differences for each context."""
    params = _family_params(modes, theta, phis, degrees)
    params["context"] = context
    _finish("bench", params, output, fmt)


if __name__ == "__main__":
    main()
