"""Command line interface.

Subcommands: ``simulate`` writes a benchmark dataset to CSV, ``detect`` runs
one detection, ``sweep`` scores a penalty grid, ``bayes`` runs the Bayesian
pipeline, ``eval`` compares two change point files, and ``serve`` starts the
HTTP API.

Change point files are single-column CSVs with an ``index`` header, the same
dialect the commands emit.
"""

from __future__ import annotations

import csv
import json
import sys
import click
import numpy as np

from .bayes import DistancePrior, bayes_detect, cp_posterior, write_cp_prob_csv
from .costs import CostModel
from .harness import default_penalty_grid, penalty_sweep
from .metrics import evaluate, margin_from_fraction
from .search import SearchConfig, pelt, win
from .series import ChangePointSet, load_csv, normalise, write_csv
from .simulate import FAMILY_SEGMENTS, SimSpec, generate


def _read_points(path: str) -> list[int]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames and "index" in reader.fieldnames:
            return [int(float(row["index"])) for row in reader]
    with open(path, newline="", encoding="utf-8") as fh:
        return [int(float(line.strip())) for line in fh if line.strip()]


def _write_points(path: str, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index"])
        for p in points:
            writer.writerow([int(p)])


def _load_series(input_path, time_column, value_column, do_normalise):
    bundle = load_csv(input_path, time_column, [value_column])
    ts = bundle.series[0]
    return normalise(ts) if do_normalise else ts


@click.group()
def main():
    """Offline change point detection toolkit."""


@main.command()
@click.option("--family", type=click.Choice(sorted(FAMILY_SEGMENTS)), required=True)
@click.option("--n", default=1400, show_default=True)
@click.option("--segments", default=None, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--noise", default=None, type=float)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--truth-out", default=None, type=click.Path(dir_okay=False),
              help="Also write the true change points as CSV.")
def simulate(family, n, segments, seed, noise, out, truth_out):
    """Generate a seeded benchmark dataset and write it to CSV."""
    bundle = generate(SimSpec(family=family, n=n, segments=segments,
                              seed=seed, noise=noise))
    write_csv(bundle, out)
    truth = list(bundle.truth.intermediate)
    if truth_out:
        _write_points(truth_out, truth)
    click.echo(json.dumps({"out": out, "n": n, "truth": truth}))


def _detect_options(fn):
    for deco in reversed([
        click.option("--input", "input_path", required=True,
                     type=click.Path(exists=True, dir_okay=False)),
        click.option("--time-column", default="time", show_default=True),
        click.option("--value-column", default=None,
                     help="Defaults to the first non-time column."),
        click.option("--cost", type=click.Choice(
            ["l2", "l1", "normal", "linreg", "ar", "ridge", "lasso"]),
            default="l2", show_default=True),
        click.option("--gamma", default=1.0, show_default=True),
        click.option("--lags", default=4, show_default=True),
        click.option("--half-width", default=100, show_default=True),
        click.option("--normalise/--no-normalise", default=False),
        click.option("--truth", "truth_path", default=None,
                     type=click.Path(exists=True, dir_okay=False)),
        click.option("--margin-pct", default=1.0, show_default=True),
        click.option("--out", default=None, type=click.Path(dir_okay=False),
                     help="Write detected change points as CSV."),
    ]):
        fn = deco(fn)
    return fn


def _first_value_column(input_path, time_column):
    with open(input_path, newline="", encoding="utf-8") as fh:
        header = next(csv.reader(fh))
    candidates = [c for c in header if c != time_column]
    if not candidates:
        raise click.UsageError("no value column found")
    return candidates[0]


def _report(ts, cps, truth_path, margin_pct, out):
    payload = {"change_points": list(cps.intermediate), "k": cps.k_reported}
    if truth_path:
        truth = ChangePointSet.from_points(
            [p for p in _read_points(truth_path) if 0 < p < cps.n], cps.n)
        margin = margin_from_fraction(cps.n, margin_pct)
        payload["metrics"] = evaluate(cps, truth, margin, dt=ts.dt).to_dict()
    if out:
        _write_points(out, cps.intermediate)
    click.echo(json.dumps(payload))


@main.command()
@_detect_options
@click.option("--method", type=click.Choice(["pelt", "win"]), default="pelt",
              show_default=True)
@click.option("--penalty", default=10.0, show_default=True)
def detect(input_path, time_column, value_column, cost, gamma, lags, half_width,
           normalise, truth_path, margin_pct, out, method, penalty):
    """Detect change points with the optimisation approach."""
    value_column = value_column or _first_value_column(input_path, time_column)
    ts = _load_series(input_path, time_column, value_column, normalise)
    model = CostModel(cost, gamma=gamma, lags=lags)
    cfg = SearchConfig(penalty=penalty, half_width=half_width)
    cps = pelt(ts.values, model, cfg)[0] if method == "pelt" else win(ts.values, model, cfg)
    _report(ts, cps, truth_path, margin_pct, out)


@main.command()
@_detect_options
@click.option("--method", type=click.Choice(["pelt", "win"]), default="pelt",
              show_default=True)
@click.option("--grid", default=None,
              help="Comma-separated penalties; defaults to the standard grid.")
def sweep(input_path, time_column, value_column, cost, gamma, lags, half_width,
          normalise, truth_path, margin_pct, out, method, grid):
    """Score a penalty grid against ground truth and report the best row."""
    if not truth_path:
        raise click.UsageError("--truth is required for sweeps")
    value_column = value_column or _first_value_column(input_path, time_column)
    ts = _load_series(input_path, time_column, value_column, normalise)
    truth = ChangePointSet.from_points(
        [p for p in _read_points(truth_path) if 0 < p < ts.n], ts.n)
    grid_values = (default_penalty_grid() if grid is None
                   else np.array([float(g) for g in grid.split(",")]))
    model = CostModel(cost, gamma=gamma, lags=lags)
    result = penalty_sweep(ts, model, method, truth, grid=grid_values,
                           margin=margin_from_fraction(ts.n, margin_pct),
                           dt=ts.dt, half_width=half_width)
    if out:
        _write_points(out, result.best.prediction.intermediate)
    click.echo(json.dumps(result.to_dict()))


@main.command()
@_detect_options
@click.option("--prior", type=click.Choice(["flat", "geometric", "negative_binomial"]),
              default="flat", show_default=True)
@click.option("--prior-p", default=0.5, show_default=True)
@click.option("--prior-r", default=1, show_default=True)
@click.option("--k-max", default=None, type=int)
@click.option("--threshold", default=0.2, show_default=True)
@click.option("--distance", default=10, show_default=True)
@click.option("--paa-window", default=1, show_default=True)
@click.option("--epsilon", default=1e-10, show_default=True)
@click.option("--posterior-out", default=None, type=click.Path(dir_okay=False),
              help="Write the probability curve as CSV (index, probability).")
def bayes(input_path, time_column, value_column, cost, gamma, lags, half_width,
          normalise, truth_path, margin_pct, out, prior, prior_p, prior_r,
          k_max, threshold, distance, paa_window, epsilon, posterior_out):
    """Detect change points with the Bayesian posterior pipeline."""
    value_column = value_column or _first_value_column(input_path, time_column)
    ts = _load_series(input_path, time_column, value_column, False)
    prior_obj = DistancePrior(prior, p=prior_p, r=prior_r)
    cps = bayes_detect(ts, prior=prior_obj, k_max=k_max, threshold=threshold,
                       distance=distance, paa_window=paa_window, epsilon=epsilon)
    if posterior_out:
        from .series import normalise as _norm, paa as _paa

        reduced = _paa(ts, paa_window) if paa_window > 1 else ts
        result = cp_posterior(_norm(reduced), prior=prior_obj,
                              k_max=k_max, epsilon=epsilon)
        indices = np.arange(result.n) * paa_window
        write_cp_prob_csv(posterior_out, result.cp_prob, indices)
    _report(ts, cps, truth_path, margin_pct, out)


@main.command("eval")
@click.option("--truth", "truth_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--pred", "pred_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", required=True, type=int,
              help="Series length the change point indices refer to.")
@click.option("--margin-pct", default=1.0, show_default=True)
@click.option("--dt", default=1.0, show_default=True)
def eval_cmd(truth_path, pred_path, n, margin_pct, dt):
    """Compare predicted change points against ground truth."""
    truth = ChangePointSet.from_points(
        [p for p in _read_points(truth_path) if 0 < p < n], n)
    pred = ChangePointSet.from_points(
        [p for p in _read_points(pred_path) if 0 < p < n], n)
    margin = margin_from_fraction(n, margin_pct)
    click.echo(evaluate(pred, truth, margin, dt=dt).to_json())


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True,
              help="Overridden by the CPD_PORT environment variable.")
def serve(host, port):
    """Run the HTTP JSON API."""
    from .service import serve as run

    run(host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
