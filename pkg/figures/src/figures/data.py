"""CSV loading, schema validation, and series extraction.

The expected headers mirror the lab's campaign output schemas; they are the
wire contract between the two packages. Everything computed here is a
grouping mean, count, or pass-through of CSV columns.
"""

from __future__ import annotations

import csv
from collections import defaultdict

# Campaign CSV schemas, keyed by table name.
SCHEMAS = {
    "fig1": ("gamma", "proportion_true", "n"),
    "fig2_blackwell": ("trial", "mdp_seed", "n_obs", "gamma_bw"),
    "fig2_bias": ("trial", "mdp_seed", "n_obs", "gamma", "gamma_bw", "normalized_bias"),
    "fig3": (
        "trial",
        "mdp_seed",
        "n_obs",
        "gamma",
        "kappa_phi",
        "delta_phi",
        "kappa_s",
        "delta_s",
        "kappa_ratio",
        "delta_ratio",
    ),
}

# Which tables each experiment consumes.
EXPERIMENT_TABLES = {
    "fig1": ("fig1",),
    "fig2": ("fig2_blackwell", "fig2_bias"),
    "fig3": ("fig3",),
}


class SchemaMismatch(ValueError):
    """An input CSV does not match any expected campaign schema."""


def load_table(path: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaMismatch(f"{path}: no rows")
        rows = [dict(zip(header, row)) for row in reader]
    return header, rows


def classify(header: tuple, expected_tables: tuple, path: str) -> str:
    for name in expected_tables:
        if header == SCHEMAS[name]:
            return name
    # name the first offending column against the closest candidate
    candidate = SCHEMAS[expected_tables[0]]
    for name in expected_tables:
        if SCHEMAS[name][0] == (header[0] if header else None):
            candidate = SCHEMAS[name]
            break
    for i, want in enumerate(candidate):
        got = header[i] if i < len(header) else "<missing>"
        if got != want:
            raise SchemaMismatch(
                f"{path}: column {i + 1} is '{got}', expected '{want}'"
            )
    raise SchemaMismatch(f"{path}: trailing unexpected columns {header[len(candidate):]}")


def load_experiment_tables(experiment: str, paths: list) -> dict:
    """Load and classify every input; all tables the experiment needs must be
    present exactly once and non-empty."""
    expected = EXPERIMENT_TABLES[experiment]
    tables = {}
    for path in paths:
        header, rows = load_table(path)
        name = classify(header, expected, path)
        if name in tables:
            raise SchemaMismatch(f"{path}: duplicate {name} table")
        if not rows:
            raise SchemaMismatch(f"{path}: no rows")
        tables[name] = rows
    missing = [name for name in expected if name not in tables]
    if missing:
        raise SchemaMismatch(f"missing input table(s): {', '.join(missing)}")
    return tables


# --- series extraction --------------------------------------------------------


def fig1_series(rows: list) -> dict:
    points = sorted((float(r["gamma"]), float(r["proportion_true"])) for r in rows)
    return {
        "gamma": [g for g, _ in points],
        "proportion": [p for _, p in points],
    }


def fig2_series(blackwell_rows: list, bias_rows: list) -> dict:
    by_obs = defaultdict(list)
    for r in blackwell_rows:
        by_obs[int(r["n_obs"])].append(float(r["gamma_bw"]))
    sums = defaultdict(float)
    counts = defaultdict(int)
    for r in bias_rows:
        key = (int(r["n_obs"]), float(r["gamma"]))
        sums[key] += float(r["normalized_bias"])
        counts[key] += 1
    gammas = sorted({g for _, g in sums})
    curves = {
        o: [sums[(o, g)] / counts[(o, g)] for g in gammas]
        for o in sorted({o for o, _ in sums})
    }
    return {
        "blackwell": {o: sorted(v) for o, v in sorted(by_obs.items())},
        "gamma": gammas,
        "mean_bias": curves,
    }


def fig3_series(rows: list) -> dict:
    kappa = defaultdict(list)
    delta = defaultdict(list)
    for r in rows:
        o = int(r["n_obs"])
        if r["kappa_ratio"] != "":
            kappa[o].append(float(r["kappa_ratio"]))
        if r["delta_ratio"] != "":
            delta[o].append(float(r["delta_ratio"]))
    return {
        "kappa_ratio": {o: sorted(v) for o, v in sorted(kappa.items())},
        "delta_ratio": {o: sorted(v) for o, v in sorted(delta.items())},
    }
