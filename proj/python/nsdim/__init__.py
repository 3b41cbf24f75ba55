"""Numerical span dimension of random-feature networks (C++ core)."""

import json as _json

from ._nsdim import (
    activation_names,
    activation_eval,
    sample_neurons,
    make_grid,
    hidden_matrix,
    singular_values,
    nnsv_count,
    least_squares,
    principal_basis,
    sparsity,
    greedy_cover,
    exact_cover,
    cli_main,
    _run_experiment_json,
    __version__,
)


def run_experiment(name, **params):
    """Runs an experiment through the library and returns its JSON result as a dict.

    Keyword names follow the CLI keys, e.g. run_experiment("sweep-width", widths="50,100", seeds=2).
    """
    settings = {k: str(v) for k, v in params.items()}
    settings["experiment"] = name
    return _json.loads(_run_experiment_json(settings))


__all__ = [
    "activation_names",
    "activation_eval",
    "sample_neurons",
    "make_grid",
    "hidden_matrix",
    "singular_values",
    "nnsv_count",
    "least_squares",
    "principal_basis",
    "sparsity",
    "greedy_cover",
    "exact_cover",
    "cli_main",
    "run_experiment",
]
