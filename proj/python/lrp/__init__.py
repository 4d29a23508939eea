"""Long-range percolation simulation and bound calculators."""

import json as _json

from . import _core
from ._core import (
    BondModel,
    Graph,
    chemical_distance,
    chernoff_rate,
    complete_graph_exact_distribution,
    complete_graph_tail_bound,
    delta,
    depth_K,
    depth_n,
    gap_exponent_inequality,
    sample_graph,
    scale_sequence,
    shell_sum,
)

__all__ = [
    "BondModel",
    "Graph",
    "chemical_distance",
    "chernoff_rate",
    "complete_graph_exact_distribution",
    "complete_graph_tail_bound",
    "delta",
    "depth_K",
    "depth_n",
    "gap_exponent_inequality",
    "run",
    "main",
    "sample_graph",
    "scale_sequence",
    "shell_sum",
]


def run(experiment, *args):
    """Run a CLI experiment subcommand and return its JSON report as a dict."""
    code, out = _core.run_cli([experiment, *map(str, args)])
    if code != 0:
        raise RuntimeError(f"lrp {experiment} exited with status {code}")
    return _json.loads(out)


def main(argv=None):
    import sys

    code, out = _core.run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    return code
