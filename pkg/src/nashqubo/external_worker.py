"""Reference implementation of the external sampler line protocol.

Run as `python3 -m nashqubo.external_worker`. Reads one JSON request
({"model": ..., "reads": ...}) from stdin, solves the model by full
enumeration, and prints one JSON record per ground state. The read count
in the request is ignored: enumeration reports each minimizer once.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import NashQuboError
from .qubo import model_from_payload
from .rationals import format_rational
from .samplers import DEFAULT_CAPACITY, solve_exhaustive


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nashqubo-worker",
        description="exhaustive solver speaking the external sampler protocol",
    )
    parser.add_argument(
        "--capacity",
        type=int,
        default=int(os.environ.get("NASHQUBO_CAPACITY", DEFAULT_CAPACITY)),
        help="largest variable count this worker will enumerate",
    )
    args = parser.parse_args(argv)

    try:
        request = json.load(sys.stdin)
        model = model_from_payload(request["model"])
        result = solve_exhaustive(model, capacity=args.capacity)
    except (NashQuboError, KeyError, ValueError, TypeError) as exc:
        print(f"worker error: {exc}", file=sys.stderr)
        return 1
    for record in result.records:
        print(
            json.dumps(
                {
                    "assignment": list(record.assignment),
                    "energy": format_rational(record.energy),
                    "occurrences": record.occurrences,
                }
            )
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
