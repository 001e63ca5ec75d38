"""Minimizers for compiled binary models.

Every sampler returns a SampleSet whose record energies are recomputed
locally with exact rational arithmetic, so downstream certification never
has to trust sampler numerics. The exhaustive solver enumerates the whole
assignment space and is the reference the others are judged against.
"""

from __future__ import annotations

import itertools
import json
import math
import subprocess
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    CapacityError,
    ExternalProcessError,
    IntegrityError,
    MalformedRecordError,
    ParameterError,
)
from .qubo import QuboModel, energy, model_to_payload

DEFAULT_CAPACITY = 24

# float64 holds every integer of magnitude below 2**53 exactly; the fast
# enumeration path is only taken when all partial sums stay under this.
_EXACT_FLOAT_BOUND = 2**53


@dataclass(frozen=True)
class SampleRecord:
    """One observed assignment with its exact energy and multiplicity."""

    assignment: tuple[int, ...]
    energy: Fraction
    occurrences: int


@dataclass(frozen=True)
class SamplerInfo:
    sampler: str
    reads: int
    seed: int | None
    duration: float = field(default=0.0, compare=False)


def _record_key(record: SampleRecord):
    return (record.energy, -record.occurrences, record.assignment)


@dataclass(frozen=True)
class SampleSet:
    """Sampler output bundled with the model it was drawn from.

    Records are kept sorted by ascending energy, then descending
    occurrence count, then assignment, so equal runs compare equal and
    the first record is always a minimum-energy one.
    """

    model: QuboModel
    records: tuple[SampleRecord, ...]
    info: SamplerInfo

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.records, key=_record_key))
        object.__setattr__(self, "records", ordered)

    @property
    def min_energy(self) -> Fraction:
        if not self.records:
            raise ParameterError("sample set holds no records")
        return self.records[0].energy

    @property
    def total_occurrences(self) -> int:
        return sum(r.occurrences for r in self.records)

    def ground_records(self) -> tuple[SampleRecord, ...]:
        """All records whose energy equals the observed minimum."""
        low = self.min_energy
        return tuple(r for r in self.records if r.energy == low)


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

def _integer_arrays(model: QuboModel):
    """Rescale all coefficients to integers by their common denominator."""
    dens = [model.offset.denominator]
    dens += [v.denominator for v in model.linear.values()]
    dens += [v.denominator for v in model.quadratic.values()]
    scale = math.lcm(*dens) if dens else 1
    lin = {i: int(v * scale) for i, v in model.linear.items()}
    quad = {k: int(v * scale) for k, v in model.quadratic.items()}
    off = int(model.offset * scale)
    return scale, lin, quad, off


def _bit_table(width: int) -> np.ndarray:
    """All 2**width assignments as rows; column j is bit j of the row index."""
    idx = np.arange(1 << width, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width)[None, :]) & 1).astype(np.float64)


def _enumerate_float(n, lin, quad, off):
    """Find all minimizers via blocked float64 tensor arithmetic.

    The caller guarantees every partial sum fits in 2**53, which makes
    the float arithmetic exact. Variables are split into a low and a high
    half so the pair energy decomposes into two small per-half terms plus
    one cross matrix product.
    """
    nl = n // 2
    nh = n - nl
    a = np.zeros(n)
    for i, v in lin.items():
        a[i] = v
    low_q = np.zeros((nl, nl))
    high_q = np.zeros((nh, nh))
    cross = np.zeros((nl, nh))
    for (i, j), v in quad.items():
        if j < nl:
            low_q[i, j] = v
        elif i >= nl:
            high_q[i - nl, j - nl] = v
        else:
            cross[i, j - nl] = v

    xl = _bit_table(nl)
    xh = _bit_table(nh)
    e_low = xl @ a[:nl] + ((xl @ low_q) * xl).sum(axis=1)
    e_high = xh @ a[nl:] + ((xh @ high_q) * xh).sum(axis=1)
    xh_t = xh.T

    block = max(1, (1 << 22) >> nh)
    best = None
    hits: list[tuple[int, int]] = []
    for start in range(0, 1 << nl, block):
        xb = xl[start : start + block]
        grid = e_low[start : start + block, None] + e_high[None, :]
        grid += (xb @ cross) @ xh_t
        grid += off
        block_min = grid.min()
        if best is None or block_min < best:
            best = block_min
            hits = []
        if block_min == best:
            rows, cols = np.nonzero(grid == best)
            hits.extend(zip((rows + start).tolist(), cols.tolist()))

    assignments = [
        tuple((row >> j) & 1 for j in range(nl))
        + tuple((col >> j) & 1 for j in range(nh))
        for row, col in hits
    ]
    assignments.sort()
    return int(best), assignments


def _enumerate_exact(model: QuboModel):
    """Slow rational fallback for coefficient ranges beyond float64."""
    best = None
    hits: list[tuple[int, ...]] = []
    for bits in itertools.product((0, 1), repeat=model.n_vars):
        e = energy(model, bits)
        if best is None or e < best:
            best, hits = e, [bits]
        elif e == best:
            hits.append(bits)
    return best, hits


def solve_exhaustive(model: QuboModel, *, capacity: int = DEFAULT_CAPACITY) -> SampleSet:
    """Enumerate every assignment and report all global minimizers.

    Each minimizer becomes one record with occurrence count 1. Refuses
    models wider than `capacity` variables, since the state space doubles
    per variable.
    """
    if model.n_vars > capacity:
        raise CapacityError(
            f"model has {model.n_vars} variables, exhaustive limit is {capacity}"
        )
    start = time.perf_counter()
    n = model.n_vars
    if n == 0:
        records = [SampleRecord(assignment=(), energy=model.offset, occurrences=1)]
    else:
        scale, lin, quad, off = _integer_arrays(model)
        bound = abs(off) + sum(abs(v) for v in lin.values())
        bound += sum(abs(v) for v in quad.values())
        if bound < _EXACT_FLOAT_BOUND:
            scaled_min, assignments = _enumerate_float(n, lin, quad, off)
            low = Fraction(scaled_min, scale)
        else:
            low, assignments = _enumerate_exact(model)
        records = [
            SampleRecord(assignment=a, energy=low, occurrences=1)
            for a in assignments
        ]
    info = SamplerInfo(
        sampler="exhaustive",
        reads=1 << n,
        seed=None,
        duration=time.perf_counter() - start,
    )
    return SampleSet(model=model, records=tuple(records), info=info)


# ---------------------------------------------------------------------------
# simulated annealing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric temperature ladder for the annealer.

    t_start of None means: start at the largest coefficient magnitude of
    the model being sampled (at least 1), which puts early sweeps in the
    free-flipping regime.
    """

    t_start: float | None = None
    t_end: float = 0.01
    sweeps: int = 1000

    def __post_init__(self) -> None:
        if self.t_start is not None and self.t_start <= 0:
            raise ParameterError("t_start must be positive")
        if self.t_end <= 0:
            raise ParameterError("t_end must be positive")
        if self.sweeps < 1:
            raise ParameterError("sweeps must be at least 1")

    def temperatures(self, model: QuboModel) -> np.ndarray:
        start = self.t_start
        if start is None:
            start = max(1.0, float(model.max_abs_coefficient()))
        return np.geomspace(start, self.t_end, self.sweeps)


_SA_KERNEL = None


def _sa_kernel():
    """Compile the annealing inner loop on first use."""
    global _SA_KERNEL
    if _SA_KERNEL is None:
        from numba import njit

        @njit(cache=True)
        def kernel(lin, mat, temps, seeds, states):
            reads, n = states.shape
            for r in range(reads):
                np.random.seed(seeds[r])
                x = np.zeros(n, np.int8)
                for i in range(n):
                    if np.random.random() < 0.5:
                        x[i] = 1
                # local field: energy change of setting bit i, others fixed
                fld = lin.copy()
                for i in range(n):
                    if x[i] == 1:
                        for j in range(n):
                            fld[j] += mat[j, i]
                for k in range(temps.shape[0]):
                    t = temps[k]
                    for i in range(n):
                        step = 1.0 - 2.0 * x[i]
                        delta = step * fld[i]
                        if delta <= 0.0 or np.random.random() < np.exp(-delta / t):
                            x[i] = 1 - x[i]
                            for j in range(n):
                                fld[j] += step * mat[j, i]
                for i in range(n):
                    states[r, i] = x[i]

        _SA_KERNEL = kernel
    return _SA_KERNEL


def sample_sa(
    model: QuboModel,
    *,
    reads: int,
    seed: int,
    schedule: AnnealSchedule | None = None,
) -> SampleSet:
    """Metropolis single-bit-flip annealing; returns one state per read.

    Each read runs an independent chain whose generator is seeded from
    (seed, read index), so results are reproducible and insensitive to
    how reads might be batched. The state reported for a read is the
    chain's final state, and its energy is recomputed exactly.
    """
    if reads < 1:
        raise ParameterError("reads must be at least 1")
    if schedule is None:
        schedule = AnnealSchedule()
    start = time.perf_counter()
    n = model.n_vars

    lin = np.zeros(n)
    for i, v in model.linear.items():
        lin[i] = float(v)
    mat = np.zeros((n, n))
    for (i, j), v in model.quadratic.items():
        mat[i, j] = float(v)
        mat[j, i] = float(v)
    temps = schedule.temperatures(model)
    seeds = np.array(
        [np.random.SeedSequence([seed, r]).generate_state(1)[0] for r in range(reads)],
        dtype=np.int64,
    )
    states = np.zeros((reads, n), dtype=np.int8)
    if n > 0:
        _sa_kernel()(lin, mat, temps, seeds, states)

    counts = Counter(tuple(int(b) for b in row) for row in states)
    records = tuple(
        SampleRecord(assignment=a, energy=energy(model, a), occurrences=c)
        for a, c in counts.items()
    )
    info = SamplerInfo(
        sampler="sa", reads=reads, seed=seed, duration=time.perf_counter() - start
    )
    return SampleSet(model=model, records=records, info=info)


# ---------------------------------------------------------------------------
# external subprocess sampler
# ---------------------------------------------------------------------------

def _parse_reported_energy(value) -> Fraction:
    if isinstance(value, bool):
        raise MalformedRecordError("energy must be a number or a rational string")
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedRecordError(f"unparseable energy {value!r}") from exc
    if isinstance(value, (int, float)):
        return Fraction(value)
    raise MalformedRecordError("energy must be a number or a rational string")


def _parse_record_line(model: QuboModel, lineno: int, line: str) -> SampleRecord:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecordError(f"line {lineno} is not valid JSON") from exc
    if not isinstance(payload, dict):
        raise MalformedRecordError(f"line {lineno} is not a record object")
    missing = {"assignment", "energy", "occurrences"} - payload.keys()
    if missing:
        raise MalformedRecordError(
            f"line {lineno} is missing fields: {', '.join(sorted(missing))}"
        )
    assignment = payload["assignment"]
    if (
        not isinstance(assignment, list)
        or len(assignment) != model.n_vars
        or any(not isinstance(b, int) or isinstance(b, bool) or b not in (0, 1) for b in assignment)
    ):
        raise MalformedRecordError(
            f"line {lineno} assignment is not a {model.n_vars}-bit vector"
        )
    occurrences = payload["occurrences"]
    if not isinstance(occurrences, int) or isinstance(occurrences, bool) or occurrences < 1:
        raise MalformedRecordError(f"line {lineno} occurrence count must be >= 1")
    reported = _parse_reported_energy(payload["energy"])

    bits = tuple(assignment)
    exact = energy(model, bits)
    tolerance = Fraction(1, 10**9) * max(Fraction(1), abs(exact))
    if abs(reported - exact) > tolerance:
        raise IntegrityError(
            f"line {lineno} reports energy {float(reported):g} for an assignment "
            f"whose energy is {float(exact):g}"
        )
    return SampleRecord(assignment=bits, energy=exact, occurrences=occurrences)


def sample_external(
    model: QuboModel,
    *,
    cmd: Sequence[str],
    reads: int,
    timeout: float | None = None,
) -> SampleSet:
    """Delegate sampling to a subprocess speaking the line protocol.

    The process receives {"model": ..., "reads": ...} as JSON on stdin
    and must emit one JSON record per line: an assignment, its energy
    (rational string or number), and an occurrence count. Every reported
    energy is re-derived locally; disagreement beyond relative 1e-9 is an
    integrity failure, and the stored energies are always the exact local
    values.
    """
    if reads < 1:
        raise ParameterError("reads must be at least 1")
    if not cmd:
        raise ParameterError("external sampler command is empty")
    request = json.dumps({"model": model_to_payload(model), "reads": reads})
    start = time.perf_counter()
    try:
        proc = subprocess.run(
            list(cmd),
            input=request.encode(),
            capture_output=True,
            timeout=timeout,
        )
    except OSError as exc:
        raise ExternalProcessError(f"could not launch {cmd[0]!r}: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise ExternalProcessError(
            f"external sampler exceeded {timeout} s"
        ) from exc
    if proc.returncode != 0:
        detail = proc.stderr.decode(errors="replace").strip()
        raise ExternalProcessError(
            f"external sampler exited with status {proc.returncode}"
            + (f": {detail}" if detail else "")
        )

    records = []
    for lineno, line in enumerate(proc.stdout.decode().splitlines(), 1):
        if line.strip():
            records.append(_parse_record_line(model, lineno, line))
    if not records:
        raise ExternalProcessError("external sampler produced no records")
    info = SamplerInfo(
        sampler="external",
        reads=reads,
        seed=None,
        duration=time.perf_counter() - start,
    )
    return SampleSet(model=model, records=tuple(records), info=info)
