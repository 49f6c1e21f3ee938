"""Seeded random search with local pattern refinement.

Every stochastic estimate in polyalg goes through :func:`maximize`.  The
contract is reproducibility: samples are drawn in fixed-size chunks, each
from its own generator seeded by ``(seed, stream, chunk_index)``, so the
sample sequence does not depend on the number of worker threads and a
larger sample count always extends (never reshuffles) a smaller one.

Refinement is applied to the *block records*: inside each block of
``BLOCK`` consecutive samples, every sample that beats all earlier samples
of the same block.  That set only grows as the sample count grows, which
makes the returned maximum monotone in the budget.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

CHUNK = 256
BLOCK = 1024
MIN_STEP = 1e-10

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SearchBudget:
    samples: int = 4096
    refine_steps: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("SearchBudget.samples must be >= 1")
        if self.refine_steps < 0:
            raise ValueError("SearchBudget.refine_steps must be >= 0")

    def to_dict(self) -> dict:
        return {"samples": self.samples, "refine_steps": self.refine_steps, "seed": self.seed}


DEFAULT_BUDGET = SearchBudget()


@dataclass(frozen=True, eq=False)
class NormEstimate:
    """Certified lower bound ``value`` attained at ``witness``."""

    value: float
    witness: Any
    budget: SearchBudget | None = None
    exact: bool = False
    extra: dict = field(default_factory=dict)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("POLYALG_THREADS", "1")))
    except ValueError:
        return 1


def chunk_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, stream, chunk])


def draw_samples(budget: SearchBudget, dim: int, stream: int = 0) -> np.ndarray:
    """Standard normal samples, ``budget.samples`` rows of ``dim`` reals."""
    n_chunks = -(-budget.samples // CHUNK)
    rows = [chunk_generator(budget.seed, stream, c).standard_normal((CHUNK, dim))
            for c in range(n_chunks)]
    return np.concatenate(rows)[: budget.samples]


def _evaluate_chunks(objective: Objective, samples: np.ndarray) -> np.ndarray:
    pieces = [samples[i:i + CHUNK] for i in range(0, len(samples), CHUNK)]
    threads = thread_count()
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(objective, pieces))
    else:
        values = [objective(p) for p in pieces]
    return np.concatenate(values)


def block_records(values: np.ndarray, block: int = BLOCK) -> list[int]:
    """Indices that set a new running maximum inside their block."""
    out = []
    for start in range(0, len(values), block):
        best = -np.inf
        for i in range(start, min(start + block, len(values))):
            if values[i] > best:
                best = values[i]
                out.append(i)
    return out


def refine(objective: Objective, x0: np.ndarray, f0: float, steps: int,
           step0: float = 0.5) -> tuple[np.ndarray, float]:
    """Coordinate pattern search: try +-h along every axis, halve h on failure."""
    x = np.array(x0, dtype=float)
    fx = float(f0)
    h = step0
    dim = x.size
    eye = np.eye(dim)
    for _ in range(steps):
        cand = np.concatenate([x + h * eye, x - h * eye])
        vals = objective(cand)
        j = int(np.argmax(vals))
        if vals[j] > fx + 1e-12 * abs(fx):
            x, fx = cand[j], float(vals[j])
        else:
            h *= 0.5
            if h < MIN_STEP:
                break
    return x, fx


def maximize(objective: Objective, dim: int, budget: SearchBudget, *,
             starts: Sequence[np.ndarray] = (), stream: int = 0,
             step0: float = 0.5) -> tuple[float, np.ndarray]:
    """Seeded maximization of ``objective`` over ``R^dim``.

    ``objective`` maps an ``(N, dim)`` array to ``N`` values and must treat
    rows independently.  Explicit ``starts`` are always refined, ahead of the
    sampled block records.  Ties go to the earliest candidate.
    """
    samples = draw_samples(budget, dim, stream)
    values = _evaluate_chunks(objective, samples)
    candidates: list[tuple[np.ndarray, float]] = []
    if len(starts):
        st = np.asarray(starts, dtype=float).reshape(len(starts), dim)
        for x, v in zip(st, objective(st)):
            candidates.append((x, float(v)))
    for i in block_records(values):
        candidates.append((samples[i], float(values[i])))

    def _run(c):
        return refine(objective, c[0], c[1], budget.refine_steps, step0)

    threads = thread_count()
    if threads > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            refined = list(pool.map(_run, candidates))
    else:
        refined = [_run(c) for c in candidates]

    best_x, best_f = samples[0], -np.inf
    for x, f in refined:
        if f > best_f:
            best_x, best_f = x, f
    return best_f, best_x


def real_to_complex(params: np.ndarray) -> np.ndarray:
    """``(..., 2d)`` reals -> ``(..., d)`` complex (first half real parts)."""
    d = params.shape[-1] // 2
    return params[..., :d] + 1j * params[..., d:]


def complex_to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)
