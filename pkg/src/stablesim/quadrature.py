"""Partition builders and the truncation/refinement schedule shared by all kernels.

Improper integrals are evaluated over nested truncated domains with graded
partitions; convergence is certified by comparing successive refinement
levels, divergence by sustained growth of the truncated value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

_TINY = 1e-300


class DivergenceError(ArithmeticError):
    """Raised when a quantity that must be finite fails its convergence schedule."""


@dataclass(frozen=True)
class QuadraturePolicy:
    """Refinement schedule for improper-integral evaluation.

    Each level doubles the node budget and enlarges the truncated domain
    geometrically.  ``rtol`` is the relative change between successive levels
    accepted as converged; divergence is declared after ``divergence_runs``
    consecutive enlargements that each grow the value, with cumulative growth
    above ``divergence_factor``.
    """

    rtol: float = 1e-3
    min_level: int = 1
    max_level: int = 5
    divergence_factor: float = 1.5
    divergence_runs: int = 3


@dataclass(frozen=True)
class Certificate:
    levels: tuple[int, ...]
    values: tuple[float, ...]
    status: str  # "converged" | "diverged" | "exhausted"
    rtol: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def run_levels(eval_level: Callable[[int], float], policy: QuadraturePolicy) -> tuple[float | None, Certificate]:
    """Evaluate ``eval_level`` over the schedule until converged or diverged."""
    levels: list[int] = []
    values: list[float] = []
    for level in range(policy.min_level, policy.max_level + 1):
        v = float(eval_level(level))
        levels.append(level)
        values.append(v)
        if len(values) >= 2:
            prev = values[-2]
            if abs(v - prev) <= policy.rtol * max(abs(v), _TINY):
                return v, Certificate(tuple(levels), tuple(values), "converged", policy.rtol)
        k = policy.divergence_runs
        if len(values) > k:
            tail = values[-(k + 1):]
            growing = all(tail[i + 1] > tail[i] for i in range(k))
            if growing and tail[0] > 0 and tail[-1] / tail[0] > policy.divergence_factor:
                return None, Certificate(tuple(levels), tuple(values), "diverged", policy.rtol)
    return values[-1], Certificate(tuple(levels), tuple(values), "exhausted", policy.rtol)


def graded_edges(lo: float, hi: float, n: int, power: float = 3.0,
                 grade_lo: bool = True, grade_hi: bool = True) -> np.ndarray:
    """Cell edges on [lo, hi] clustered toward graded endpoints.

    Power grading resolves integrable endpoint singularities of the
    |kernel|^alpha integrand without evaluating at the endpoint itself.
    """
    if hi <= lo:
        raise ValueError("empty panel")
    u = np.linspace(0.0, 1.0, n + 1)
    if grade_lo and grade_hi:
        mid = 0.5 * (lo + hi)
        left = lo + (mid - lo) * u ** power
        right = hi - (hi - mid) * u[::-1] ** power
        return np.concatenate([left, right[1:]])
    if grade_lo:
        return lo + (hi - lo) * u ** power
    if grade_hi:
        return hi - (hi - lo) * u[::-1] ** power
    return lo + (hi - lo) * u


def log_edges(lo: float, hi: float, n: int) -> np.ndarray:
    """Geometric cell edges on [lo, hi], 0 < lo < hi."""
    return np.geomspace(lo, hi, n + 1)


def cells_from_edges(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes and Lebesgue widths of the partition given by ``edges``."""
    mids = 0.5 * (edges[1:] + edges[:-1])
    return mids, np.diff(edges)


def power_law_cells(lo: float, hi: float, n_per_decade: int, exponent: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Log partition of [lo, hi] with exact masses of the density x**exponent.

    Returns (nodes, masses, edges); nodes are geometric cell midpoints.
    """
    n = max(2, int(np.ceil(np.log10(hi / lo) * n_per_decade)))
    edges = np.geomspace(lo, hi, n + 1)
    nodes = np.sqrt(edges[1:] * edges[:-1])
    c = exponent + 1.0
    if abs(c) > 1e-12:
        masses = (edges[1:] ** c - edges[:-1] ** c) / c
    else:
        masses = np.log(edges[1:] / edges[:-1])
    return nodes, masses, edges


def subdivided_power_cells(lo: float, hi: float, n_per_decade: int, exponent: float,
                           subs: int) -> tuple[np.ndarray, np.ndarray]:
    """Power-law cells with ``subs`` equal-mass geometric sub-nodes per cell.

    Averaging several nodes inside each exact-mass cell suppresses aliasing
    of integrands that oscillate quickly in the radial coordinate.
    """
    _, masses, edges = power_law_cells(lo, hi, n_per_decade, exponent)
    u = (np.arange(subs) + 0.5) / subs
    log_lo = np.log(edges[:-1])
    log_w = np.log(edges[1:] / edges[:-1])
    nodes = np.exp(log_lo[:, None] + log_w[:, None] * u[None, :]).ravel()
    sub_masses = np.repeat(masses / subs, subs)
    return nodes, sub_masses


def shift_partition(breakpoints, level: int, *, base_nodes: int = 8, power: float = 3.0,
                    tail_reach: float = 1e3, tail_growth: float = 10.0,
                    nodes_per_decade: int = 8, left_tail: bool = True,
                    right_tail: bool = True) -> np.ndarray:
    """Edges of a partition of an interval of the real shift coordinate.

    Panels between consecutive breakpoints are power-graded toward both ends
    (kernels have kinks or integrable singularities exactly there); beyond the
    extreme breakpoints the grid continues on a pad panel and then a geometric
    tail out to ``tail_reach * tail_growth**level``.
    """
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if bp.size == 0:
        raise ValueError("need at least one breakpoint")
    n = base_nodes * 2 ** level
    span = max(bp[-1] - bp[0], 1.0)
    pad = span
    reach = tail_reach * tail_growth ** level
    pieces = []
    if left_tail:
        lo = bp[0] - reach
        ndec = max(2, int(np.ceil(np.log10(reach / pad) * (nodes_per_decade + 2 * level))))
        pieces.append(bp[0] - np.geomspace(reach, pad, ndec + 1))
    pieces.append(graded_edges(bp[0] - pad, bp[0], n, power, grade_lo=False))
    for a, b in zip(bp[:-1], bp[1:]):
        if b - a < 1e-14 * span:
            continue
        pieces.append(graded_edges(a, b, n, power)[1:])
    pieces.append(graded_edges(bp[-1], bp[-1] + pad, n, power, grade_hi=False)[1:])
    if right_tail:
        ndec = max(2, int(np.ceil(np.log10(reach / pad) * (nodes_per_decade + 2 * level))))
        pieces.append((bp[-1] + np.geomspace(pad, reach, ndec + 1))[1:])
    return np.concatenate(pieces)


def pairwise_sum(x: np.ndarray) -> float:
    # np.sum performs a pairwise tree reduction on contiguous arrays, which is
    # deterministic and does not depend on thread count.
    return float(np.sum(np.ascontiguousarray(x)))
