"""Sampling of standard SaS variables, discretized stable integrals and
characteristic-function machinery.

The sampler follows Chambers, Mallows & Stuck (1976) in the symmetric case,
normalized so that the characteristic function is exp(-|theta|^alpha).
Simulation draws one counter-based random stream per path (Philox), so
ensembles are reproducible bit-for-bit regardless of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .io import spec_digest
from .kernels import Kernel
from .quadrature import Certificate, DivergenceError, QuadraturePolicy, pairwise_sum, run_levels

_PATH_CHUNK = 256  # fixed so that results cannot depend on the worker count


@dataclass(frozen=True)
class StableLaw:
    """Symmetric alpha-stable law with unit scale, CF exp(-|theta|^alpha)."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")


@dataclass(frozen=True)
class LinearCombo:
    """Finite probe sum_j theta_j X_{t_j} for joint characteristic functions."""

    terms: tuple[tuple[float, float], ...]  # (theta, t)

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("combo needs at least one term")

    @property
    def times(self) -> tuple[float, ...]:
        return tuple(t for _, t in self.terms)

    def scaled_times(self, c: float) -> "LinearCombo":
        return LinearCombo(tuple((th, c * t) for th, t in self.terms))

    def scaled_thetas(self, c: float) -> "LinearCombo":
        return LinearCombo(tuple((c * th, t) for th, t in self.terms))

    def shifted_increments(self, h: float) -> "LinearCombo":
        """Probe of sum_j theta_j (X_{t_j + h} - X_h), the h-shifted increment combo."""
        terms = [(th, t + h) for th, t in self.terms]
        total = sum(th for th, _ in self.terms)
        if total != 0.0:
            terms.append((-total, h))
        return LinearCombo(tuple(terms))


def combo(*terms: tuple[float, float]) -> LinearCombo:
    return LinearCombo(tuple((float(th), float(t)) for th, t in terms))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _sample_sas_from(gen: np.random.Generator, alpha: float, n: int) -> np.ndarray:
    u = (gen.random(n) - 0.5) * np.pi     # uniform on (-pi/2, pi/2)
    w = gen.standard_exponential(n)
    np.maximum(w, 1e-300, out=w)
    if alpha == 1.0:
        return np.tan(u)
    su = np.sin(alpha * u)
    cu = np.cos(u)
    t1 = su / cu ** (1.0 / alpha)
    t2 = (np.cos((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    return t1 * t2


def sample_standard_sas(law: StableLaw | float, n: int, seed: int) -> np.ndarray:
    """Draw n i.i.d. standard SaS variables, deterministic in (seed, n).

    For alpha = 2 the output is centered Gaussian with variance 2; for
    alpha = 1 it is standard Cauchy.
    """
    alpha = law.alpha if isinstance(law, StableLaw) else StableLaw(float(law)).alpha
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return _sample_sas_from(gen, alpha, int(n))


# ---------------------------------------------------------------------------
# characteristic-function exponent by quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CfExponent:
    """sigma^alpha value for a probe, with its refinement certificate."""

    value: float | None
    certificate: Certificate

    @property
    def status(self) -> str:
        return self.certificate.status

    def expect(self) -> float:
        if self.value is None:
            raise DivergenceError(
                f"cf exponent diverged under domain enlargement: {self.certificate.values}")
        return self.value


def _combo_field(kernel: Kernel, combo: LinearCombo, pts: np.ndarray) -> np.ndarray:
    acc = None
    for theta, t in combo.terms:
        if theta == 0.0:
            continue
        v = kernel.eval(t, pts)
        acc = theta * v if acc is None else acc + theta * v
    if acc is None:
        acc = np.zeros(pts.shape[0] if pts.ndim > 1 else pts.shape[0])
    return acc


def cf_exponent(kernel: Kernel, combo: LinearCombo, policy: QuadraturePolicy | None = None,
                level: int | None = None) -> CfExponent:
    """sigma^alpha(combo) = integral of |sum_j theta_j K(t_j, .)|^alpha dmu.

    With ``level`` given, evaluates that single refinement level (no
    certificate iteration); otherwise runs the policy schedule.
    """
    policy = policy or QuadraturePolicy()
    times = combo.times

    def eval_level(lvl: int) -> float:
        pts, masses = kernel.cf_grid(times, lvl)
        field = _combo_field(kernel, combo, pts)
        return pairwise_sum(np.abs(field) ** kernel.alpha * masses)

    if level is not None:
        v = eval_level(level)
        return CfExponent(v, Certificate((level,), (v,), "converged", policy.rtol))
    value, cert = run_levels(eval_level, policy)
    return CfExponent(value, cert)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomMeasureGrid:
    """Discretization of the random measure: disjoint cells with their masses.

    ``points`` holds one representative per cell (scalar shift, or a
    (radial, shift) pair for two-coordinate state spaces); ``masses`` the
    control-measure content of each cell.
    """

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 1 or len(m) != len(self.points):
            raise ValueError("one mass per cell")
        if np.any(m < 0.0) or not np.all(np.isfinite(m)):
            raise ValueError("cell masses must be nonnegative and finite")

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))


@dataclass(frozen=True)
class PathEnsemble:
    """Seeded matrix of sample paths on a fixed time grid."""

    times: np.ndarray            # strictly increasing, shape (n_times,)
    values: np.ndarray           # shape (n_paths, n_times)
    seed: int
    spec_digest: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")

    def time_index(self, t: float) -> int:
        idx = int(np.searchsorted(self.times, t))
        for j in (idx - 1, idx, idx + 1):
            if 0 <= j < self.times.size and abs(self.times[j] - t) <= 1e-9 * max(1.0, abs(t)):
                return j
        raise LookupError(f"time {t} is not on the ensemble grid (no interpolation)")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


def _path_draws(base: np.random.Philox, path_index: int, alpha: float, n_cells: int) -> np.ndarray:
    gen = np.random.Generator(base.jumped(path_index))
    return _sample_sas_from(gen, alpha, n_cells)


def simulate(kernel: Kernel, times: Sequence[float], n_paths: int, seed: int,
             level: int = 1, threads: int = 1) -> PathEnsemble:
    """Simulate sample paths of the kernel's process on a time grid.

    X_t is realized as sum over control-measure cells of
    K(t, cell) * mass^{1/alpha} * S_cell with i.i.d. standard SaS weights
    S_cell drawn from a per-path counter-based stream; the joint CF of the
    output converges to exp(-cf_exponent) as n_paths grows and the cell grid
    refines.  Row i depends only on (seed, i), never on thread scheduling.
    """
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ValueError("times must be a strictly increasing 1-d grid")
    grid = RandomMeasureGrid(*kernel.sim_grid(float(t[0]), float(t[-1]), level))
    weights = grid.masses ** (1.0 / kernel.alpha)
    kmat = np.empty((t.size, weights.size))
    for j, tj in enumerate(t):
        kmat[j] = kernel.eval(float(tj), grid.points)
    kmat *= weights[None, :]

    base = np.random.Philox(key=np.uint64(seed))
    values = np.empty((int(n_paths), t.size))
    chunks = [(lo, min(lo + _PATH_CHUNK, int(n_paths)))
              for lo in range(0, int(n_paths), _PATH_CHUNK)]

    def fill(chunk: tuple[int, int]) -> None:
        lo, hi = chunk
        S = np.empty((hi - lo, weights.size))
        for i in range(lo, hi):
            S[i - lo] = _path_draws(base, i, kernel.alpha, weights.size)
        # einsum without optimization keeps the reduction order fixed
        values[lo:hi] = np.einsum("pc,tc->pt", S, kmat, optimize=False)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(fill, chunks))
    else:
        for ch in chunks:
            fill(ch)

    return PathEnsemble(t, values, int(seed), spec_digest(kernel.descriptor))


def empirical_cf(ensemble: PathEnsemble, combo: LinearCombo) -> complex:
    """Monte Carlo estimate of E exp(i sum_j theta_j X_{t_j}); modulus <= 1."""
    phase = np.zeros(ensemble.n_paths)
    for theta, t in combo.terms:
        if theta == 0.0:
            continue
        phase = phase + theta * ensemble.values[:, ensemble.time_index(t)]
    return complex(np.mean(np.exp(1j * phase)))
