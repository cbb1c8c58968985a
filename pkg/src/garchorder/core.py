"""GARCH-like recursions, innovation laws and seeded path simulation.

Two recursion families are supported.  In volatility coordinates (``M1``)
the update is ``sigma[n+1] = f(|eps[n]|, sigma[n])``; in variance
coordinates (``M2``) it is ``sigma[n+1]**2 = f(eps[n]**2, sigma[n]**2)``.
In both cases ``x[n] = sigma[n] * eps[n]``.  GARCH(1,1) belongs to both.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special, stats
from sklearn.base import BaseEstimator

__all__ = [
    "DivergenceError",
    "GarchParams",
    "InnovationSpec",
    "RecursionMap",
    "InitialStateSpec",
    "PathBatch",
    "GarchSimulator",
    "garch11_m1",
    "garch11_m2",
    "avgarch_m1",
    "quadratic_m2",
    "recursion_from_label",
    "simulate_paths",
    "closed_form_variance",
    "logreturn_sums",
    "compose_g",
    "path_uniforms",
]

_SEED_LIMIT = 2**64
# uniform draws live in [0, 1); zero is pushed inside so inverse CDFs stay finite
_U_FLOOR = 2.0**-53
_CHUNK = 4096


class DivergenceError(ArithmeticError):
    """A simulated state became non-finite or non-positive."""

    def __init__(self, path: int, step: int, value: float):
        self.path = int(path)
        self.step = int(step)
        self.value = float(value)
        super().__init__(
            f"state diverged on path {self.path} at step {self.step} (value={self.value!r})"
        )


@dataclass(frozen=True)
class GarchParams:
    """GARCH(1,1) parameter triple.

    ``unchecked=True`` skips the covariance-stationarity requirement
    ``alpha1 + beta1 < 1`` and relaxes ``alpha1``/``beta1`` to be
    nonnegative; ``alpha0`` must always be strictly positive.
    """

    alpha0: float
    alpha1: float
    beta1: float
    unchecked: bool = False

    def __post_init__(self):
        for name in ("alpha0", "alpha1", "beta1"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.alpha0 <= 0:
            raise ValueError(f"alpha0 must be > 0, got {self.alpha0!r}")
        if self.unchecked:
            if self.alpha1 < 0 or self.beta1 < 0:
                raise ValueError("alpha1 and beta1 must be >= 0")
            return
        if self.alpha1 <= 0 or self.beta1 <= 0:
            raise ValueError("alpha1 and beta1 must be > 0 (use unchecked=True to relax)")
        if self.alpha1 + self.beta1 >= 1:
            raise ValueError(
                f"alpha1 + beta1 = {self.alpha1 + self.beta1!r} violates covariance "
                "stationarity (use unchecked=True to allow)"
            )

    @property
    def stationary(self) -> bool:
        return self.alpha1 + self.beta1 < 1

    def replace(self, **changes) -> "GarchParams":
        values = dict(alpha0=self.alpha0, alpha1=self.alpha1, beta1=self.beta1,
                      unchecked=self.unchecked)
        values.update(changes)
        return GarchParams(**values)


class AsymmetricInnovationError(ValueError):
    """Raised when a law that must be symmetric about zero is not."""


_FAMILIES = ("gaussian", "student_t", "laplace", "discrete")


@dataclass(frozen=True)
class InnovationSpec:
    """Symmetric zero-mean innovation law.

    Continuous families are standard variates multiplied by ``scale``.  With
    ``normalized=True`` the law is rescaled to unit variance instead, and
    ``scale`` must stay at 1.  Discrete laws take ``support`` as a sequence
    of ``(point, prob)`` pairs, which must be closed under negation with
    matching probabilities.
    """

    family: str = "gaussian"
    df: float | None = None
    support: tuple[tuple[float, float], ...] | None = None
    scale: float = 1.0
    normalized: bool = False
    _points: np.ndarray = field(init=False, repr=False, compare=False)
    _probs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown innovation family {self.family!r}; expected one of {_FAMILIES}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale!r}")
        if self.normalized and self.scale != 1.0:
            raise ValueError("normalized innovations have unit variance; leave scale at 1")
        if self.family == "student_t":
            if self.df is None or not self.df > 4:
                raise ValueError(f"student_t needs df > 4, got {self.df!r}")
        elif self.df is not None:
            raise ValueError(f"df is only meaningful for student_t, got family {self.family!r}")
        if self.family == "discrete":
            if not self.support:
                raise ValueError("discrete innovations need a non-empty support")
            support = tuple((float(p), float(q)) for p, q in self.support)
            object.__setattr__(self, "support", support)
            points, probs = _merge_atoms(np.array([p for p, _ in support]),
                                         np.array([q for _, q in support]))
            if np.any(probs < 0):
                raise ValueError("discrete probabilities must be nonnegative")
            if abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError(f"discrete probabilities sum to {probs.sum()!r}, not 1")
            if not (np.allclose(points, -points[::-1], rtol=0, atol=1e-12)
                    and np.allclose(probs, probs[::-1], rtol=0, atol=1e-12)):
                raise AsymmetricInnovationError(
                    "innovation support must be symmetric about 0 with mirrored probabilities"
                )
            m2 = float(np.dot(probs, points**2))
            if self.normalized:
                if m2 == 0:
                    raise ValueError("cannot normalize a law concentrated at 0")
                points = points / math.sqrt(m2)
            else:
                points = points * self.scale
            object.__setattr__(self, "_points", points)
            object.__setattr__(self, "_probs", probs)
        elif self.support is not None:
            raise ValueError("support is only meaningful for discrete innovations")

    @property
    def multiplier(self) -> float:
        """Factor applied to the standard variate of the continuous family."""
        if not self.normalized:
            return self.scale
        if self.family == "student_t":
            return math.sqrt((self.df - 2.0) / self.df)
        if self.family == "laplace":
            return 1.0 / math.sqrt(2.0)
        return 1.0

    @property
    def points(self) -> np.ndarray:
        self._require_discrete()
        return self._points

    @property
    def probs(self) -> np.ndarray:
        self._require_discrete()
        return self._probs

    def _require_discrete(self):
        if self.family != "discrete":
            raise TypeError(f"{self.family} innovations have no finite support")

    def _frozen(self):
        if self.family == "gaussian":
            return stats.norm(scale=self.multiplier)
        if self.family == "student_t":
            return stats.t(self.df, scale=self.multiplier)
        if self.family == "laplace":
            return stats.laplace(scale=self.multiplier)
        raise TypeError("discrete innovations have no continuous density")

    def ppf(self, u) -> np.ndarray:
        """Inverse CDF; the common map from uniforms to innovations."""
        u = np.asarray(u, dtype=float)
        if self.family == "gaussian":
            return self.multiplier * special.ndtri(u)
        if self.family == "student_t":
            return self.multiplier * special.stdtrit(self.df, u)
        if self.family == "laplace":
            return self.multiplier * -np.sign(u - 0.5) * np.log1p(-2.0 * np.abs(u - 0.5))
        cum = np.cumsum(self._probs)
        idx = np.searchsorted(cum, u, side="right")
        return self._points[np.minimum(idx, len(self._points) - 1)]

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Independent draws using the generator's native samplers."""
        m = self.multiplier
        if self.family == "gaussian":
            return m * rng.standard_normal(size)
        if self.family == "student_t":
            return m * rng.standard_t(self.df, size)
        if self.family == "laplace":
            return rng.laplace(0.0, m, size)
        u = rng.random(size)
        return self.ppf(np.where(u == 0.0, _U_FLOOR, u))

    def pdf(self, x) -> np.ndarray:
        return self._frozen().pdf(x)

    def cdf(self, x) -> np.ndarray:
        if self.family == "discrete":
            x = np.asarray(x, dtype=float)
            cum = np.concatenate([[0.0], np.cumsum(self._probs)])
            return np.minimum(cum[np.searchsorted(self._points, x, side="right")], 1.0)
        return self._frozen().cdf(x)

    def moment(self, order: int) -> float:
        """Exact raw moment E[eps**order]."""
        if self.family == "discrete":
            return float(np.dot(self._probs, self._points**order))
        if order % 2:
            return 0.0
        m = self.multiplier
        if self.family == "gaussian":
            return m**order * float(special.factorial2(order - 1))
        if self.family == "laplace":
            return m**order * math.factorial(order)
        if order >= self.df:
            return math.inf
        return m**order * float(stats.t(self.df).moment(order))

    def kurtosis(self) -> float:
        return self.moment(4) / self.moment(2) ** 2

    def abs_quantile(self, q: float) -> float:
        """Quantile of |eps| at level q."""
        if self.family == "discrete":
            return float(np.max(np.abs(self._points)))
        return float(self._frozen().ppf(0.5 + q / 2.0))

    def to_dict(self) -> dict:
        out = {"family": self.family, "scale": self.scale, "normalized": self.normalized}
        if self.df is not None:
            out["df"] = self.df
        if self.support is not None:
            out["support"] = [list(a) for a in self.support]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "InnovationSpec":
        data = dict(data)
        allowed = {"family", "df", "support", "scale", "normalized"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown innovation keys: {sorted(unknown)}")
        if data.get("support") is not None:
            data["support"] = tuple(tuple(a) for a in data["support"])
        return cls(**data)


def _merge_atoms(points: np.ndarray, probs: np.ndarray):
    order = np.argsort(points, kind="stable")
    points, probs = points[order], probs[order]
    uniq, inverse = np.unique(points, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, probs)
    return uniq, merged


@dataclass(frozen=True)
class RecursionMap:
    """Update map ``f(u, s)`` in volatility (M1) or variance (M2) coordinates.

    ``f`` must accept numpy arrays and broadcast.
    """

    kind: str
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("M1", "M2"):
            raise ValueError(f"kind must be 'M1' or 'M2', got {self.kind!r}")

    def __call__(self, u, s):
        return self.f(u, s)

    def innovation_argument(self, eps):
        """Map raw innovations to the first argument of ``f``."""
        eps = np.asarray(eps, dtype=float)
        return np.abs(eps) if self.kind == "M1" else eps * eps

    def volatility(self, state):
        state = np.asarray(state, dtype=float)
        return state if self.kind == "M1" else np.sqrt(state)

    def check(self, u_max: float = 4.0, s_max: float = 4.0, n_grid: int = 64,
              tol: float = 1e-9) -> None:
        """Raise ``ValueError`` unless f is increasing and componentwise convex on a grid."""
        u = np.linspace(0.0, u_max, n_grid)
        s = np.linspace(0.0, s_max, n_grid)
        values = np.asarray(self.f(u[:, None], s[None, :]), dtype=float)
        if values.shape != (n_grid, n_grid) or not np.all(np.isfinite(values)):
            raise ValueError(f"recursion {self.label!r} is not finite on the check grid")
        if np.any(values < 0):
            raise ValueError(f"recursion {self.label!r} takes negative values")
        for axis, name in ((0, "innovation"), (1, "state")):
            first = np.diff(values, axis=axis)
            if first.min() < -tol:
                raise ValueError(f"recursion {self.label!r} decreases in its {name} argument")
            second = np.diff(values, n=2, axis=axis)
            if second.min() < -tol:
                raise ValueError(f"recursion {self.label!r} is not convex in its {name} argument")


def garch11_m2(params: GarchParams) -> RecursionMap:
    a0, a1, b1 = params.alpha0, params.alpha1, params.beta1

    def f(u, s):
        return a0 + a1 * u * s + b1 * s

    return RecursionMap("M2", f, f"garch11[M2]({a0!r},{a1!r},{b1!r})")


def garch11_m1(params: GarchParams) -> RecursionMap:
    a0, a1, b1 = params.alpha0, params.alpha1, params.beta1

    def f(u, s):
        s2 = s * s
        return np.sqrt(a0 + a1 * u * u * s2 + b1 * s2)

    return RecursionMap("M1", f, f"garch11[M1]({a0!r},{a1!r},{b1!r})")


def avgarch_m1(omega: float, a: float, b: float) -> RecursionMap:
    """Absolute-value GARCH: ``sigma' = omega + a*|eps|*sigma + b*sigma``."""
    if omega <= 0 or a < 0 or b < 0:
        raise ValueError("avgarch needs omega > 0 and a, b >= 0")

    def f(u, s):
        return omega + a * u * s + b * s

    return RecursionMap("M1", f, f"avgarch[M1]({omega!r},{a!r},{b!r})")


def quadratic_m2(omega: float, a: float, b: float, c: float) -> RecursionMap:
    """``sigma2' = omega + a*eps2*sigma2 + b*sigma2 + c*sigma2**2``."""
    if omega <= 0 or min(a, b, c) < 0:
        raise ValueError("quadratic_m2 needs omega > 0 and a, b, c >= 0")

    def f(u, s):
        return omega + a * u * s + b * s + c * s * s

    return RecursionMap("M2", f, f"quadratic[M2]({omega!r},{a!r},{b!r},{c!r})")


def recursion_from_label(label: str, params: dict) -> RecursionMap:
    """Build a named recursion from a parameter mapping (config files use this)."""
    builders = {
        "garch11_m1": lambda p: garch11_m1(GarchParams(**p)),
        "garch11_m2": lambda p: garch11_m2(GarchParams(**p)),
        "avgarch_m1": lambda p: avgarch_m1(**p),
        "quadratic_m2": lambda p: quadratic_m2(**p),
    }
    try:
        builder = builders[label]
    except KeyError:
        raise ValueError(f"unknown recursion {label!r}; expected one of {sorted(builders)}") from None
    return builder(dict(params))


@dataclass(frozen=True)
class InitialStateSpec:
    """Initial state in the recursion's own coordinates.

    ``mode="constant"`` uses ``value`` directly; ``mode="half_gaussian"``
    draws ``value * |Z|`` with ``Z`` standard normal.
    """

    mode: str = "constant"
    value: float = 1.0

    def __post_init__(self):
        if self.mode not in ("constant", "half_gaussian"):
            raise ValueError(f"unknown initial-state mode {self.mode!r}")
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"initial-state value must be positive, got {self.value!r}")

    def from_uniform(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.mode == "constant":
            return np.full(u.shape, self.value)
        draw = self.value * np.abs(special.ndtri(u))
        return np.maximum(draw, np.finfo(float).tiny)

    def upper_quantile(self, q: float = 0.999) -> float:
        if self.mode == "constant":
            return self.value
        return self.value * float(special.ndtri(0.5 + q / 2.0))


@dataclass
class PathBatch:
    """Simulated volatilities, innovations and logreturns, one row per path."""

    sigma: np.ndarray
    eps: np.ndarray
    x: np.ndarray
    seed: int

    @property
    def n_paths(self) -> int:
        return self.x.shape[0]

    @property
    def n_steps(self) -> int:
        return self.x.shape[1]

    def to_csv(self, path) -> None:
        sums = logreturn_sums(self)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["path_id", "S_n", "sigma_n"])
            for i, (s, v) in enumerate(zip(sums, self.sigma[:, -1])):
                writer.writerow([i, repr(float(s)), repr(float(v))])


def _check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def path_uniforms(seed: int, start: int, stop: int, width: int) -> np.ndarray:
    """Uniforms for paths ``start..stop-1``; each path owns the stream ``(seed, path)``."""
    out = np.empty((stop - start, width))
    for row, i in enumerate(range(start, stop)):
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))
        out[row] = gen.random(width)
    out[out == 0.0] = _U_FLOOR
    return out


def _simulate_chunk(recursion, innov, init, n_steps, seed, start, stop):
    u = path_uniforms(seed, start, stop, n_steps + 1)
    state = init.from_uniform(u[:, 0])
    eps = innov.ppf(u[:, 1:])
    sigma = np.empty_like(eps)
    # overflow is reported below as a DivergenceError, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        _iterate(recursion, state, eps, sigma, start)
    return sigma, eps


def _iterate(recursion, state, eps, sigma, start):
    n_steps = eps.shape[1]
    for k in range(n_steps):
        vol = recursion.volatility(state)
        bad = ~(np.isfinite(vol) & (vol > 0))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DivergenceError(start + row, k, vol[row])
        sigma[:, k] = vol
        state = recursion(recursion.innovation_argument(eps[:, k]), state)


def simulate_paths(recursion: RecursionMap, innov: InnovationSpec, init: InitialStateSpec,
                   n_steps: int, n_paths: int, seed: int, n_jobs: int = 1,
                   check: bool = True) -> PathBatch:
    """Simulate ``n_paths`` independent paths of ``n_steps`` logreturns.

    Column ``k`` holds ``sigma[k]``, ``eps[k]`` and ``x[k]`` for
    ``k = 0..n_steps-1``.  Path ``i`` draws from its own stream derived
    from ``(seed, i)``, so ``n_jobs`` never changes the result; two calls
    with the same seed and different innovation laws share uniforms, which
    gives common random numbers for paired comparisons.
    """
    seed = _check_seed(seed)
    if n_steps < 1 or n_paths < 1:
        raise ValueError("n_steps and n_paths must be >= 1")
    if check:
        u_max = innov.abs_quantile(0.999)
        if recursion.kind == "M2":
            u_max = u_max**2
        recursion.check(u_max=max(u_max, 1.0), s_max=max(4.0, 2 * init.upper_quantile()))
    bounds = [(lo, min(lo + _CHUNK, n_paths)) for lo in range(0, n_paths, _CHUNK)]
    task = lambda b: _simulate_chunk(recursion, innov, init, n_steps, seed, *b)  # noqa: E731
    if n_jobs == 1 or len(bounds) == 1:
        parts = [task(b) for b in bounds]
    else:
        workers = None if n_jobs in (-1, None) else int(n_jobs)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, bounds))
    sigma = np.concatenate([p[0] for p in parts])
    eps = np.concatenate([p[1] for p in parts])
    return PathBatch(sigma=sigma, eps=eps, x=sigma * eps, seed=seed)


def closed_form_variance(params: GarchParams, sigma0_sq: float, eps_sq: Sequence[float]) -> float:
    """Explicit GARCH(1,1) variance after ``len(eps_sq)`` steps.

    With ``c[i] = beta1 + alpha1 * eps_sq[i]`` and ``n = len(eps_sq) - 1``::

        sigma2[n+1] = sigma0_sq * prod(c[0..n])
                      + alpha0 * (1 + sum_{k=1..n} prod(c[n-k+1..n]))
    """
    eps_sq = np.asarray(eps_sq, dtype=float)
    if eps_sq.ndim != 1 or eps_sq.size == 0:
        raise ValueError("eps_sq must be a non-empty sequence")
    if sigma0_sq <= 0:
        raise ValueError("sigma0_sq must be positive")
    # products over the k most recent innovations
    tail_products = np.cumprod(params.beta1 + params.alpha1 * eps_sq[::-1])
    return float(sigma0_sq * tail_products[-1] + params.alpha0 * (1.0 + tail_products[:-1].sum()))


def logreturn_sums(batch: PathBatch) -> np.ndarray:
    """Total logreturn ``S = x[0] + ... + x[n]`` for each path."""
    return batch.x.sum(axis=1)


def compose_g(recursion: RecursionMap, sigma0: float, eps_magnitudes: Sequence[float]) -> float:
    """Iterate the recursion from ``sigma0`` over the given innovation arguments.

    Arguments are in the recursion's coordinates: ``|eps|`` and volatility
    for M1, ``eps**2`` and variance for M2.
    """
    state = float(sigma0)
    for u in eps_magnitudes:
        state = float(recursion(float(u), state))
    return state


class GarchSimulator(BaseEstimator):
    """GARCH(1,1) path simulator with sklearn-style parameters.

    Parameters can be cloned and swept with ``get_params``/``set_params``;
    ``simulate`` returns a :class:`PathBatch`.

    Parameters
    ----------
    alpha0, alpha1, beta1 : float
        GARCH(1,1) coefficients.
    innovations : InnovationSpec, optional
        Defaults to standard Gaussian.
    init : InitialStateSpec, optional
        Initial state in the chosen coordinates; defaults to a half-Gaussian
        initial variance.
    coordinates : {"M2", "M1"}
        Which form of the recursion drives the simulation.
    n_steps, n_paths : int
    allow_nonstationary : bool
        Accept ``alpha1 + beta1 >= 1``.
    n_jobs : int
    random_state : int
        Master seed; required.
    """

    def __init__(self, alpha0=0.2, alpha1=0.2, beta1=0.2, innovations=None, init=None,
                 coordinates="M2", n_steps=50, n_paths=100_000, allow_nonstationary=False,
                 n_jobs=1, random_state=None):
        self.alpha0 = alpha0
        self.alpha1 = alpha1
        self.beta1 = beta1
        self.innovations = innovations
        self.init = init
        self.coordinates = coordinates
        self.n_steps = n_steps
        self.n_paths = n_paths
        self.allow_nonstationary = allow_nonstationary
        self.n_jobs = n_jobs
        self.random_state = random_state

    @property
    def params_(self) -> GarchParams:
        return GarchParams(self.alpha0, self.alpha1, self.beta1,
                           unchecked=self.allow_nonstationary)

    @property
    def recursion_(self) -> RecursionMap:
        if self.coordinates == "M2":
            return garch11_m2(self.params_)
        if self.coordinates == "M1":
            return garch11_m1(self.params_)
        raise ValueError(f"coordinates must be 'M1' or 'M2', got {self.coordinates!r}")

    def simulate(self) -> PathBatch:
        if self.random_state is None:
            raise ValueError("random_state is required; there is no default seed")
        innov = self.innovations if self.innovations is not None else InnovationSpec()
        init = self.init if self.init is not None else InitialStateSpec("half_gaussian", 1.0)
        return simulate_paths(self.recursion_, innov, init, self.n_steps, self.n_paths,
                              self.random_state, n_jobs=self.n_jobs)

    def sample_sums(self) -> np.ndarray:
        return logreturn_sums(self.simulate())
