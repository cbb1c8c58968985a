"""Decisions for univariate and multivariate stochastic-order relations.

Every check evaluates a signed gap curve ``d`` on a grid, oriented so that
``d <= tol`` everywhere means the first argument is the smaller one:

* ``st``: ``d = F_B - F_A`` (survival of A minus survival of B)
* ``icx``/``cx``: ``d = E[(A-k)+] - E[(B-k)+]``
* ``supermodular_cx``: ``d = E[phi(A)] - E[phi(B)]`` over a test family

The reported margin is the worst signed gap for the decided direction:
``max d`` for ``A_below_B``, ``min d`` for ``B_below_A`` and the gap of
largest magnitude otherwise.  Swapping the arguments negates ``d``, so it
flips the direction and negates the margin.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from ._validation import as_matrix, as_probabilities
from .distributions import DiscreteDist, EmpiricalDist, kurtosis_beta2

__all__ = [
    "Direction",
    "OrderVerdict",
    "TestFunctionFamily",
    "comparison_grid",
    "default_tolerance",
    "check_st",
    "check_icx",
    "check_cx",
    "sign_changes",
    "direction_from_signs",
    "check_peakedness",
    "check_kurtosis",
    "binned_kde",
    "silverman_bandwidth",
    "density_crossings",
    "check_supermodular_cx",
]

EXACT_TOL = 1e-12
DEFAULT_GRID = 512


class Direction(str, enum.Enum):
    A_BELOW_B = "A_below_B"
    B_BELOW_A = "B_below_A"
    INCOMPARABLE = "incomparable"
    INDISTINGUISHABLE = "indistinguishable"

    def flipped(self) -> "Direction":
        if self is Direction.A_BELOW_B:
            return Direction.B_BELOW_A
        if self is Direction.B_BELOW_A:
            return Direction.A_BELOW_B
        return self


def _jsonable(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


@dataclass
class OrderVerdict:
    relation: str
    direction: Direction
    margin: float
    grid: np.ndarray
    tolerance: float
    evidence: dict = field(default_factory=dict)
    curve_names: tuple = ()
    gaps: np.ndarray | None = field(default=None, repr=False)

    @property
    def slack(self) -> float:
        """Smallest amount by which "A below B" holds on the grid (negative if violated)."""
        if self.gaps is None:
            raise ValueError("verdict carries no gap curve")
        return float(-np.max(self.gaps))

    @property
    def holds(self) -> bool:
        """True when A is below B (possibly indistinguishably)."""
        return self.direction in (Direction.A_BELOW_B, Direction.INDISTINGUISHABLE)

    def is_consistent(self) -> bool:
        """The margin agrees with the direction at the stated tolerance."""
        if self.direction is Direction.A_BELOW_B:
            return self.margin <= self.tolerance
        if self.direction is Direction.B_BELOW_A:
            return self.margin >= -self.tolerance
        if self.direction is Direction.INDISTINGUISHABLE:
            return abs(self.margin) <= self.tolerance
        return True

    def to_dict(self, curves: bool = True) -> dict:
        """JSON-ready mapping; ``curves=False`` replaces arrays by a grid summary."""
        out = {
            "relation": self.relation,
            "direction": self.direction,
            "margin": self.margin,
            "tolerance": self.tolerance,
        }
        if curves:
            out["grid"] = self.grid
            out["evidence"] = self.evidence
        else:
            out["grid"] = {"size": int(self.grid.size), "min": float(self.grid.min()),
                           "max": float(self.grid.max())}
            out["evidence"] = {k: v for k, v in self.evidence.items()
                               if not isinstance(v, (np.ndarray, list))}
        return _jsonable(out)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    def to_csv(self, path, header=("k", "value_A", "value_B")) -> None:
        if len(self.curve_names) != 2:
            raise ValueError(f"{self.relation} verdict carries no pair of evidence curves")
        a = np.asarray(self.evidence[self.curve_names[0]], dtype=float)
        b = np.asarray(self.evidence[self.curve_names[1]], dtype=float)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in zip(self.grid, a, b):
                writer.writerow([repr(float(v)) for v in row])


def _decide(gaps, tol):
    gaps = np.asarray(gaps, dtype=float)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), gaps.shape)
    a_below = bool(np.all(gaps <= tol))
    b_below = bool(np.all(gaps >= -tol))
    if a_below and b_below:
        direction = Direction.INDISTINGUISHABLE
    elif a_below:
        direction = Direction.A_BELOW_B
    elif b_below:
        direction = Direction.B_BELOW_A
    else:
        direction = Direction.INCOMPARABLE
    if direction is Direction.A_BELOW_B:
        margin = float(gaps.max())
    elif direction is Direction.B_BELOW_A:
        margin = float(gaps.min())
    else:
        margin = float(gaps[np.argmax(np.abs(gaps))])
    return direction, margin


def _is_exact(dist) -> bool:
    return bool(getattr(dist, "exact", False))


def _sample_size(dist) -> float:
    if isinstance(dist, EmpiricalDist):
        return dist.n
    return math.inf


def _scale(dist) -> float:
    if isinstance(dist, (EmpiricalDist, DiscreteDist)):
        return math.sqrt(max(dist.var(), 0.0))
    return float(dist.std())


def default_tolerance(a, b, relation: str = "st") -> float:
    """Noise band for comparing ``a`` and ``b``.

    Exact pairs get ``1e-12``.  Otherwise the band is ``3*sqrt(ln n / n)``
    with ``n`` the smaller sample size; hinge-based relations multiply it by
    the pooled standard deviation so the band carries the variable's units.
    """
    n = min(_sample_size(a), _sample_size(b))
    if not math.isfinite(n):
        return EXACT_TOL
    band = 3.0 * math.sqrt(math.log(n) / n)
    if relation in ("icx", "cx"):
        band *= math.sqrt(0.5 * (_scale(a) ** 2 + _scale(b) ** 2))
    return band


def _anchor_points(dist, n_points):
    if isinstance(dist, EmpiricalDist):
        return dist.sample, None
    if isinstance(dist, DiscreteDist):
        return dist.points, None
    probs = np.linspace(0.0, 1.0, n_points + 2)[1:-1]
    return None, np.asarray(dist.ppf(probs), dtype=float)


def comparison_grid(a, b, grid_spec=None) -> np.ndarray:
    """Evaluation grid shared by two laws.

    ``grid_spec`` may be an explicit array of points, a point count, or
    ``None``.  Two exact laws use the union of their supports (all kinks of
    their CDFs and stop-loss curves).  Otherwise the grid is ``n`` pooled
    quantiles (default 512) taken as actual sample points, plus the pooled
    extremes and any discrete support.
    """
    if grid_spec is not None and not isinstance(grid_spec, (int, np.integer)):
        grid = np.unique(np.asarray(grid_spec, dtype=float))
        if grid.size == 0:
            raise ValueError("explicit grid is empty")
        return grid
    if _is_exact(a) and _is_exact(b):
        return np.union1d(a.points, b.points)
    n_points = DEFAULT_GRID if grid_spec is None else int(grid_spec)
    samples, extra = [], []
    for dist in (a, b):
        sample, fixed = _anchor_points(dist, n_points)
        if isinstance(dist, DiscreteDist):
            extra.append(sample)
        elif sample is not None:
            samples.append(sample)
        else:
            extra.append(fixed)
    pieces = list(extra)
    if samples:
        pooled = np.sort(np.concatenate(samples))
        probs = np.linspace(0.0, 1.0, n_points)
        pieces.append(np.quantile(pooled, probs, method="inverted_cdf"))
        pieces.append(pooled[[0, -1]])
    return np.unique(np.concatenate(pieces))


def check_st(a, b, grid_spec=None, tol=None) -> OrderVerdict:
    """Usual stochastic order: ``A <=st B`` iff ``F_A >= F_B - tol`` on the grid."""
    grid = comparison_grid(a, b, grid_spec)
    tol = default_tolerance(a, b, "st") if tol is None else float(tol)
    fa = np.asarray(a.cdf(grid), dtype=float)
    fb = np.asarray(b.cdf(grid), dtype=float)
    gaps = fb - fa
    direction, margin = _decide(gaps, tol)
    return OrderVerdict("st", direction, margin, grid, tol,
                        {"cdf_a": fa, "cdf_b": fb}, ("cdf_a", "cdf_b"), gaps)


def _require_hinge(dist):
    if not hasattr(dist, "stop_loss"):
        raise TypeError(f"{type(dist).__name__} has no stop-loss transform; "
                        "use DiscreteDist or EmpiricalDist")


def check_icx(a, b, grid_spec=None, tol=None) -> OrderVerdict:
    """Increasing convex order via stop-loss dominance on the grid."""
    _require_hinge(a)
    _require_hinge(b)
    grid = comparison_grid(a, b, grid_spec)
    tol = default_tolerance(a, b, "icx") if tol is None else float(tol)
    sa = a.stop_loss(grid)
    sb = b.stop_loss(grid)
    gaps = sa - sb
    direction, margin = _decide(gaps, tol)
    return OrderVerdict("icx", direction, margin, grid, tol,
                        {"stop_loss_a": sa, "stop_loss_b": sb},
                        ("stop_loss_a", "stop_loss_b"), gaps)


def _pooled_mean_se(a, b) -> float:
    se2 = 0.0
    for dist in (a, b):
        if isinstance(dist, EmpiricalDist):
            se2 += dist.std_error_of_mean() ** 2
    return math.sqrt(se2)


def check_cx(a, b, mean_tol=None, grid_spec=None, tol=None) -> OrderVerdict:
    """Convex order: equal means (within ``mean_tol``) and increasing convex order.

    ``mean_tol`` defaults to ``1e-12`` for exact pairs and to four pooled
    standard errors otherwise.
    """
    icx = check_icx(a, b, grid_spec, tol)
    if mean_tol is None:
        se = _pooled_mean_se(a, b)
        mean_tol = EXACT_TOL if se == 0 else 4.0 * se
    mean_a, mean_b = a.mean(), b.mean()
    evidence = dict(icx.evidence)
    evidence.update(mean_a=mean_a, mean_b=mean_b, mean_tol=mean_tol,
                    icx_direction=icx.direction)
    direction = icx.direction
    if abs(mean_a - mean_b) > mean_tol:
        direction = Direction.INCOMPARABLE
        evidence["reason"] = (f"means differ by {mean_a - mean_b:.6g}, beyond mean_tol "
                              f"{mean_tol:.6g}; convex order forces equal means")
    return OrderVerdict("cx", direction, icx.margin, icx.grid, icx.tolerance,
                        evidence, icx.curve_names, icx.gaps)


def sign_changes(a, b, grid_spec=None, tol=None):
    """Sign changes of ``G - F`` (``G`` the CDF of ``b``, ``F`` of ``a``) across the grid.

    Gaps within ``tol`` count as ties; runs of one sign collapse to a single
    entry.  Returns ``(count, sequence)`` with ``sequence`` a tuple of
    ``"+"``/``"-"``.
    """
    grid = comparison_grid(a, b, grid_spec)
    tol = default_tolerance(a, b, "st") if tol is None else float(tol)
    gaps = np.asarray(b.cdf(grid), dtype=float) - np.asarray(a.cdf(grid), dtype=float)
    signs = np.sign(gaps[np.abs(gaps) > tol])
    if signs.size == 0:
        return 0, ()
    keep = np.concatenate([[True], signs[1:] != signs[:-1]])
    sequence = tuple("+" if s > 0 else "-" for s in signs[keep])
    return len(sequence) - 1, sequence


def direction_from_signs(count: int, sequence) -> Direction:
    """Read a peakedness direction off a single-cut sign pattern."""
    sequence = tuple(sequence)
    if count == 0 and not sequence:
        return Direction.INDISTINGUISHABLE
    if sequence == ("+", "-"):
        return Direction.A_BELOW_B
    if sequence == ("-", "+"):
        return Direction.B_BELOW_A
    return Direction.INCOMPARABLE


def _symmetry_warning(dist, label):
    if isinstance(dist, DiscreteDist):
        if not dist.is_symmetric():
            return f"{label} is not symmetric about 0"
        return None
    if isinstance(dist, EmpiricalDist):
        se = dist.std_error_of_mean()
        if abs(dist.mean()) > 4.0 * se:
            return f"{label} mean {dist.mean():.4g} is more than 4 standard errors from 0"
    return None


def check_peakedness(a, b, tol=None, grid_spec=None) -> OrderVerdict:
    """Peakedness order of symmetric laws, decided as ``|A| <=st |B|``.

    The squared-variable comparison and the single-cut pattern of the CDFs
    are recorded as evidence; for symmetric laws all three agree.
    """
    abs_a, abs_b = a.abs(), b.abs()
    st_abs = check_st(abs_a, abs_b, grid_spec, tol)
    st_sq = check_st(a.square(), b.square(), grid_spec, st_abs.tolerance)
    # F_|X|(t) = 2 F_X(t) - 1 for symmetric X, so the signed CDFs get half the band
    count, seq = sign_changes(a, b, grid_spec, st_abs.tolerance / 2)
    evidence = dict(st_abs.evidence)
    evidence.update(squared_direction=st_sq.direction, sign_change_count=count,
                    sign_sequence=list(seq), single_cut_direction=direction_from_signs(count, seq))
    warnings = [w for w in (_symmetry_warning(a, "A"), _symmetry_warning(b, "B")) if w]
    if warnings:
        evidence["warnings"] = warnings
    return OrderVerdict("peak", st_abs.direction, st_abs.margin, st_abs.grid,
                        st_abs.tolerance, evidence, st_abs.curve_names, st_abs.gaps)


def check_kurtosis(a, b, tol=None) -> OrderVerdict:
    """Compare Pearson kurtosis: ``A_below_B`` when ``beta2(A) <= beta2(B) + tol``.

    Exact pairs use ``1e-12``; otherwise the default band is
    ``3*sqrt(ln n / n)`` relative to the larger estimate.  Second moments
    are recorded, since the kurtosis ordering that follows from
    ``A**2 <=icx B**2`` assumes they are equal.
    """
    beta_a, beta_b = kurtosis_beta2(a), kurtosis_beta2(b)
    if tol is None:
        tol = default_tolerance(a, b, "st")
        if tol != EXACT_TOL:
            tol *= max(beta_a, beta_b)
    gaps = np.array([beta_a - beta_b])
    direction, margin = _decide(gaps, tol)
    evidence = {"beta2_a": beta_a, "beta2_b": beta_b,
                "second_moment_a": a.moment(2), "second_moment_b": b.moment(2)}
    return OrderVerdict("kurtosis", direction, margin, np.zeros(1), float(tol), evidence, (), gaps)


def silverman_bandwidth(sample) -> float:
    sample = np.asarray(sample, dtype=float)
    sd = sample.std(ddof=1)
    q75, q25 = np.percentile(sample, [75, 25])
    spread = min(sd, (q75 - q25) / 1.349) if q75 > q25 else sd
    return 0.9 * spread * sample.size ** (-0.2)


def binned_kde(sample, grid, bandwidth: float, bins_per_bandwidth: int = 8) -> np.ndarray:
    """Gaussian kernel density estimate on ``grid`` via linear binning and FFT convolution.

    Only the window ``[grid.min() - 6h, grid.max() + 6h]`` is binned, so far
    outliers cost nothing; the normalization still uses the full sample size.
    """
    sample = np.asarray(sample, dtype=float)
    grid = np.asarray(grid, dtype=float)
    h = float(bandwidth)
    if not h > 0:
        raise ValueError("bandwidth must be positive")
    lo, hi = grid.min() - 6 * h, grid.max() + 6 * h
    dx = h / bins_per_bandwidth
    n_bins = int(math.ceil((hi - lo) / dx)) + 1
    centers = lo + dx * np.arange(n_bins)
    inside = sample[(sample >= lo) & (sample <= centers[-1])]
    pos = (inside - lo) / dx
    left = np.floor(pos).astype(np.int64)
    frac = pos - left
    counts = np.bincount(left, weights=1.0 - frac, minlength=n_bins + 1)
    counts += np.bincount(left + 1, weights=frac, minlength=n_bins + 1)
    counts = counts[:n_bins]
    half = int(math.ceil(6 * bins_per_bandwidth))
    offsets = dx * np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (offsets / h) ** 2) / (h * math.sqrt(2 * math.pi))
    density = fftconvolve(counts, kernel, mode="same") / sample.size
    return np.interp(grid, centers, np.maximum(density, 0.0))


def density_crossings(a, b, bandwidth=None, grid_spec=None, min_samples: int = 10_000):
    """Count crossings of kernel density estimates of two samples.

    Advisory only: the count depends on the bandwidth.  A shared Silverman
    bandwidth is used by default, the grid spans the pooled 0.1%-99.9%
    quantiles, and differences inside a pointwise three-standard-error band
    are ties.  Returns ``(count, locations)``.
    """
    sa = a.sample if isinstance(a, EmpiricalDist) else np.asarray(a, dtype=float)
    sb = b.sample if isinstance(b, EmpiricalDist) else np.asarray(b, dtype=float)
    n = min(sa.size, sb.size)
    if n < min_samples:
        raise ValueError(f"density crossings need at least {min_samples} draws per sample, got {n}")
    pooled = np.concatenate([sa, sb])
    h = silverman_bandwidth(pooled) if bandwidth is None else float(bandwidth)
    if grid_spec is None or isinstance(grid_spec, (int, np.integer)):
        n_points = DEFAULT_GRID if grid_spec is None else int(grid_spec)
        lo, hi = np.quantile(pooled, [0.001, 0.999])
        grid = np.linspace(lo, hi, n_points)
    else:
        grid = np.asarray(grid_spec, dtype=float)
    fa = binned_kde(sa, grid, h)
    fb = binned_kde(sb, grid, h)
    band = 3.0 * np.sqrt((fa + fb) / (2.0 * math.sqrt(math.pi) * n * h))
    diff = fa - fb
    significant = np.flatnonzero(np.abs(diff) > band)
    if significant.size == 0:
        return 0, []
    signs = np.sign(diff[significant])
    flips = np.flatnonzero(signs[1:] != signs[:-1])
    locations = [float(0.5 * (grid[significant[i]] + grid[significant[i + 1]])) for i in flips]
    return len(locations), locations


class TestFunctionFamily:
    """Parameterized test functions for an order relation.

    ``convex_univariate`` and ``increasing_convex_univariate`` hold hinge
    functions of a scalar; ``supermodular_convex_multivariate`` holds
    ``psi(c . x)`` with ``c >= 0`` componentwise and ``psi`` one of
    ``(t - k)+`` or ``((t - k)+)**2``.  Such members are convex and their
    Hessian ``psi'' c c^T`` has nonnegative entries, so they are supermodular.
    """

    __test__ = False  # not a pytest class

    KINDS = ("convex_univariate", "increasing_convex_univariate",
             "supermodular_convex_multivariate")

    def __init__(self, kind: str, weights=None, powers=(1, 2), thresholds=None,
                 labels=None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown family kind {kind!r}")
        if any(p not in (1, 2) for p in powers):
            raise ValueError("powers must be drawn from {1, 2}")
        self.kind = kind
        self.powers = tuple(powers)
        self.thresholds = thresholds
        if kind == "supermodular_convex_multivariate":
            weights = np.atleast_2d(np.asarray(weights, dtype=float))
            if np.any(weights < 0):
                raise ValueError("weight vectors must be nonnegative")
            if np.any(weights.sum(axis=1) == 0):
                raise ValueError("weight vectors must be nonzero")
            self.weights = weights
            self.labels = list(labels) if labels is not None else [
                f"c{i}" for i in range(len(weights))]
        else:
            self.weights = None
            self.labels = []

    @classmethod
    def supermodular_convex(cls, dim: int, powers=(1, 2), thresholds=None):
        """Default family: unit vectors, prefix-sum indicators and ``1 + e_i``."""
        weights, labels = [], []
        eye = np.eye(dim)
        for i in range(dim):
            weights.append(eye[i])
            labels.append(f"e{i}")
        for i in range(1, dim):
            weights.append((np.arange(dim) <= i).astype(float))
            labels.append(f"prefix{i}")
        for i in range(dim):
            weights.append(1.0 + eye[i])
            labels.append(f"ones+e{i}")
        return cls("supermodular_convex_multivariate", weights, powers, thresholds, labels)

    @classmethod
    def convex(cls, thresholds, powers=(1,)):
        return cls("convex_univariate", powers=powers, thresholds=np.asarray(thresholds, float))

    @classmethod
    def increasing_convex(cls, thresholds, powers=(1,)):
        return cls("increasing_convex_univariate", powers=powers,
                   thresholds=np.asarray(thresholds, float))

    @property
    def dim(self):
        return None if self.weights is None else self.weights.shape[1]

    def members(self, thresholds=None) -> list[tuple[str, Callable]]:
        """Concrete member functions; multivariate members act on rows of a 2-D array."""
        ks = np.asarray(self.thresholds if thresholds is None else thresholds, dtype=float)
        out = []
        if self.kind == "supermodular_convex_multivariate":
            for label, c in zip(self.labels, self.weights):
                for power in self.powers:
                    for k in ks:
                        out.append((f"{label}|p{power}|k={k:.6g}", _ridge(c, k, power)))
            return out
        for k in ks:
            for power in self.powers:
                out.append((f"(x-{k:.6g})+^{power}", _hinge_fn(k, power, +1)))
                if self.kind == "convex_univariate":
                    out.append((f"({k:.6g}-x)+^{power}", _hinge_fn(k, power, -1)))
        return out

    def validate(self, rng=None, n_probes: int = 200, thresholds=None, tol: float = 1e-9) -> bool:
        """Check every member against the class definition on random probes."""
        rng = np.random.default_rng(0) if rng is None else rng
        for label, fn in self.members(thresholds):
            if self.kind == "supermodular_convex_multivariate":
                d = self.dim
                x = rng.normal(scale=2.0, size=(n_probes, d))
                y = rng.normal(scale=2.0, size=(n_probes, d))
                lam = rng.random((n_probes, 1))
                if np.any(fn(lam * x + (1 - lam) * y)
                          > lam[:, 0] * fn(x) + (1 - lam[:, 0]) * fn(y) + tol):
                    return False
                if np.any(fn(x) + fn(y) > fn(np.minimum(x, y)) + fn(np.maximum(x, y)) + tol):
                    return False
            else:
                t = np.linspace(-5, 5, n_probes)
                v = fn(t)
                if np.diff(v, 2).min() < -tol:
                    return False
                if self.kind == "increasing_convex_univariate" and np.diff(v).min() < -tol:
                    return False
        return True


def _hinge_fn(k, power, sign):
    return lambda t: np.maximum(sign * (np.asarray(t, float) - k), 0.0) ** power


def _ridge(c, k, power):
    return lambda x: np.maximum(np.asarray(x, float) @ c - k, 0.0) ** power


def _as_joint(batch):
    """``(points, probs)`` for an exact joint law, or ``(points, None)`` for a sample."""
    if isinstance(batch, tuple) and len(batch) == 2:
        points = as_matrix(batch[0], name="points")
        return points, as_probabilities(batch[1], points.shape[0])
    return as_matrix(batch, name="batch"), None


def check_supermodular_cx(batch_a, batch_b, family: TestFunctionFamily | None = None,
                          tol=None, n_thresholds: int = 33) -> OrderVerdict:
    """Compare ``E[phi(A)]`` with ``E[phi(B)]`` over a supermodular-convex family.

    A batch is either a 2-D sample (rows are draws) or an exact joint law
    given as ``(points, probs)``.  Thresholds default to every kink of each
    projected exact law, or ``n_thresholds`` pooled quantiles for samples.
    For samples the gaps are divided by ``sd(c . x)**power`` before the
    tolerance is applied.
    """
    pa, wa = _as_joint(batch_a)
    pb, wb = _as_joint(batch_b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    dim = pa.shape[1]
    family = TestFunctionFamily.supermodular_convex(dim) if family is None else family
    if family.kind != "supermodular_convex_multivariate":
        raise ValueError("check_supermodular_cx needs a supermodular_convex_multivariate family")
    if family.dim != dim:
        raise ValueError(f"family dimension {family.dim} does not match data dimension {dim}")
    exact = wa is not None and wb is not None
    labels, gaps, values_a, values_b, scales = [], [], [], [], []
    for label, c in zip(family.labels, family.weights):
        ya, yb = pa @ c, pb @ c
        da = DiscreteDist(ya, wa) if wa is not None else EmpiricalDist(ya)
        db = DiscreteDist(yb, wb) if wb is not None else EmpiricalDist(yb)
        if family.thresholds is not None:
            ks = np.asarray(family.thresholds, dtype=float)
        elif exact:
            ks = np.union1d(da.points, db.points)
        else:
            ks = comparison_grid(da, db, n_thresholds)
        sd = 0.0 if exact else math.sqrt(0.5 * (da.var() + db.var())) or 1.0
        for power in family.powers:
            va = da.stop_loss(ks) if power == 1 else da.stop_loss2(ks)
            vb = db.stop_loss(ks) if power == 1 else db.stop_loss2(ks)
            unit = 1.0 if exact else sd**power
            labels.extend(f"{label}|p{power}|k={k:.6g}" for k in ks)
            gaps.append((va - vb) / unit)
            values_a.append(va)
            values_b.append(vb)
            scales.append(np.full(ks.size, unit))
    gaps = np.concatenate(gaps)
    if tol is None:
        if exact:
            tol = EXACT_TOL
        else:
            n = min(pa.shape[0] if wa is None else math.inf, pb.shape[0] if wb is None else math.inf)
            tol = 3.0 * math.sqrt(math.log(n) / n)
    direction, margin = _decide(gaps, tol)
    evidence = {
        "members": labels,
        "expectation_a": np.concatenate(values_a),
        "expectation_b": np.concatenate(values_b),
        "gap_units": np.concatenate(scales),
        "exact": exact,
    }
    return OrderVerdict("supermodular_cx", direction, margin, np.arange(gaps.size, dtype=float),
                        float(tol), evidence, ("expectation_a", "expectation_b"), gaps)
