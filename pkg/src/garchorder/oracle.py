"""Exact verification by enumerating every path of a finite-support process.

With finitely supported innovations and initial state, the law of
``(sigma[0..n+1], x[0..n])`` is a finite mixture that can be listed
outcome by outcome.  Marginals come out as :class:`DiscreteDist`, so order
relations between two such processes can be checked exactly (up to
floating-point rounding, absorbed by a ``1e-12`` slack).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import RecursionMap, garch11_m1, garch11_m2, GarchParams, recursion_from_label
from .distributions import DiscreteDist
from .orders import (
    Direction,
    EXACT_TOL,
    OrderVerdict,
    TestFunctionFamily,
    check_cx,
    check_icx,
    check_st,
    check_supermodular_cx,
)

__all__ = [
    "EnumerationTooLarge",
    "SignVectorSet",
    "ExactPathTree",
    "Outcomes",
    "enumerate_tree",
    "enumerate_mixture",
    "exact_expectation",
    "symmetrize_h",
    "symmetrize_h_multivariate",
    "ConvexityResult",
    "convexity_check",
    "DilationPair",
    "make_dilation",
    "Scenario",
    "TheoremReport",
    "THEOREMS",
    "verify_theorem",
    "builtin_suite",
    "run_suite",
]

ENUMERATION_GUARD = 2_000_000
MAX_SIGN_DIM = 20


class EnumerationTooLarge(ValueError):
    def __init__(self, size: int, guard: int):
        self.size = size
        self.guard = guard
        super().__init__(f"enumeration would produce {size:,} outcomes, above the guard of {guard:,}")


class SignVectorSet:
    """All ``2**m`` vectors in ``{-1, +1}**m``, produced lazily in lexicographic order."""

    def __init__(self, m: int):
        if m < 0:
            raise ValueError("m must be nonnegative")
        self.m = m

    def __len__(self):
        return 2**self.m

    def __iter__(self):
        return (np.array(p, dtype=float) for p in itertools.product((-1.0, 1.0), repeat=self.m))

    def as_array(self) -> np.ndarray:
        if self.m == 0:
            return np.ones((1, 0))
        return np.array(list(itertools.product((-1.0, 1.0), repeat=self.m)))


@dataclass
class ExactPathTree:
    """Finite path tree: one innovation law per step plus an initial-state law.

    ``innovations[k]`` is the law of ``eps[k]`` for ``k = 0..n``; the initial
    state is in the recursion's coordinates (volatility for M1, variance for
    M2).
    """

    recursion: RecursionMap
    innovations: Sequence[DiscreteDist]
    init: DiscreteDist | float = 1.0
    guard: int = ENUMERATION_GUARD

    def __post_init__(self):
        if not self.innovations:
            raise ValueError("need at least one innovation law")
        if not isinstance(self.init, DiscreteDist):
            self.init = DiscreteDist.point_mass(float(self.init))
        if self.init.min <= 0:
            raise ValueError("initial state must be strictly positive")

    @classmethod
    def iid(cls, recursion, innovation: DiscreteDist, n: int, init=1.0, **kwargs):
        return cls(recursion, [innovation] * (n + 1), init, **kwargs)

    @property
    def depth(self) -> int:
        """Index ``n`` of the last logreturn."""
        return len(self.innovations) - 1

    @property
    def size(self) -> int:
        return self.init.n * math.prod(d.n for d in self.innovations)

    def enumerate(self) -> "Outcomes":
        return enumerate_tree(self)


@dataclass
class Outcomes:
    """Weighted list of complete paths, in prefix-lexicographic order.

    ``state`` has ``n + 2`` columns (initial state through the state after
    the last innovation); ``x`` and ``eps`` have ``n + 1``.
    """

    prob: np.ndarray
    eps: np.ndarray
    state: np.ndarray
    x: np.ndarray
    kind: str

    @property
    def sigma(self) -> np.ndarray:
        return self.state if self.kind == "M1" else np.sqrt(self.state)

    @property
    def sums(self) -> np.ndarray:
        return self.x.sum(axis=1)

    def _law(self, values) -> DiscreteDist:
        return DiscreteDist(values, self.prob)

    def marginal_x(self, k: int) -> DiscreteDist:
        return self._law(self.x[:, k])

    def marginal_sigma(self, k: int) -> DiscreteDist:
        return self._law(self.sigma[:, k])

    def marginal_state(self, k: int) -> DiscreteDist:
        return self._law(self.state[:, k])

    def marginal_sum(self) -> DiscreteDist:
        return self._law(self.sums)

    def joint_x(self):
        return self.x, self.prob

    def __len__(self):
        return self.prob.size


def enumerate_tree(tree: ExactPathTree) -> Outcomes:
    """List every outcome of ``tree``; raises :class:`EnumerationTooLarge` past the guard."""
    if tree.size > tree.guard:
        raise EnumerationTooLarge(tree.size, tree.guard)
    rec = tree.recursion
    prob = tree.init.probs.copy()
    states = [tree.init.points.copy()]
    eps_cols: list[np.ndarray] = []
    for law in tree.innovations:
        m = law.n
        prob = np.repeat(prob, m) * np.tile(law.probs, prob.size)
        states = [np.repeat(col, m) for col in states]
        eps_cols = [np.repeat(col, m) for col in eps_cols]
        eps = np.tile(law.points, prob.size // m)
        eps_cols.append(eps)
        states.append(np.asarray(rec(rec.innovation_argument(eps), states[-1]), dtype=float))
    state = np.column_stack(states)
    eps = np.column_stack(eps_cols)
    if not np.all(np.isfinite(state)) or np.any(state <= 0):
        raise ArithmeticError("enumerated states left (0, inf)")
    sigma = state[:, :-1] if rec.kind == "M1" else np.sqrt(state[:, :-1])
    total = prob.sum()
    if abs(total - 1.0) > 1e-12:
        raise ArithmeticError(f"outcome probabilities sum to {total!r}")
    return Outcomes(prob=prob, eps=eps, state=state, x=sigma * eps, kind=rec.kind)


def enumerate_mixture(components) -> Outcomes:
    """Concatenate ``(weight, tree)`` components into one weighted outcome list."""
    parts = [(float(w), t.enumerate()) for w, t in components]
    kinds = {o.kind for _, o in parts}
    if len(kinds) != 1:
        raise ValueError("mixture components must share coordinates")
    return Outcomes(
        prob=np.concatenate([w * o.prob for w, o in parts]),
        eps=np.concatenate([o.eps for _, o in parts]),
        state=np.concatenate([o.state for _, o in parts]),
        x=np.concatenate([o.x for _, o in parts]),
        kind=kinds.pop(),
    )


def exact_expectation(tree_or_outcomes, phi: Callable, on: str = "x") -> float:
    """``E[phi(...)]`` summed over all outcomes.

    ``on="x"`` passes the ``(N, n+1)`` matrix of logreturns (``phi`` returns
    one value per row); ``on="sum"`` passes the vector of total logreturns.
    """
    out = tree_or_outcomes.enumerate() if isinstance(tree_or_outcomes, ExactPathTree) \
        else tree_or_outcomes
    if on == "x":
        values = phi(out.x)
    elif on == "sum":
        values = phi(out.sums)
    else:
        raise ValueError(f"on must be 'x' or 'sum', got {on!r}")
    values = np.broadcast_to(np.asarray(values, dtype=float), out.prob.shape)
    return float(np.dot(out.prob, values))


def symmetrize_h(phi: Callable, a: float, b: float, g: Sequence[Callable], u_grid) -> np.ndarray:
    """``h(u) = sum over p in {-1,1}^m of phi(a + b*u + sum_i p_i g_i(u))`` on ``u_grid``."""
    m = len(g)
    if m > MAX_SIGN_DIM:
        raise ValueError(f"m = {m} exceeds the limit of {MAX_SIGN_DIM} sign dimensions")
    u = np.asarray(u_grid, dtype=float)
    base = a + b * u
    if m == 0:
        return np.asarray(phi(base), dtype=float)
    G = np.vstack([np.broadcast_to(gi(u), u.shape) for gi in g])
    signs = SignVectorSet(m).as_array()
    return np.asarray(phi(base[None, :] + signs @ G), dtype=float).sum(axis=0)


def symmetrize_h_multivariate(phi: Callable, g: Sequence[Callable], u_grid) -> np.ndarray:
    """``h(u) = sum over p of phi(p_1 g_1(u), ..., p_m g_m(u))``; ``phi`` acts on rows."""
    m = len(g)
    if m == 0 or m > MAX_SIGN_DIM:
        raise ValueError(f"need 1 <= m <= {MAX_SIGN_DIM}, got {m}")
    u = np.asarray(u_grid, dtype=float)
    G = np.vstack([np.broadcast_to(gi(u), u.shape) for gi in g])
    out = np.zeros(u.size)
    for p in SignVectorSet(m).as_array():
        out += np.asarray(phi((p[:, None] * G).T), dtype=float)
    return out


@dataclass(frozen=True)
class ConvexityResult:
    passed: bool
    worst: float
    index: int

    def __bool__(self):
        return self.passed


def convexity_check(values, tol: float = 1e-9, grid=None) -> ConvexityResult:
    """Pass iff every second difference of ``values`` is ``>= -tol``.

    ``values`` must be sampled on an evenly spaced grid; pass ``grid`` to have
    the spacing verified.  ``worst`` is the smallest raw second difference.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 3:
        raise ValueError("need at least three values")
    if grid is not None:
        steps = np.diff(np.asarray(grid, dtype=float))
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be evenly spaced")
    second = v[:-2] - 2.0 * v[1:-1] + v[2:]
    i = int(np.argmin(second))
    return ConvexityResult(bool(second[i] >= -tol), float(second[i]), i + 1)


@dataclass(frozen=True)
class DilationPair:
    base: DiscreteDist
    dilated: DiscreteDist
    spread: float
    verdict: OrderVerdict = field(repr=False, compare=False, default=None)


def make_dilation(base: DiscreteDist, spread: float) -> DilationPair:
    """Martingale dilation ``X * Y`` with ``Y`` in ``{1 - s, 1 + s}`` equiprobable.

    ``E[X*Y | X] = X``, so ``base <=cx dilated``; this is re-verified exactly
    before returning.
    """
    if not spread >= 0:
        raise ValueError("spread must be nonnegative")
    if not base.is_symmetric() or abs(base.mean()) > EXACT_TOL:
        raise ValueError("base law must be symmetric with mean 0")
    points = np.concatenate([base.points * (1.0 - spread), base.points * (1.0 + spread)])
    probs = np.concatenate([base.probs, base.probs]) / 2.0
    dilated = DiscreteDist(points, probs)
    verdict = check_cx(base, dilated)
    if not verdict.holds:
        raise RuntimeError(f"dilation failed its own convex-order check: {verdict.direction}")
    return DilationPair(base, dilated, float(spread), verdict)


# ---------------------------------------------------------------- scenarios

def _law_from_json(value) -> DiscreteDist:
    if isinstance(value, (int, float)):
        return DiscreteDist.point_mass(float(value))
    return DiscreteDist.from_atoms([tuple(a) for a in value])


def _law_to_json(law: DiscreteDist):
    if law.n == 1:
        return float(law.points[0])
    return [[float(a), float(p)] for a, p in law.atoms]


_PARAM_NAMES = ("alpha0", "alpha1", "beta1")


@dataclass
class Scenario:
    """Inputs for one exact theorem check.

    Innovation theorems replace the law at index ``k`` (or every index when
    ``k == "all"``) by ``alt``.  Parameter theorems keep innovations and swap
    ``params`` for ``alt_params``; each parameter is a (possibly degenerate)
    discrete law, drawn independently of the innovations.
    """

    name: str
    recursion: str
    recursion_params: dict = field(default_factory=dict)
    innovation: DiscreteDist = None
    n: int = 3
    init: DiscreteDist | float = 1.0
    alt: DiscreteDist | None = None
    k: int | str | None = None
    params: dict | None = None
    alt_params: dict | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not isinstance(self.init, DiscreteDist):
            self.init = DiscreteDist.point_mass(float(self.init))
        if self.params is not None:
            self.params = {p: v if isinstance(v, DiscreteDist) else DiscreteDist.point_mass(v)
                           for p, v in self.params.items()}
        if self.alt_params is not None:
            self.alt_params = {p: v if isinstance(v, DiscreteDist) else DiscreteDist.point_mass(v)
                               for p, v in self.alt_params.items()}

    @property
    def perturbed_indices(self) -> list[int]:
        if self.k == "all":
            return list(range(self.n + 1))
        return [int(self.k)]

    def build_recursion(self, params=None) -> RecursionMap:
        if params is None:
            return recursion_from_label(self.recursion, self.recursion_params)
        if self.recursion not in ("garch11_m1", "garch11_m2"):
            raise ValueError("parameter scenarios need a garch11 recursion")
        gp = GarchParams(**params, unchecked=True)
        return garch11_m1(gp) if self.recursion == "garch11_m1" else garch11_m2(gp)

    def outcomes(self, which: str = "base") -> Outcomes:
        """Enumerate the base process or its perturbed twin (``"alt"``)."""
        laws = [self.innovation] * (self.n + 1)
        if which == "alt" and self.alt is not None:
            for i in self.perturbed_indices:
                laws[i] = self.alt
        if self.params is None:
            return ExactPathTree(self.build_recursion(), laws, self.init).enumerate()
        params = self.alt_params if which == "alt" else self.params
        merged = {name: params.get(name, self.params.get(name)) for name in _PARAM_NAMES}
        combos = []
        for atoms in itertools.product(*(merged[p].atoms for p in _PARAM_NAMES)):
            weight = math.prod(w for _, w in atoms)
            values = {p: v for p, (v, _) in zip(_PARAM_NAMES, atoms)}
            combos.append((weight, ExactPathTree(self.build_recursion(values), laws, self.init)))
        return enumerate_mixture(combos)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "recursion": {"label": self.recursion, "params": dict(self.recursion_params)},
            "innovation": _law_to_json(self.innovation),
            "n": self.n,
            "init": _law_to_json(self.init),
        }
        if self.alt is not None:
            out["alt_innovation"] = _law_to_json(self.alt)
            out["k"] = self.k
        if self.params is not None:
            out["params"] = {p: _law_to_json(v) for p, v in self.params.items()}
        if self.alt_params is not None:
            out["alt_params"] = {p: _law_to_json(v) for p, v in self.alt_params.items()}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        allowed = {"name", "recursion", "innovation", "n", "init", "alt_innovation", "k",
                   "params", "alt_params"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        rec = data["recursion"]
        params = data.get("params")
        alt_params = data.get("alt_params")
        return cls(
            name=data.get("name", "scenario"),
            recursion=rec["label"],
            recursion_params=rec.get("params", {}),
            innovation=_law_from_json(data["innovation"]),
            n=int(data["n"]),
            init=_law_from_json(data.get("init", 1.0)),
            alt=_law_from_json(data["alt_innovation"]) if "alt_innovation" in data else None,
            k=data.get("k"),
            params=None if params is None else {p: _law_from_json(v) for p, v in params.items()},
            alt_params=None if alt_params is None else {
                p: _law_from_json(v) for p, v in alt_params.items()},
        )


# ----------------------------------------------------------------- theorems

def _holds(verdict: OrderVerdict) -> bool:
    return verdict.direction in (Direction.A_BELOW_B, Direction.INDISTINGUISHABLE)


def _st_abs(a, b):
    return check_st(a.abs(), b.abs())


def _icx_abs(a, b):
    return check_icx(a.abs(), b.abs())


def _st_sq(a, b):
    return check_st(a.square(), b.square())


def _icx_sq(a, b):
    return check_icx(a.square(), b.square())


@dataclass(frozen=True)
class Theorem:
    title: str
    kind: str | None          # required coordinates, None for either
    premise: str              # "st_abs", "icx_abs", "st_sq", "icx_sq", "cx", "params_st"
    symmetric: bool
    conclusions: tuple        # names understood by _conclude


THEOREMS: dict[str, Theorem] = {
    "thm-sigma-a": Theorem("volatility st from |eps| st (M1)", "M1", "st_abs", False, ("st_sigma_next",)),
    "thm-sigma-b": Theorem("volatility icx from |eps| icx (M1)", "M1", "icx_abs", False, ("icx_sigma_next",)),
    "thm-sigma-c": Theorem("variance st from eps^2 st (M2)", "M2", "st_sq", False, ("st_state_next",)),
    "thm-sigma-d": Theorem("variance icx from eps^2 icx (M2)", "M2", "icx_sq", False, ("icx_state_next",)),
    "thm-x-a": Theorem("|X_n| st from |eps| st (M1)", "M1", "st_abs", False, ("st_abs_x",)),
    "thm-x-b": Theorem("|X_n| icx from |eps| icx (M1)", "M1", "icx_abs", False, ("icx_abs_x",)),
    "thm-x-c": Theorem("X_n^2 st from eps^2 st (M2)", "M2", "st_sq", False, ("st_sq_x",)),
    "thm-x-d": Theorem("X_n^2 icx from eps^2 icx (M2)", "M2", "icx_sq", False, ("icx_sq_x",)),
    "thm-propconv": Theorem("X_n cx from eps cx (M1)", "M1", "cx", True, ("cx_x",)),
    "thm-sums-cx": Theorem("S_n cx from eps cx, symmetric innovations (M1)", "M1", "cx", True, ("cx_sum",)),
    "thm-multivariate": Theorem("(X_0..X_n) supermodular-convex from eps cx (M1)", "M1", "cx", True,
                                ("supermodular_x",)),
    "prop-params": Theorem("|X_n| st, X_n^2 st, X_n cx from parameters st (GARCH(1,1))", None,
                           "params_st", False, ("cx_x", "st_abs_x", "st_sq_x")),
    "thm-params-sums": Theorem("S_n cx from parameters st, symmetric innovations (GARCH(1,1))", None,
                               "params_st", True, ("cx_sum",)),
}


def _conclude(name: str, base: Outcomes, alt: Outcomes, n: int) -> OrderVerdict:
    if name == "st_sigma_next":
        return check_st(base.marginal_sigma(n + 1), alt.marginal_sigma(n + 1))
    if name == "icx_sigma_next":
        return check_icx(base.marginal_sigma(n + 1), alt.marginal_sigma(n + 1))
    if name == "st_state_next":
        return check_st(base.marginal_state(n + 1), alt.marginal_state(n + 1))
    if name == "icx_state_next":
        return check_icx(base.marginal_state(n + 1), alt.marginal_state(n + 1))
    xa, xb = base.marginal_x(n), alt.marginal_x(n)
    if name == "st_abs_x":
        return _st_abs(xa, xb)
    if name == "icx_abs_x":
        return _icx_abs(xa, xb)
    if name == "st_sq_x":
        return _st_sq(xa, xb)
    if name == "icx_sq_x":
        return _icx_sq(xa, xb)
    if name == "cx_x":
        return check_cx(xa, xb)
    if name == "cx_sum":
        return check_cx(base.marginal_sum(), alt.marginal_sum())
    if name == "supermodular_x":
        family = TestFunctionFamily.supermodular_convex(n + 1)
        return check_supermodular_cx(base.joint_x(), alt.joint_x(), family)
    raise KeyError(name)


_PREMISES = {
    "st_abs": ("|eps_k| <=st |alt eps_k|", _st_abs),
    "icx_abs": ("|eps_k| <=icx |alt eps_k|", _icx_abs),
    "st_sq": ("eps_k^2 <=st alt eps_k^2", _st_sq),
    "icx_sq": ("eps_k^2 <=icx alt eps_k^2", _icx_sq),
    "cx": ("eps_k <=cx alt eps_k", check_cx),
}


@dataclass
class TheoremReport:
    theorem: str
    scenario: Scenario
    premises: list
    conclusions: list
    status: str
    slack: float | None
    derived: bool = False
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self, curves: bool = False) -> dict:
        return {
            "theorem": self.theorem,
            "title": THEOREMS[self.theorem].title if self.theorem in THEOREMS else "",
            "scenario": self.scenario.to_dict(),
            "premises": self.premises,
            "conclusion": self.conclusions[0].to_dict(curves) if self.conclusions else None,
            "conclusions": [c.to_dict(curves) for c in self.conclusions],
            "status": self.status,
            "slack": self.slack,
            "exact": True,
            "derived": self.derived,
            "message": self.message,
        }


def _premise_entry(name, holds, detail=None):
    entry = {"name": name, "holds": bool(holds)}
    if detail is not None:
        entry.update(detail)
    return entry


def verify_theorem(theorem_id: str, scenario: Scenario) -> TheoremReport:
    """Check one theorem on one scenario by exact enumeration.

    Premises are checked first; if any fails the report has status
    ``"premise_failure"`` and no conclusion.  Otherwise both processes are
    enumerated and the asserted order is checked on the relevant marginals
    with a ``1e-12`` tolerance.  ``slack`` is the smallest margin by which
    the conclusion holds (``>= -1e-12`` on success).
    """
    if theorem_id not in THEOREMS:
        raise KeyError(f"unknown theorem {theorem_id!r}; valid ids: {sorted(THEOREMS)}")
    thm = THEOREMS[theorem_id]
    premises = []
    recursion = scenario.build_recursion(
        {p: float(v.points[0]) for p, v in scenario.params.items()}
        if scenario.params is not None else None)

    if thm.kind is not None:
        premises.append(_premise_entry(f"model coordinates {thm.kind}",
                                       recursion.kind == thm.kind,
                                       {"actual": recursion.kind}))
    laws = [scenario.innovation] + ([scenario.alt] if scenario.alt is not None else [])
    premises.append(_premise_entry("innovations have mean 0",
                                   all(abs(law.mean()) <= EXACT_TOL for law in laws)))
    if thm.symmetric:
        premises.append(_premise_entry("innovations symmetric",
                                       all(law.is_symmetric() for law in laws)))

    if thm.premise == "params_st":
        if scenario.recursion not in ("garch11_m1", "garch11_m2"):
            premises.append(_premise_entry("GARCH(1,1) recursion", False))
        elif scenario.params is None or scenario.alt_params is None:
            premises.append(_premise_entry("base and alternative parameters given", False))
        else:
            for p in _PARAM_NAMES:
                base_p = scenario.params.get(p)
                alt_p = scenario.alt_params.get(p, base_p)
                verdict = check_st(base_p, alt_p)
                premises.append(_premise_entry(f"{p} <=st alt {p}", _holds(verdict),
                                               {"direction": verdict.direction.value,
                                                "margin": verdict.margin}))
                if base_p.min <= 0 or alt_p.min < 0:
                    premises.append(_premise_entry(f"{p} in parameter domain", False))
    else:
        if scenario.alt is None or scenario.k is None:
            premises.append(_premise_entry("perturbed innovation and index given", False))
        elif scenario.k != "all" and not 0 <= int(scenario.k) <= scenario.n:
            premises.append(_premise_entry(f"index k in [0, {scenario.n}]", False))
        else:
            label, check = _PREMISES[thm.premise]
            verdict = check(scenario.innovation, scenario.alt)
            premises.append(_premise_entry(label, _holds(verdict),
                                           {"direction": verdict.direction.value,
                                            "margin": verdict.margin}))

    derived = scenario.k == "all"
    if not all(p["holds"] for p in premises):
        failed = [p["name"] for p in premises if not p["holds"]]
        return TheoremReport(theorem_id, scenario, premises, [], "premise_failure", None,
                             derived, f"premise violated: {', '.join(failed)}")

    base = scenario.outcomes("base")
    alt = scenario.outcomes("alt")
    verdicts = [_conclude(name, base, alt, scenario.n) for name in thm.conclusions]
    slack = min(v.slack for v in verdicts)
    ok = all(_holds(v) for v in verdicts)
    return TheoremReport(theorem_id, scenario, premises, verdicts, "pass" if ok else "fail",
                         slack, derived)


# ------------------------------------------------------------ bundled suite

def _laws():
    two = DiscreteDist([-1.0, 1.0], [0.5, 0.5])
    three = DiscreteDist([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25])
    four = DiscreteDist([-1.5, -0.5, 0.5, 1.5], [0.25] * 4)
    return two, three, four


def builtin_suite() -> dict[str, list[Scenario]]:
    """Scenarios shipped for every theorem: 2-, 3- and 4-point symmetric laws, n <= 8.

    Each theorem gets at least three single-index scenarios with 2- or
    3-point innovations; innovation theorems also get one chained scenario
    (every index perturbed), marked ``derived`` in its report.
    """
    two, three, four = _laws()
    four_wide = DiscreteDist([-2.0, -0.8, 0.8, 2.0], [0.25] * 4)
    three_wide = DiscreteDist([-2.0, 0.0, 2.0], [0.25, 0.5, 0.25])
    init2 = DiscreteDist([0.5, 1.5], [0.5, 0.5])

    m1 = [("garch11_m1", {"alpha0": 0.1, "alpha1": 0.3, "beta1": 0.5}),
          ("avgarch_m1", {"omega": 0.1, "a": 0.3, "b": 0.5}),
          ("garch11_m1", {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2}),
          ("avgarch_m1", {"omega": 0.05, "a": 0.2, "b": 0.7})]
    m2 = [("garch11_m2", {"alpha0": 0.1, "alpha1": 0.3, "beta1": 0.5}),
          ("quadratic_m2", {"omega": 0.1, "a": 0.2, "b": 0.3, "c": 0.1}),
          ("garch11_m2", {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2}),
          ("quadratic_m2", {"omega": 0.05, "a": 0.1, "b": 0.5, "c": 0.2})]
    # (base, st-larger, cx-larger, n, k, init)
    pairs = [
        (two, two.scale(1.5), make_dilation(two, 0.5).dilated, 8, 2, 1.0),
        (three, three.scale(1.3), make_dilation(three, 0.4).dilated, 6, 0, init2),
        (four, four_wide, make_dilation(four, 0.3).dilated, 4, 4, 1.0),
        (three_wide, three_wide.scale(1.2), make_dilation(three_wide, 0.5).dilated, 5, 3, init2),
    ]

    suite: dict[str, list[Scenario]] = {}
    for tid, thm in THEOREMS.items():
        scenarios = []
        if thm.premise == "params_st":
            param_cases = [
                ("alpha1 0.2->0.5", {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2},
                 {"alpha1": 0.5}),
                ("alpha0 0.2->0.5", {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2},
                 {"alpha0": 0.5}),
                ("random params", {"alpha0": DiscreteDist([0.1, 0.2], [0.5, 0.5]),
                                   "alpha1": DiscreteDist([0.1, 0.3], [0.5, 0.5]),
                                   "beta1": 0.3},
                 {"alpha0": DiscreteDist([0.1, 0.3], [0.5, 0.5]),
                  "alpha1": DiscreteDist([0.2, 0.4], [0.5, 0.5]),
                  "beta1": DiscreteDist([0.3, 0.5], [0.5, 0.5])}),
                ("beta1 0.2->0.5", {"alpha0": 0.2, "alpha1": 0.2, "beta1": 0.2},
                 {"beta1": 0.5}),
            ]
            for (label, params, alt), (base, _, _, n, _, init), rec in zip(
                    param_cases, pairs, ("garch11_m1", "garch11_m2", "garch11_m1", "garch11_m2")):
                n_used = min(n, 5) if label == "random params" else n
                scenarios.append(Scenario(f"{tid}/{label}/{base.n}pt/n={n_used}", rec, {},
                                          base, n_used, init, params=params, alt_params=alt))
        else:
            recs = m1 if thm.kind == "M1" else m2
            for (rec, rparams), (base, st_alt, cx_alt, n, k, init) in zip(recs, pairs):
                if thm.premise in ("st_abs", "st_sq"):
                    alt = st_alt
                else:
                    alt = cx_alt
                if tid == "thm-multivariate":
                    n = min(n, 5)
                    k = min(k, n)
                scenarios.append(Scenario(f"{tid}/{rec}/{base.n}pt/n={n}/k={k}", rec, rparams,
                                          base, n, init, alt=alt, k=k))
            # chained perturbation of every index, valid by transitivity
            rec, rparams = recs[0]
            alt = pairs[0][1] if thm.premise in ("st_abs", "st_sq") else pairs[0][2]
            scenarios.append(Scenario(f"{tid}/{rec}/2pt/n=4/k=all", rec, rparams,
                                      two, 4, 1.0, alt=alt, k="all"))
        suite[tid] = scenarios
    return suite


def run_suite(theorem_ids=None, suite=None) -> list[TheoremReport]:
    suite = builtin_suite() if suite is None else suite
    ids = list(suite) if theorem_ids is None else list(theorem_ids)
    reports = []
    for tid in ids:
        for scenario in suite[tid]:
            reports.append(verify_theorem(tid, scenario))
    return reports


def report_json(reports, curves: bool = False) -> str:
    body = {
        "schema": 1,
        "exact": True,
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict(curves) for r in reports],
    }
    return json.dumps(body, sort_keys=True, indent=2)
