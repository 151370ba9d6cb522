"""Picard iteration for Kannan and Banach maps on cone metric spaces.

All stopping rules work on the reduced scalar distance ``d_p = xi_e o p``.
For a Kannan map with constant ``beta < 1/2`` and ``r = beta / (1 - beta)``
the orbit satisfies

    d_p(x_n, x_{n+1}) <= r^n d_p(x_0, x_1)
    d_p(x_n, x_{n+m}) <= r^n / (1 - r) * d_p(x_0, x_1)

so ``r^n / (1 - r) * d_p(x_0, x_1)`` is reported as the certified bound at
step ``n``.  For a Banach contraction with constant ``k`` the certificate is
``k^n / (1 - k) * d_p(x_0, x_1)``.

The constants are estimated from pairs: exhaustively on finite spaces
("exact-beta") and over a grid or random box samples otherwise ("sampled-beta",
a lower bound on the true constant).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .cone import Cone
from .cone_metric import FiniteConeSpace, reduce
from .errors import DivergenceError, EstimationError, InputError, NotContractiveError
from .scalarization import ScalarizationContext

DEGENERATE = 1e-14  # 0/0 guard in ratio estimates and revisit threshold on continuous spaces

CONVERGED = "converged"
CYCLE_DETECTED = "cycle_detected"
BUDGET_EXHAUSTED = "budget_exhausted"
NOT_KANNAN = "not_kannan"


# maps --------------------------------------------------------------------


class MapSpec:
    """A self-map ``T`` together with the cone metric it is measured in."""

    cone: Cone
    finite: bool = False
    grid: np.ndarray | None = None
    box: tuple[np.ndarray, np.ndarray] | None = None

    def apply(self, x: Any) -> Any:
        raise NotImplementedError

    def cone_distance(self, x: Any, y: Any) -> np.ndarray:
        raise NotImplementedError

    def apply_many(self, X: Sequence[Any]) -> list[Any]:
        return [self.apply(x) for x in X]

    def resolve_point(self, x: Any) -> Any:
        return np.asarray(x, dtype=float)

    def export_point(self, x: Any) -> Any:
        return [float(v) for v in np.ravel(x)]


@dataclass(eq=False)
class FiniteTableMap(MapSpec):
    """``T`` given by a lookup table ``targets[i]`` on a finite cone space."""

    space: FiniteConeSpace
    targets: tuple[int, ...]

    finite = True

    def __post_init__(self) -> None:
        self.targets = tuple(int(t) for t in self.targets)
        if len(self.targets) != self.space.n:
            raise InputError(f"map needs {self.space.n} targets, got {len(self.targets)}")
        if any(not 0 <= t < self.space.n for t in self.targets):
            raise InputError("map target index out of range")
        self.cone = self.space.cone

    @classmethod
    def from_labels(cls, space: FiniteConeSpace, targets: dict[str, str]) -> FiniteTableMap:
        missing = [l for l in space.labels if l not in targets]
        if missing:
            raise InputError(f"map has no target for points {missing}")
        extra = [l for l in targets if l not in space.labels]
        if extra:
            raise InputError(f"map mentions unknown points {extra}")
        return cls(space, tuple(space.index(targets[l]) for l in space.labels))

    def apply(self, x: int) -> int:
        return self.targets[x]

    def cone_distance(self, x: int, y: int) -> np.ndarray:
        return self.space.dist[x, y]

    def resolve_point(self, x: Any) -> int:
        return self.space.index(str(x))

    def export_point(self, x: int) -> str:
        return self.space.labels[x]


@dataclass(eq=False)
class AffineMap(MapSpec):
    """``T(x) = A x + b`` on R^k, with cone metric ``|x - y|`` (componentwise) in the orthant."""

    A: np.ndarray
    b: np.ndarray
    grid: np.ndarray | None = None
    box: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        k = self.b.shape[0]
        if self.A.shape != (k, k):
            raise InputError(f"affine map needs a {k}x{k} matrix, got {self.A.shape}")
        self.grid = _as_points(self.grid, k)
        self.box = _as_box(self.box, k)
        self.cone = Cone.orthant(k)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x + self.b

    def apply_many(self, X):
        return np.asarray(X) @ self.A.T + self.b

    def cone_distance(self, x, y):
        return np.abs(np.asarray(x) - np.asarray(y))


@dataclass(eq=False)
class CallableMap(MapSpec):
    """User-supplied map and cone-valued distance (library use only)."""

    func: Callable[[np.ndarray], np.ndarray]
    distance: Callable[[np.ndarray, np.ndarray], np.ndarray]
    cone: Cone
    grid: np.ndarray | None = None
    box: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.grid = _as_points(self.grid, None)
        self.box = _as_box(self.box, None)

    def apply(self, x):
        return np.asarray(self.func(x), dtype=float)

    def cone_distance(self, x, y):
        return np.asarray(self.distance(x, y), dtype=float)


def _as_points(grid, k):
    if grid is None:
        return None
    g = np.asarray(grid, dtype=float)
    if g.ndim == 1:
        g = g[:, None]
    if k is not None and g.shape[1] != k:
        raise InputError(f"grid points must have length {k}")
    return g


def _as_box(box, k):
    if box is None:
        return None
    lo, hi = (np.atleast_1d(np.asarray(v, dtype=float)) for v in box)
    if lo.shape != hi.shape or (k is not None and lo.shape != (k,)) or np.any(lo > hi):
        raise InputError("box must be a pair (lo, hi) of equal-length vectors with lo <= hi")
    return lo, hi


# configuration and report -------------------------------------------------


@dataclass
class SolveConfig:
    x0: Any
    max_iter: int = 10_000
    tol: float = 1e-10
    beta_samples: int = 2000
    ctx: ScalarizationContext | None = None
    seed: int = 42
    unsound: bool = False
    check_uniqueness: bool = True
    cycle_lookback: int = 256

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be at least 1")
        if self.beta_samples < 1:
            raise InputError("beta_samples must be at least 1")


@dataclass
class UniquenessCheck:
    start: Any
    fixed_point: Any
    gap: float
    ok: bool


@dataclass
class SolveReport:
    """Result of a solve.

    ``iterations`` is the index ``n`` of the returned iterate ``x_n``.  For
    Banach solves ``beta_hat`` is ``None`` and ``r`` holds the contraction
    constant ``k``.  ``sound`` is false when the solve ran without a valid
    constant (``unsound=True``); such reports carry no certificate.
    """

    outcome: str
    mode: str
    fixed_point: Any
    iterations: int
    beta_hat: float | None
    r: float
    certified_bound: float
    orbit_trace: list[tuple[int, float]] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    orbit: list[Any] = field(default_factory=list)
    beta_kind: str = "exact-beta"
    sound: bool = True
    cycle: tuple[int, int] | None = None
    uniqueness: UniquenessCheck | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.outcome == CONVERGED

    @property
    def steps(self) -> np.ndarray:
        return np.array([d for _, d in self.orbit_trace])

    def to_json(self) -> dict[str, Any]:
        u = self.uniqueness
        return {
            "outcome": self.outcome,
            "mode": self.mode,
            "fixed_point": self.fixed_point,
            "iterations": self.iterations,
            "beta_hat": self.beta_hat,
            "r": self.r,
            "certified_bound": self.certified_bound,
            "beta_kind": self.beta_kind,
            "sound": self.sound,
            "cycle": list(self.cycle) if self.cycle else None,
            "uniqueness": None if u is None else {
                "start": u.start, "fixed_point": u.fixed_point, "gap": u.gap, "ok": u.ok,
            },
            "notes": list(self.notes),
            "orbit_trace": [[n, d] for n, d in self.orbit_trace],
            "bounds": list(self.bounds),
            "orbit": list(self.orbit),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> SolveReport:
        u = obj.get("uniqueness")
        return cls(
            outcome=obj["outcome"],
            mode=obj["mode"],
            fixed_point=obj["fixed_point"],
            iterations=obj["iterations"],
            beta_hat=obj["beta_hat"],
            r=obj["r"],
            certified_bound=obj["certified_bound"],
            orbit_trace=[(int(n), float(d)) for n, d in obj["orbit_trace"]],
            bounds=[float(b) for b in obj["bounds"]],
            orbit=list(obj["orbit"]),
            beta_kind=obj["beta_kind"],
            sound=obj["sound"],
            cycle=tuple(obj["cycle"]) if obj["cycle"] else None,
            uniqueness=None if u is None else UniquenessCheck(**u),
            notes=list(obj["notes"]),
        )


def write_trace_csv(report: SolveReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "d_step", "bound", "cumulative_iterates"])
        for (n, d), b in zip(report.orbit_trace, report.bounds):
            w.writerow([n, f"{d:.17g}", f"{b:.17g}", n + 1])


# reduced metric ------------------------------------------------------------


class _Reduced:
    """``d_p`` for a map's cone metric under a scalarization context."""

    def __init__(self, T: MapSpec, ctx: ScalarizationContext):
        if ctx.cone != T.cone:
            raise InputError("scalarization context cone differs from the map's cone")
        self.T, self.ctx = T, ctx
        self.table = reduce(T.space, ctx) if T.finite else None

    def __call__(self, x, y) -> float:
        if self.table is not None:
            return float(self.table[x, y])
        return float(self.ctx.xi(self.T.cone_distance(x, y)))

    def many(self, X, Y) -> np.ndarray:
        if self.table is not None:
            return self.table[np.asarray(X, dtype=int), np.asarray(Y, dtype=int)]
        if isinstance(self.T, AffineMap):
            return np.atleast_1d(self.ctx.xi(self.T.cone_distance(X, Y)))
        return np.array([self(x, y) for x, y in zip(X, Y)], dtype=float)


def _context(T: MapSpec, cfg: SolveConfig) -> ScalarizationContext:
    return cfg.ctx if cfg.ctx is not None else ScalarizationContext(T.cone)


def _default_box(T: MapSpec, cfg: SolveConfig):
    if T.box is not None:
        return T.box
    x0 = np.atleast_1d(np.asarray(T.resolve_point(cfg.x0), dtype=float))
    rad = max(1.0, float(np.max(np.abs(x0))))
    return x0 - rad, x0 + rad


def _candidate_points(T: MapSpec, cfg: SolveConfig, rng: np.random.Generator) -> list[Any]:
    if T.finite:
        return list(range(T.space.n))
    if T.grid is not None:
        return list(T.grid)
    lo, hi = _default_box(T, cfg)
    return list(rng.uniform(lo, hi, size=(cfg.beta_samples, lo.shape[0])))


def _sample_pairs(T: MapSpec, cfg: SolveConfig):
    if T.finite or T.grid is not None:
        pts = list(range(T.space.n)) if T.finite else T.grid
        i, j = np.triu_indices(len(pts), 1)
        if T.finite:
            return i, j
        return pts[i], pts[j]
    rng = np.random.default_rng(cfg.seed)
    lo, hi = _default_box(T, cfg)
    size = (cfg.beta_samples, lo.shape[0])
    return rng.uniform(lo, hi, size=size), rng.uniform(lo, hi, size=size)


def _beta_kind(T: MapSpec) -> str:
    return "exact-beta" if T.finite else "sampled-beta"


# estimation ----------------------------------------------------------------


def estimate_beta(T: MapSpec, cfg: SolveConfig) -> float:
    """Largest ``d_p(Tx, Ty) / (d_p(x, Tx) + d_p(y, Ty))`` over sampled pairs.

    Pairs with a vanishing denominator are skipped when the numerator also
    vanishes; if the numerator does not vanish the map cannot be Kannan and
    ``inf`` is returned.
    """
    dp = _Reduced(T, _context(T, cfg))
    X, Y = _sample_pairs(T, cfg)
    if len(X) == 0:
        raise EstimationError("no pairs of distinct points to estimate beta from")
    with np.errstate(over="ignore", invalid="ignore"):
        TX, TY = T.apply_many(X), T.apply_many(Y)
        num = dp.many(TX, TY)
        den = dp.many(X, TX) + dp.many(Y, TY)
    skip = den < DEGENERATE
    if np.any(skip & (num >= DEGENERATE)):
        return math.inf
    keep = ~skip
    if not keep.any():
        raise EstimationError("every sampled pair is a 0/0 ratio; beta is undetermined")
    return float(np.max(num[keep] / den[keep]))


def estimate_contraction(T: MapSpec, cfg: SolveConfig) -> float:
    """Largest ``d_p(Tx, Ty) / d_p(x, y)`` over sampled pairs with ``d_p(x, y) > 0``."""
    dp = _Reduced(T, _context(T, cfg))
    X, Y = _sample_pairs(T, cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        num = dp.many(T.apply_many(X), T.apply_many(Y))
        den = dp.many(X, Y)
    keep = den > DEGENERATE
    if not keep.any():
        raise EstimationError("no pairs of distinct points to estimate k from")
    return float(np.max(num[keep] / den[keep]))


# orbit ---------------------------------------------------------------------


def _finite_point(x) -> bool:
    return isinstance(x, (int, np.integer)) or bool(np.all(np.isfinite(x)))


def _orbit(T: MapSpec, cfg: SolveConfig, dp: _Reduced, rate: float, sound: bool, x0: Any, report: SolveReport) -> None:
    """Iterate from ``x0`` and fill ``report`` in place."""
    x = x0
    report.orbit = [x0]
    seen: dict[int, int] = {x0: 0} if T.finite else {}
    d0 = None
    scale = 1.0 / (1.0 - rate) if sound else math.nan
    for n in range(cfg.max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            x_next = T.apply(x)
        if not _finite_point(x_next):
            raise DivergenceError(f"orbit left the representable range at step {n + 1}")
        d = dp(x, x_next)
        if not math.isfinite(d):
            raise DivergenceError(f"reduced step distance is not finite at step {n}")
        if d0 is None:
            d0 = d
        bound = (rate**n) * scale * d0 if sound else math.nan
        report.orbit_trace.append((n, d))
        report.bounds.append(bound)
        report.orbit.append(x_next)
        report.certified_bound = bound

        done = d <= cfg.tol and (bound <= cfg.tol if sound else True)
        if done:
            report.outcome = CONVERGED
            report.fixed_point = x
            report.iterations = n
            return

        moved = (x_next != x) if T.finite else d > DEGENERATE
        if moved:
            m = _revisit(T, dp, report.orbit, x_next, seen, cfg.cycle_lookback, report)
            if m is not None:
                report.outcome = CYCLE_DETECTED
                report.cycle = (m, n + 1)
                report.iterations = n + 1
                return
        if T.finite:
            seen.setdefault(x_next, n + 1)
        x = x_next

    report.outcome = BUDGET_EXHAUSTED
    report.iterations = cfg.max_iter


def _revisit(T, dp, orbit, x_next, seen, lookback, report) -> int | None:
    if T.finite:
        return seen.get(x_next)
    # orbit[-1] is x_next itself, orbit[-2] is its predecessor (already moved away from)
    start = max(0, len(orbit) - 2 - lookback)
    for m in range(start, len(orbit) - 2):
        gap = dp(orbit[m], x_next)
        if gap < DEGENERATE:
            if gap > 0:
                report.notes.append(
                    f"iterates {m} and {len(orbit) - 1} treated as equal (reduced distance {gap:.3g} < {DEGENERATE:g})"
                )
            return m
    return None


def _run(T: MapSpec, cfg: SolveConfig, mode: str, constant: float | None, rate: float, sound: bool) -> SolveReport:
    ctx = _context(T, cfg)
    dp = _Reduced(T, ctx)
    x0 = T.resolve_point(cfg.x0)
    report = SolveReport(
        outcome=BUDGET_EXHAUSTED, mode=mode, fixed_point=None, iterations=0,
        beta_hat=constant, r=rate, certified_bound=math.inf,
        beta_kind=_beta_kind(T), sound=sound,
    )
    if not sound:
        report.notes.append("unsound mode: no valid contraction constant, bounds are not certificates")
    _orbit(T, cfg, dp, rate, sound, x0, report)

    if report.converged and cfg.check_uniqueness:
        report.uniqueness = _uniqueness(T, cfg, dp, rate, sound, report)

    report.orbit = [T.export_point(p) for p in report.orbit]
    if report.fixed_point is not None:
        report.fixed_point = T.export_point(report.fixed_point)
    return report


def _uniqueness(T, cfg, dp, rate, sound, report) -> UniquenessCheck | None:
    x_star = report.fixed_point
    x0 = report.orbit[0]
    rng = np.random.default_rng(cfg.seed + 1)
    candidates = [c for c in _candidate_points(T, cfg, rng) if dp(x0, c) > 0]
    dists = [dp(x_star, c) for c in candidates]
    if not dists or max(dists) <= 0:
        return None
    start = candidates[int(np.argmax(dists))]
    second = SolveReport(
        outcome=BUDGET_EXHAUSTED, mode=report.mode, fixed_point=None, iterations=0,
        beta_hat=report.beta_hat, r=rate, certified_bound=math.inf, sound=sound,
    )
    _orbit(T, cfg, dp, rate, sound, start, second)
    if second.converged:
        gap = dp(x_star, second.fixed_point)
        ok = gap <= 10 * cfg.tol
        y_star = T.export_point(second.fixed_point)
    else:
        gap, ok, y_star = math.inf, False, None
    if not ok:
        report.notes.append("uniqueness spot-check failed: second start did not reach the same point")
    return UniquenessCheck(T.export_point(start), y_star, float(gap), bool(ok))


# public solvers ------------------------------------------------------------


def kannan_solve(T: MapSpec, cfg: SolveConfig, beta: float | None = None) -> SolveReport:
    """Solve ``x = T x`` for a Kannan map, certifying with ``r^n / (1 - r)``.

    ``beta`` overrides the estimate.  When the (estimated) constant is not
    below 1/2 the report's outcome is ``not_kannan`` unless
    ``cfg.unsound`` is set, in which case the orbit is still run without a
    certificate.
    """
    beta_hat = estimate_beta(T, cfg) if beta is None else float(beta)
    if beta_hat < 0:
        raise InputError("beta must be nonnegative")
    if beta_hat < 0.5:
        return _run(T, cfg, "kannan", beta_hat, beta_hat / (1.0 - beta_hat), sound=True)
    r = beta_hat / (1.0 - beta_hat) if beta_hat < 1 else math.inf
    if not cfg.unsound:
        return SolveReport(
            outcome=NOT_KANNAN, mode="kannan", fixed_point=None, iterations=0,
            beta_hat=beta_hat, r=r, certified_bound=math.inf, beta_kind=_beta_kind(T),
            notes=[f"estimated beta {beta_hat:.6g} is not below 1/2"],
        )
    return _run(T, cfg, "kannan", beta_hat, r, sound=False)


def banach_solve(T: MapSpec, cfg: SolveConfig, k: float | None = None) -> SolveReport:
    """Solve ``x = T x`` for a contraction, certifying with ``k^n / (1 - k)``.

    Raises :class:`NotContractiveError` if ``k`` (given or estimated) is ``>= 1``.
    """
    k = estimate_contraction(T, cfg) if k is None else float(k)
    if k < 0:
        raise InputError("contraction constant must be nonnegative")
    if not k < 1:
        raise NotContractiveError(f"contraction constant {k:.6g} is not below 1")
    return _run(T, cfg, "banach", None, k, sound=True)
