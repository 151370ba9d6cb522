"""Finite cone-valued distance spaces, axiom validators and scalar reduction.

A :class:`FiniteConeSpace` stores ``dist`` as an ``(n, n, d)`` array of
vectors in the ambient space of its cone.  The validators check, exhaustively:

* cone metric axioms M1-M4 (nonnegativity, identity, symmetry, triangle);
* rectangular axioms RC1-RC3, where RC3 is the four-point inequality
  ``p(x, y) <= p(x, z) + p(z, w) + p(w, y)`` over all ``x, y`` and all distinct
  ``z, w`` that both differ from ``x`` and from ``y``.

Every check is vectorized with numpy broadcasting; witness lists come out
sorted lexicographically by point index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .cone import Cone
from .errors import InputError, SpaceFormatError
from .scalarization import ScalarizationContext

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class Witness:
    """Offending point tuple; ``lhs``/``rhs`` are the compared vectors, if any."""

    points: tuple[str, ...]
    lhs: tuple[float, ...]
    rhs: tuple[float, ...] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"points": list(self.points), "lhs": list(self.lhs)}
        if self.rhs is not None:
            out["rhs"] = list(self.rhs)
        return out


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    status: str
    witnesses: tuple[Witness, ...] = ()

    def __post_init__(self) -> None:
        if self.status not in ("pass", "fail"):
            raise ValueError(f"bad status {self.status!r}")
        if (self.status == "fail") != bool(self.witnesses):
            raise ValueError("a failing report needs witnesses; a passing one must have none")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict[str, Any]:
        return {
            "axiom": self.axiom,
            "status": self.status,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


def all_pass(reports: Sequence[AxiomReport]) -> bool:
    return all(r.passed for r in reports)


@dataclass(frozen=True, eq=False)
class FiniteConeSpace:
    labels: tuple[str, ...]
    cone: Cone
    dist: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        labels = tuple(str(l) for l in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise SpaceFormatError("point labels must be unique")
        dist = np.asarray(self.dist, dtype=float)
        n = len(labels)
        if n == 0:
            raise SpaceFormatError("space needs at least one point")
        if dist.shape != (n, n, self.cone.dim):
            raise SpaceFormatError(f"dist must have shape {(n, n, self.cone.dim)}, got {dist.shape}")
        if not np.all(np.isfinite(dist)):
            raise SpaceFormatError("dist has non-finite entries")
        dist.setflags(write=False)
        object.__setattr__(self, "dist", dist)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InputError(f"unknown point label {label!r}") from None

    def p(self, x: str, y: str) -> np.ndarray:
        return self.dist[self.index(x), self.index(y)]

    def scaled(self, lam: float) -> FiniteConeSpace:
        return FiniteConeSpace(self.labels, self.cone, self.dist * lam)

    def structural_problems(self, zero_tol: float = ZERO_TOL) -> list[str]:
        """Zero-diagonal and symmetry violations of the stored table."""
        problems = []
        diag = np.linalg.norm(self.dist[np.arange(self.n), np.arange(self.n)], axis=-1)
        for i in np.flatnonzero(diag > zero_tol):
            problems.append(f"dist[{self.labels[i]}][{self.labels[i]}] is not the zero vector")
        asym = np.linalg.norm(self.dist - self.dist.transpose(1, 0, 2), axis=-1)
        for i, j in zip(*np.nonzero(np.triu(asym > zero_tol, 1))):
            problems.append(f"dist[{self.labels[i]}][{self.labels[j]}] != dist[{self.labels[j]}][{self.labels[i]}]")
        return problems

    # JSON ----------------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "labels": list(self.labels),
            "cone": self.cone.to_json(),
            "dist": self.dist.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any], strict: bool = True) -> FiniteConeSpace:
        from .formats import validate_document

        validate_document(obj, "space")
        space = cls(tuple(obj["labels"]), Cone.from_json(obj["cone"]), np.asarray(obj["dist"], dtype=float))
        if strict:
            problems = space.structural_problems()
            if problems:
                raise SpaceFormatError("; ".join(problems))
        return space


def load_space(path: str | Path, strict: bool = True) -> FiniteConeSpace:
    """Load a finite space file.  ``strict`` enforces symmetry and zero diagonal."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read space file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"space file {path} is not valid JSON: {exc}") from exc
    return FiniteConeSpace.from_json(obj, strict=strict)


def save_space(space: FiniteConeSpace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(space.to_json()) + "\n", encoding="utf-8")


def example_space_path() -> Path:
    """Path of the bundled four-point space that is rectangular but not a cone metric."""
    return Path(__file__).parent / "data" / "branciari_akbar.json"


# generic axiom machinery -------------------------------------------------

Member = Callable[[np.ndarray], np.ndarray]


def _vec(v: np.ndarray) -> tuple[float, ...]:
    return tuple(float(x) for x in np.atleast_1d(v))


def _report(axiom: str, witnesses: list[Witness]) -> AxiomReport:
    return AxiomReport(axiom, "fail" if witnesses else "pass", tuple(witnesses))


def _nonneg(D: np.ndarray, member: Member, labels: Sequence[str]) -> list[Witness]:
    bad = ~member(D)
    return [Witness((labels[i], labels[j]), _vec(D[i, j])) for i, j in zip(*np.nonzero(bad))]


def _identity(D: np.ndarray, zero_tol: float, labels: Sequence[str]) -> list[Witness]:
    n = D.shape[0]
    is_zero = np.linalg.norm(D, axis=-1) <= zero_tol
    bad = is_zero != np.eye(n, dtype=bool)
    return [Witness((labels[i], labels[j]), _vec(D[i, j])) for i, j in zip(*np.nonzero(bad))]


def _symmetry(D: np.ndarray, zero_tol: float, labels: Sequence[str]) -> list[Witness]:
    asym = np.linalg.norm(D - D.transpose(1, 0, 2), axis=-1) > zero_tol
    return [
        Witness((labels[i], labels[j]), _vec(D[i, j]), _vec(D[j, i]))
        for i, j in zip(*np.nonzero(np.triu(asym, 1)))
    ]


def _triangle(D: np.ndarray, member: Member, labels: Sequence[str]) -> list[Witness]:
    # T[x, z, y] = p(x, z) + p(z, y) compared against p(x, y), z not in {x, y}
    n = D.shape[0]
    rhs = D[:, :, None, :] + D[None, :, :, :]
    lhs = np.broadcast_to(D[:, None, :, :], rhs.shape)
    idx = np.arange(n)
    admissible = (idx[None, :, None] != idx[:, None, None]) & (idx[None, :, None] != idx[None, None, :])
    bad = admissible & ~member(rhs - lhs)
    return [
        Witness((labels[x], labels[z], labels[y]), _vec(D[x, y]), _vec(rhs[x, z, y]))
        for x, z, y in zip(*np.nonzero(bad))
    ]


def _rectangle(D: np.ndarray, member: Member, labels: Sequence[str]) -> list[Witness]:
    # R[x, y, z, w] = p(x, z) + p(z, w) + p(w, y) compared against p(x, y)
    n = D.shape[0]
    if n < 3:
        return []
    rhs = D[:, None, :, None, :] + D[None, None, :, :, :] + D.transpose(1, 0, 2)[None, :, None, :, :]
    lhs = D[:, :, None, None, :]
    i = np.arange(n)
    x, y, z, w = i[:, None, None, None], i[None, :, None, None], i[None, None, :, None], i[None, None, None, :]
    admissible = (z != w) & (z != x) & (z != y) & (w != x) & (w != y)
    bad = admissible & ~member(rhs - lhs)
    return [
        Witness((labels[a], labels[b], labels[c], labels[d]), _vec(D[a, b]), _vec(rhs[a, b, c, d]))
        for a, b, c, d in zip(*np.nonzero(bad))
    ]


def _check_cms(D, member, labels, zero_tol) -> list[AxiomReport]:
    return [
        _report("M1", _nonneg(D, member, labels)),
        _report("M2", _identity(D, zero_tol, labels)),
        _report("M3", _symmetry(D, zero_tol, labels)),
        _report("M4", _triangle(D, member, labels)),
    ]


def _check_rcms(D, member, labels, zero_tol) -> list[AxiomReport]:
    rc1 = _nonneg(D, member, labels) + _identity(D, zero_tol, labels)
    rc1.sort(key=lambda w: [labels.index(p) for p in w.points])
    return [
        _report("RC1", rc1),
        _report("RC2", _symmetry(D, zero_tol, labels)),
        _report("RC3", _rectangle(D, member, labels)),
    ]


# public validators -------------------------------------------------------


def validate_cms(space: FiniteConeSpace, zero_tol: float = ZERO_TOL) -> list[AxiomReport]:
    """Check M1-M4 exhaustively.  M4 witnesses are ``(x, z, y)`` with
    ``lhs = p(x, y)`` and ``rhs = p(x, z) + p(z, y)``."""
    return _check_cms(space.dist, space.cone.contains, space.labels, zero_tol)


def validate_rcms(space: FiniteConeSpace, zero_tol: float = ZERO_TOL) -> list[AxiomReport]:
    """Check RC1-RC3 exhaustively.  RC3 witnesses are ``(x, y, z, w)`` with
    ``lhs = p(x, y)`` and ``rhs = p(x, z) + p(z, w) + p(w, y)``."""
    return _check_rcms(space.dist, space.cone.contains, space.labels, zero_tol)


def _scalar_setup(table: np.ndarray, labels: Sequence[str] | None, slack: float):
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise InputError(f"scalar distance table must be square, got shape {table.shape}")
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(table.shape[0]))
    return table[..., None], (lambda v: v[..., 0] >= -slack), labels


def validate_scalar_metric(
    table: np.ndarray, labels: Sequence[str] | None = None, slack: float = 0.0, zero_tol: float = ZERO_TOL
) -> list[AxiomReport]:
    """M1-M4 for a real-valued table, with ``<=`` on the reals (up to ``slack``)."""
    D, member, labels = _scalar_setup(table, labels, slack)
    return _check_cms(D, member, labels, zero_tol)


def validate_scalar_rectangular(
    table: np.ndarray, labels: Sequence[str] | None = None, slack: float = 0.0, zero_tol: float = ZERO_TOL
) -> list[AxiomReport]:
    """RC1-RC3 for a real-valued table, with ``<=`` on the reals (up to ``slack``)."""
    D, member, labels = _scalar_setup(table, labels, slack)
    return _check_rcms(D, member, labels, zero_tol)


def reduce(space: FiniteConeSpace, ctx: ScalarizationContext) -> np.ndarray:
    """Scalar table ``d_p[i, j] = xi_e(p(i, j))``."""
    if ctx.cone != space.cone:
        raise InputError("scalarization context and space use different cones")
    out = np.asarray(ctx.xi(space.dist), dtype=float)
    # xi(0) is exactly 0 in closed form; keep the diagonal clean of -0.0
    out[np.arange(space.n), np.arange(space.n)] += 0.0
    return out


# convergence monitoring ---------------------------------------------------


@dataclass(frozen=True)
class MonitorReport:
    """``tail_gaps[n] = max_{1 <= m <= window} d(x_n, x_{n+m})`` over the recorded trace.

    Only points with a recorded successor get a gap, so a trace of length
    ``N`` yields ``N - 1`` gaps.
    """

    tail_gaps: np.ndarray
    window: int

    def cauchy_from(self, tol: float) -> int | None:
        """First index after which every recorded tail gap is ``<= tol``."""
        ok = self.tail_gaps <= tol
        if not ok.size or not ok[-1]:
            return None
        bad = np.flatnonzero(~ok)
        return int(bad[-1] + 1) if bad.size else 0

    def is_cauchy(self, tol: float) -> bool:
        return self.cauchy_from(tol) is not None


def scalar_convergence_monitor(
    trace: Sequence[Any],
    metric: np.ndarray | Callable[[Any, Any], float],
    window: int | None = None,
) -> MonitorReport:
    """Tail gaps of a recorded orbit under a scalar (reduced) distance.

    ``metric`` is either a reduced table, in which case ``trace`` holds point
    indices, or a callable ``metric(a, b) -> float``.
    """
    if len(trace) == 0:
        raise InputError("trace must be nonempty")
    N = len(trace)
    window = N - 1 if window is None else int(window)
    gaps = np.zeros(N - 1)
    if isinstance(metric, np.ndarray):
        idx = np.asarray(trace, dtype=int)
        for n in range(N - 1):
            tail = idx[n + 1 : n + 1 + window]
            gaps[n] = metric[idx[n], tail].max()
    else:
        for n in range(N - 1):
            gaps[n] = max(metric(trace[n], trace[k]) for k in range(n + 1, min(N, n + 1 + window)))
    return MonitorReport(gaps, window)
