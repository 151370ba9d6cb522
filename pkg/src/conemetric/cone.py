"""Closed convex pointed cones in R^n and the orders they induce.

Three cone families are supported:

* ``orthant``      -- the nonnegative orthant ``{y : y_i >= 0}``
* ``polyhedral``   -- ``{y : A y >= 0}`` for a facet-normal matrix ``A``
* ``second_order`` -- the Lorentz cone ``{(u, t) : ||u||_2 <= t}``

Every membership/interior test reduces to a scalar *margin*: ``min_i y_i``,
``min_i (A y)_i`` or ``t - ||u||``.  A vector is a member when its margin is
``>= -tol_mem`` and interior when its margin is ``> tol_int``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionError, InputError

KINDS = ("orthant", "polyhedral", "second_order")

DEFAULT_TOL_MEM = 1e-12
DEFAULT_TOL_INT = 1e-12


@dataclass(frozen=True)
class Cone:
    kind: str
    dim: int
    facets: tuple[tuple[float, ...], ...] | None = None
    tol_mem: float = DEFAULT_TOL_MEM
    tol_int: float = DEFAULT_TOL_INT

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"unknown cone type {self.kind!r}; expected one of {KINDS}")
        if self.tol_mem < 0 or self.tol_int < 0:
            raise InputError("cone tolerances must be nonnegative")
        if self.kind == "polyhedral":
            if not self.facets:
                raise InputError("polyhedral cone needs at least one facet row")
            A = np.asarray(self.facets, dtype=float)
            if A.ndim != 2 or A.shape[1] != self.dim:
                raise DimensionError(f"facet matrix must be m x {self.dim}, got {A.shape}")
            if not np.all(np.isfinite(A)):
                raise InputError("facet matrix has non-finite entries")
            # {y : Ay >= 0} ∩ {y : -Ay >= 0} is the null space of A.
            if np.linalg.matrix_rank(A) < self.dim:
                raise InputError("polyhedral cone is not pointed (facet matrix is rank deficient)")
            if self._chebyshev_margin(A)[1] <= 0:
                raise InputError("polyhedral cone has empty interior")
        else:
            if self.facets is not None:
                raise InputError(f"{self.kind} cone takes no facet matrix")
            if self.dim < 1:
                raise InputError("cone dimension must be positive")
            if self.kind == "second_order" and self.dim < 2:
                raise InputError("second-order cone needs dim >= 2")

    # construction -------------------------------------------------------

    @classmethod
    def orthant(cls, dim: int, **tols: float) -> Cone:
        return cls("orthant", int(dim), **tols)

    @classmethod
    def polyhedral(cls, A: Sequence[Sequence[float]] | np.ndarray, **tols: float) -> Cone:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        rows = tuple(tuple(float(v) for v in row) for row in A)
        return cls("polyhedral", A.shape[1], rows, **tols)

    @classmethod
    def second_order(cls, dim: int, **tols: float) -> Cone:
        return cls("second_order", int(dim), **tols)

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> Cone:
        """Build a cone from its JSON fragment (see ``docs/formats.md``)."""
        if not isinstance(obj, dict) or "type" not in obj:
            raise InputError("cone JSON must be an object with a 'type' field")
        tols = {k: float(obj[k]) for k in ("tol_mem", "tol_int") if k in obj}
        kind = obj["type"]
        if kind == "polyhedral":
            if "A" not in obj:
                raise InputError("polyhedral cone JSON needs 'A'")
            return cls.polyhedral(obj["A"], **tols)
        if kind in ("orthant", "second_order"):
            if "dim" not in obj:
                raise InputError(f"{kind} cone JSON needs 'dim'")
            return cls(kind, int(obj["dim"]), **tols)
        raise InputError(f"unknown cone type {kind!r}")

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"type": self.kind}
        if self.kind == "polyhedral":
            out["A"] = [list(row) for row in self.facets]
        else:
            out["dim"] = self.dim
        if self.tol_mem != DEFAULT_TOL_MEM:
            out["tol_mem"] = self.tol_mem
        if self.tol_int != DEFAULT_TOL_INT:
            out["tol_int"] = self.tol_int
        return out

    # geometry -----------------------------------------------------------

    @cached_property
    def A(self) -> np.ndarray | None:
        if self.facets is None:
            return None
        return np.asarray(self.facets, dtype=float)

    @staticmethod
    def _chebyshev_margin(A: np.ndarray) -> tuple[np.ndarray, float]:
        # max s  s.t.  a_i . y >= s ||a_i||,  -1 <= y <= 1
        m, n = A.shape
        norms = np.linalg.norm(A, axis=1)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A_ub = np.hstack([-A, norms[:, None]])
        bounds = [(-1.0, 1.0)] * n + [(None, 1.0)]
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), bounds=bounds, method="highs")
        if not res.success:
            return np.zeros(n), 0.0
        return res.x[:n], float(res.x[-1])

    def interior_point(self) -> np.ndarray:
        """A canonical point of the interior, e.g. a default scalarization direction."""
        if self.kind == "orthant":
            return np.ones(self.dim)
        if self.kind == "second_order":
            e = np.zeros(self.dim)
            e[-1] = 1.0
            return e
        y, _ = self._chebyshev_margin(self.A)
        return y / np.linalg.norm(y)

    def _as_array(self, y: Any) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.ndim == 0 or y.shape[-1] != self.dim:
            raise DimensionError(f"expected vectors of length {self.dim}, got shape {y.shape}")
        return y

    def margin(self, y: Any) -> np.ndarray | float:
        """Signed distance-like margin; vectorized over leading axes."""
        y = self._as_array(y)
        if self.kind == "orthant":
            m = y.min(axis=-1)
        elif self.kind == "polyhedral":
            m = (y @ self.A.T).min(axis=-1)
        else:
            m = y[..., -1] - np.linalg.norm(y[..., :-1], axis=-1)
        return float(m) if np.ndim(m) == 0 else m

    def contains(self, y: Any) -> bool | np.ndarray:
        m = self.margin(y)
        return bool(m >= -self.tol_mem) if np.ndim(m) == 0 else m >= -self.tol_mem

    def in_interior(self, y: Any) -> bool | np.ndarray:
        m = self.margin(y)
        return bool(m > self.tol_int) if np.ndim(m) == 0 else m > self.tol_int

    # orders -------------------------------------------------------------

    def leq(self, x: Any, y: Any) -> bool | np.ndarray:
        """``x <= y`` iff ``y - x`` lies in the cone."""
        return self.contains(self._as_array(y) - self._as_array(x))

    def lt(self, x: Any, y: Any) -> bool:
        """Strict order: ``x <= y`` and ``x != y``."""
        x, y = self._as_array(x), self._as_array(y)
        return bool(self.leq(x, y)) and not np.array_equal(x, y)

    def ll(self, x: Any, y: Any) -> bool | np.ndarray:
        """``x << y`` iff ``y - x`` lies in the interior."""
        return self.in_interior(self._as_array(y) - self._as_array(x))
