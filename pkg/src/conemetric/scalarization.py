"""Nonlinear (Gerstewitz) scalarization ``xi_e(y) = inf{t : y in t e - P}``.

Two independent routes are provided.  :meth:`ScalarizationContext.xi` uses a
closed form per cone family; :meth:`ScalarizationContext.xi_bisect` only
queries the cone's membership oracle and bisects the monotone predicate
``t -> (t e - y) in P``.  Tests compare the two.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cone import Cone
from .errors import InputError, UnboundedInputError


@dataclass(frozen=True)
class ScalarizationContext:
    cone: Cone
    e: tuple[float, ...] = field(default=())
    bisect_tol: float = 1e-10
    bracket_cap: float = 1e12

    def __post_init__(self) -> None:
        if not self.e:
            object.__setattr__(self, "e", tuple(float(v) for v in self.cone.interior_point()))
        else:
            object.__setattr__(self, "e", tuple(float(v) for v in np.ravel(self.e)))
        if len(self.e) != self.cone.dim:
            raise InputError(f"direction e has length {len(self.e)}, cone has dim {self.cone.dim}")
        if not self.cone.in_interior(self.e_vec):
            raise InputError("scalarization direction e must lie in the interior of the cone")
        if not self.bisect_tol > 0:
            raise InputError("bisect_tol must be positive")
        if not self.bracket_cap > 1:
            raise InputError("bracket_cap must exceed 1")

    @property
    def e_vec(self) -> np.ndarray:
        return np.asarray(self.e, dtype=float)

    def scaled(self, lam: float) -> ScalarizationContext:
        """Context whose xi is ``lam`` times this one's (uses direction ``e / lam``)."""
        return ScalarizationContext(self.cone, tuple(self.e_vec / lam), self.bisect_tol, self.bracket_cap)

    # closed forms --------------------------------------------------------

    def xi(self, y: Any) -> float | np.ndarray:
        """Scalarization of ``y``; vectorized over leading axes of ``y``."""
        y = self.cone._as_array(y)
        e = self.e_vec
        kind = self.cone.kind
        if kind == "orthant":
            v = (y / e).max(axis=-1)
        elif kind == "polyhedral":
            A = self.cone.A
            v = ((y @ A.T) / (A @ e)).max(axis=-1)
        else:
            v = _lorentz_xi(y, e)
        return float(v) if np.ndim(v) == 0 else v

    # oracle --------------------------------------------------------------

    def _feasible(self, t: float, y: np.ndarray) -> bool:
        return bool(self.cone.contains(t * self.e_vec - y))

    def xi_bisect(self, y: Any) -> float:
        """Scalarization by bracketing + bisection on the membership oracle only.

        Raises :class:`UnboundedInputError` if the bracket has to grow beyond
        ``bracket_cap``.
        """
        y = self.cone._as_array(y)
        if y.ndim != 1:
            raise InputError("xi_bisect takes a single vector")
        hi = 1.0
        while not self._feasible(hi, y):
            hi *= 2.0
            if hi > self.bracket_cap:
                raise UnboundedInputError(f"xi upper bracket exceeded cap {self.bracket_cap:g}")
        lo = -1.0
        while self._feasible(lo, y):
            lo *= 2.0
            if -lo > self.bracket_cap:
                raise UnboundedInputError(f"xi lower bracket exceeded cap {self.bracket_cap:g}")
        # invariant: infeasible at lo, feasible at hi
        while hi - lo > self.bisect_tol:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self._feasible(mid, y):
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)


def _lorentz_xi(y: np.ndarray, e: np.ndarray) -> np.ndarray:
    # Smallest t with ||t w - u|| <= t a - c, where e = (w, a), y = (u, c).
    # Squaring gives alpha t^2 - 2 beta t + gamma >= 0 with alpha > 0 and the
    # answer is the larger root.  Splitting u = s w/|w| + u_perp writes the
    # discriminant as a sum of squares, avoiding cancellation near y ~ t e.
    w, a = e[:-1], e[-1]
    u, c = y[..., :-1], y[..., -1]
    omega = float(np.linalg.norm(w))
    if omega == 0.0:
        return (c + np.linalg.norm(u, axis=-1)) / a
    w_hat = w / omega
    s = u @ w_hat
    perp2 = np.einsum("...i,...i->...", *(2 * [u - s[..., None] * w_hat]))
    alpha = (a - omega) * (a + omega)
    beta = a * c - omega * s
    gamma = (c - s) * (c + s) - perp2
    root = np.sqrt((a * s - c * omega) ** 2 + alpha * perp2)
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(beta - root != 0, gamma / (beta - root), 0.0)
    return np.where(beta >= 0, (beta + root) / alpha, neg)
