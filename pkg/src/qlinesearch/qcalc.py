"""q-derivative operators and the q_k schedule.

The q-derivative of f at x is (f(x) - f(qx)) / ((1-q)x) for q in (0,1); it
reduces to the classical derivative as q -> 1 and is defined without second
order smoothness.  The coordinate version scales a single coordinate by q.
Both operators fall back to a classical (central finite difference) derivative
on the measure-zero set where the scaled coordinate carries no information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError

_EPS = float(np.finfo(float).eps)

# Relative half-width of the band around x_i = 0 that triggers the classical
# fallback: dividing by (1-q)*x_i below this is pure cancellation noise.
ZERO_BAND = 1e-12


def _check_q(q):
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in the open interval (0, 1), got {q!r}")
    return q


def default_fd_step(scale=1.0):
    """Central-difference step used on the zero-coordinate branch.

    Cube root of machine epsilon, scaled by max(1, |scale|).
    """
    return _EPS ** (1.0 / 3.0) * max(1.0, abs(float(scale)))


def q_shift(x, i, q):
    """Return a copy of ``x`` with coordinate ``i`` multiplied by ``q``.

    Every other coordinate is bit-identical to the input.
    """
    q = _check_q(q)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"coordinate index {i} out of range for dimension {n}")
    out = x.copy()
    out[i] = q * x[i]
    return out


def q_derivative_1d(f, x, q, dfdx=None, fd_step=None):
    """q-derivative of a scalar function of one variable.

    At x = 0 the q-difference is undefined; ``dfdx`` is used when supplied,
    otherwise a central finite difference with step ``fd_step``.
    """
    q = _check_q(q)
    x = float(x)
    if abs(x) <= ZERO_BAND:
        if dfdx is not None:
            val = float(dfdx(x))
        else:
            h = default_fd_step(x) if fd_step is None else float(fd_step)
            val = (float(f(x + h)) - float(f(x - h))) / (2.0 * h)
    else:
        val = (float(f(x)) - float(f(q * x))) / ((1.0 - q) * x)
    if not np.isfinite(val):
        raise NumericError("non-finite q-derivative evaluation", point=x)
    return val


def q_partial(g, x, i, q, fd_step=None):
    """q-partial derivative of ``g`` at ``x`` in coordinate ``i``.

    Uses the q-difference quotient when |x_i| is safely away from zero and a
    central finite difference (step ``fd_step``) otherwise.
    """
    q = _check_q(q)
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"coordinate index {i} out of range for dimension {n}")
    xi = float(x[i])
    scale = max(1.0, float(np.max(np.abs(x))) if n else 1.0)
    if abs(xi) <= ZERO_BAND * scale:
        h = default_fd_step(xi) if fd_step is None else float(fd_step)
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        val = (float(g(xp)) - float(g(xm))) / (2.0 * h)
    else:
        val = (float(g(x)) - float(g(q_shift(x, i, q)))) / ((1.0 - q) * xi)
    if not np.isfinite(val):
        raise NumericError("non-finite q-partial evaluation", point=x.copy())
    return val


@dataclass(frozen=True)
class QSchedule:
    """State of the sequence q_{k+1} = 1 - q_k^gamma / k (k >= 1).

    The update formula divides by the pre-increment counter k, which is zero
    at the very first advance; that transition keeps q_1 = q_0 so the first
    two iterations run at q_0.  Values stay in (0, 1) and approach 1 like
    1 - O(1/k).
    """

    q0: float
    gamma: int
    k: int = 0
    q_current: float = None

    def __post_init__(self):
        object.__setattr__(self, "q0", _check_q(self.q0))
        if int(self.gamma) != self.gamma or self.gamma < 1:
            raise ValueError(f"gamma must be a positive integer, got {self.gamma!r}")
        object.__setattr__(self, "gamma", int(self.gamma))
        if self.k < 0:
            raise ValueError("iteration counter must be nonnegative")
        q = self.q0 if self.q_current is None else _check_q(self.q_current)
        object.__setattr__(self, "q_current", q)


def next_q(schedule):
    """Advance the schedule one iteration and return the new state.

    For k >= 1 the new value is 1 - q_k^gamma / k; the k = 0 -> 1 transition
    carries q_0 forward unchanged (the formula's divisor would be zero there).
    """
    if schedule.k == 0:
        q_new = schedule.q_current
    else:
        q_new = 1.0 - schedule.q_current ** schedule.gamma / schedule.k
    return QSchedule(schedule.q0, schedule.gamma, k=schedule.k + 1, q_current=q_new)
