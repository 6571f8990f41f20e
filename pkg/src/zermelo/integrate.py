"""Adaptive Dormand-Prince 5(4) stepper with continuous output.

The stepper advances one accepted step at a time so callers can inspect every
step (event detection, closest approach) through ``dense``.  States may be
any array shape; for a batch of independent trajectories stored as columns
of a ``(n, m)`` array the step size is driven by the worst column, and
``keep`` drops finished columns.
"""
from __future__ import annotations

import numpy as np

from .errors import StepSizeUnderflow

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th and embedded 4th order weights
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
# continuous extension: y(t0 + s h) = y0 + h * sum_i K_i (P_i . [s, s^2, s^3, s^4])
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


class DormandPrince:
    def __init__(self, fun, t0, y0, t_bound, rtol=1e-10, atol=1e-10,
                 first_step=1e-3, max_step=0.1):
        self.fun = fun
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.t_bound = float(t_bound)
        self.rtol = rtol
        self.atol = atol
        self.max_step = max_step
        self.h = min(first_step, max_step)
        self.f = np.asarray(fun(self.t, self.y), dtype=float)
        self.t_old = self.t
        self.y_old = self.y
        self._K = None
        self._Q = None
        self.n_steps = 0
        self.n_evals = 1

    @property
    def done(self) -> bool:
        return self.t >= self.t_bound

    def _error_norm(self, err, y_new):
        scale = self.atol + self.rtol * np.maximum(np.abs(self.y), np.abs(y_new))
        ratio = (err / scale) ** 2
        if ratio.ndim == 1:
            return float(np.sqrt(ratio.mean()))
        return float(np.sqrt(ratio.mean(axis=0)).max())

    def step(self):
        """Take one accepted step (never past ``t_bound``)."""
        t, y, shape = self.t, self.y, self.y.shape
        min_step = 10 * np.spacing(max(abs(t), 1.0))
        h = min(self.h, self.max_step)
        rejected = False
        K = np.empty((7, y.size))
        K[0] = self.f.ravel()
        flat = y.ravel()
        while True:
            if h < min_step:
                raise StepSizeUnderflow(f"step size underflow at t = {t:.17g}")
            last = t + h >= self.t_bound
            if last:
                h = self.t_bound - t
            for s in range(1, 6):
                ys = flat + h * (_A[s] @ K[:s])
                K[s] = np.asarray(self.fun(t + _C[s] * h, ys.reshape(shape)), dtype=float).ravel()
            y_new = flat + h * (_B @ K[:6])
            K[6] = np.asarray(self.fun(t + h, y_new.reshape(shape)), dtype=float).ravel()
            self.n_evals += 6
            err_norm = self._error_norm((h * (_E @ K)).reshape(shape), y_new.reshape(shape))
            if np.isfinite(err_norm) and err_norm <= 1.0:
                if err_norm == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
                if rejected:
                    factor = min(1.0, factor)
                break
            rejected = True
            if np.isfinite(err_norm):
                h *= max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
            else:
                h *= MIN_FACTOR
        self.t_old, self.y_old = t, y
        self.t = self.t_bound if last else t + h
        self.y = y_new.reshape(shape)
        self.f = K[6].reshape(shape)
        self._K = K.reshape((7,) + shape)
        self._Q = None
        self._h_used = h
        self.h = min(h * factor, self.max_step) if not last else max(self.h, h)
        self.n_steps += 1

    def dense(self, t):
        """State on the last step at time(s) ``t``.

        ``t`` may be a scalar or, in batch mode, an array with one time per
        column.
        """
        if self._Q is None:
            self._Q = np.tensordot(_P.T, self._K, axes=1)     # (4, *shape)
        Q = self._Q
        s = (np.asarray(t, dtype=float) - self.t_old) / self._h_used
        acc = Q[3]
        for p in (2, 1, 0):
            acc = Q[p] + s * acc
        return self.y_old + self._h_used * s * acc

    def keep(self, mask):
        """Retain only the batch columns selected by ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        self.y = self.y[..., mask]
        self.f = self.f[..., mask]
        self.y_old = self.y_old[..., mask]
        if self._K is not None:
            self._K = self._K[..., mask]
            self._Q = None


def bisect_root(fn, lo, hi, iterations: int = 60):
    """Vectorised bisection for a sign change of ``fn`` on ``[lo, hi]``.

    ``fn(lo) <= 0 < fn(hi)`` is assumed elementwise.  Returns the final
    bracket as ``(hi, lo)``, ``hi`` being on the positive side.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        pos = fn(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
        if np.all(hi - lo <= 4 * np.spacing(np.maximum(np.abs(hi), 1.0))):
            break
    return hi, lo
