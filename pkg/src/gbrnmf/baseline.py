"""Unconstrained two-factor NMF with the classic multiplicative updates.

``x ~ w @ h`` with ``w`` (``n x q``) holding scores and ``h`` (``q x p``)
holding factors. Serves as the comparison arm for the restricted solver:
with no constraints and the auxiliary matrix pinned to the identity, one
restricted sweep reproduces these updates exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .gbr import EPS_DEN, FitConfig, FitReport, Termination
from .matrix import as_nonneg_matrix

__all__ = ["BaselineModel", "init_baseline", "nmf_update_step", "nmf_fit"]


@dataclass(frozen=True, eq=False)
class BaselineModel:
    """Factor pair of a two-factor fit."""

    w: np.ndarray
    h: np.ndarray


def init_baseline(x, q: int, config: FitConfig) -> BaselineModel:
    """Uniform initialization of both factors on ``[min(x), max(x)]``.

    ``config.init_low/high`` override the bounds; the seed makes the draw
    reproducible and comparable with a restricted fit using the same seed.
    """
    x = as_nonneg_matrix(x, "x")
    n, p = x.shape
    _check_rank(q, n, p)
    rng = np.random.default_rng(config.seed)
    if config.init_low is not None:
        lo, hi = config.init_low, config.init_high
    else:
        lo, hi = float(x.min()), float(x.max())
    return BaselineModel(
        w=rng.uniform(lo, hi, size=(n, q)),
        h=rng.uniform(lo, hi, size=(q, p)),
    )


def _check_rank(q: int, n: int, p: int) -> None:
    if q < 1 or q > min(n, p):
        raise ConfigError(f"rank q = {q} must satisfy 1 <= q <= min(n, p) = {min(n, p)}")


def _step(x, w, h):
    # h first (uses the pre-step w), then w (uses the fresh h)
    h = h * ((w.T @ x) / np.maximum((w.T @ w) @ h, EPS_DEN))
    w = w * ((x @ h.T) / np.maximum(w @ (h @ h.T), EPS_DEN))
    return w, h


def nmf_update_step(x, model: BaselineModel) -> BaselineModel:
    """One alternating multiplicative update::

        h_ij <- h_ij * (w' x)_ij / (w' w h)_ij
        w_ij <- w_ij * (x h')_ij / (w h h')_ij

    The objective never increases, zeros stay exactly zero, and an exact
    factorization is a fixed point.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        w, h = _step(x, model.w, model.h)
    return BaselineModel(w=w, h=h)


def nmf_fit(x, q: int, config: FitConfig) -> tuple[BaselineModel, FitReport]:
    """Fit ``x ~ w h`` at rank ``q`` with the same stopping rules as the
    restricted solver (absolute progress below ``delta``, or the
    iteration budget)."""
    x = as_nonneg_matrix(x, "x")
    _check_rank(q, *x.shape)
    model = init_baseline(x, q, config)
    if config.max_iter == 0:
        return model, FitReport(
            objective_trace=np.empty(0),
            iterations_run=0,
            termination=Termination.MAX_ITERATIONS,
            seed=config.seed,
        )

    w, h = model.w.copy(), model.h.copy()

    def objective() -> float:
        diff = x - w @ h
        return 0.5 * float(np.dot(diff.ravel(), diff.ravel()))

    with np.errstate(over="ignore", invalid="ignore"):
        trace = [objective()]
        if not np.isfinite(trace[0]):
            raise NumericError("objective is non-finite at iteration 0")
        termination = Termination.MAX_ITERATIONS
        for z in range(1, config.max_iter + 1):
            w, h = _step(x, w, h)
            d = objective()
            if not np.isfinite(d):
                raise NumericError(f"objective became non-finite at iteration {z}")
            trace.append(d)
            # delta == 0 disables the progress stop, as in the restricted fit
            if config.delta > 0.0 and trace[-2] - trace[-1] < config.delta:
                termination = Termination.DELTA_PROGRESS
                break

    report = FitReport(
        objective_trace=np.asarray(trace),
        iterations_run=len(trace) - 1,
        termination=termination,
        seed=config.seed,
    )
    return BaselineModel(w=w, h=h), report
