"""Group and basis restricted three-factor NMF.

The model is ``x ~ w @ a @ s`` with three nonnegative factors:

* ``w`` (``n x q``): observation scores. Its first ``g`` columns may be
  frozen to a known group-indicator block and are never updated.
* ``a`` (``q x q``): auxiliary scaling matrix, initialized to the
  identity. Because the updates are multiplicative, an identity start
  keeps ``a`` exactly diagonal forever; its diagonal rescales whichever
  basis rows were pinned.
* ``s`` (``q x p``): basis rows. Rows ``g .. g+k-1`` (the ones directly
  after the group factors) may be frozen to known bases.

Free entries are learned with multiplicative updates::

    w_ij <- w_ij * (x s' a')_ij       / (w a s s' a')_ij
    a_ij <- a_ij * (w' x s')_ij       / (w' w a s s')_ij
    s_ij <- s_ij * (a' w' x)_ij       / (a' w' w a s)_ij

Each rule is the minimizer of a quadratic upper bound on the objective
restricted to one entry, so a full sweep never increases
``0.5 * ||x - w a s||^2`` (see :mod:`gbrnmf.verify` for the numerical
checks of that claim). Freezing is implemented by restoring the pinned
entries after each full-matrix update, which is equivalent to skipping
them because the rules are elementwise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    ConfigError,
    ConstraintError,
    IndicatorError,
    NonnegativityError,
    NormalizationError,
    NumericError,
    ShapeError,
)
from .matrix import as_nonneg_matrix

__all__ = [
    "EPS_DEN",
    "ConstraintSpec",
    "FitConfig",
    "FitReport",
    "Model",
    "Termination",
    "fit",
    "init_model",
    "kkt_residuals",
    "normalize",
    "row_areas",
    "update_a",
    "update_s",
    "update_w",
]

# Floor applied to update denominators before division. Prevents 0/0 while
# keeping zero entries absorbing (the numerator is still multiplied by the
# current entry, so 0 stays exactly 0).
EPS_DEN = 1e-12


class Termination(enum.Enum):
    """Why a fit loop stopped."""

    DELTA_PROGRESS = "delta_progress"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class FitConfig:
    """Stopping parameters and seeding for a single fit.

    ``delta`` is the absolute per-iteration progress threshold: iteration
    stops once ``D(z-1) - D(z) < delta``. The default of 0 means the
    iteration budget governs. ``init_low``/``init_high`` override the
    uniform initialization bounds (normally derived from the data and the
    known bases).
    """

    delta: float = 0.0
    max_iter: int = 50_000
    seed: int = 0
    init_low: float | None = None
    init_high: float | None = None

    def __post_init__(self) -> None:
        if self.delta < 0.0 or not np.isfinite(self.delta):
            raise ConfigError(f"delta must be finite and >= 0, got {self.delta}")
        if self.max_iter < 0:
            raise ConfigError(f"max_iter must be >= 0, got {self.max_iter}")
        if (self.init_low is None) != (self.init_high is None):
            raise ConfigError("init_low and init_high must be given together")
        if self.init_low is not None and self.init_high < self.init_low:
            raise ConfigError("init_high must be >= init_low")


@dataclass(frozen=True)
class FitReport:
    """Objective trajectory and termination cause of one fit.

    ``objective_trace[z]`` is ``0.5 * ||x - w a s||^2`` after iteration
    ``z``, with the initial value at index 0. A zero iteration budget is
    degenerate: the initialization is returned with an empty trace.
    ``seed`` records which seed produced the run (useful with restarts).
    """

    objective_trace: np.ndarray
    iterations_run: int
    termination: Termination
    seed: int = 0

    @property
    def final_objective(self) -> float:
        if self.objective_trace.size == 0:
            return float("nan")
        return float(self.objective_trace[-1])


@dataclass(frozen=True)
class ConstraintSpec:
    """Total factor count plus the frozen blocks.

    ``group_block`` (``n x g``) pins the leading columns of ``w``. In
    strict mode it must be a one-hot indicator: every entry 0 or 1 with
    exactly one 1 per row. Set ``strict_indicator=False`` to pin arbitrary
    nonnegative columns instead. ``basis_block`` (``k x p``) pins the
    ``k`` rows of ``s`` immediately after the ``g`` group rows; each row
    must be nonnegative and not all zero. Requires ``g + k <= q``.
    """

    q: int
    group_block: np.ndarray | None = None
    basis_block: np.ndarray | None = None
    strict_indicator: bool = True

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ConstraintError(f"q must be >= 1, got {self.q}")
        if self.group_block is not None:
            blk = as_nonneg_matrix(self.group_block, "group_block")
            if self.strict_indicator:
                if not np.isin(blk, (0.0, 1.0)).all():
                    raise IndicatorError(
                        "group_block entries must be 0 or 1 in strict mode"
                    )
                ones_per_row = (blk == 1.0).sum(axis=1)
                if not (ones_per_row == 1).all():
                    row = int(np.argwhere(ones_per_row != 1)[0][0])
                    raise IndicatorError(
                        f"group_block row {row} must contain exactly one 1, "
                        f"found {int(ones_per_row[row])}"
                    )
            object.__setattr__(self, "group_block", blk)
        if self.basis_block is not None:
            blk = as_nonneg_matrix(self.basis_block, "basis_block")
            row_sums = blk.sum(axis=1)
            if (row_sums == 0.0).any():
                row = int(np.argwhere(row_sums == 0.0)[0][0])
                raise ConstraintError(f"basis_block row {row} is all zero")
            object.__setattr__(self, "basis_block", blk)
        if self.g + self.k > self.q:
            raise ConstraintError(
                f"g + k = {self.g} + {self.k} exceeds q = {self.q}"
            )

    @property
    def g(self) -> int:
        """Number of frozen group columns in ``w``."""
        return 0 if self.group_block is None else self.group_block.shape[1]

    @property
    def k(self) -> int:
        """Number of frozen basis rows in ``s``."""
        return 0 if self.basis_block is None else self.basis_block.shape[0]

    def validate_against(self, x: np.ndarray) -> None:
        """Check the blocks against the data dimensions."""
        n, p = x.shape
        if self.group_block is not None and self.group_block.shape[0] != n:
            raise ShapeError(
                f"group_block has {self.group_block.shape[0]} rows "
                f"but x has {n}"
            )
        if self.basis_block is not None and self.basis_block.shape[1] != p:
            raise ShapeError(
                f"basis_block has {self.basis_block.shape[1]} columns "
                f"but x has {p}"
            )
        if self.q > min(n, p):
            raise ConstraintError(
                f"q = {self.q} exceeds min(n, p) = {min(n, p)}"
            )


@dataclass(frozen=True, eq=False)
class Model:
    """A ``(w, a, s)`` triple plus masks recording which entries are frozen.

    Masked entries hold the constraint blocks bit-for-bit and survive any
    number of updates unchanged. Treat the arrays as read-only; update
    operations return new models.
    """

    w: np.ndarray
    a: np.ndarray
    s: np.ndarray
    w_mask: np.ndarray = field(repr=False)
    s_mask: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        n, qw = self.w.shape
        if self.a.shape != (qw, qw):
            raise ShapeError(f"a has shape {self.a.shape}, expected ({qw}, {qw})")
        if self.s.shape[0] != qw:
            raise ShapeError(
                f"s has {self.s.shape[0]} rows but w has {qw} columns"
            )
        if self.w_mask.shape != self.w.shape or self.w_mask.dtype != bool:
            raise ShapeError("w_mask must be a boolean array shaped like w")
        if self.s_mask.shape != self.s.shape or self.s_mask.dtype != bool:
            raise ShapeError("s_mask must be a boolean array shaped like s")
        for name in ("w", "a", "s"):
            arr = getattr(self, name)
            if not np.isfinite(arr).all() or (arr < 0.0).any():
                raise NonnegativityError(f"{name} must be finite and nonnegative")

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def q(self) -> int:
        return self.w.shape[1]

    @property
    def p(self) -> int:
        return self.s.shape[1]


def _check_x(x: np.ndarray, model: Model) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n, model.p):
        raise ShapeError(
            f"x has shape {x.shape} but the model expects ({model.n}, {model.p})"
        )
    return x


def init_model(x, spec: ConstraintSpec, config: FitConfig) -> Model:
    """Build the starting point for a fit.

    Frozen ``w`` columns are copied from the group block and free entries
    drawn uniformly from ``[min(x), max(x)]``. ``a`` starts as the
    identity. Frozen ``s`` rows are copied from the basis block; free rows
    are drawn uniformly from the bounds of the known bases when any are
    given, otherwise from the data bounds. ``config.init_low/high``
    override both ranges. Deterministic for a fixed seed.
    """
    x = as_nonneg_matrix(x, "x")
    spec.validate_against(x)
    n, p = x.shape
    q, g, k = spec.q, spec.g, spec.k
    rng = np.random.default_rng(config.seed)

    if config.init_low is not None:
        w_lo, w_hi = config.init_low, config.init_high
    else:
        w_lo, w_hi = float(x.min()), float(x.max())
    w = rng.uniform(w_lo, w_hi, size=(n, q))
    if g:
        w[:, :g] = spec.group_block

    a = np.eye(q)

    if config.init_low is not None:
        s_lo, s_hi = config.init_low, config.init_high
    elif k:
        s_lo, s_hi = float(spec.basis_block.min()), float(spec.basis_block.max())
    else:
        s_lo, s_hi = w_lo, w_hi
    s = rng.uniform(s_lo, s_hi, size=(q, p))
    if k:
        s[g : g + k, :] = spec.basis_block

    w_mask = np.zeros((n, q), dtype=bool)
    w_mask[:, :g] = True
    s_mask = np.zeros((q, p), dtype=bool)
    s_mask[g : g + k, :] = True
    return Model(w=w, a=a, s=s, w_mask=w_mask, s_mask=s_mask)


def _w_num_den(x, w, a, s):
    a_s = a @ s
    return x @ a_s.T, w @ (a_s @ a_s.T)


def _a_num_den(x, w, a, s):
    return w.T @ x @ s.T, (w.T @ w) @ a @ (s @ s.T)


def _s_num_den(x, w, a, s):
    w_a = w @ a
    return w_a.T @ x, (w_a.T @ w_a) @ s


def _step_w(x, w, a, s, w_mask):
    num, den = _w_num_den(x, w, a, s)
    new = w * (num / np.maximum(den, EPS_DEN))
    new[w_mask] = w[w_mask]
    return new


def _step_a(x, w, a, s):
    num, den = _a_num_den(x, w, a, s)
    return a * (num / np.maximum(den, EPS_DEN))


def _step_s(x, w, a, s, s_mask):
    num, den = _s_num_den(x, w, a, s)
    new = s * (num / np.maximum(den, EPS_DEN))
    new[s_mask] = s[s_mask]
    return new


def update_w(x, model: Model) -> Model:
    """One multiplicative update of the free entries of ``w``."""
    x = _check_x(x, model)
    with np.errstate(over="ignore", invalid="ignore"):
        w = _step_w(x, model.w, model.a, model.s, model.w_mask)
    return replace(model, w=w)


def update_a(x, model: Model) -> Model:
    """One multiplicative update of all entries of ``a``.

    Zeros are absorbing, so off-diagonal zeros of an identity-initialized
    ``a`` stay exactly zero and ``a`` remains diagonal.
    """
    x = _check_x(x, model)
    with np.errstate(over="ignore", invalid="ignore"):
        a = _step_a(x, model.w, model.a, model.s)
    return replace(model, a=a)


def update_s(x, model: Model) -> Model:
    """One multiplicative update of the free rows of ``s``."""
    x = _check_x(x, model)
    with np.errstate(over="ignore", invalid="ignore"):
        s = _step_s(x, model.w, model.a, model.s, model.s_mask)
    return replace(model, s=s)


def _fit_single(x: np.ndarray, spec: ConstraintSpec, config: FitConfig):
    model = init_model(x, spec, config)
    if config.max_iter == 0:
        report = FitReport(
            objective_trace=np.empty(0),
            iterations_run=0,
            termination=Termination.MAX_ITERATIONS,
            seed=config.seed,
        )
        return model, report

    w, a, s = model.w.copy(), model.a.copy(), model.s.copy()
    w_mask, s_mask = model.w_mask, model.s_mask

    def objective() -> float:
        diff = x - (w @ a) @ s
        return 0.5 * float(np.dot(diff.ravel(), diff.ravel()))

    with np.errstate(over="ignore", invalid="ignore"):
        trace = [objective()]
        if not np.isfinite(trace[0]):
            raise NumericError("objective is non-finite at iteration 0")

        termination = Termination.MAX_ITERATIONS
        for z in range(1, config.max_iter + 1):
            w = _step_w(x, w, a, s, w_mask)
            a = _step_a(x, w, a, s)
            s = _step_s(x, w, a, s, s_mask)
            d = objective()
            if not np.isfinite(d):
                raise NumericError(f"objective became non-finite at iteration {z}")
            trace.append(d)
            # delta == 0 disables the progress stop (the budget governs);
            # otherwise rounding noise at stagnation would end the run early
            if config.delta > 0.0 and trace[-2] - trace[-1] < config.delta:
                termination = Termination.DELTA_PROGRESS
                break

    fitted = Model(w=w, a=a, s=s, w_mask=w_mask, s_mask=s_mask)
    report = FitReport(
        objective_trace=np.asarray(trace),
        iterations_run=len(trace) - 1,
        termination=termination,
        seed=config.seed,
    )
    return fitted, report


def fit(
    x, spec: ConstraintSpec, config: FitConfig, restarts: int = 1
) -> tuple[Model, FitReport]:
    """Fit the restricted model to ``x``.

    Runs the full loop: initialize, then sweep (free ``w`` entries, all of
    ``a``, free ``s`` rows, objective, stopping check) until progress
    drops below ``config.delta`` or the iteration budget is exhausted.

    ``restarts`` > 1 repeats the fit with seeds ``config.seed + r`` for
    ``r = 0 .. restarts-1`` and returns the run with the lowest final
    objective; ties go to the lowest seed. Raises
    :class:`~gbrnmf.errors.NumericError` if the objective overflows.
    """
    x = as_nonneg_matrix(x, "x")
    spec.validate_against(x)
    if restarts < 1:
        raise ConfigError(f"restarts must be >= 1, got {restarts}")

    best: tuple[Model, FitReport] | None = None
    for r in range(restarts):
        candidate = _fit_single(x, spec, replace(config, seed=config.seed + r))
        # strict < keeps the earliest (lowest-seed) run on ties
        if best is None or candidate[1].final_objective < best[1].final_objective:
            best = candidate
    return best


def row_areas(s: np.ndarray) -> np.ndarray:
    """Trapezoidal area under each row over unit-spaced abscissae."""
    if s.shape[1] < 2:
        return np.zeros(s.shape[0])
    return s.sum(axis=1) - 0.5 * (s[:, 0] + s[:, -1])


def normalize(model: Model, include_frozen: bool = False) -> Model:
    """Rescale factors to the interpretation convention, preserving ``w a s``.

    Each rescaled column of ``w`` is made to sum to ``n`` and each
    rescaled row of ``s`` to unit trapezoidal area; ``a`` absorbs the
    inverse scales so the reconstruction is unchanged. By default frozen
    columns/rows are left untouched (they are user-supplied) and only the
    free-side scalings are compensated; pass ``include_frozen=True`` to
    rescale everything, e.g. to put two models on a common convention
    before comparing them. Masks are carried over unchanged.

    Raises :class:`~gbrnmf.errors.NormalizationError` if a column sum or
    row area to be rescaled is zero.
    """
    n, q = model.n, model.q
    frozen_cols = model.w_mask.any(axis=0)
    frozen_rows = model.s_mask.any(axis=1)

    col_sums = model.w.sum(axis=0)
    areas = row_areas(model.s)

    w_scale = np.ones(q)
    s_scale = np.ones(q)
    for j in range(q):
        if frozen_cols[j] and not include_frozen:
            continue
        if col_sums[j] <= 0.0:
            raise NormalizationError(f"w column {j} has zero sum")
        w_scale[j] = n / col_sums[j]
    for i in range(q):
        if frozen_rows[i] and not include_frozen:
            continue
        if areas[i] <= 0.0:
            raise NormalizationError(f"s row {i} has zero area")
        s_scale[i] = 1.0 / areas[i]

    w = model.w * w_scale[None, :]
    s = model.s * s_scale[:, None]
    a = model.a / w_scale[:, None] / s_scale[None, :]
    return Model(w=w, a=a, s=s, w_mask=model.w_mask, s_mask=model.s_mask)


def kkt_residuals(x, model: Model) -> dict[str, float]:
    """Max complementary-slackness residual over the free entries.

    For each free entry the stationarity measure is
    ``|value * (numerator - denominator)|`` of its update rule; at a
    converged point all three maxima are small relative to ``||x||^2``.
    Returns ``{"w": ..., "a": ..., "s": ...}``.
    """
    x = _check_x(x, model)
    w, a, s = model.w, model.a, model.s

    def free_max(value, num, den, mask) -> float:
        resid = np.abs(value * (num - den))
        if mask is not None:
            resid = resid[~mask]
        return float(resid.max()) if resid.size else 0.0

    num_w, den_w = _w_num_den(x, w, a, s)
    num_a, den_a = _a_num_den(x, w, a, s)
    num_s, den_s = _s_num_den(x, w, a, s)
    return {
        "w": free_max(w, num_w, den_w, model.w_mask),
        "a": free_max(a, num_a, den_a, None),
        "s": free_max(s, num_s, den_s, model.s_mask),
    }
