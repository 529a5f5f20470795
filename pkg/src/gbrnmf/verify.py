"""Independent numerical checks of the solver's mathematics.

Three families of oracle, none of which reuse the update-rule algebra they
are checking:

* :func:`check_gradient` compares the analytic gradient blocks against
  central finite differences of a directly evaluated objective.
* :func:`check_auxiliary` samples single entries and verifies that the
  quadratic upper bound behind each multiplicative rule really dominates
  the objective restricted to that entry (and touches it at the anchor).
* :func:`check_descent` runs many short fits across the constraint
  families and confirms the objective trace never increases beyond
  floating-point tolerance.

All checks are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gbr import (
    EPS_DEN,
    ConstraintSpec,
    FitConfig,
    Model,
    _a_num_den,
    _s_num_den,
    _w_num_den,
    fit,
)
from .matrix import Gradient, gradient

__all__ = [
    "ALL_FAMILIES",
    "AuxCheckReport",
    "AuxCheckSample",
    "DescentCheckReport",
    "GradientCheckReport",
    "check_auxiliary",
    "check_descent",
    "check_gradient",
]


def _objective_sq(x, w, a, s) -> float:
    """Unscaled objective ``||x - w a s||^2``, evaluated directly."""
    diff = x - (w @ a) @ s
    return float(np.dot(diff.ravel(), diff.ravel()))


def _rel_err(analytic: float, numeric: float) -> float:
    # floor at 1 so a stationary point (both sides ~ 0) compares cleanly
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


@dataclass(frozen=True)
class GradientCheckReport:
    """Worst relative disagreement per factor matrix."""

    max_rel_error: dict[str, float]
    worst_entry: dict[str, tuple[int, int]]
    step: float
    tol: float
    passed: bool

    @property
    def overall_max(self) -> float:
        return max(self.max_rel_error.values())


def check_gradient(
    x,
    model: Model,
    step: float = 1e-6,
    tol: float = 1e-5,
    analytic: Gradient | None = None,
) -> GradientCheckReport:
    """Compare analytic gradients against central finite differences.

    Every entry of ``w``, ``a`` and ``s`` is perturbed by ``+-step`` in
    turn and ``||x - w a s||^2`` re-evaluated; the check passes when the
    largest relative error (floored at magnitude 1) is at most ``tol``.
    Pass ``analytic`` to check an externally supplied gradient instead of
    the one computed here; the report names the worst coordinate either
    way.
    """
    if step <= 0.0:
        raise ValueError(f"step must be > 0, got {step}")
    x = np.asarray(x, dtype=float)
    if analytic is None:
        analytic = gradient(x, model.w, model.a, model.s)

    mats = {"w": model.w.copy(), "a": model.a.copy(), "s": model.s.copy()}
    analytic_blocks = {"w": analytic.d_w, "a": analytic.d_a, "s": analytic.d_s}

    max_err: dict[str, float] = {}
    worst: dict[str, tuple[int, int]] = {}
    for name, base in mats.items():
        block = analytic_blocks[name]
        err_best, where = 0.0, (0, 0)
        for idx in np.ndindex(base.shape):
            orig = base[idx]
            base[idx] = orig + step
            f_plus = _objective_sq(x, mats["w"], mats["a"], mats["s"])
            base[idx] = orig - step
            f_minus = _objective_sq(x, mats["w"], mats["a"], mats["s"])
            base[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            err = _rel_err(float(block[idx]), numeric)
            if err > err_best:
                err_best, where = err, idx
        max_err[name] = err_best
        worst[name] = where

    return GradientCheckReport(
        max_rel_error=max_err,
        worst_entry=worst,
        step=step,
        tol=tol,
        passed=max(max_err.values()) <= tol,
    )


@dataclass(frozen=True, eq=False)
class AuxCheckSample:
    """One sampled coordinate with its probe evaluations.

    ``probe_values`` holds nonnegative probe points (the last one is the
    multiplicative-update output for this entry); ``f_values`` are direct
    evaluations of the objective restricted to the coordinate and
    ``g_values`` the quadratic bound anchored at ``x_t``. A sample whose
    anchor is zero is skipped: the curvature term divides by the anchor.
    """

    matrix: str
    i: int
    j: int
    x_t: float
    probe_values: np.ndarray = field(repr=False)
    f_values: np.ndarray = field(repr=False)
    g_values: np.ndarray = field(repr=False)
    update_value: float
    anchor_gap: float
    min_margin: float
    skipped: bool
    passed: bool


@dataclass(frozen=True, eq=False)
class AuxCheckReport:
    target: str
    samples: list[AuxCheckSample]
    passed: bool

    @property
    def n_skipped(self) -> int:
        return sum(1 for s in self.samples if s.skipped)


_NUM_DEN = {"w": _w_num_den, "a": _a_num_den, "s": _s_num_den}


def check_auxiliary(
    x,
    model: Model,
    target: str = "w",
    samples: int = 5,
    probes: int = 50,
    seed: int = 0,
    dominance_tol: float = 1e-9,
    anchor_tol: float = 1e-10,
) -> AuxCheckReport:
    """Verify the quadratic upper bound behind one family of updates.

    For a sampled entry with current value ``t`` of the ``target`` matrix
    (``"w"``, ``"a"`` or ``"s"``), let ``F(v)`` be the unscaled objective
    with that entry set to ``v`` and::

        G(v, t) = F(t) + F'(t) (v - t) + (den_ij / t) (v - t)^2

    where ``den_ij`` is the entry's update denominator and ``F'`` its
    analytic derivative. The bound must dominate: ``G(v, t) >= F(v)``
    within ``dominance_tol`` relative slack on probe points spread over
    ``[0, 3t]`` plus the update output, and must match ``F`` at the anchor
    within ``anchor_tol``. The minimizer of ``G`` is exactly the
    multiplicative update, so ``F`` cannot increase along it.
    """
    if target not in _NUM_DEN:
        raise ValueError(f"target must be one of 'w', 'a', 's', got {target!r}")
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    w, a, s = model.w, model.a, model.s
    mat = {"w": w, "a": a, "s": s}[target]
    num, den = _NUM_DEN[target](x, w, a, s)

    def restricted(i: int, j: int, v: float) -> float:
        probe = mat.copy()
        probe[i, j] = v
        parts = {"w": w, "a": a, "s": s}
        parts[target] = probe
        return _objective_sq(x, parts["w"], parts["a"], parts["s"])

    rows, cols = mat.shape
    flat = rng.choice(rows * cols, size=min(samples, rows * cols), replace=False)

    out: list[AuxCheckSample] = []
    for idx in flat:
        i, j = divmod(int(idx), cols)
        t = float(mat[i, j])
        if t <= 0.0:
            out.append(
                AuxCheckSample(
                    matrix=target, i=i, j=j, x_t=t,
                    probe_values=np.empty(0), f_values=np.empty(0),
                    g_values=np.empty(0), update_value=0.0,
                    anchor_gap=0.0, min_margin=0.0,
                    skipped=True, passed=True,
                )
            )
            continue

        update_value = t * float(num[i, j]) / max(float(den[i, j]), EPS_DEN)
        vs = np.append(np.linspace(0.0, 3.0 * t, probes), update_value)
        f0 = restricted(i, j, t)
        fprime = 2.0 * (float(den[i, j]) - float(num[i, j]))
        curvature = float(den[i, j]) / t
        f_vals = np.array([restricted(i, j, float(v)) for v in vs])
        g_vals = f0 + fprime * (vs - t) + curvature * (vs - t) ** 2

        margin = g_vals - (f_vals - dominance_tol * np.maximum(1.0, np.abs(f_vals)))
        g_at_anchor = f0  # the linear and quadratic terms vanish at v = t
        anchor_gap = _rel_err(g_at_anchor, restricted(i, j, t))
        ok = bool((margin >= 0.0).all()) and anchor_gap <= anchor_tol
        out.append(
            AuxCheckSample(
                matrix=target, i=i, j=j, x_t=t,
                probe_values=vs, f_values=f_vals, g_values=g_vals,
                update_value=update_value,
                anchor_gap=anchor_gap,
                min_margin=float((g_vals - f_vals).min()),
                skipped=False, passed=ok,
            )
        )

    return AuxCheckReport(
        target=target,
        samples=out,
        passed=all(s.passed for s in out),
    )


@dataclass(frozen=True)
class DescentCheckReport:
    """Outcome of the multi-instance descent harness."""

    trials: int
    iterations: int
    violations: int
    worst_violation: float
    worst_trial: int | None
    tol: float
    passed: bool


ALL_FAMILIES = ("free", "group", "basis", "both", "boundary")


def check_descent(
    max_rows: int = 20,
    max_cols: int = 20,
    max_rank: int = 5,
    trials: int = 100,
    iterations: int = 200,
    seed: int = 0,
    tol: float = 1e-10,
    families: tuple[str, ...] = ALL_FAMILIES,
) -> DescentCheckReport:
    """Run short fits on random instances and test trace monotonicity.

    Instances cycle through the requested constraint families:
    ``free`` (no constraints), ``group`` (frozen indicator columns),
    ``basis`` (frozen rows), ``both``, and the fully allocated
    ``boundary`` with ``g + k = q``. Every consecutive objective pair
    must satisfy ``D(t+1) <= D(t) + tol * max(1, D(t))``; the report
    records the worst signed violation (negative means comfortable
    descent everywhere).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    unknown = set(families) - set(ALL_FAMILIES)
    if unknown or not families:
        raise ValueError(f"families must be drawn from {ALL_FAMILIES}, got {families}")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    worst_trial: int | None = None
    violations = 0

    for trial in range(trials):
        n = int(rng.integers(2, max_rows + 1))
        p = int(rng.integers(2, max_cols + 1))
        q = int(rng.integers(1, min(n, p, max_rank) + 1))
        family = families[trial % len(families)]
        g, k = 0, 0
        if family == "group":
            g = int(rng.integers(1, q + 1))
        elif family == "basis":
            k = int(rng.integers(1, q + 1))
        elif family == "both" and q >= 2:
            g = int(rng.integers(1, q))
            k = int(rng.integers(1, q - g + 1))
        elif family == "boundary":
            g = int(rng.integers(0, q + 1))
            k = q - g

        group_block = None
        if g:
            labels = rng.integers(0, g, size=n)
            group_block = np.zeros((n, g))
            group_block[np.arange(n), labels] = 1.0
        basis_block = rng.uniform(0.1, 1.0, size=(k, p)) if k else None

        x = rng.uniform(0.0, 1.0, size=(n, p))
        spec = ConstraintSpec(q=q, group_block=group_block, basis_block=basis_block)
        config = FitConfig(delta=0.0, max_iter=iterations, seed=int(rng.integers(0, 2**31)))
        _, report = fit(x, spec, config)

        trace = report.objective_trace
        if trace.size >= 2:
            gaps = trace[1:] - trace[:-1] - tol * np.maximum(1.0, trace[:-1])
            trial_worst = float(gaps.max())
            if trial_worst > 0.0:
                violations += 1
            if trial_worst > worst:
                worst, worst_trial = trial_worst, trial

    return DescentCheckReport(
        trials=trials,
        iterations=iterations,
        violations=violations,
        worst_violation=worst,
        worst_trial=worst_trial,
        tol=tol,
        passed=violations == 0,
    )
