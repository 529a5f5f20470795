"""Shared instance builders and naive oracles for the test suite.

The oracles here are deliberately written as explicit loops so they stay
independent of the numpy paths they check.
"""

from __future__ import annotations

import numpy as np

from gbrnmf import ConstraintSpec, FitConfig, Model, group_indicator


def naive_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Triple-loop matrix product."""
    rows, inner = a.shape
    inner2, cols = b.shape
    assert inner == inner2
    out = np.zeros((rows, cols))
    for i in range(rows):
        for j in range(cols):
            acc = 0.0
            for l in range(inner):
                acc += a[i, l] * b[l, j]
            out[i, j] = acc
    return out


def naive_chain(*mats: np.ndarray) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = naive_matmul(out, m)
    return out


def random_model(seed: int, n: int, p: int, q: int, g: int = 0, k: int = 0) -> Model:
    """Positive-entry model with the leading g columns / next k rows masked."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 1.0, size=(n, q))
    if g:
        w[:, :g] = group_indicator(rng.integers(0, g, size=n), g)
    a = rng.uniform(0.1, 1.0, size=(q, q))
    s = rng.uniform(0.1, 1.0, size=(q, p))
    w_mask = np.zeros((n, q), dtype=bool)
    w_mask[:, :g] = True
    s_mask = np.zeros((q, p), dtype=bool)
    s_mask[g : g + k, :] = True
    return Model(w=w, a=a, s=s, w_mask=w_mask, s_mask=s_mask)


def random_spec(seed: int, n: int, p: int, q: int, g: int = 0, k: int = 0) -> ConstraintSpec:
    rng = np.random.default_rng(seed)
    group_block = group_indicator(rng.integers(0, g, size=n), g) if g else None
    basis_block = rng.uniform(0.1, 1.0, size=(k, p)) if k else None
    return ConstraintSpec(q=q, group_block=group_block, basis_block=basis_block)


def random_data(seed: int, n: int, p: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=(n, p))


def quick_config(max_iter: int = 100, seed: int = 0, delta: float = 0.0) -> FitConfig:
    return FitConfig(delta=delta, max_iter=max_iter, seed=seed)


def rel_err(got: np.ndarray, want: np.ndarray) -> float:
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    denom = max(1e-300, float(np.abs(want).max()))
    return float(np.abs(got - want).max()) / denom
