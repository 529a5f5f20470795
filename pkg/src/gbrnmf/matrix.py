"""Dense nonnegative matrices and the shared objective/gradient kernels.

Everything downstream (the baseline solver, the restricted solver, the
verification oracles, the benchmark generator) works on plain float64
numpy arrays that have passed :func:`as_nonneg_matrix`. Matrices are
treated as immutable once validated; all operations here are pure.

Conventions
-----------
* The data matrix ``x`` is ``n x p`` (observations by variables).
* The three factors are ``w`` (``n x q``), ``a`` (``q x q``) and ``s``
  (``q x p``); their product approximates ``x``.
* :func:`frobenius_objective` carries the conventional 1/2 factor:
  ``D = 0.5 * ||x - w a s||^2``.
* :func:`gradient` differentiates the *unscaled* squared norm
  ``||x - w a s||^2``, so it equals exactly twice the gradient of the
  halved objective. Both conventions are used deliberately: the halved
  form is what fitting traces report, the unscaled form is what the
  multiplicative update rules and their descent analysis are built on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonnegativityError, ShapeError

__all__ = [
    "Gradient",
    "as_nonneg_matrix",
    "reconstruct",
    "frobenius_objective",
    "gradient",
]


def as_nonneg_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and copy ``values`` into a dense nonnegative float64 matrix.

    Negative or non-finite entries are rejected, never clamped: silently
    repairing them would mask data errors upstream.

    Parameters
    ----------
    values : array-like
        Anything ``np.array`` accepts, expected to be two-dimensional.
    name : str
        Label used in error messages.

    Returns
    -------
    np.ndarray
        A fresh C-contiguous float64 array of shape ``(rows, cols)``.
    """
    arr = np.array(values, dtype=float, order="C", copy=True)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {arr.ndim}-D data")
    if arr.size == 0:
        raise ShapeError(f"{name} must be non-empty, got shape {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonnegativityError(
            f"{name}[{i},{j}] is {arr[i, j]!r}; entries must be finite"
        )
    neg = arr < 0.0
    if neg.any():
        i, j = np.argwhere(neg)[0]
        raise NonnegativityError(
            f"{name}[{i},{j}] = {arr[i, j]!r} is negative; entries must be >= 0"
        )
    return arr


def _require_triple(w: np.ndarray, a: np.ndarray, s: np.ndarray) -> tuple[int, int, int]:
    """Check that ``w @ a @ s`` is well-formed; return (n, q, p)."""
    if w.ndim != 2 or a.ndim != 2 or s.ndim != 2:
        raise ShapeError("w, a and s must all be 2-D matrices")
    n, qw = w.shape
    qa_rows, qa_cols = a.shape
    qs, p = s.shape
    if qa_rows != qa_cols:
        raise ShapeError(f"a must be square, got {a.shape}")
    if qw != qa_rows:
        raise ShapeError(f"w has {qw} columns but a has {qa_rows} rows")
    if qa_cols != qs:
        raise ShapeError(f"a has {qa_cols} columns but s has {qs} rows")
    return n, qw, p


def _require_data(x: np.ndarray, n: int, p: int) -> None:
    if x.ndim != 2 or x.shape != (n, p):
        raise ShapeError(
            f"x has shape {np.shape(x)} but the factors produce ({n}, {p})"
        )


def reconstruct(w: np.ndarray, a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Return the ``n x p`` product ``w @ a @ s``.

    All inputs must be nonnegative, so every entry of the result is >= 0.
    """
    _require_triple(w, a, s)
    return (w @ a) @ s


def frobenius_objective(
    x: np.ndarray, w: np.ndarray, a: np.ndarray, s: np.ndarray
) -> float:
    """Half the squared Frobenius distance between ``x`` and ``w a s``.

    Returns ``0.5 * sum_ij (x_ij - [w a s]_ij)^2``; zero exactly when the
    factorization reproduces ``x`` entrywise.
    """
    n, _, p = _require_triple(w, a, s)
    _require_data(x, n, p)
    diff = x - reconstruct(w, a, s)
    return 0.5 * float(np.dot(diff.ravel(), diff.ravel()))


@dataclass(frozen=True, eq=False)
class Gradient:
    """Partial derivatives of ``||x - w a s||^2`` (entries may be negative).

    ``d_w`` is ``n x q``, ``d_a`` is ``q x q``, ``d_s`` is ``q x p``.
    """

    d_w: np.ndarray
    d_a: np.ndarray
    d_s: np.ndarray


def gradient(
    x: np.ndarray, w: np.ndarray, a: np.ndarray, s: np.ndarray
) -> Gradient:
    """Analytic gradient of the unscaled objective ``||x - w a s||^2``.

    The three blocks are::

        d_w = -2 x s' a' + 2 w a s s' a'
        d_a = -2 w' x s' + 2 w' w a s s'
        d_s = -2 a' w' x + 2 a' w' w a s

    (primes denote transposes). All three vanish simultaneously exactly at
    an unconstrained stationary point, e.g. whenever ``x = w a s``.
    """
    n, _, p = _require_triple(w, a, s)
    _require_data(x, n, p)
    a_s = a @ s
    w_a = w @ a
    resid = w_a @ s - x  # n x p, sign chosen so d_* = 2 * (positive part - data part)
    d_w = 2.0 * (resid @ a_s.T)
    d_a = 2.0 * (w.T @ resid @ s.T)
    d_s = 2.0 * (w_a.T @ resid)
    return Gradient(d_w=d_w, d_a=d_a, d_s=d_s)
