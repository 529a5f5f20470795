import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbrnmf import (
    NonnegativityError,
    ShapeError,
    as_nonneg_matrix,
    frobenius_objective,
    gradient,
    reconstruct,
)
from helpers import naive_chain, rel_err


class TestAsNonnegMatrix:
    def test_copies_and_casts(self):
        src = [[1, 2], [3, 4]]
        out = as_nonneg_matrix(src)
        assert out.dtype == np.float64
        assert out.shape == (2, 2)

    @pytest.mark.parametrize("bad", [[[1.0, -0.5]], [[np.nan]], [[np.inf, 1.0]]])
    def test_rejects_negative_and_non_finite(self, bad):
        with pytest.raises(NonnegativityError):
            as_nonneg_matrix(bad)

    def test_error_names_the_entry(self):
        with pytest.raises(NonnegativityError, match=r"x\[1,2\]"):
            as_nonneg_matrix([[1, 2, 3], [4, 5, -6]], name="x")

    def test_rejects_wrong_rank(self):
        with pytest.raises(ShapeError):
            as_nonneg_matrix([1.0, 2.0])
        with pytest.raises(ShapeError):
            as_nonneg_matrix(np.zeros((0, 3)))


class TestReconstruct:
    def test_scalar_identity(self):
        out = reconstruct(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))
        np.testing.assert_array_equal(out, [[1.0]])

    def test_identity_w_a_passes_s_through(self):
        s = np.array([[2.0, 3.0], [4.0, 5.0]])
        out = reconstruct(np.eye(2), np.eye(2), s)
        np.testing.assert_array_equal(out, s)

    def test_matches_naive_triple_loop(self):
        rng = np.random.default_rng(42)
        w = rng.uniform(0, 1, (3, 2))
        a = rng.uniform(0, 1, (2, 2))
        s = rng.uniform(0, 1, (2, 4))
        assert rel_err(reconstruct(w, a, s), naive_chain(w, a, s)) <= 1e-12

    def test_shape_error_names_offending_pair(self):
        with pytest.raises(ShapeError, match="columns but s has"):
            reconstruct(np.ones((3, 2)), np.ones((2, 2)), np.ones((3, 4)))
        with pytest.raises(ShapeError, match="square"):
            reconstruct(np.ones((3, 2)), np.ones((2, 3)), np.ones((3, 4)))

    @settings(deadline=None, max_examples=25)
    @given(
        seed=st.integers(0, 10_000),
        n=st.integers(1, 6),
        q=st.integers(1, 5),
        p=st.integers(1, 6),
    )
    def test_association_insensitive(self, seed, n, q, p):
        rng = np.random.default_rng(seed)
        w = rng.uniform(0, 2, (n, q))
        a = rng.uniform(0, 2, (q, q))
        s = rng.uniform(0, 2, (q, p))
        assert rel_err((w @ a) @ s, w @ (a @ s)) <= 1e-12


class TestFrobeniusObjective:
    def test_zero_at_exact_factorization(self):
        rng = np.random.default_rng(0)
        w = rng.uniform(0, 1, (4, 2))
        a = rng.uniform(0, 1, (2, 2))
        s = rng.uniform(0, 1, (2, 5))
        assert frobenius_objective(reconstruct(w, a, s), w, a, s) == 0.0

    def test_half_square_of_unit_residual(self):
        one = np.array([[1.0]])
        assert frobenius_objective(np.array([[2.0]]), one, one, one) == 0.5

    def test_matches_elementwise_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(0, 1, (4, 5))
        w = rng.uniform(0, 1, (4, 3))
        a = rng.uniform(0, 1, (3, 3))
        s = rng.uniform(0, 1, (3, 5))
        product = naive_chain(w, a, s)
        expected = 0.5 * sum(
            (x[i, j] - product[i, j]) ** 2 for i in range(4) for j in range(5)
        )
        got = frobenius_objective(x, w, a, s)
        assert abs(got - expected) <= 1e-12 * max(1.0, expected)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            frobenius_objective(np.ones((3, 3)), np.ones((4, 2)), np.ones((2, 2)), np.ones((2, 3)))

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(0, 10_000))
    def test_nonnegative(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(0, 3, (3, 4))
        w = rng.uniform(0, 3, (3, 2))
        a = rng.uniform(0, 3, (2, 2))
        s = rng.uniform(0, 3, (2, 4))
        assert frobenius_objective(x, w, a, s) >= 0.0


def _fd_entry(x, w, a, s, which, i, j, step=1e-6):
    """Central difference of ||x - w a s||^2 in one entry, coded directly."""
    mats = {"w": w.copy(), "a": a.copy(), "s": s.copy()}

    def f() -> float:
        diff = x - mats["w"] @ mats["a"] @ mats["s"]
        return float((diff * diff).sum())

    orig = mats[which][i, j]
    mats[which][i, j] = orig + step
    f_plus = f()
    mats[which][i, j] = orig - step
    f_minus = f()
    return (f_plus - f_minus) / (2 * step)


class TestGradient:
    def test_zero_at_global_minimum(self):
        rng = np.random.default_rng(3)
        w = rng.uniform(0, 1, (3, 2))
        a = rng.uniform(0, 1, (2, 2))
        s = rng.uniform(0, 1, (2, 4))
        grad = gradient(reconstruct(w, a, s), w, a, s)
        assert not grad.d_w.any()
        assert not grad.d_a.any()
        assert not grad.d_s.any()

    def test_scalar_case(self):
        one = np.array([[1.0]])
        grad = gradient(np.array([[2.0]]), one, one, one)
        np.testing.assert_array_equal(grad.d_w, [[-2.0]])
        np.testing.assert_array_equal(grad.d_a, [[-2.0]])
        np.testing.assert_array_equal(grad.d_s, [[-2.0]])

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(0, 1, (3, 4))
        w = rng.uniform(0.1, 1, (3, 2))
        a = rng.uniform(0.1, 1, (2, 2))
        s = rng.uniform(0.1, 1, (2, 4))
        grad = gradient(x, w, a, s)
        blocks = {"w": grad.d_w, "a": grad.d_a, "s": grad.d_s}
        for which, block in blocks.items():
            for idx in np.ndindex(block.shape):
                fd = _fd_entry(x, w, a, s, which, *idx)
                err = abs(block[idx] - fd) / max(1.0, abs(block[idx]), abs(fd))
                assert err <= 1e-5, f"{which}{idx}: analytic {block[idx]} vs fd {fd}"

    def test_unscaled_convention_is_twice_the_halved_objective(self):
        # gradient() differentiates ||.||^2 while the objective carries 1/2,
        # so finite differences of the objective must equal gradient / 2
        rng = np.random.default_rng(13)
        x = rng.uniform(0, 1, (3, 3))
        w = rng.uniform(0.1, 1, (3, 2))
        a = rng.uniform(0.1, 1, (2, 2))
        s = rng.uniform(0.1, 1, (2, 3))
        grad = gradient(x, w, a, s)
        step = 1e-6
        w_plus, w_minus = w.copy(), w.copy()
        w_plus[0, 0] += step
        w_minus[0, 0] -= step
        fd_halved = (
            frobenius_objective(x, w_plus, a, s) - frobenius_objective(x, w_minus, a, s)
        ) / (2 * step)
        assert fd_halved == pytest.approx(grad.d_w[0, 0] / 2.0, rel=1e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            gradient(np.ones((2, 2)), np.ones((3, 2)), np.ones((2, 2)), np.ones((2, 2)))
