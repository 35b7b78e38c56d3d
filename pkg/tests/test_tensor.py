import numpy as np
import pytest

from roadworld.nncore import (
    Tensor,
    concat,
    conv2d,
    max_relative_gradient_error,
    use_dtype,
)

F64 = np.float64


def check(loss_fn, params, tol=1e-4, probes=25):
    err = max_relative_gradient_error(loss_fn, params, probes_per_param=probes)
    assert err < tol, f"max relative gradient error {err:.3g}"


class TestBasics:
    def test_square_gradient(self):
        x = Tensor(3.0, requires_grad=True)
        (x * x).backward()
        assert x.grad == pytest.approx(6.0)

    def test_constant_loss_zero_gradients(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        (x * 0.0).sum().backward()
        assert np.all(x.grad == 0.0)

    def test_nonscalar_loss_rejected(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with pytest.raises(ValueError):
            (x * x).backward()

    def test_gradient_accumulates_over_reuse(self):
        x = Tensor(2.0, requires_grad=True)
        (x * x + x).backward()
        assert x.grad == pytest.approx(5.0)

    def test_broadcast_add_unbroadcasts(self):
        a = Tensor(np.ones((3, 4)), requires_grad=True)
        b = Tensor(np.ones(4), requires_grad=True)
        (a + b).sum().backward()
        assert a.grad.shape == (3, 4)
        assert b.grad.shape == (4,)
        assert np.all(b.grad == 3.0)

    def test_detach_blocks_gradient(self):
        x = Tensor(2.0, requires_grad=True)
        y = x.detach() * x
        y.backward()
        assert x.grad == pytest.approx(2.0)


class TestPrimitiveGradients:
    def setup_method(self):
        self.rng = np.random.default_rng(0)

    def _rand(self, shape, lo=-1.0, hi=1.0):
        return Tensor(self.rng.uniform(lo, hi, shape), requires_grad=True)

    def test_elementwise_ops(self):
        with use_dtype(F64):
            x = self._rand((3, 4), 0.2, 2.0)
            y = self._rand((3, 4), 0.2, 2.0)
            ops = [
                lambda: (x * y + x / y - y).sum(),
                lambda: (x**3).mean(),
                lambda: x.exp().sum(),
                lambda: x.log().sum(),
                lambda: x.sqrt().sum(),
                lambda: x.tanh().sum(),
                lambda: x.sigmoid().sum(),
                lambda: x.silu().sum(),
                lambda: (x - 1.0).relu().sum(),
                lambda: (x - y).abs().sum(),
            ]
            for f in ops:
                check(f, [x, y])

    def test_matmul_batched_broadcast(self):
        with use_dtype(F64):
            a = self._rand((2, 3, 4))
            b = self._rand((4, 5))
            check(lambda: (a @ b).sum(), [a, b])

    def test_shape_ops(self):
        with use_dtype(F64):
            x = self._rand((2, 3, 4))
            check(lambda: x.reshape(6, 4).sum(axis=0).mean(), [x])
            check(lambda: x.transpose(2, 0, 1).sum(), [x])
            check(lambda: x[..., 1:3].sum(), [x])
            check(lambda: concat([x, x * 2.0], axis=1).mean(), [x])

    def test_reductions(self):
        with use_dtype(F64):
            x = self._rand((3, 4, 5))
            check(lambda: x.sum(axis=(1, 2)).mean(), [x])
            check(lambda: x.mean(axis=-1, keepdims=True).sum(), [x])

    def test_softmax_and_layer_norm(self):
        with use_dtype(F64):
            x = self._rand((4, 7))
            w = self._rand((7,))
            check(lambda: (x.softmax() * w).sum(), [x, w])
            check(lambda: (x.log_softmax() * w).sum(), [x, w])
            check(lambda: (x.layer_norm() * w).sum(), [x, w])

    def test_conv2d_gradients(self):
        with use_dtype(F64):
            x = self._rand((2, 3, 6, 8))
            w = self._rand((4, 3, 3, 3))
            b = self._rand((4,))
            check(lambda: conv2d(x, w, b, stride=2, padding=1).sum(), [x, w, b], probes=30)

    def test_conv2d_matches_naive(self):
        rng = np.random.default_rng(1)
        x = Tensor(rng.standard_normal((1, 2, 5, 5)))
        w = Tensor(rng.standard_normal((3, 2, 3, 3)))
        out = conv2d(x, w, None, stride=1, padding=0).data
        # brute-force sliding window
        ref = np.zeros((1, 3, 3, 3), dtype=np.float32)
        for co in range(3):
            for i in range(3):
                for j in range(3):
                    ref[0, co, i, j] = np.sum(x.data[0, :, i : i + 3, j : j + 3] * w.data[co])
        assert np.allclose(out, ref, atol=1e-4)


class TestMLPGradient:
    def test_three_layer_mlp_matches_finite_differences(self):
        with use_dtype(F64):
            rng = np.random.default_rng(7)
            sizes = [(5, 8), (8, 8), (8, 1)]
            params = [Tensor(rng.standard_normal(s) * 0.5, requires_grad=True) for s in sizes]
            x = Tensor(rng.standard_normal((4, 5)))

            def loss():
                h = x
                for i, w in enumerate(params):
                    h = h @ w
                    if i < len(params) - 1:
                        h = h.tanh()
                return (h * h).mean()

            check(loss, params, probes=20)
