import numpy as np
import pytest

from nfh.lstm import init_lstm, lstm_backward, lstm_forward, sigmoid


def params(seed=0, D=3, H=4):
    rng = np.random.default_rng(seed)
    p = init_lstm(rng, D, H, '')
    p['b'] = p['b'] + rng.normal(0, 0.1, p['b'].shape)
    return p['W'], p['U'], p['b']


def reference_step(W, U, b, x, h, c):
    """Scalar-loop LSTM step used as an independent oracle."""
    H = len(h)
    z = [sum(W[r, k] * x[k] for k in range(len(x))) + sum(U[r, k] * h[k] for k in range(H)) + b[r]
         for r in range(4 * H)]
    sig = lambda v: 1.0 / (1.0 + np.exp(-v))  # noqa: E731
    i = [sig(v) for v in z[:H]]
    f = [sig(v) for v in z[H:2 * H]]
    o = [sig(v) for v in z[2 * H:3 * H]]
    g = [np.tanh(v) for v in z[3 * H:]]
    c2 = [f[k] * c[k] + i[k] * g[k] for k in range(H)]
    h2 = [o[k] * np.tanh(c2[k]) for k in range(H)]
    return np.array(h2), np.array(c2)


def test_matches_scalar_reference():
    W, U, b = params()
    xs = np.random.default_rng(1).normal(size=(5, 1, 3))
    hs, _ = lstm_forward(W, U, b, xs)
    h, c = np.zeros(4), np.zeros(4)
    for t in range(5):
        h, c = reference_step(W, U, b, xs[t, 0], h, c)
        np.testing.assert_allclose(hs[t, 0], h, rtol=1e-12, atol=1e-12)


def test_forget_bias_starts_at_one():
    p = init_lstm(np.random.default_rng(0), 3, 4, 'x_')
    np.testing.assert_array_equal(p['x_b'][4:8], 1.0)
    assert set(p) == {'x_W', 'x_U', 'x_b'}


def test_sigmoid_stable():
    assert sigmoid(np.array([-1000.0, 0.0, 1000.0])).tolist() == [0.0, 0.5, 1.0]


def test_mask_freezes_finished_sequences():
    W, U, b = params()
    rng = np.random.default_rng(2)
    a = rng.normal(size=(2, 3))
    batch = np.zeros((4, 2, 3))
    batch[:2, 0] = a
    batch[:, 1] = rng.normal(size=(4, 3))
    mask = np.array([[1, 1], [1, 1], [0, 1], [0, 1]], dtype=float)
    hs, _ = lstm_forward(W, U, b, batch, mask)
    alone, _ = lstm_forward(W, U, b, a[:, None, :])
    np.testing.assert_allclose(hs[-1, 0], alone[-1, 0], rtol=1e-12)


@pytest.mark.parametrize('masked', [False, True])
def test_backward_matches_finite_differences(masked):
    W, U, b = params(3)
    rng = np.random.default_rng(4)
    xs = rng.normal(size=(4, 2, 3))
    mask = np.array([[1, 1], [1, 1], [1, 0], [0, 0]], dtype=float) if masked else None
    w_all = rng.normal(size=(4, 2, 4))
    w_last = rng.normal(size=(2, 4))

    def loss():
        hs, _ = lstm_forward(W, U, b, xs, mask)
        return (hs * w_all).sum() + (hs[-1] * w_last).sum()

    hs, cache = lstm_forward(W, U, b, xs, mask)
    dxs, dW, dU, db = lstm_backward(W, U, cache, dhs=w_all, dh_last=w_last)
    for arr, grad in ((W, dW), (U, dU), (b, db), (xs, dxs)):
        num = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + 1e-5
            up = loss()
            arr[idx] = old - 1e-5
            down = loss()
            arr[idx] = old
            num[idx] = (up - down) / 2e-5
        np.testing.assert_allclose(grad, num, rtol=1e-5, atol=1e-8)
