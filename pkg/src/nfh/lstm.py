"""LSTM forward/backward passes in numpy.

Gate layout in the stacked weight matrices is (input, forget, output, cell).
Sequences are time-major ``(T, B, D)``; an optional ``(T, B)`` mask freezes
the state of a sequence once it has ended, so the state after the last step
is each sequence's final state.
"""
import numpy as np


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def init_lstm(rng, input_dim, hidden, prefix):
    limit_w = np.sqrt(6.0 / (input_dim + 4 * hidden))
    limit_u = np.sqrt(6.0 / (hidden + 4 * hidden))
    b = np.zeros(4 * hidden)
    b[hidden:2 * hidden] = 1.0  # forget gate starts open
    return {
        prefix + 'W': rng.uniform(-limit_w, limit_w, (4 * hidden, input_dim)),
        prefix + 'U': rng.uniform(-limit_u, limit_u, (4 * hidden, hidden)),
        prefix + 'b': b,
    }


def lstm_forward(W, U, b, xs, mask=None):
    """Run an LSTM; returns ``(hs, cache)`` with ``hs`` of shape ``(T, B, H)``."""
    T, B, _ = xs.shape
    H = U.shape[1]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((T, B, H))
    steps = []
    for t in range(T):
        z = xs[t] @ W.T + h @ U.T + b
        i = sigmoid(z[:, :H])
        f = sigmoid(z[:, H:2 * H])
        o = sigmoid(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        if mask is None:
            m = None
            h_next, c_next = h_new, c_new
        else:
            m = mask[t][:, None]
            h_next = m * h_new + (1.0 - m) * h
            c_next = m * c_new + (1.0 - m) * c
        steps.append((h, c, i, f, o, g, tc, m))
        h, c = h_next, c_next
        hs[t] = h
    return hs, (xs, steps)


def lstm_backward(W, U, cache, dhs=None, dh_last=None):
    """Backpropagate into the inputs and weights.

    ``dhs`` is the gradient on every output state, ``dh_last`` on the final
    state only; either may be omitted.  Returns ``(dxs, dW, dU, db)``.
    """
    xs, steps = cache
    T, B, _ = xs.shape
    H = U.shape[1]
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dxs = np.empty_like(xs)
    dh = np.zeros((B, H)) if dh_last is None else dh_last.copy()
    dc = np.zeros((B, H))
    for t in reversed(range(T)):
        h_prev, c_prev, i, f, o, g, tc, m = steps[t]
        if dhs is not None:
            dh = dh + dhs[t]
        if m is None:
            dh_new, dc_new = dh, dc
            dh_prev = np.zeros((B, H))
            dc_prev = np.zeros((B, H))
        else:
            dh_new, dc_new = m * dh, m * dc
            dh_prev = (1.0 - m) * dh
            dc_prev = (1.0 - m) * dc
        do = dh_new * tc
        dc_new = dc_new + dh_new * o * (1.0 - tc * tc)
        di = dc_new * g
        df = dc_new * c_prev
        dg = dc_new * i
        dc_prev = dc_prev + dc_new * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            do * o * (1.0 - o),
            dg * (1.0 - g * g),
        ], axis=1)
        dW += dz.T @ xs[t]
        dU += dz.T @ h_prev
        db += dz.sum(axis=0)
        dxs[t] = dz @ W
        dh = dh_prev + dz @ U
        dc = dc_prev
    return dxs, dW, dU, db
