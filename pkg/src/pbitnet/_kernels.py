"""Compiled inner loops for p-bit sampling.

All randomness is drawn by the caller (numpy Philox streams) and passed in as
arrays, so the kernels are pure functions of their inputs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def local_field(W, h, m, i):
    s = h[i]
    for j in range(m.shape[0]):
        s += W[i, j] * m[j]
    return s


@njit(cache=True)
def _bsn(I, r, binary):
    # bipolar: sgn(tanh I - r), sgn(0) = +1
    # binary:  step(sigmoid(2I) - r0) with r0 = (r + 1) / 2, same event
    if binary:
        r0 = 0.5 * (r + 1.0)
        p = 1.0 / (1.0 + np.exp(-2.0 * I))
        return 1.0 if p - r0 >= 0.0 else 0.0
    return 1.0 if np.tanh(I) - r >= 0.0 else -1.0


@njit(cache=True)
def _store(out, pos, m, binary):
    for j in range(m.shape[0]):
        if binary:
            out[pos, j] = 1 if m[j] > 0.5 else -1
        else:
            out[pos, j] = 1 if m[j] > 0.0 else -1


@njit(cache=True)
def run_sites(W, h, m, sites, r, record_every, out, binary):
    """Update p-bits in the order given by ``sites``; records every
    ``record_every`` updates into ``out``. Returns the number of records."""
    pos = 0
    for t in range(sites.shape[0]):
        i = sites[t]
        m[i] = _bsn(local_field(W, h, m, i), r[t], binary)
        if (t + 1) % record_every == 0:
            _store(out, pos, m, binary)
            pos += 1
    return pos


@njit(cache=True)
def run_async(W, h, m, sites, dt, r, delay, t_now, buf_t, buf_i, buf_old,
              head, size, record_every, out, binary):
    """Poisson-clock updates reading the state as it was ``delay`` earlier.

    Flip history lives in a ring buffer (buf_t, buf_i, buf_old). Returns
    (t_now, head, size, records, overflow).
    """
    cap = buf_t.shape[0]
    pos = 0
    md = m.copy()
    overflow = False
    for e in range(sites.shape[0]):
        t_now += dt[e]
        i = sites[e]
        if delay > 0.0:
            md[:] = m
            k = head
            walked = 0
            horizon = t_now - delay
            reached = False
            while walked < size:
                k = (k - 1) % cap
                if buf_t[k] <= horizon:
                    reached = True
                    break
                md[buf_i[k]] = buf_old[k]
                walked += 1
            if not reached and size == cap:
                overflow = True
            I = local_field(W, h, md, i)
        else:
            I = local_field(W, h, m, i)
        new = _bsn(I, r[e], binary)
        if new != m[i]:
            buf_t[head] = t_now
            buf_i[head] = i
            buf_old[head] = m[i]
            head = (head + 1) % cap
            if size < cap:
                size += 1
            m[i] = new
        if (e + 1) % record_every == 0:
            _store(out, pos, m, binary)
            pos += 1
    return t_now, head, size, pos, overflow


@njit(cache=True)
def energy(W, h, m):
    e = 0.0
    n = m.shape[0]
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += W[i, j] * m[j]
        e -= m[i] * (0.5 * s + h[i])
    return e


@njit(cache=True)
def anneal_stage(W, h, m, sites, r, scale, best_m, best_e):
    """Random-scan updates at interaction scale ``scale``; tracks the lowest
    unscaled energy seen. ``best_e`` is a length-1 array updated in place."""
    e = energy(W, h, m)
    for t in range(sites.shape[0]):
        i = sites[t]
        I = local_field(W, h, m, i)
        new = 1.0 if np.tanh(scale * I) - r[t] >= 0.0 else -1.0
        if new != m[i]:
            e -= (new - m[i]) * I
            m[i] = new
            if e < best_e[0] - 1e-12:
                best_e[0] = e
                best_m[:] = m
    return energy(W, h, m)
