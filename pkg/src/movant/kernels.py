"""Hot numerical kernels: channel matrix, trace objective, its gradient,
and the box/disk projection.

Each kernel exists in a pure-NumPy form (the ``_py_*`` functions). When numba
is importable and the environment variable ``MOVANT_DISABLE_NUMBA`` is unset,
the public names are ``@njit``-compiled versions of the same code; otherwise
they are the plain functions. ``benchmarks/bench_kernels.py`` compares the two
paths.

Conventions: positions are (N, 2) float64 arrays in wavelength units,
``directions`` is the (K, 2) array of per-user direction vectors,
``amplitudes`` the (K,) per-user channel amplitudes (sqrt of the power gain),
and ``wavenumber`` is 2*pi/wavelength. Entry (n, k) of the channel matrix is
``amplitudes[k] * exp(-1j * wavenumber * dot(positions[n], directions[k]))``
(columns are conjugated steering vectors). Kernels never raise on degenerate
channels; they return NaN objectives plus the measured condition number and
leave error handling to the wrappers.
"""

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "channel_matrix",
    "trace_inv_gram",
    "trace_at",
    "trace_and_grad",
    "project_box_disk",
    "project_deployment",
    "PY_KERNELS",
]


def _passthrough(fn):
    return fn


_env = os.environ.get("MOVANT_DISABLE_NUMBA", "").strip().lower()
_disabled = _env in {"1", "true", "yes", "on"}

if _disabled:
    NUMBA_ENABLED = False
    _jit = _passthrough
else:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True

        def _jit(fn):
            return _njit(cache=True, nogil=True)(fn)

    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
        _jit = _passthrough


def _py_channel_matrix(positions, directions, amplitudes, wavenumber):
    n_ant = positions.shape[0]
    n_usr = directions.shape[0]
    H = np.empty((n_ant, n_usr), dtype=np.complex128)
    for n in range(n_ant):
        for k in range(n_usr):
            phase = wavenumber * (
                positions[n, 0] * directions[k, 0]
                + positions[n, 1] * directions[k, 1]
            )
            H[n, k] = amplitudes[k] * complex(np.cos(phase), -np.sin(phase))
    return H


def _py_trace_inv_gram(H, cond_limit):
    G = np.conj(H.T) @ H
    eigvals = np.linalg.eigvalsh(G)
    if eigvals[0] <= 0.0:
        return np.nan, np.inf
    cond = eigvals[-1] / eigvals[0]
    if cond > cond_limit:
        return np.nan, cond
    trace = 0.0
    for v in eigvals:
        trace += 1.0 / v
    return trace, cond


def _py_trace_at(positions, directions, amplitudes, wavenumber, cond_limit):
    n_ant = positions.shape[0]
    n_usr = directions.shape[0]
    H = np.empty((n_ant, n_usr), dtype=np.complex128)
    for n in range(n_ant):
        for k in range(n_usr):
            phase = wavenumber * (
                positions[n, 0] * directions[k, 0]
                + positions[n, 1] * directions[k, 1]
            )
            H[n, k] = amplitudes[k] * complex(np.cos(phase), -np.sin(phase))
    G = np.conj(H.T) @ H
    eigvals = np.linalg.eigvalsh(G)
    if eigvals[0] <= 0.0:
        return np.nan, np.inf
    cond = eigvals[-1] / eigvals[0]
    if cond > cond_limit:
        return np.nan, cond
    trace = 0.0
    for v in eigvals:
        trace += 1.0 / v
    return trace, cond


def _py_trace_and_grad(positions, directions, amplitudes, wavenumber, cond_limit):
    n_ant = positions.shape[0]
    n_usr = directions.shape[0]
    grad = np.zeros((n_ant, 2))
    H = np.empty((n_ant, n_usr), dtype=np.complex128)
    for n in range(n_ant):
        for k in range(n_usr):
            phase = wavenumber * (
                positions[n, 0] * directions[k, 0]
                + positions[n, 1] * directions[k, 1]
            )
            H[n, k] = amplitudes[k] * complex(np.cos(phase), -np.sin(phase))
    G = np.conj(H.T) @ H
    eigvals = np.linalg.eigvalsh(G)
    if eigvals[0] <= 0.0:
        return np.nan, grad, np.inf
    cond = eigvals[-1] / eigvals[0]
    if cond > cond_limit:
        return np.nan, grad, cond
    G_inv = np.linalg.inv(G)
    trace = 0.0
    for v in eigvals:
        trace += 1.0 / v
    # rows of (G^-1 G^-1 H^H) paired with matching channel entries
    M = (G_inv @ G_inv) @ np.conj(H.T)
    for n in range(n_ant):
        gx = 0.0
        gy = 0.0
        for k in range(n_usr):
            im = (M[k, n] * H[n, k]).imag
            gx += directions[k, 0] * im
            gy += directions[k, 1] * im
        grad[n, 0] = -2.0 * wavenumber * gx
        grad[n, 1] = -2.0 * wavenumber * gy
    return trace, grad, cond


def _py_project_box_disk(point, lo, hi, center, radius, tol, max_iter):
    """Euclidean projection onto box [lo, hi] intersected with the closed
    disk around ``center`` (assumed inside the box, so the intersection is
    nonempty).

    Solved exactly through the disk multiplier: the minimizer is
    ``x(mu) = clip((point + mu*center) / (1 + mu))`` for the unique mu >= 0
    that makes the disk constraint tight (mu = 0 when it is slack), located
    by bisection with fixed internal iteration caps that exhaust double
    precision. ``tol`` and ``max_iter`` stay in the signature for the
    callers' sake; the result is always at machine accuracy.
    """
    out = np.empty(2)
    if radius <= 0.0:
        out[0] = min(max(center[0], lo[0]), hi[0])
        out[1] = min(max(center[1], lo[1]), hi[1])
        return out
    # mu = 0 candidate: plain box clip
    b0 = min(max(point[0], lo[0]), hi[0])
    b1 = min(max(point[1], lo[1]), hi[1])
    w0 = b0 - center[0]
    w1 = b1 - center[1]
    if w0 * w0 + w1 * w1 <= radius * radius:
        out[0] = b0
        out[1] = b1
        return out
    # ||x(mu) - center|| decreases to 0 as mu grows; bracket the root
    mu_lo = 0.0
    mu_hi = 1.0
    for _ in range(200):
        inv = 1.0 / (1.0 + mu_hi)
        c0 = min(max((point[0] + mu_hi * center[0]) * inv, lo[0]), hi[0])
        c1 = min(max((point[1] + mu_hi * center[1]) * inv, lo[1]), hi[1])
        w0 = c0 - center[0]
        w1 = c1 - center[1]
        if w0 * w0 + w1 * w1 <= radius * radius:
            break
        mu_hi *= 4.0
    # 120 halvings exhaust double precision for any bracket width
    for _ in range(120):
        mid = 0.5 * (mu_lo + mu_hi)
        if mid <= mu_lo or mid >= mu_hi:
            break
        inv = 1.0 / (1.0 + mid)
        c0 = min(max((point[0] + mid * center[0]) * inv, lo[0]), hi[0])
        c1 = min(max((point[1] + mid * center[1]) * inv, lo[1]), hi[1])
        w0 = c0 - center[0]
        w1 = c1 - center[1]
        if w0 * w0 + w1 * w1 > radius * radius:
            mu_lo = mid
        else:
            mu_hi = mid
        if mu_hi - mu_lo <= 1e-16 * (1.0 + mu_hi):
            break
    inv = 1.0 / (1.0 + mu_hi)
    out[0] = min(max((point[0] + mu_hi * center[0]) * inv, lo[0]), hi[0])
    out[1] = min(max((point[1] + mu_hi * center[1]) * inv, lo[1]), hi[1])
    return out


def _py_project_deployment(points, centers, radius, lo, hi, tol, max_iter):
    n_ant = points.shape[0]
    out = np.empty((n_ant, 2))
    for n in range(n_ant):
        proj = project_box_disk(points[n], lo, hi, centers[n], radius, tol, max_iter)
        out[n, 0] = proj[0]
        out[n, 1] = proj[1]
    return out


channel_matrix = _jit(_py_channel_matrix)
trace_inv_gram = _jit(_py_trace_inv_gram)
project_box_disk = _jit(_py_project_box_disk)
trace_at = _jit(_py_trace_at)
trace_and_grad = _jit(_py_trace_and_grad)
project_deployment = _jit(_py_project_deployment)

PY_KERNELS = {
    "channel_matrix": _py_channel_matrix,
    "trace_inv_gram": _py_trace_inv_gram,
    "trace_at": _py_trace_at,
    "trace_and_grad": _py_trace_and_grad,
    "project_box_disk": _py_project_box_disk,
    "project_deployment": _py_project_deployment,
}
