"""Hot numeric kernels: fixed-step RK4 propagation and a cyclic Jacobi eigensolver.

Each kernel exists twice: a scalar-loop version compiled with ``numba.njit``
and a vectorised pure-numpy fallback.  The numpy path is selected by setting
``NSTATE_NO_NUMBA=1`` in the environment (or automatically when numba is not
importable).  ``benchmarks/bench_kernels.py`` times the two paths against each
other on representative workloads.
"""

from __future__ import annotations

import math
import os

import numpy as np

ENV_FLAG = "NSTATE_NO_NUMBA"

NUMBA_ENABLED = os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes")
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

# Pulse shape codes shared with the model module (delta trains never reach
# the integrator; they are handled as exact propagator jumps).
PULSE_CONSTANT = 0
PULSE_COSINE = 1
PULSE_GAUSSIAN = 2


def _pulse_value_scalar(kind, p0, p1, p2, t):
    if kind == PULSE_COSINE:
        return p0 * math.cos(p1 * t)
    if kind == PULSE_GAUSSIAN:
        u = (t - p1) / p2
        return p0 * math.exp(-0.5 * u * u)
    return p0


def _rhs(w, energies, kind, p0, p1, p2, t, a, out):
    # da/dt = -i (diag(E) a + V(t) W a)
    n = a.shape[0]
    v = _pulse_value_scalar(kind, p0, p1, p2, t)
    for k in range(n):
        s = 0.0 + 0.0j
        for j in range(n):
            s += w[k, j] * a[j]
        out[k] = -1j * (energies[k] * a[k] + v * s)


def _rk4_loop(w, energies, kind, p0, p1, p2, dt, n_steps, stride, a0, out):
    """Classic fourth-order Runge-Kutta over ``n_steps`` fixed steps.

    Samples the state into ``out`` at step 0, every ``stride`` steps, and at
    the final step.  Returns the largest probability-norm drift seen at any
    step end, so the caller can reject too-coarse runs.
    """
    n = a0.shape[0]
    a = a0.copy()
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)

    norm0 = 0.0
    for i in range(n):
        norm0 += a[i].real * a[i].real + a[i].imag * a[i].imag

    for i in range(n):
        out[0, i] = a[i]
    si = 1
    max_drift = 0.0
    half = 0.5 * dt
    sixth = dt / 6.0

    for step in range(n_steps):
        t = step * dt
        _rhs(w, energies, kind, p0, p1, p2, t, a, k1)
        for i in range(n):
            tmp[i] = a[i] + half * k1[i]
        _rhs(w, energies, kind, p0, p1, p2, t + half, tmp, k2)
        for i in range(n):
            tmp[i] = a[i] + half * k2[i]
        _rhs(w, energies, kind, p0, p1, p2, t + half, tmp, k3)
        for i in range(n):
            tmp[i] = a[i] + dt * k3[i]
        _rhs(w, energies, kind, p0, p1, p2, t + dt, tmp, k4)
        for i in range(n):
            a[i] = a[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        nrm = 0.0
        for i in range(n):
            nrm += a[i].real * a[i].real + a[i].imag * a[i].imag
        drift = abs(norm0 - nrm)
        if drift > max_drift:
            max_drift = drift

        if (step + 1) % stride == 0:
            for i in range(n):
                out[si, i] = a[i]
            si += 1

    if si < out.shape[0]:
        for i in range(n):
            out[si, i] = a[i]
    return max_drift


def _rk4_numpy(w, energies, kind, p0, p1, p2, dt, n_steps, stride, a0, out):
    """Vectorised numpy twin of :func:`_rk4_loop` (same sampling contract)."""
    a = a0.copy()
    norm0 = float(np.sum(a.real**2 + a.imag**2))
    out[0] = a
    si = 1
    max_drift = 0.0
    half = 0.5 * dt

    for step in range(n_steps):
        t = step * dt
        v1 = _pulse_value_scalar(kind, p0, p1, p2, t)
        v2 = _pulse_value_scalar(kind, p0, p1, p2, t + half)
        v4 = _pulse_value_scalar(kind, p0, p1, p2, t + dt)
        k1 = -1j * (energies * a + v1 * (w @ a))
        y = a + half * k1
        k2 = -1j * (energies * y + v2 * (w @ y))
        y = a + half * k2
        k3 = -1j * (energies * y + v2 * (w @ y))
        y = a + dt * k3
        k4 = -1j * (energies * y + v4 * (w @ y))
        a = a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        drift = abs(norm0 - float(np.sum(a.real**2 + a.imag**2)))
        if drift > max_drift:
            max_drift = drift
        if (step + 1) % stride == 0:
            out[si] = a
            si += 1

    if si < out.shape[0]:
        out[si] = a
    return max_drift


def _jacobi_loop(a, v, max_sweeps, tol_off):
    """Cyclic Jacobi sweeps on the symmetric matrix ``a`` (destroyed in place).

    ``v`` accumulates the rotations.  Returns the number of sweeps used, or
    -1 when the off-diagonal norm is still above ``tol_off`` after
    ``max_sweeps`` sweeps.
    """
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if math.sqrt(2.0 * off) <= tol_off:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * aiq
                    a[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = c * api - s * aqi
                    a[q, i] = s * api + c * aqi
                for i in range(n):
                    vip = v[i, p]
                    viq = v[i, q]
                    v[i, p] = c * vip - s * viq
                    v[i, q] = s * vip + c * viq
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += a[p, q] * a[p, q]
    if math.sqrt(2.0 * off) <= tol_off:
        return max_sweeps
    return -1


def _jacobi_numpy(a, v, max_sweeps, tol_off):
    """Slice-vectorised twin of :func:`_jacobi_loop`."""
    n = a.shape[0]
    upper = np.triu_indices(n, 1)
    for sweep in range(max_sweeps):
        # summed directly over the strict upper triangle: subtracting the
        # diagonal from the full norm cancels catastrophically near convergence
        off2 = float(np.sum(a[upper] ** 2))
        if math.sqrt(2.0 * off2) <= tol_off:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    off2 = float(np.sum(a[upper] ** 2))
    if math.sqrt(2.0 * off2) <= tol_off:
        return max_sweeps
    return -1


if NUMBA_ENABLED:
    _pulse_value_scalar = njit(cache=True)(_pulse_value_scalar)
    _rhs = njit(cache=True)(_rhs)
    _rk4_loop = njit(cache=True)(_rk4_loop)
    _jacobi_loop = njit(cache=True)(_jacobi_loop)
    rk4_core = _rk4_loop
    jacobi_core = _jacobi_loop
else:
    rk4_core = _rk4_numpy
    jacobi_core = _jacobi_numpy


def run_rk4(w, energies, kind, params, dt, n_steps, stride, a0, core=None):
    """Drive the selected RK4 kernel and return (sample_steps, amplitudes, drift).

    ``sample_steps`` are the step indices at which the state was recorded
    (step 0, every ``stride`` steps, and the final step).
    """
    core = rk4_core if core is None else core
    sample_steps = np.arange(0, n_steps + 1, stride, dtype=np.int64)
    if sample_steps[-1] != n_steps:
        sample_steps = np.append(sample_steps, n_steps)
    out = np.empty((sample_steps.size, a0.size), np.complex128)
    p0, p1, p2 = params
    drift = core(
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(energies, dtype=np.float64),
        kind,
        float(p0),
        float(p1),
        float(p2),
        float(dt),
        int(n_steps),
        int(stride),
        np.ascontiguousarray(a0, dtype=np.complex128),
        out,
    )
    return sample_steps, out, float(drift)


def jacobi_eigh(matrix, max_sweeps=100, rel_tol=1e-13, core=None):
    """Eigendecompose a real symmetric matrix with cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Eigenvectors
    follow a deterministic sign convention: the first component larger than
    1e-12 in magnitude is made positive.  Exhausting the sweep budget raises
    ``ValueError`` at this level; the spectral module maps that onto its own
    error taxonomy.
    """
    core = jacobi_core if core is None else core
    a = np.array(matrix, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.float64)
    fro = math.sqrt(float(np.sum(a * a)))
    sweeps = core(a, v, int(max_sweeps), rel_tol * fro)
    if sweeps < 0:
        raise ValueError("jacobi sweeps exhausted without convergence")
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = v[:, order]
    for j in range(n):
        col = vecs[:, j]
        for i in range(n):
            if abs(col[i]) > 1e-12:
                if col[i] < 0.0:
                    vecs[:, j] = -col
                break
    return vals, vecs
