"""Evolution kernels for the cycle walks.

Two interchangeable backends live here: a pure-numpy one built on
``np.roll`` and a numba-jitted one with fused multi-step loops.  The
active backend is picked at import time from the environment variable
``CYCLEWALK_BACKEND`` ("numba" or "numpy"); the default is numba when
it imports, numpy otherwise.  Both backends expose the same six
functions over (d, 4) complex128 amplitude tables:

    evolve_recycled(amps, steps, c, s)            -> amps
    evolve_memory(amps, steps)                    -> amps
    evolve_recycled_accumulate(amps, steps, c, s) -> (amps, acc)
    evolve_memory_accumulate(amps, steps)         -> (amps, acc)
    evolve_recycled_normscan(amps, steps, c, s)   -> (amps, drift, norm)
    evolve_memory_normscan(amps, steps)           -> (amps, drift, norm)

where acc[n] is the sum of the position-n probability over steps
t = 1..steps, drift is the largest per-step change of the state norm
and norm is the final state norm.  Inputs are never mutated.

Component order per site is fixed by the walk module: recycled-coin
states hold (c1 c2) = (dd, du, ud, uu) and memory states hold
(coin, memory) = (dd, du, ud, uu).  c and s are cos(theta), sin(theta)
of the second coin block; the first block is always the Hadamard angle.
"""

import os

import numpy as np

_SQ2 = 1.0 / np.sqrt(2.0)

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# numpy backend

def _step_recycled_np(a, c, s):
    # up[n] = a[n+1], dn[n] = a[n-1] (indices mod d): a left mover arrives
    # at n from n+1, a right mover from n-1.
    up = np.roll(a, -1, axis=0)
    dn = np.roll(a, 1, axis=0)
    out = np.empty_like(a)
    out[:, 0] = _SQ2 * (up[:, 0] + up[:, 1])
    out[:, 1] = c * up[:, 2] + s * up[:, 3]
    out[:, 2] = _SQ2 * (dn[:, 0] - dn[:, 1])
    out[:, 3] = s * dn[:, 2] - c * dn[:, 3]
    return out


def _step_memory_np(a):
    up = np.roll(a, -1, axis=0)
    dn = np.roll(a, 1, axis=0)
    out = np.empty_like(a)
    out[:, 0] = _SQ2 * (up[:, 0] + up[:, 2])
    out[:, 1] = _SQ2 * (dn[:, 1] + dn[:, 3])
    out[:, 2] = _SQ2 * (up[:, 1] - up[:, 3])
    out[:, 3] = _SQ2 * (dn[:, 0] - dn[:, 2])
    return out


def _evolve_recycled_np(amps, steps, c, s):
    a = amps.copy()
    for _ in range(steps):
        a = _step_recycled_np(a, c, s)
    return a


def _evolve_memory_np(amps, steps):
    a = amps.copy()
    for _ in range(steps):
        a = _step_memory_np(a)
    return a


def _evolve_recycled_accumulate_np(amps, steps, c, s):
    a = amps.copy()
    acc = np.zeros(amps.shape[0], dtype=np.float64)
    for _ in range(steps):
        a = _step_recycled_np(a, c, s)
        acc += np.abs(a[:, 0]) ** 2 + np.abs(a[:, 1]) ** 2 \
            + np.abs(a[:, 2]) ** 2 + np.abs(a[:, 3]) ** 2
    return a, acc


def _evolve_memory_accumulate_np(amps, steps):
    a = amps.copy()
    acc = np.zeros(amps.shape[0], dtype=np.float64)
    for _ in range(steps):
        a = _step_memory_np(a)
        acc += np.abs(a[:, 0]) ** 2 + np.abs(a[:, 1]) ** 2 \
            + np.abs(a[:, 2]) ** 2 + np.abs(a[:, 3]) ** 2
    return a, acc


def _evolve_recycled_normscan_np(amps, steps, c, s):
    a = amps.copy()
    prev = float(np.sqrt(np.sum(np.abs(a) ** 2)))
    drift = 0.0
    for _ in range(steps):
        a = _step_recycled_np(a, c, s)
        norm = float(np.sqrt(np.sum(np.abs(a) ** 2)))
        drift = max(drift, abs(norm - prev))
        prev = norm
    return a, drift, prev


def _evolve_memory_normscan_np(amps, steps):
    a = amps.copy()
    prev = float(np.sqrt(np.sum(np.abs(a) ** 2)))
    drift = 0.0
    for _ in range(steps):
        a = _step_memory_np(a)
        norm = float(np.sqrt(np.sum(np.abs(a) ** 2)))
        drift = max(drift, abs(norm - prev))
        prev = norm
    return a, drift, prev


_NUMPY_IMPL = {
    "evolve_recycled": _evolve_recycled_np,
    "evolve_memory": _evolve_memory_np,
    "evolve_recycled_accumulate": _evolve_recycled_accumulate_np,
    "evolve_memory_accumulate": _evolve_memory_accumulate_np,
    "evolve_recycled_normscan": _evolve_recycled_normscan_np,
    "evolve_memory_normscan": _evolve_memory_normscan_np,
}


# ---------------------------------------------------------------------------
# numba backend

if HAS_NUMBA:

    @njit(cache=True)
    def _step_recycled_nb(a, out, c, s):
        d = a.shape[0]
        for n in range(d):
            u = n + 1
            if u == d:
                u = 0
            v = n - 1
            if v < 0:
                v = d - 1
            out[n, 0] = _SQ2 * (a[u, 0] + a[u, 1])
            out[n, 1] = c * a[u, 2] + s * a[u, 3]
            out[n, 2] = _SQ2 * (a[v, 0] - a[v, 1])
            out[n, 3] = s * a[v, 2] - c * a[v, 3]

    @njit(cache=True)
    def _step_memory_nb(a, out):
        d = a.shape[0]
        for n in range(d):
            u = n + 1
            if u == d:
                u = 0
            v = n - 1
            if v < 0:
                v = d - 1
            out[n, 0] = _SQ2 * (a[u, 0] + a[u, 2])
            out[n, 1] = _SQ2 * (a[v, 1] + a[v, 3])
            out[n, 2] = _SQ2 * (a[u, 1] - a[u, 3])
            out[n, 3] = _SQ2 * (a[v, 0] - a[v, 2])

    @njit(cache=True)
    def _evolve_recycled_nb(amps, steps, c, s):
        a = amps.copy()
        b = np.empty_like(a)
        for _ in range(steps):
            _step_recycled_nb(a, b, c, s)
            a, b = b, a
        return a

    @njit(cache=True)
    def _evolve_memory_nb(amps, steps):
        a = amps.copy()
        b = np.empty_like(a)
        for _ in range(steps):
            _step_memory_nb(a, b)
            a, b = b, a
        return a

    @njit(cache=True)
    def _evolve_recycled_accumulate_nb(amps, steps, c, s):
        d = amps.shape[0]
        a = amps.copy()
        b = np.empty_like(a)
        acc = np.zeros(d, dtype=np.float64)
        for _ in range(steps):
            _step_recycled_nb(a, b, c, s)
            a, b = b, a
            for n in range(d):
                acc[n] += (a[n, 0].real ** 2 + a[n, 0].imag ** 2
                           + a[n, 1].real ** 2 + a[n, 1].imag ** 2
                           + a[n, 2].real ** 2 + a[n, 2].imag ** 2
                           + a[n, 3].real ** 2 + a[n, 3].imag ** 2)
        return a, acc

    @njit(cache=True)
    def _evolve_memory_accumulate_nb(amps, steps):
        d = amps.shape[0]
        a = amps.copy()
        b = np.empty_like(a)
        acc = np.zeros(d, dtype=np.float64)
        for _ in range(steps):
            _step_memory_nb(a, b)
            a, b = b, a
            for n in range(d):
                acc[n] += (a[n, 0].real ** 2 + a[n, 0].imag ** 2
                           + a[n, 1].real ** 2 + a[n, 1].imag ** 2
                           + a[n, 2].real ** 2 + a[n, 2].imag ** 2
                           + a[n, 3].real ** 2 + a[n, 3].imag ** 2)
        return a, acc

    @njit(cache=True)
    def _norm_nb(a):
        d = a.shape[0]
        total = 0.0
        for n in range(d):
            total += (a[n, 0].real ** 2 + a[n, 0].imag ** 2
                      + a[n, 1].real ** 2 + a[n, 1].imag ** 2
                      + a[n, 2].real ** 2 + a[n, 2].imag ** 2
                      + a[n, 3].real ** 2 + a[n, 3].imag ** 2)
        return np.sqrt(total)

    @njit(cache=True)
    def _evolve_recycled_normscan_nb(amps, steps, c, s):
        a = amps.copy()
        b = np.empty_like(a)
        prev = _norm_nb(a)
        drift = 0.0
        for _ in range(steps):
            _step_recycled_nb(a, b, c, s)
            a, b = b, a
            norm = _norm_nb(a)
            delta = abs(norm - prev)
            if delta > drift:
                drift = delta
            prev = norm
        return a, drift, prev

    @njit(cache=True)
    def _evolve_memory_normscan_nb(amps, steps):
        a = amps.copy()
        b = np.empty_like(a)
        prev = _norm_nb(a)
        drift = 0.0
        for _ in range(steps):
            _step_memory_nb(a, b)
            a, b = b, a
            norm = _norm_nb(a)
            delta = abs(norm - prev)
            if delta > drift:
                drift = delta
            prev = norm
        return a, drift, prev

    _NUMBA_IMPL = {
        "evolve_recycled": _evolve_recycled_nb,
        "evolve_memory": _evolve_memory_nb,
        "evolve_recycled_accumulate": _evolve_recycled_accumulate_nb,
        "evolve_memory_accumulate": _evolve_memory_accumulate_nb,
        "evolve_recycled_normscan": _evolve_recycled_normscan_nb,
        "evolve_memory_normscan": _evolve_memory_normscan_nb,
    }
else:
    _NUMBA_IMPL = None


def available_backends():
    backends = ["numpy"]
    if HAS_NUMBA:
        backends.insert(0, "numba")
    return backends


def _resolve_backend():
    requested = os.environ.get("CYCLEWALK_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not HAS_NUMBA:
            raise ImportError(
                "CYCLEWALK_BACKEND=numba requested but numba is not installed")
        return "numba"
    if requested:
        raise ValueError(
            "unknown CYCLEWALK_BACKEND %r (expected 'numba' or 'numpy')"
            % requested)
    return "numba" if HAS_NUMBA else "numpy"


def get_impl(backend):
    """Return the kernel table for an explicit backend name."""
    if backend == "numpy":
        return _NUMPY_IMPL
    if backend == "numba":
        if _NUMBA_IMPL is None:
            raise ImportError("numba backend unavailable")
        return _NUMBA_IMPL
    raise ValueError("unknown backend %r" % backend)


BACKEND = _resolve_backend()
_impl = get_impl(BACKEND)

evolve_recycled = _impl["evolve_recycled"]
evolve_memory = _impl["evolve_memory"]
evolve_recycled_accumulate = _impl["evolve_recycled_accumulate"]
evolve_memory_accumulate = _impl["evolve_memory_accumulate"]
evolve_recycled_normscan = _impl["evolve_recycled_normscan"]
evolve_memory_normscan = _impl["evolve_memory_normscan"]
