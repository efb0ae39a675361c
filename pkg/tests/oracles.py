"""Independent reference implementations used only by the tests.

Nothing here shares code with the package's evolution or limiting
paths.  The steppers build the full 4d x 4d one-step unitary from its
operator-product definition and multiply state vectors; the limiting
oracle runs the naive O((4d)^2) double loop over eigenvalue pairs with
a pairwise phase test and evaluates each complex exponential directly.
Slow on purpose; keep d and t small.
"""

import numpy as np


def _coin_2x2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]], dtype=np.complex128)


def dense_recycled_operator(d, phi):
    """(4d, 4d) one-step unitary: coin swap . shift . block coin."""
    theta = np.pi * (1.0 + phi % 8.0) / 4.0
    coin = np.zeros((4, 4), dtype=np.complex128)
    coin[:2, :2] = _coin_2x2(np.pi / 4)
    coin[2:, 2:] = _coin_2x2(theta)
    dim = 4 * d
    coin_full = np.kron(np.eye(d), coin)
    shift = np.zeros((dim, dim), dtype=np.complex128)
    for n in range(d):
        for comp in range(4):
            # component index is 2*c1 + c2; c2 steers the shift
            target = (n - 1) % d if comp % 2 == 0 else (n + 1) % d
            shift[4 * target + comp, 4 * n + comp] = 1.0
    swap = np.zeros((4, 4), dtype=np.complex128)
    for c1 in range(2):
        for c2 in range(2):
            swap[2 * c2 + c1, 2 * c1 + c2] = 1.0
    swap_full = np.kron(np.eye(d), swap)
    return swap_full @ shift @ coin_full


def dense_memory_operator(d):
    """(4d, 4d) one-step unitary: conditional shift . Hadamard on coin.

    Per-site components are ordered (coin, memory), index 2*c + m.
    The shift moves right when coin and memory disagree, left when
    they agree, writes the direction taken into memory (up = right)
    and leaves the coin untouched.
    """
    dim = 4 * d
    coin_full = np.kron(np.eye(d),
                        np.kron(_coin_2x2(np.pi / 4), np.eye(2)))
    shift = np.zeros((dim, dim), dtype=np.complex128)
    # (c, m) -> (n offset, c', m'): the four shift rules
    rules = {(0, 0): (-1, 0, 0), (1, 0): (+1, 1, 1),
             (0, 1): (+1, 0, 1), (1, 1): (-1, 1, 0)}
    for n in range(d):
        for (c, m), (off, c2, m2) in rules.items():
            shift[4 * ((n + off) % d) + 2 * c2 + m2, 4 * n + 2 * c + m] = 1.0
    return shift @ coin_full


def dense_evolve(amps, operator, steps):
    """Apply the dense one-step matrix to a (d, 4) table, steps times."""
    v = np.asarray(amps, dtype=np.complex128).reshape(-1)
    for _ in range(steps):
        v = operator @ v
    return v.reshape(-1, 4)


def dense_distribution(amps):
    return np.sum(np.abs(np.asarray(amps)) ** 2, axis=1)


# ---------------------------------------------------------------------------
# Naive spectral route

def _mk(k, d, theta):
    x = np.exp(2j * np.pi * k / d)
    y = np.conj(x)
    c, s = np.cos(theta), np.sin(theta)
    r = 1 / np.sqrt(2)
    return np.array([[x * r, x * r, 0, 0],
                     [0, 0, x * c, x * s],
                     [y * r, -y * r, 0, 0],
                     [0, 0, y * s, -y * c]], dtype=np.complex128)


def _nk(k, d):
    x = np.exp(2j * np.pi * k / d)
    y = np.conj(x)
    r = 1 / np.sqrt(2)
    return np.array([[x, 0, x, 0],
                     [0, y, 0, y],
                     [0, x, 0, -x],
                     [y, 0, -y, 0]], dtype=np.complex128) * r


def _phase_close(la, lb, tol):
    dphi = abs(np.angle(la) - np.angle(lb))
    return min(dphi, 2 * np.pi - dphi) <= tol


def _mgs_orthonormalize(vectors):
    """Modified Gram-Schmidt on the columns, in place."""
    m = vectors.shape[1]
    for i in range(m):
        for j in range(i):
            vectors[:, i] -= (vectors[:, j].conj() @ vectors[:, i]) \
                * vectors[:, j]
        vectors[:, i] /= np.sqrt(np.sum(np.abs(vectors[:, i]) ** 2))
    return vectors


def _eig_orthonormal(mat, tol):
    lams, vecs = np.linalg.eig(mat)
    # greedy pairwise grouping of equal-phase eigenvalues
    groups = []
    for i in range(4):
        for g in groups:
            if _phase_close(lams[i], lams[g[0]], tol):
                g.append(i)
                break
        else:
            groups.append([i])
    for g in groups:
        if len(g) > 1:
            vecs[:, g] = _mgs_orthonormalize(vecs[:, g])
    return lams, vecs


def naive_limiting(d, psi0, phi=None, tol=1e-9):
    """Limiting distribution by the full double loop over (k,j),(m,l).

    phi=None selects the memory-walk blocks.  Start is position 0 with
    coin vector psi0.
    """
    psi0 = np.asarray(psi0, dtype=np.complex128)
    lam = np.empty((d, 4), dtype=np.complex128)
    vec = np.empty((d, 4, 4), dtype=np.complex128)
    for k in range(d):
        if phi is None:
            mat = _nk(k, d)
        else:
            mat = _mk(k, d, np.pi * (1.0 + phi % 8.0) / 4.0)
        lam[k], vec[k] = _eig_orthonormal(mat, tol)
    alpha = np.empty((d, 4), dtype=np.complex128)
    for k in range(d):
        for j in range(4):
            alpha[k, j] = vec[k][:, j].conj() @ psi0
    pbar = np.zeros(d, dtype=np.complex128)
    for k in range(d):
        for j in range(4):
            for m in range(d):
                for el in range(4):
                    if not _phase_close(lam[k, j], lam[m, el], tol):
                        continue
                    ov = vec[k][:, j].conj() @ vec[m][:, el]
                    coef = np.conj(alpha[k, j]) * alpha[m, el] * ov
                    for n in range(d):
                        pbar[n] += coef * np.exp(2j * np.pi * n * (m - k) / d)
    pbar /= d * d
    assert np.abs(pbar.imag).max() < 1e-8
    return np.clip(pbar.real, 0.0, None)
