"""Momentum-space route to exact probabilities and limiting distributions.

A translation-invariant walk on the d-cycle block-diagonalizes under
the discrete Fourier transform of the position register into d unitary
4x4 blocks, one per momentum k.  For the recycled-coin walk the block
is M_k(theta); for the memory walk it is N_k.  With a walker starting
localized at position 0 with coin vector psi, and writing lam_j(k),
phi_j(k) for the block eigensystems and alpha_j(k) = <phi_j(k)|psi>,
the exact probability is a quadruple sum over (k, j), (m, l) with time
entering only through (lam_j(k)* lam_l(m))^t.

Time-averaging kills every pair whose eigenvalues differ and keeps the
rest, so the limiting (Cesaro) distribution is the same sum restricted
to pairs with equal eigenvalues.  Equality is decided by clustering
the 4d eigenvalue phases with an absolute tolerance; clusters whose
internal or neighboring gaps sit near the tolerance are reported via
DegenerateClusterWarning because the pair selection is then ambiguous.

Pair enumeration is organized per cluster.  The diagonal pairs (every
eigenvalue matches itself) contribute exactly the uniform distribution,
so they are accumulated in one vectorized pass and only clusters of
size >= 2 are walked for cross terms.  A naive full double loop over
all (4d)^2 pairs must produce identical results; the test suite holds
the two routes together.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .walk import CoinConfig, Distribution, InitialState, _as_coin4

#: Two eigenvalues are treated as equal when their phases differ by
#: less than this (radians, after unwrapping across the branch cut).
PHASE_TOL = 1e-9

_UNITARITY_TOL = 1e-10
_IMAG_TOL = 1e-8
_SQ2 = 1.0 / np.sqrt(2.0)


class DegenerateClusterWarning(UserWarning):
    """Eigenvalue phase gaps near the matching tolerance."""


def _check_k(k: int, d: int):
    if d < 2:
        raise ValueError("cycle length d must be >= 2, got %d" % d)
    if not 0 <= k < d:
        raise ValueError("momentum index k=%d outside 0..%d" % (k, d - 1))


@dataclass(frozen=True)
class FourierBlock:
    """4x4 momentum block of the recycled-coin walk."""

    k: int
    d: int
    theta: float
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class MemoryFourierBlock:
    """4x4 momentum block of the memory walk."""

    k: int
    d: int
    matrix: np.ndarray = field(repr=False)


def _mk_matrix(x: complex, theta: float) -> np.ndarray:
    y = np.conj(x)
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [x * _SQ2, x * _SQ2, 0.0, 0.0],
        [0.0, 0.0, x * c, x * s],
        [y * _SQ2, -y * _SQ2, 0.0, 0.0],
        [0.0, 0.0, y * s, -y * c],
    ], dtype=np.complex128)


def _nk_matrix(x: complex) -> np.ndarray:
    y = np.conj(x)
    return np.array([
        [x, 0.0, x, 0.0],
        [0.0, y, 0.0, y],
        [0.0, x, 0.0, -x],
        [y, 0.0, -y, 0.0],
    ], dtype=np.complex128) * _SQ2


def build_Mk(k: int, d: int, cfg: CoinConfig) -> FourierBlock:
    """Recycled-coin block at momentum k with second-coin angle from cfg."""
    _check_k(k, d)
    x = np.exp(2j * np.pi * k / d)
    return FourierBlock(k=k, d=d, theta=cfg.theta,
                        matrix=_mk_matrix(x, cfg.theta))


def build_Nk(k: int, d: int) -> MemoryFourierBlock:
    """Memory-walk block at momentum k."""
    _check_k(k, d)
    x = np.exp(2j * np.pi * k / d)
    return MemoryFourierBlock(k=k, d=d, matrix=_nk_matrix(x))


def _block_stack_recycled(d: int, theta: float) -> np.ndarray:
    xs = np.exp(2j * np.pi * np.arange(d) / d)
    mats = np.zeros((d, 4, 4), dtype=np.complex128)
    c, s = np.cos(theta), np.sin(theta)
    mats[:, 0, 0] = xs * _SQ2
    mats[:, 0, 1] = xs * _SQ2
    mats[:, 1, 2] = xs * c
    mats[:, 1, 3] = xs * s
    mats[:, 2, 0] = xs.conj() * _SQ2
    mats[:, 2, 1] = -xs.conj() * _SQ2
    mats[:, 3, 2] = xs.conj() * s
    mats[:, 3, 3] = -xs.conj() * c
    return mats


def _block_stack_memory(d: int) -> np.ndarray:
    xs = np.exp(2j * np.pi * np.arange(d) / d)
    mats = np.zeros((d, 4, 4), dtype=np.complex128)
    mats[:, 0, 0] = xs
    mats[:, 0, 2] = xs
    mats[:, 1, 1] = xs.conj()
    mats[:, 1, 3] = xs.conj()
    mats[:, 2, 1] = xs
    mats[:, 2, 3] = -xs
    mats[:, 3, 0] = xs.conj()
    mats[:, 3, 2] = -xs.conj()
    return mats * _SQ2


# ---------------------------------------------------------------------------
# Eigensystems

def _phase_clusters(phases: np.ndarray, tol: float):
    """Group indices whose phases agree within tol.

    Phases live on (-pi, pi]; sorting plus gap splitting handles the
    interior and the first/last clusters are merged when they meet
    across the branch cut.  Returns (clusters, ambiguous_gaps) where
    ambiguous_gaps lists gap sizes within a decade of tol on either
    side; such gaps make the equal/not-equal call unreliable.
    """
    order = np.argsort(phases, kind="stable")
    sp = phases[order]
    gaps = np.diff(sp)
    clusters = np.split(order, np.nonzero(gaps > tol)[0] + 1)
    wrap_gap = 2.0 * np.pi - (sp[-1] - sp[0]) if len(sp) > 1 else np.inf
    if len(clusters) > 1 and wrap_gap <= tol:
        clusters[0] = np.concatenate([clusters[-1], clusters[0]])
        clusters.pop()
    all_gaps = np.append(gaps, wrap_gap)
    band = (all_gaps >= 0.1 * tol) & (all_gaps <= 10.0 * tol)
    return clusters, sorted(all_gaps[band].tolist())


def _warn_ambiguous(gaps, tol, context):
    if gaps:
        warnings.warn(
            "%s: %d eigenvalue phase gap(s) within a decade of the matching "
            "tolerance %g (smallest %.3g); equal-eigenvalue pairing may be "
            "ambiguous" % (context, len(gaps), tol, gaps[0]),
            DegenerateClusterWarning, stacklevel=3)


def _check_unitary(mat: np.ndarray):
    dev = np.abs(mat.conj().T @ mat - np.eye(4)).max()
    if dev > _UNITARITY_TOL:
        raise ValueError("block is not unitary (deviation %.3g)" % dev)


def _orthonormalize_degenerate(lams: np.ndarray, vecs: np.ndarray,
                               tol: float) -> list:
    """Replace eigenvectors inside each equal-phase group by a QR basis.

    vecs holds eigenvectors in columns and is modified in place.  eig
    does not orthogonalize within degenerate subspaces, and the pair
    sums assume <phi_j|phi_l> = delta_jl inside a block.  Returns the
    ambiguous gap list for the caller to report.
    """
    clusters, ambiguous = _phase_clusters(np.angle(lams), tol)
    for cl in clusters:
        if cl.size > 1:
            q, _ = np.linalg.qr(vecs[:, cl])
            vecs[:, cl] = q
    return ambiguous


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues and orthonormal eigenvectors of one momentum block.

    eigenvectors[:, j] belongs to eigenvalues[j].  theta is None for
    memory-walk blocks.
    """

    k: int
    d: int
    theta: float | None
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)


def eigensystem(block, tol: float = PHASE_TOL) -> EigenSystem:
    """Diagonalize one 4x4 unitary block.

    Accepts a FourierBlock, a MemoryFourierBlock or a plain unitary
    (4, 4) array.  Degenerate eigenvector groups come back orthonormal.
    """
    if isinstance(block, FourierBlock):
        k, d, theta, mat = block.k, block.d, block.theta, block.matrix
    elif isinstance(block, MemoryFourierBlock):
        k, d, theta, mat = block.k, block.d, None, block.matrix
    else:
        mat = np.asarray(block, dtype=np.complex128)
        if mat.shape != (4, 4):
            raise ValueError("expected a (4, 4) block, got %s" % (mat.shape,))
        k, d, theta = 0, 0, None
    _check_unitary(mat)
    lams, vecs = np.linalg.eig(mat)
    ambiguous = _orthonormalize_degenerate(lams, vecs, tol)
    _warn_ambiguous(ambiguous, tol, "block k=%d" % k)
    moddev = np.abs(np.abs(lams) - 1.0).max()
    if moddev > _UNITARITY_TOL:
        raise RuntimeError("eigenvalue left the unit circle by %.3g" % moddev)
    return EigenSystem(k=k, d=d, theta=theta,
                       eigenvalues=lams, eigenvectors=vecs)


@dataclass(frozen=True)
class SpectralCache:
    """Eigensystems of all d blocks plus overlaps with one start state.

    eigenvalues has shape (d, 4); eigenvectors (d, 4, 4) with vectors
    in columns; alphas[k, j] = <phi_j(k)|psi>.  theta is None for the
    memory walk.
    """

    d: int
    theta: float | None
    coin4: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    alphas: np.ndarray = field(repr=False)


def _coin4_or_initial(psi) -> np.ndarray:
    # The Fourier route hard-codes the start at position 0; the phase
    # bookkeeping below is only valid there.
    if isinstance(psi, InitialState):
        if psi.position != 0:
            raise ValueError("spectral route requires the walk to start at "
                             "position 0, got position %d" % psi.position)
        return np.asarray(psi.coin4)
    return _as_coin4(psi)


def _build_cache(d: int, theta: float | None, mats: np.ndarray,
                 psi0: np.ndarray, tol: float) -> SpectralCache:
    utu = np.einsum("kji,kjl->kil", mats.conj(), mats)
    dev = np.abs(utu - np.eye(4)).max()
    if dev > _UNITARITY_TOL:
        raise RuntimeError("momentum block lost unitarity (%.3g)" % dev)
    lams, vecs = np.linalg.eig(mats)
    for k in range(d):
        ambiguous = _orthonormalize_degenerate(lams[k], vecs[k], tol)
        _warn_ambiguous(ambiguous, tol, "block k=%d" % k)
    alphas = np.einsum("kij,i->kj", vecs.conj(), psi0)
    return SpectralCache(d=d, theta=theta, coin4=psi0.copy(),
                         eigenvalues=lams, eigenvectors=vecs, alphas=alphas)


def spectral_cache(d: int, cfg: CoinConfig, psi,
                   tol: float = PHASE_TOL) -> SpectralCache:
    """Diagonalize all recycled-coin blocks for one (d, phi, start) cell."""
    if d < 2:
        raise ValueError("cycle length d must be >= 2, got %d" % d)
    psi0 = _coin4_or_initial(psi)
    return _build_cache(d, cfg.theta, _block_stack_recycled(d, cfg.theta),
                        psi0, tol)


def spectral_cache_memory(d: int, psi,
                          tol: float = PHASE_TOL) -> SpectralCache:
    """Memory-walk analogue of spectral_cache."""
    if d < 2:
        raise ValueError("cycle length d must be >= 2, got %d" % d)
    psi0 = _coin4_or_initial(psi)
    return _build_cache(d, None, _block_stack_memory(d), psi0, tol)


def cache_with_state(cache: SpectralCache, psi) -> SpectralCache:
    """Rebind a cache to a new start coin, reusing the diagonalization."""
    psi0 = _coin4_or_initial(psi)
    alphas = np.einsum("kij,i->kj", cache.eigenvectors.conj(), psi0)
    return SpectralCache(d=cache.d, theta=cache.theta, coin4=psi0.copy(),
                         eigenvalues=cache.eigenvalues,
                         eigenvectors=cache.eigenvectors, alphas=alphas)


def _cache_matches(cache: SpectralCache, d: int, theta: float | None,
                   psi0: np.ndarray):
    if cache.d != d:
        raise ValueError("cache built for d=%d, asked for d=%d" % (cache.d, d))
    if (cache.theta is None) != (theta is None) or (
            theta is not None and abs(cache.theta - theta) > 1e-15):
        raise ValueError("cache built for a different coin angle")
    if not np.allclose(cache.coin4, psi0, atol=1e-12, rtol=0.0):
        raise ValueError("cache built for a different initial coin state")


def _flatten(cache: SpectralCache):
    d = cache.d
    lam = cache.eigenvalues.reshape(-1)
    # Row K = 4k + j is eigenvector j of block k.
    vflat = cache.eigenvectors.transpose(0, 2, 1).reshape(-1, 4)
    aflat = cache.alphas.reshape(-1)
    kk = np.repeat(np.arange(d), 4)
    return lam, vflat, aflat, kk


def _probs_from_z(z: np.ndarray, d: int) -> np.ndarray:
    # p(n) = (1/d^2) sum_c z[c] e^{2 pi i n c / d}, evaluated with the
    # exact d-th roots so repeated runs are bit-identical.
    roots = np.exp(2j * np.pi * np.arange(d) / d)
    vals = roots[np.outer(np.arange(d), np.arange(d)) % d] @ z / (d * d)
    imag = np.abs(vals.imag).max()
    if imag > _IMAG_TOL:
        raise RuntimeError("probability reconstruction left the real axis "
                           "by %.3g" % imag)
    return np.clip(vals.real, 0.0, None)


def closed_form_distribution(t: int, cfg: CoinConfig, psi, d: int | None = None,
                             cache: SpectralCache | None = None) -> Distribution:
    """Exact position distribution at step t from the Fourier sum.

    Pass d, or a cache from spectral_cache to amortize diagonalization
    over many t.  The start must be localized at position 0.
    """
    if t < 0:
        raise ValueError("time step must be >= 0, got %d" % t)
    psi0 = _coin4_or_initial(psi)
    if cache is None:
        if d is None:
            raise ValueError("need either d or a SpectralCache")
        cache = spectral_cache(d, cfg, psi0)
    else:
        _cache_matches(cache, cache.d if d is None else d, cfg.theta, psi0)
    d = cache.d
    lam, vflat, aflat, kk = _flatten(cache)
    gram = vflat.conj() @ vflat.T
    tpow = (lam.conj()[:, None] * lam[None, :]) ** t
    w = (aflat.conj()[:, None] * aflat[None, :]) * gram * tpow
    z = np.zeros(d, dtype=np.complex128)
    np.add.at(z, (kk[None, :] - kk[:, None]) % d, w)
    return Distribution(d=d, probs=_probs_from_z(z, d))


def closed_form_probability(n: int, t: int, cfg: CoinConfig, psi,
                            d: int | None = None,
                            cache: SpectralCache | None = None) -> float:
    """p(n, t) from the Fourier sum; see closed_form_distribution."""
    dist = closed_form_distribution(t, cfg, psi, d=d, cache=cache)
    if not 0 <= n < dist.d:
        raise ValueError("position %d outside cycle of length %d" % (n, dist.d))
    return float(dist.probs[n])


def _limiting_probs(cache: SpectralCache, tol: float) -> np.ndarray:
    d = cache.d
    lam, vflat, aflat, kk = _flatten(cache)
    z = np.zeros(d, dtype=np.complex128)
    # Every eigenvalue matches itself; these diagonal pairs sum to the
    # uniform distribution (sum_K |alpha_K|^2 = d by completeness).
    z[0] = np.sum(np.abs(aflat) ** 2)
    clusters, ambiguous = _phase_clusters(np.angle(lam), tol)
    _warn_ambiguous(ambiguous, tol, "d=%d limiting distribution" % d)
    for cl in clusters:
        if cl.size < 2:
            continue
        v = vflat[cl]
        a = aflat[cl]
        w = (a.conj()[:, None] * a[None, :]) * (v.conj() @ v.T)
        np.fill_diagonal(w, 0.0)
        np.add.at(z, (kk[cl][None, :] - kk[cl][:, None]) % d, w)
    return _probs_from_z(z, d)


def limiting_distribution(cfg: CoinConfig, d: int, psi,
                          cache: SpectralCache | None = None,
                          tol: float = PHASE_TOL) -> Distribution:
    """Time-averaged (Cesaro) distribution of the recycled-coin walk.

    Keeps exactly the pairs with equal eigenvalues, as decided by phase
    clustering at tol.  Start must be localized at position 0.
    """
    psi0 = _coin4_or_initial(psi)
    if cache is None:
        cache = spectral_cache(d, cfg, psi0, tol)
    else:
        _cache_matches(cache, d, cfg.theta, psi0)
    return Distribution(d=d, probs=_limiting_probs(cache, tol))


def limiting_distribution_memory(d: int, psi,
                                 cache: SpectralCache | None = None,
                                 tol: float = PHASE_TOL) -> Distribution:
    """Time-averaged distribution of the memory walk."""
    psi0 = _coin4_or_initial(psi)
    if cache is None:
        cache = spectral_cache_memory(d, psi0, tol)
    else:
        _cache_matches(cache, d, None, psi0)
    return Distribution(d=d, probs=_limiting_probs(cache, tol))


# ---------------------------------------------------------------------------
# Spectrum comparisons

def eigenvalue_multiset_distance(a, b) -> float:
    """Greedy nearest-neighbor matching distance between two multisets."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = list(np.asarray(b, dtype=np.complex128).ravel())
    if len(a) != len(b):
        raise ValueError("multisets differ in size: %d vs %d"
                         % (len(a), len(b)))
    worst = 0.0
    for val in a:
        dists = [abs(val - other) for other in b]
        i = int(np.argmin(dists))
        worst = max(worst, dists[i])
        b.pop(i)
    return worst


def memory_spectrum_mismatch(d: int) -> float:
    """Worst per-k distance between eig(N_k) and eig(M_k(3 pi / 4)).

    The memory-walk block is unitarily equivalent to the recycled-coin
    block at phi = 2, so this should vanish to rounding error.
    """
    ms = _block_stack_recycled(d, CoinConfig(2.0).theta)
    ns = _block_stack_memory(d)
    lam_m = np.linalg.eigvals(ms)
    lam_n = np.linalg.eigvals(ns)
    return max(eigenvalue_multiset_distance(lam_n[k], lam_m[k])
               for k in range(d))
