"""Independent estimates of the 2x2 spectral norm, for cross-checking the closed form."""

import numpy as np

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _norm_at(a, theta):
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return np.linalg.norm(np.einsum("...ab,...b->...a", a, u), axis=-1)


def sampled_norm(stack, n_dirs: int = 10_000, seed: int = 0, refine: int = 80) -> np.ndarray:
    """``sup_u |A u|`` over random unit vectors, polished by golden-section search.

    ``n_dirs`` random directions locate the maximising angle to within the
    sampling gap; a golden-section search on the bracketing interval then
    pins the maximum value down to rounding (the objective is flat at its
    peak, so the value converges much faster than the angle).
    """
    a = np.asarray(stack, dtype=float).reshape(-1, 2, 2)
    rng = np.random.default_rng(seed)
    # |A u| = |A (-u)|, so half a turn of angles suffices
    theta = np.sort(rng.uniform(0.0, np.pi, n_dirs))
    vals = _norm_at(a[:, None], theta[None, :])
    best = np.argmax(vals, axis=1)
    ext = np.concatenate([[theta[-1] - np.pi], theta, [theta[0] + np.pi]])
    lo = ext[best]
    hi = ext[best + 2]
    for _ in range(refine):
        x1 = hi - _GOLDEN * (hi - lo)
        x2 = lo + _GOLDEN * (hi - lo)
        keep_left = _norm_at(a, x1) >= _norm_at(a, x2)
        hi = np.where(keep_left, x2, hi)
        lo = np.where(keep_left, lo, x1)
    polished = _norm_at(a, 0.5 * (lo + hi))
    return np.maximum(polished, vals.max(axis=1))


def power_iteration_norm(stack, max_iter: int = 200_000, rtol: float = 1e-15, seed: int = 1) -> np.ndarray:
    """``sqrt(lambda_max(A^T A))`` by batched power iteration with a Rayleigh quotient."""
    a = np.asarray(stack, dtype=float).reshape(-1, 2, 2)
    g = np.einsum("nba,nbc->nac", a, a)  # A^T A
    v = np.random.default_rng(seed).normal(size=(a.shape[0], 2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    lam = np.zeros(a.shape[0])
    active = np.ones(a.shape[0], dtype=bool)
    for _ in range(max_iter):
        w = np.einsum("nab,nb->na", g[active], v[active])
        new = np.einsum("na,na->n", v[active], w)
        nrm = np.linalg.norm(w, axis=1)
        nz = nrm > 0
        v_act = v[active]
        v_act[nz] = w[nz] / nrm[nz, None]
        v[active] = v_act
        done = np.abs(new - lam[active]) <= rtol * np.abs(new)
        lam[active] = new
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
    return np.sqrt(np.maximum(lam, 0.0))
