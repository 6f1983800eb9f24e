"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``chaos_orbit``, ``splat``, ``directed_hausdorff``) dispatch
on :data:`affine_ifs._accel.USE_NUMBA`. Both flavours are importable directly
(``*_nb`` / ``*_np``) so tests and benchmarks can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# -- chaos-game orbit ---------------------------------------------------------


@njit
def chaos_orbit_nb(linears, offsets, idx, x0, limit):
    """Apply ``f_{idx[0]}``, ``f_{idx[1]}``, ... to ``x0`` in turn.

    Returns ``(out, bad)`` where ``out[j]`` is the state after step ``j`` and
    ``bad`` is the first step whose state left the box ``|coord| <= limit``
    (or ``-1``). Rows from ``bad`` on are left unset.
    """
    n = idx.shape[0]
    out = np.empty((n, 2))
    x = x0[0]
    y = x0[1]
    for j in range(n):
        i = idx[j]
        nx = linears[i, 0, 0] * x + linears[i, 0, 1] * y + offsets[i, 0]
        ny = linears[i, 1, 0] * x + linears[i, 1, 1] * y + offsets[i, 1]
        x = nx
        y = ny
        if not (abs(x) <= limit and abs(y) <= limit):
            return out, j
        out[j, 0] = x
        out[j, 1] = y
    return out, -1


def chaos_orbit_np(linears, offsets, idx, x0, limit, block=2048):
    """Numpy version of :func:`chaos_orbit_nb`.

    Inside each block the prefix compositions ``f_{idx[j]} o ... o f_{idx[0]}``
    are built with a log-depth (Hillis-Steele) scan and applied to the block's
    starting state, so results match the sequential loop to rounding only.
    """
    idx = np.asarray(idx, dtype=np.int64)
    n = idx.shape[0]
    out = np.empty((n, 2))
    x = np.asarray(x0, dtype=float).copy()
    # diverging orbits overflow to inf/nan, which the box test below treats as escaped
    with np.errstate(over="ignore", invalid="ignore"):
        for start in range(0, n, block):
            sl = idx[start:start + block]
            L = linears[sl].copy()
            o = offsets[sl].copy()
            s = 1
            while s < len(sl):
                # cur[j] o cur[j - s] for j >= s
                o[s:] = np.einsum("jab,jb->ja", L[s:], o[:-s]) + o[s:]
                L[s:] = L[s:] @ L[:-s]
                s *= 2
            pts = np.einsum("jab,b->ja", L, x) + o
            bad = ~(np.abs(pts) <= limit).all(axis=1)
            if bad.any():
                first = int(np.argmax(bad))
                out[start:start + first] = pts[:first]
                return out, start + first
            out[start:start + len(sl)] = pts
            x = pts[-1]
    return out, -1


# -- Markov push-forward on a grid -------------------------------------------


@njit
def splat_nb(dest, weights, probs, mass):
    """Push ``mass`` forward through precomputed transfer tables.

    ``dest[i, c, q]`` is the target cell of source ``c`` under map ``i`` for
    deposit slot ``q`` (``-1`` means outside the grid); ``weights`` gives the
    fraction sent through each slot. Returns ``(new_mass, escaped)``.
    """
    nmaps, ncells, nslots = dest.shape
    new = np.zeros(ncells)
    escaped = 0.0
    for i in range(nmaps):
        p = probs[i]
        for c in range(ncells):
            w = mass[c]
            if w == 0.0:
                continue
            pw = p * w
            for q in range(nslots):
                d = dest[i, c, q]
                if d >= 0:
                    new[d] += pw * weights[i, c, q]
                else:
                    escaped += pw * weights[i, c, q]
    return new, escaped


def splat_np(dest, weights, probs, mass):
    nmaps, ncells, nslots = dest.shape
    new = np.zeros(ncells)
    escaped = 0.0
    for i in range(nmaps):
        d = dest[i].ravel()
        w = (probs[i] * mass[:, None] * weights[i]).ravel()
        inside = d >= 0
        new += np.bincount(d[inside], weights=w[inside], minlength=ncells)
        escaped += float(w[~inside].sum())
    return new, escaped


# -- brute-force directed Hausdorff distance ---------------------------------


@njit
def directed_hausdorff_nb(a, b):
    """``max_{x in a} min_{y in b} |x - y|`` by exhaustive search."""
    worst = 0.0
    for i in range(a.shape[0]):
        ax = a[i, 0]
        ay = a[i, 1]
        best = np.inf
        for j in range(b.shape[0]):
            dx = ax - b[j, 0]
            dy = ay - b[j, 1]
            d = dx * dx + dy * dy
            if d < best:
                best = d
                # cannot raise the running max any more
                if best <= worst:
                    break
        if best > worst:
            worst = best
    return np.sqrt(worst)


def directed_hausdorff_np(a, b, chunk=4096):
    worst = 0.0
    for start in range(0, a.shape[0], chunk):
        blk = a[start:start + chunk]
        d = ((blk[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(d.min(axis=1).max()))
    return float(np.sqrt(worst))


if USE_NUMBA:
    chaos_orbit = chaos_orbit_nb
    splat = splat_nb
    directed_hausdorff = directed_hausdorff_nb
else:
    chaos_orbit = chaos_orbit_np
    splat = splat_np
    directed_hausdorff = directed_hausdorff_np
