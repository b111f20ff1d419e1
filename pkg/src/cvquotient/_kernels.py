"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature. Set
``CVQUOTIENT_DISABLE_NUMBA=1`` before import to force the numpy path;
``USE_NUMBA`` reports which path is live.
"""
import os

import numpy as np

_DISABLED = os.environ.get("CVQUOTIENT_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _DISABLED

# Signed edges of one dual-rail unit cell, cell-major mode order
# (a1, a2, b1, b2, c1, c2) -> 0..5.
INTRA_EDGES = np.array(
    [[0, 2, 1], [0, 3, -1], [1, 2, 1], [1, 3, -1],
     [2, 4, 1], [2, 5, -1], [3, 4, 1], [3, 5, -1]],
    dtype=np.int64,
)
# (mode in cell m, mode in cell m+1, sign)
INTER_EDGES = np.array(
    [[4, 0, 1], [4, 1, -1], [5, 0, 1], [5, 1, -1]],
    dtype=np.int64,
)


# ---------------------------------------------------------------- numpy path

def lattice_triplets_np(n_cells, vdiag, cdiag):
    """COO triplets (rows, cols, vals) of the tiled dual-rail covariance."""
    cells = np.arange(n_cells, dtype=np.int64)
    modes = np.arange(6 * n_cells, dtype=np.int64)

    rows = [2 * modes, 2 * modes + 1]
    cols = [2 * modes, 2 * modes + 1]
    vals = [np.full(modes.size, vdiag[0]), np.full(modes.size, vdiag[1])]

    def add_edges(u, v, sign):
        for q in range(2):
            w = sign * cdiag[q]
            rows.extend([2 * u + q, 2 * v + q])
            cols.extend([2 * v + q, 2 * u + q])
            vals.extend([w, w])

    for i, j, s in INTRA_EDGES:
        add_edges(6 * cells + i, 6 * cells + j, float(s) * np.ones(n_cells))
    nxt = cells[:-1]
    for i, j, s in INTER_EDGES:
        add_edges(6 * nxt + i, 6 * (nxt + 1) + j, float(s) * np.ones(nxt.size))

    return (np.concatenate(rows), np.concatenate(cols),
            np.concatenate(vals).astype(np.float64))


def fold_triplets_np(rows, cols, vals, period):
    """Sum triplet values into a period x period matrix by index mod period."""
    out = np.zeros((period, period))
    np.add.at(out, (rows % period, cols % period), vals)
    return out


def product_moments_np(z, chol, d_idx, u_idx, signs, ref):
    """Moments of samples ``x = z @ chol.T`` (one row per signal).

    Returns ``(sum_i sum_p signs[p] x[i, d_idx[p]] x[i, u_idx[p]], sum_i x[i, ref]**2)``.
    """
    x = z @ chol.T
    prod = float(np.sum(signs * np.einsum("ip,ip->p", x[:, d_idx], x[:, u_idx])))
    xr = x[:, ref]
    return prod, float(xr @ xr)


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:

    @njit(cache=True)
    def lattice_triplets_nb(n_cells, vdiag, cdiag):
        n_modes = 6 * n_cells
        n_inter = 0 if n_cells < 1 else n_cells - 1
        nnz = 2 * n_modes + 4 * (8 * n_cells + 4 * n_inter)
        rows = np.empty(nnz, np.int64)
        cols = np.empty(nnz, np.int64)
        vals = np.empty(nnz, np.float64)
        k = 0
        for m in range(n_modes):
            for q in range(2):
                rows[k] = 2 * m + q
                cols[k] = 2 * m + q
                vals[k] = vdiag[q]
                k += 1
        for c in range(n_cells):
            for e in range(INTRA_EDGES.shape[0]):
                u = 6 * c + INTRA_EDGES[e, 0]
                v = 6 * c + INTRA_EDGES[e, 1]
                s = INTRA_EDGES[e, 2]
                for q in range(2):
                    w = s * cdiag[q]
                    rows[k] = 2 * u + q
                    cols[k] = 2 * v + q
                    vals[k] = w
                    rows[k + 1] = 2 * v + q
                    cols[k + 1] = 2 * u + q
                    vals[k + 1] = w
                    k += 2
        for c in range(n_inter):
            for e in range(INTER_EDGES.shape[0]):
                u = 6 * c + INTER_EDGES[e, 0]
                v = 6 * (c + 1) + INTER_EDGES[e, 1]
                s = INTER_EDGES[e, 2]
                for q in range(2):
                    w = s * cdiag[q]
                    rows[k] = 2 * u + q
                    cols[k] = 2 * v + q
                    vals[k] = w
                    rows[k + 1] = 2 * v + q
                    cols[k + 1] = 2 * u + q
                    vals[k + 1] = w
                    k += 2
        return rows, cols, vals

    @njit(cache=True)
    def fold_triplets_nb(rows, cols, vals, period):
        out = np.zeros((period, period))
        for k in range(rows.size):
            out[rows[k] % period, cols[k] % period] += vals[k]
        return out

    @njit(cache=True, nogil=True)
    def product_moments_nb(z, chol, d_idx, u_idx, signs, ref):
        m = chol.shape[0]
        x = np.empty(m)
        prod = 0.0
        sq = 0.0
        for i in range(z.shape[0]):
            for r in range(m):
                acc = 0.0
                for c in range(r + 1):  # chol is lower triangular
                    acc += chol[r, c] * z[i, c]
                x[r] = acc
            for p in range(d_idx.size):
                prod += signs[p] * x[d_idx[p]] * x[u_idx[p]]
            sq += x[ref] * x[ref]
        return prod, sq


def lattice_triplets(n_cells, vdiag, cdiag):
    vdiag = np.ascontiguousarray(vdiag, dtype=np.float64)
    cdiag = np.ascontiguousarray(cdiag, dtype=np.float64)
    if USE_NUMBA:
        return lattice_triplets_nb(int(n_cells), vdiag, cdiag)
    return lattice_triplets_np(int(n_cells), vdiag, cdiag)


def fold_triplets(rows, cols, vals, period):
    if USE_NUMBA:
        return fold_triplets_nb(rows, cols, vals, int(period))
    return fold_triplets_np(rows, cols, vals, int(period))


def product_moments(z, chol, d_idx, u_idx, signs, ref):
    z = np.ascontiguousarray(z, dtype=np.float64)
    chol = np.ascontiguousarray(chol, dtype=np.float64)
    d_idx = np.ascontiguousarray(d_idx, dtype=np.int64)
    u_idx = np.ascontiguousarray(u_idx, dtype=np.int64)
    signs = np.ascontiguousarray(signs, dtype=np.float64)
    if USE_NUMBA:
        prod, sq = product_moments_nb(z, chol, d_idx, u_idx, signs, int(ref))
        return float(prod), float(sq)
    return product_moments_np(z, chol, d_idx, u_idx, signs, int(ref))
