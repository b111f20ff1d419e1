"""Dual-rail lattice, color-class quotient and its convergence to the six-mode state.

The lattice is an open chain of ``n`` unit cells, six modes per cell in the
order (a1, a2, b1, b2, c1, c2). Its covariance is tiled from the six-mode
blocks: every mode carries ``Vblock`` and every signed edge ``+/-Cblock``.
Coloring a mode by its position inside the cell and averaging each color
class is a congruence ``(1/n) A Sigma A^T``; it acts on covariances only,
there is no corresponding linear map on quadratures.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from . import _kernels
from .gaussian import PHYS_TOL, PhysicalityError, symplectic_spectrum
from .states import SIX_MODE_ADJACENCY, six_mode_blocks, six_mode_from_adjacency

MODES_PER_CELL = 6
AC_PAIRS = ((0, 4), (0, 5), (1, 4), (1, 5))


@dataclass(frozen=True)
class DualRailLattice:
    n_cells: int
    spec: object
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    vals: np.ndarray = field(repr=False)

    @property
    def n_modes(self):
        return MODES_PER_CELL * self.n_cells

    def sparse(self):
        dim = 2 * self.n_modes
        m = scipy.sparse.coo_matrix((self.vals, (self.rows, self.cols)), shape=(dim, dim))
        return m.tocsr()

    @property
    def cm(self):
        """Dense covariance; 12n x 12n, so keep n modest."""
        return self.sparse().toarray()


@dataclass(frozen=True)
class ColorPartition:
    classes: tuple

    def colors(self):
        n = sum(len(c) for c in self.classes)
        out = np.empty(n, dtype=np.int64)
        for color, members in enumerate(self.classes):
            out[np.asarray(members)] = color
        return out


def dual_rail_edges(n_cells):
    """Signed edge list ``(u, v, sign)`` of the open dual-rail chain."""
    edges = []
    for m in range(n_cells):
        for i, j, s in _kernels.INTRA_EDGES:
            edges.append((6 * m + int(i), 6 * m + int(j), int(s)))
        if m + 1 < n_cells:
            for i, j, s in _kernels.INTER_EDGES:
                edges.append((6 * m + int(i), 6 * (m + 1) + int(j), int(s)))
    return edges


def dual_rail_adjacency(n_cells):
    """Real signed adjacency matrix (6n x 6n) of the lattice."""
    z = np.zeros((6 * n_cells, 6 * n_cells))
    for u, v, s in dual_rail_edges(n_cells):
        z[u, v] = z[v, u] = s
    return z


def _lattice_graph_spectrum(n_cells):
    # The adjacency is banded (bandwidth 3) in cell-major order.
    n = 6 * n_cells
    bw = 3
    band = np.zeros((bw + 1, n))
    for u, v, s in dual_rail_edges(n_cells):
        i, j = min(u, v), max(u, v)
        band[bw + i - j, j] = s
    return scipy.linalg.eig_banded(band, lower=False, eigvals_only=True)


def lattice_symplectic_spectrum(lattice):
    """Symplectic eigenvalues of the lattice, descending, without forming the dense matrix.

    Both quadrature blocks are polynomials in the signed adjacency ``G``, so
    each eigenvalue ``g`` of ``G`` gives ``nu^2 = (vx + cx g)(vp + cp g)``.
    """
    blocks = six_mode_blocks(lattice.spec)
    vx, vp = np.diag(blocks.Vblock)
    cx, cp = np.diag(blocks.Cblock)
    g = _lattice_graph_spectrum(lattice.n_cells)
    fx = vx + cx * g
    fp = vp + cp * g
    if np.any(fx <= 0) or np.any(fp <= 0):
        raise PhysicalityError("lattice covariance is not positive definite")
    return np.sort(np.sqrt(fx * fp))[::-1]


def build_dual_rail(n_cells, spec, check=True):
    """Tile the dual-rail covariance for ``n_cells`` cells."""
    if n_cells < 1:
        raise ValueError(f"need at least one cell, got {n_cells}")
    blocks = six_mode_blocks(spec)
    rows, cols, vals = _kernels.lattice_triplets(
        n_cells, np.diag(blocks.Vblock), np.diag(blocks.Cblock))
    lattice = DualRailLattice(int(n_cells), spec, rows, cols, vals)
    if check:
        nu = lattice_symplectic_spectrum(lattice)
        if nu.min() < 1.0 - PHYS_TOL:
            raise PhysicalityError(
                f"dual-rail tiling unphysical: min symplectic eigenvalue {nu.min():.12g}")
    return lattice


def selector_covariance(n_cells):
    """12 x 12n selector: ``A[i, j] = 1`` iff ``j = i (mod 12)``."""
    return np.tile(np.eye(2 * MODES_PER_CELL), (1, n_cells))


def selector_adjacency(n_cells):
    """6 x 6n selector: ``B[i, j] = 1`` iff ``j = i (mod 6)``."""
    return np.tile(np.eye(MODES_PER_CELL), (1, n_cells))


def quotient_covariance(lattice):
    """Average each color class: ``(1/n) A Sigma A^T`` accumulated directly from the triplets."""
    folded = _kernels.fold_triplets(lattice.rows, lattice.cols, lattice.vals,
                                    2 * MODES_PER_CELL)
    out = folded / lattice.n_cells
    return (out + out.T) / 2.0


def quotient_covariance_dense(lattice):
    """Reference path through the explicit selector product."""
    a = selector_covariance(lattice.n_cells)
    return (a @ lattice.cm @ a.T) / lattice.n_cells


def finite_quotient_closed_form(spec, n_cells):
    """Six-mode covariance with the a<->c blocks scaled by (n-1)/n."""
    adj = SIX_MODE_ADJACENCY.copy()
    r = (n_cells - 1) / n_cells
    for i, j in AC_PAIRS:
        adj[i, j] *= r
        adj[j, i] *= r
    return six_mode_from_adjacency(six_mode_blocks(spec), adj)


def quotient_adjacency(z, n_cells):
    """``(1/n) B Z B^T`` for a (possibly complex) 6n x 6n adjacency."""
    z = np.asarray(z)
    if z.shape != (6 * n_cells, 6 * n_cells):
        raise ValueError(f"adjacency must be {6 * n_cells} x {6 * n_cells}, got {z.shape}")
    if not np.allclose(z, z.T):
        raise ValueError("adjacency must be symmetric")
    b = selector_adjacency(n_cells)
    return (b @ z @ b.T) / n_cells


def color_classes(n_cells):
    """Six classes, one per position inside the unit cell."""
    return ColorPartition(tuple(
        np.arange(c, MODES_PER_CELL * n_cells, MODES_PER_CELL) for c in range(MODES_PER_CELL)))


def neighbourhood_preservation_check(lattice, partition):
    """True iff every closed neighbourhood N[v] is colored injectively."""
    colors = np.asarray(partition.colors() if isinstance(partition, ColorPartition) else partition)
    if colors.size != lattice.n_modes:
        raise ValueError("partition does not cover the lattice")
    nbrs = [[v] for v in range(lattice.n_modes)]
    for u, v, _ in dual_rail_edges(lattice.n_cells):
        nbrs[u].append(v)
        nbrs[v].append(u)
    for closed in nbrs:
        c = colors[closed]
        if np.unique(c).size != c.size:
            return False
    return True


def quotient_purity_report(lattice):
    """Determinant and symplectic spectrum of the quotient state."""
    sigma = quotient_covariance(lattice)
    return {"det": float(np.linalg.det(sigma)), "spectrum": symplectic_spectrum(sigma)}
