"""Multipartite Gaussian resources built from squeezers and beamsplitters.

Three resources are provided: the symmetric GHZ-like state, the downstream
access network (DAN) state and the six-mode quotient graph state. Impure
squeezers carry extra anti-squeezing noise ``V_N``; that noise is trusted and
can be purified into one ancilla mode per squeezer.
"""
from dataclasses import dataclass

import numpy as np

from .gaussian import quad_indices

GHZ = "ghz"
DAN = "dan"
SIX = "six"
STATE_KINDS = (GHZ, DAN, SIX)

SIX_MODE_LABELS = ("a1", "a2", "b1", "b2", "c1", "c2")

# Signed adjacency of the six-mode quotient graph over (a1, a2, b1, b2, c1, c2).
SIX_MODE_ADJACENCY = np.array([
    [0, 0, 1, -1, 1, 1],
    [0, 0, 1, -1, -1, -1],
    [1, 1, 0, 0, 1, -1],
    [-1, -1, 0, 0, 1, -1],
    [1, -1, 1, 1, 0, 0],
    [1, -1, -1, -1, 0, 0],
], dtype=float)


@dataclass(frozen=True)
class SqueezerSpec:
    """Squeezed variance ``V`` and trusted anti-squeezing excess ``V_N`` (SNU)."""

    V: float
    V_N: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.V <= 1.0):
            raise ValueError(f"squeezed variance V must be in (0, 1], got {self.V}")
        if not np.isfinite(self.V_N) or self.V_N < 0.0:
            raise ValueError(f"V_N must be finite and >= 0, got {self.V_N}")

    @property
    def anti(self):
        """Anti-squeezed variance ``V_N + 1/V``."""
        return self.V_N + 1.0 / self.V


@dataclass(frozen=True)
class PurifiedSqueezer:
    gamma1: float
    gamma2: float
    cm: np.ndarray


@dataclass(frozen=True)
class SixModeBlocks:
    Vblock: np.ndarray
    Cblock: np.ndarray


def squeezed_mode(spec, quadrature="x"):
    """Single-mode covariance ``Diag[V, V_N + 1/V]``; ``quadrature='p'`` swaps the axes."""
    if quadrature == "x":
        return np.diag([spec.V, spec.anti])
    if quadrature == "p":
        return np.diag([spec.anti, spec.V])
    raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")


def beamsplitter_matrix(n_modes, i, j, t):
    """Symplectic matrix of a beamsplitter with transmission ``t`` on modes i, j."""
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"transmission must be in [0, 1], got {t}")
    s = np.eye(2 * n_modes)
    a, b = np.sqrt(t), np.sqrt(1.0 - t)
    for q in range(2):
        ii, jj = 2 * i + q, 2 * j + q
        s[ii, ii] = a
        s[ii, jj] = b
        s[jj, ii] = -b
        s[jj, jj] = a
    return s


def beamsplitter(sigma, i, j, t):
    s = beamsplitter_matrix(np.asarray(sigma).shape[0] // 2, i, j, t)
    return s @ sigma @ s.T


def _permutation(order):
    # output mode k is input mode order[k]
    n = len(order)
    p = np.zeros((2 * n, 2 * n))
    for k, m in enumerate(order):
        p[2 * k, 2 * m] = 1.0
        p[2 * k + 1, 2 * m + 1] = 1.0
    return p


def _block_diag(blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


@dataclass(frozen=True)
class _Network:
    # squeezed quadrature of each input ('x', 'p' or 'vac'), and the passive
    # symplectic acting on the inputs (output relabelling included)
    inputs: tuple
    symplectic: np.ndarray


def _ghz_network():
    s = beamsplitter_matrix(3, 0, 1, 2.0 / 3.0)
    s = beamsplitter_matrix(3, 0, 2, 0.5) @ s
    return _Network(("p", "x", "x"), _permutation([1, 0, 2]) @ s)


def _dan_network():
    s = beamsplitter_matrix(3, 0, 1, 0.5)
    s = beamsplitter_matrix(3, 1, 2, 0.5) @ s
    # pi phase on the two split outputs fixes the sign convention of C_AB
    flip = np.diag([1.0, 1.0, -1.0, -1.0, -1.0, -1.0])
    return _Network(("x", "p", "vac"), flip @ s)


def _six_mode_network():
    # sigma_x = (a+V)/2 I + (a-V)/4 G with G^2 = 4I, so the eigenvectors of G
    # diagonalise both quadrature blocks: eigenvalue +2 carries a p-squeezer,
    # eigenvalue -2 an x-squeezer.
    w, r = np.linalg.eigh(SIX_MODE_ADJACENCY)
    inputs = tuple("p" if ev > 0 else "x" for ev in w)
    return _Network(inputs, np.kron(r, np.eye(2)))


_NETWORKS = {GHZ: _ghz_network, DAN: _dan_network, SIX: _six_mode_network}


def _input_block(spec, orient):
    if orient == "vac":
        return np.eye(2)
    return squeezed_mode(spec, orient)


def _run_network(net, spec):
    cm_in = _block_diag([_input_block(spec, o) for o in net.inputs])
    s = net.symplectic
    return s @ cm_in @ s.T


def ghz_like_closed_form(spec):
    V, VN = spec.V, spec.V_N
    d = np.diag([(1 + 2 * V**2 + V * VN) / (3 * V), (2 + V**2 + 2 * V * VN) / (3 * V)])
    c = np.diag([(V**2 - 1 - V * VN) / (3 * V), (1 - V**2 + V * VN) / (3 * V)])
    return np.block([[d, c, -c], [c, d, c], [-c, c, d]])


def dan_closed_form(spec):
    V, VN = spec.V, spec.V_N
    va = (1 + V**2 + V * VN) / (2 * V) * np.eye(2)
    vb = ((1 + V) ** 2 + V * VN) / (4 * V) * np.eye(2)
    r2 = 2 * np.sqrt(2) * V
    cab = np.diag([(V**2 - 1 - V * VN) / r2, (1 - V**2 + V * VN) / r2])
    cbc = np.diag([-((V - 1) ** 2 + V * VN) / (4 * V), -((1 - V) ** 2 + V * VN) / (4 * V)])
    return np.block([[va, cab, -cab], [cab, vb, cbc], [-cab, cbc, vb]])


def six_mode_blocks(spec):
    """Diagonal and edge blocks of the six-mode graph state.

    Both carry the impurity as ``V * V_N``, so the diagonal equals the mean
    of the squeezed and anti-squeezed variances.
    """
    V, VN = spec.V, spec.V_N
    vblock = (1 + V**2 + V * VN) / (2 * V) * np.eye(2)
    cblock = np.diag([(1 - V**2 + V * VN) / (4 * V), (V**2 - 1 - V * VN) / (4 * V)])
    return SixModeBlocks(vblock, cblock)


def six_mode_from_adjacency(blocks, adjacency):
    """Covariance ``I (x) Vblock + adjacency (x) Cblock``."""
    adjacency = np.asarray(adjacency, dtype=float)
    n = adjacency.shape[0]
    return np.kron(np.eye(n), blocks.Vblock) + np.kron(adjacency, blocks.Cblock)


def build_six_mode(spec):
    """12 x 12 covariance of the six-mode graph state over (a1, a2, b1, b2, c1, c2)."""
    return six_mode_from_adjacency(six_mode_blocks(spec), SIX_MODE_ADJACENCY)


def build_ghz_like(spec):
    """Symmetric GHZ-like state from three squeezers and beamsplitters t=2/3, t=1/2."""
    return _run_network(_ghz_network(), spec)


def build_dan(spec):
    """DAN state: two squeezers and a vacuum through two balanced beamsplitters."""
    return _run_network(_dan_network(), spec)


def build_six_mode_network(spec):
    """Six-mode graph state realised as a passive network on six squeezers."""
    return _run_network(_six_mode_network(), spec)


def build_state(kind, spec):
    if kind == GHZ:
        return build_ghz_like(spec)
    if kind == DAN:
        return build_dan(spec)
    if kind == SIX:
        return build_six_mode(spec)
    raise ValueError(f"unknown state kind {kind!r}")


def purify_squeezer(spec):
    """Two pure squeezers on a balanced beamsplitter whose first output is the impure squeezer.

    The input variances solve ``(G1 + G2)/2 = V`` and ``(1/G1 + 1/G2)/2 = V_N + 1/V``.
    """
    if spec.V_N < 0:
        raise ValueError("V_N must be >= 0")
    r = np.sqrt(spec.V * spec.V_N / (spec.V * spec.V_N + 1.0))
    g1 = spec.V * (1.0 - r)
    g2 = spec.V * (1.0 + r)
    cm_in = _block_diag([np.diag([g1, 1.0 / g1]), np.diag([g2, 1.0 / g2])])
    s = beamsplitter_matrix(2, 0, 1, 0.5)
    return PurifiedSqueezer(g1, g2, s @ cm_in @ s.T)


def _rotate_quarter(cm2):
    # swap x and p on every mode of a two-mode state
    p = np.kron(np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]]))
    return p @ cm2 @ p.T


def extend_with_trusted_ancillas(kind, spec):
    """Rebuild a resource with one purifying ancilla per squeezer.

    Returns ``(cm, mode_map)``. System modes come first in their usual order,
    ancillas are appended; ``mode_map`` has keys ``'system'`` and ``'ancilla'``.
    The full state is pure and tracing out the ancillas gives the impure state.
    """
    net = _NETWORKS[kind]()
    n_sys = len(net.inputs)
    squeezers = [k for k, o in enumerate(net.inputs) if o != "vac"]
    n_anc = len(squeezers)
    n = n_sys + n_anc
    cm = np.zeros((2 * n, 2 * n))
    pure = purify_squeezer(spec).cm
    for k, o in enumerate(net.inputs):
        if o == "vac":
            idx = quad_indices([k])
            cm[np.ix_(idx, idx)] = np.eye(2)
    for a, k in enumerate(squeezers):
        pair = pure if net.inputs[k] == "x" else _rotate_quarter(pure)
        idx = quad_indices([k, n_sys + a])
        cm[np.ix_(idx, idx)] = pair
    s = np.eye(2 * n)
    s[:2 * n_sys, :2 * n_sys] = net.symplectic
    out = s @ cm @ s.T
    mode_map = {"system": list(range(n_sys)), "ancilla": list(range(n_sys, n))}
    return (out + out.T) / 2.0, mode_map
