"""Covariance-matrix calculus for Gaussian states.

Conventions used throughout the package:

* quadrature order ``(x1, p1, x2, p2, ...)``;
* shot-noise units, so the vacuum covariance is the identity;
* homodyne measurements are always on the x quadrature.

Covariance matrices are plain ``numpy`` arrays. Mode arguments are lists of
0-based mode indices into the matrix they accompany.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

PHYS_TOL = 1e-9
PINV_RCOND = 1e-10


class PhysicalityError(ValueError):
    """Matrix violates the uncertainty principle beyond tolerance."""


class NumericalRankError(ValueError):
    """A quadrature block needed for a determinant is singular."""


@dataclass(frozen=True)
class ChannelParams:
    """Lossy channel with transmission ``t`` and input-referred excess noise ``eps`` (SNU)."""

    t: float
    eps: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.t <= 1.0):
            raise ValueError(f"channel transmission must be in (0, 1], got {self.t}")
        if not np.isfinite(self.eps) or self.eps < 0.0:
            raise ValueError(f"excess noise must be finite and >= 0, got {self.eps}")


def omega(n_modes):
    """Symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def n_modes_of(sigma):
    sigma = np.asarray(sigma)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise ValueError(f"covariance matrix must be 2N x 2N, got shape {sigma.shape}")
    return sigma.shape[0] // 2


def quad_indices(modes, quad=None):
    """Row indices of the given modes; ``quad`` is None (both), 'x' or 'p'."""
    modes = list(modes)
    if quad == "x":
        return [2 * m for m in modes]
    if quad == "p":
        return [2 * m + 1 for m in modes]
    return [2 * m + q for m in modes for q in (0, 1)]


def submatrix(sigma, modes):
    """Reduced covariance matrix of ``modes`` (partial trace)."""
    idx = quad_indices(modes)
    return np.asarray(sigma)[np.ix_(idx, idx)]


def _check_modes(modes, n, name="modes"):
    modes = [int(m) for m in modes]
    if len(set(modes)) != len(modes):
        raise ValueError(f"{name} contains duplicates: {modes}")
    bad = [m for m in modes if not 0 <= m < n]
    if bad:
        raise ValueError(f"{name} out of range for {n} modes: {bad}")
    return modes


def symplectic_spectrum(sigma, check=True):
    """Symplectic eigenvalues, one per mode, in descending order.

    Computed as the moduli of the eigenvalues of ``i Omega sigma``, which
    come in +/- pairs. Values within ``PHYS_TOL`` below 1 are clamped to 1;
    anything lower raises :class:`PhysicalityError` unless ``check`` is off.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = n_modes_of(sigma)
    ev = np.linalg.eigvals(omega(n) @ sigma)
    nu = np.sort(np.abs(ev.imag))[::-1][::2].copy()
    if check:
        if nu.min() < 1.0 - PHYS_TOL:
            raise PhysicalityError(
                f"smallest symplectic eigenvalue {nu.min():.12g} < 1 (tolerance {PHYS_TOL})")
        nu = np.maximum(nu, 1.0)
    return nu


def _g(nu):
    # entropy of a thermal mode with symplectic eigenvalue nu (vacuum = 1)
    hi = (nu + 1.0) / 2.0
    lo = (nu - 1.0) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t_lo = np.where(lo > 0.0, lo * np.log2(np.where(lo > 0.0, lo, 1.0)), 0.0)
    return hi * np.log2(hi) - t_lo


def von_neumann_entropy(sigma):
    """Entropy in bits.

    Each symplectic eigenvalue is halved before entering the usual
    ``(v + 1/2) log(v + 1/2) - (v - 1/2) log(v - 1/2)`` form, since that form
    assumes a vacuum variance of 1/2.
    """
    return float(np.sum(_g(symplectic_spectrum(sigma))))


def is_pure(sigma, tol=PHYS_TOL):
    nu = symplectic_spectrum(sigma)
    return bool(np.all(np.abs(nu - 1.0) <= tol))


def pinv_psd(m, rcond=PINV_RCOND):
    """Moore-Penrose pseudoinverse of a symmetric matrix via its eigendecomposition."""
    m = (m + m.T) / 2.0
    w, u = np.linalg.eigh(m)
    if w.size == 0:
        return m.copy()
    cutoff = rcond * np.max(np.abs(w))
    inv = np.zeros_like(w)
    keep = np.abs(w) > cutoff
    inv[keep] = 1.0 / w[keep]
    return (u * inv) @ u.T


def condition_on_homodyne(sigma, modes):
    """Covariance of the unmeasured modes after x-homodyne on ``modes``.

    Returns ``S_p - S_pq (X S_q X)^+ S_pq^T``, with the remaining modes kept in
    their original relative order.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = n_modes_of(sigma)
    measured = _check_modes(modes, n)
    keep = [m for m in range(n) if m not in set(measured)]
    if not keep:
        raise ValueError("conditioning would leave no unmeasured modes")
    if not measured:
        return sigma.copy()
    p = quad_indices(keep)
    q = quad_indices(measured)
    s_p = sigma[np.ix_(p, p)]
    s_pq = sigma[np.ix_(p, q)]
    s_q = sigma[np.ix_(q, q)]
    proj = np.diag(np.tile([1.0, 0.0], len(measured)))
    out = s_p - s_pq @ pinv_psd(proj @ s_q @ proj) @ s_pq.T
    return (out + out.T) / 2.0


def apply_lossy_channel(sigma, sent_modes, ch):
    """Send ``sent_modes`` through independent identical lossy, noisy channels.

    Each sent quadrature is scaled by sqrt(t) and picks up ``1 - t + t*eps`` of
    added noise, i.e. a sent block V becomes ``t (V + eps I - I) + I``.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = n_modes_of(sigma)
    sent = _check_modes(sent_modes, n, "sent_modes")
    scale = np.ones(2 * n)
    idx = quad_indices(sent)
    scale[idx] = np.sqrt(ch.t)
    out = sigma * np.outer(scale, scale)
    out[idx, idx] += 1.0 - ch.t + ch.t * ch.eps
    return out


def _x_logdet(sigma, modes):
    idx = quad_indices(modes, "x")
    block = np.asarray(sigma)[np.ix_(idx, idx)]
    sign, logdet = np.linalg.slogdet(block)
    scale = max(1.0, float(np.max(np.abs(np.diag(block)))))
    if sign <= 0 or logdet < len(idx) * np.log(scale) + np.log(1e-14):
        raise NumericalRankError(f"x-quadrature block of modes {list(modes)} is singular")
    return logdet / np.log(2.0)


def homodyne_mutual_information(sigma, group_i, group_j):
    """Mutual information (bits) between x-homodyne outcomes of two mode groups."""
    n = n_modes_of(sigma)
    gi = _check_modes(group_i, n, "group_i")
    gj = _check_modes(group_j, n, "group_j")
    if set(gi) & set(gj):
        raise ValueError("mode groups must be disjoint")
    mi = 0.5 * (_x_logdet(sigma, gi) + _x_logdet(sigma, gj) - _x_logdet(sigma, gi + gj))
    return max(mi, 0.0)


def homodyne_differential_entropy(sigma, group):
    """Differential entropy (bits) of the x-homodyne outcomes of ``group``, SNU variances."""
    group = _check_modes(group, n_modes_of(sigma), "group")
    if not group:
        raise ValueError("group must be non-empty")
    k = len(group)
    return 0.5 * (k * np.log2(2.0 * np.pi * np.e) + _x_logdet(sigma, group))


def williamson(sigma):
    """Williamson normal form: returns ``(nu, S)`` with ``sigma = S D S^T``.

    ``D = diag(nu1, nu1, nu2, nu2, ...)`` and ``S`` symplectic.
    """
    sigma = np.asarray(sigma, dtype=float)
    n = n_modes_of(sigma)
    w, u = np.linalg.eigh((sigma + sigma.T) / 2.0)
    if w.min() <= 0:
        raise PhysicalityError("covariance matrix is not positive definite")
    root = (u * np.sqrt(w)) @ u.T
    k = root @ omega(n) @ root
    t, o = scipy.linalg.schur((k - k.T) / 2.0, output="real")
    nu = np.empty(n)
    o = o.copy()
    for b in range(n):
        i, j = 2 * b, 2 * b + 1
        d = (t[i, j] - t[j, i]) / 2.0
        if d < 0:
            o[:, j] *= -1.0
            d = -d
        nu[b] = d
    s = root @ o @ np.diag(np.repeat(1.0 / np.sqrt(nu), 2))
    return nu, s


def purify(sigma):
    """Pure 2N-mode covariance whose first N modes reduce to ``sigma``.

    Each Williamson thermal mode is purified by a two-mode squeezed partner;
    the partners are appended after the original modes.
    """
    nu, s = williamson(sigma)
    if nu.min() < 1.0 - PHYS_TOL:
        raise PhysicalityError(f"symplectic eigenvalue {nu.min():.12g} < 1")
    nu = np.maximum(nu, 1.0)
    n = nu.size
    z = np.diag(np.tile([1.0, -1.0], n))
    corr = np.diag(np.repeat(np.sqrt(nu ** 2 - 1.0), 2)) @ z
    d = np.diag(np.repeat(nu, 2))
    top = np.hstack([np.asarray(sigma, dtype=float), s @ corr])
    bottom = np.hstack([corr.T @ s.T, d])
    out = np.vstack([top, bottom])
    return (out + out.T) / 2.0
