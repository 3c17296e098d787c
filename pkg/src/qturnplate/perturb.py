"""Strong/weak coupling split and second-order effective Hamiltonian.

With H = H0 + V where H0 holds the strong links, the sites that no
strong link touches form a degenerate zero-energy manifold of H0.  To
second order the slow dynamics inside it is generated by

    H_eff = P V P - P V Q H0^+ Q V P,

H0^+ being the pseudo-inverse of H0 on the complement Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qturnplate.errors import EmptyManifold, GapTooSmall, InvalidPartition
from qturnplate.numerics import hermitian_eig
from qturnplate.ring import RingSpec, build_hamiltonian

PINV_CUTOFF = 1e-12


@dataclass(frozen=True)
class ManifoldBasis:
    site_indices: tuple[int, ...]  # 0-based
    vectors: np.ndarray  # N x n, orthonormal columns
    projector: np.ndarray


@dataclass(frozen=True)
class EffectiveHamiltonian:
    matrix: np.ndarray
    g: float | None
    phase: float
    first_order_norm: float

    def as_ring(self) -> RingSpec:
        """Read the n x n matrix back as a ring in the Eq.-5 layout."""
        n = self.matrix.shape[0]
        idx = np.arange(n)
        return RingSpec.from_couplings(self.matrix[idx, (idx + 1) % n])


def default_weak_links(spec: RingSpec, ratio: float = 0.1) -> tuple[int, ...]:
    mags = np.asarray(spec.magnitudes)
    return tuple(int(i) for i in np.flatnonzero(mags < ratio * mags.max()))


def split_hamiltonian(spec: RingSpec, weak_links) -> tuple[np.ndarray, np.ndarray]:
    """(H0, V) with V built from the links in ``weak_links`` (0-based)."""
    weak = sorted({int(l) for l in weak_links})
    n = spec.n_sites
    # All links weak is allowed: H0 = 0 and the manifold is everything.
    if not weak or any(l < 0 or l >= n for l in weak):
        raise InvalidPartition(f"weak links must be a nonempty subset of 0..{n - 1}")
    h = build_hamiltonian(spec)
    mask = np.zeros((n, n), dtype=bool)
    for l in weak:
        mask[l, (l + 1) % n] = mask[(l + 1) % n, l] = True
    v = np.where(mask, h, 0.0)
    h0 = np.where(mask, 0.0, h)
    return h0, v


def zero_manifold(h0: np.ndarray, tol: float = 1e-9) -> ManifoldBasis:
    eig = hermitian_eig(h0)
    keep = np.abs(eig.values) < tol
    if not np.any(keep):
        raise EmptyManifold("H0 has no zero modes")
    vecs = eig.vectors[:, keep]
    proj = vecs @ vecs.conj().T
    # For a ring partition the zero modes are uncoupled sites; use them as
    # the basis so H_eff is expressed on site kets.
    weights = np.real(np.diag(proj))
    sites = np.flatnonzero(np.abs(weights - 1.0) < 1e-9)
    if len(sites) == vecs.shape[1]:
        vecs = np.eye(h0.shape[0], dtype=complex)[:, sites]
        proj = vecs @ vecs.conj().T
    else:
        sites = np.array([], dtype=int)
    return ManifoldBasis(tuple(int(s) for s in sites), vecs, proj)


def effective_hamiltonian(
    h0: np.ndarray,
    v: np.ndarray,
    manifold: ManifoldBasis,
    order: int = 2,
    gap_factor: float = 10.0,
    phase: float = 0.0,
) -> EffectiveHamiltonian:
    if order != 2:
        raise ValueError("only second order is implemented")
    eig = hermitian_eig(h0)
    b = manifold.vectors
    # complement modes of H0
    overlap = np.abs(b.conj().T @ eig.vectors) ** 2
    outside = overlap.sum(axis=0) < 0.5
    e_out = eig.values[outside]
    u_out = eig.vectors[:, outside]
    vmax = float(np.max(np.abs(v))) if v.size else 0.0
    if e_out.size and np.min(np.abs(e_out)) < gap_factor * vmax:
        raise GapTooSmall(f"gap {np.min(np.abs(e_out)):.3g} < {gap_factor} x |V|max {vmax:.3g}")
    first = b.conj().T @ v @ b
    inv = np.where(np.abs(e_out) > PINV_CUTOFF, 1.0 / np.where(e_out == 0, 1.0, e_out), 0.0)
    coupling = u_out.conj().T @ v @ b
    second = -(coupling.conj().T * inv) @ coupling
    heff = first + second
    heff = 0.5 * (heff + heff.conj().T)
    return EffectiveHamiltonian(heff, None, phase, float(np.max(np.abs(first))) if first.size else 0.0)


def nine_site_coupling(j1: float, j2: float, j3: float) -> float:
    """Closed-form g = J1 J3 / J2 for the one-strong-link-per-cell ring."""
    return j1 * j3 / j2


def analytic_nine_site(g: float, phi: float) -> np.ndarray:
    """-g [[0, e^{i phi}, 1], [e^{-i phi}, 0, 1], [1, 1, 0]]."""
    e = np.exp(1j * phi)
    return -g * np.array([[0, e, 1], [e.conjugate(), 0, 1], [1, 1, 0]], dtype=complex)


def reduce_ring(spec: RingSpec, weak_links=None, tol: float = 1e-9) -> tuple[EffectiveHamiltonian, ManifoldBasis]:
    """Split, find the zero manifold and build H_eff in one call."""
    if weak_links is None:
        weak_links = default_weak_links(spec)
    h0, v = split_hamiltonian(spec, weak_links)
    man = zero_manifold(h0, tol)
    heff = effective_hamiltonian(h0, v, man, phase=math.remainder(spec.phase_sum, 2 * math.pi))
    if spec.n_sites == 9 and len(man.site_indices) == 3:
        m = spec.magnitudes
        heff = EffectiveHamiltonian(heff.matrix, nine_site_coupling(m[0], m[1], m[2]), heff.phase, heff.first_order_norm)
    return heff, man


def manifold_leakage(h: np.ndarray, manifold: ManifoldBasis, psi0: np.ndarray, t_max: float, steps: int) -> float:
    """max_t ||(1 - P) psi(t)||^2 over a uniform grid on [0, t_max]."""
    psi0 = np.asarray(psi0, dtype=complex)
    eig = hermitian_eig(h)
    coeff = eig.vectors.conj().T @ psi0
    q = np.eye(h.shape[0]) - manifold.projector
    worst = 0.0
    for t in np.linspace(0.0, t_max, steps):
        psi = eig.vectors @ (np.exp(-1j * eig.values * t) * coeff)
        worst = max(worst, float(np.linalg.norm(q @ psi) ** 2))
    return worst
