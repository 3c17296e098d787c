"""Cyclic c_n symmetry of a ring: shift operator, labels and block reduction.

For a ring of N = n * p sites whose gauge-normalized couplings repeat with
period p, the shift T |i> = |i + p> commutes with H.  Symmetry-adapted
kets are

    |l, i> = n**-0.5 * sum_k omega**(k l) |i + k p>,   omega = exp(2 pi i / n),

so that T |l, i> = omega**(-l) |l, i>.  The integer ``l`` is the label used
throughout (it is the exponent in the ket's Fourier phases), taken in the
symmetric range -(n-1)/2 .. (n-1)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qturnplate.errors import AmbiguousLabel, InvalidDivisor, NoSymmetry, NotCommuting
from qturnplate.numerics import HermitianEigen, determinant, eigen_clusters, hermitian_eig
from qturnplate.ring import RingSpec, build_hamiltonian, gauge_normalize, total_phase

DEGENERACY_TOL = 1e-9
PERIODICITY_RTOL = 1e-12


@dataclass(frozen=True)
class CyclicSymmetry:
    n: int
    p: int


@dataclass(frozen=True)
class ShiftOperator:
    matrix: np.ndarray
    p: int

    @property
    def n_sites(self) -> int:
        return self.matrix.shape[0]

    def power(self, k: int) -> np.ndarray:
        n = self.n_sites
        idx = np.arange(n)
        out = np.zeros((n, n))
        out[(idx + k * self.p) % n, idx] = 1.0
        return out


@dataclass(frozen=True)
class SymmetryLabels:
    values: np.ndarray
    labels: np.ndarray
    refined_vectors: np.ndarray
    n: int


def symmetric_label(k: int, n: int) -> int:
    """Map k mod n into -(n-1)/2 .. (n-1)/2."""
    k %= n
    return k - n if k > (n - 1) // 2 else k


def odd_divisors_desc(n: int) -> list[int]:
    return [d for d in range(n, 0, -1) if n % d == 0 and d % 2 == 1]


def detect_symmetry(spec: RingSpec, rtol: float = PERIODICITY_RTOL) -> CyclicSymmetry:
    """Largest odd n | N whose gauge-normalized magnitudes are (N/n)-periodic."""
    norm, _ = gauge_normalize(spec)
    mags = np.asarray(norm.magnitudes)
    scale = mags.max()
    N = spec.n_sites
    for n in odd_divisors_desc(N):
        p = N // n
        if np.all(np.abs(mags - np.roll(mags, -p)) <= rtol * scale):
            return CyclicSymmetry(n, p)
    return CyclicSymmetry(1, N)


def shift_operator(n_sites: int, p: int) -> ShiftOperator:
    if p <= 0 or n_sites % p != 0:
        raise InvalidDivisor(f"p={p} does not divide N={n_sites}")
    idx = np.arange(n_sites)
    t = np.zeros((n_sites, n_sites))
    t[(idx + p) % n_sites, idx] = 1.0
    return ShiftOperator(t, p)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a @ b - b @ a)))


def symmetry_labels(
    eigen: HermitianEigen,
    shift: ShiftOperator,
    n: int,
    cluster_tol: float = DEGENERACY_TOL,
    commute_tol: float = 1e-10,
    h: np.ndarray | None = None,
) -> SymmetryLabels:
    """Refine eigenvectors inside degenerate clusters so they also diagonalize T.

    Pass ``h`` to have the commutation precondition checked; otherwise H is
    rebuilt from ``eigen``.
    """
    t = shift.matrix
    if h is None:
        h = eigen.reconstruct()
    if commutator_norm(h, t) > commute_tol * max(1.0, float(np.max(np.abs(h)))):
        raise NotCommuting("H does not commute with the shift operator")
    roots = np.exp(-2j * np.pi * np.arange(n) / n)  # T eigenvalue for label k
    vecs = eigen.vectors.copy()
    labels = np.zeros(len(eigen.values), dtype=int)
    powers = [shift.power(k) for k in range(n)]
    label_proj = {
        k: sum(np.exp(2j * np.pi * k * m / n) * powers[m] for m in range(n)) / n for k in range(n)
    }
    for cluster in eigen_clusters(eigen.values, cluster_tol):
        block = vecs[:, cluster]
        if len(cluster) > 1:
            parts = []
            for k in range(n):
                w = hermitian_eig(_herm(block.conj().T @ label_proj[k] @ block))
                keep = w.values > 0.5
                if np.any(keep):
                    parts.append(block @ w.vectors[:, keep])
            if parts:
                refined = np.hstack(parts)
                if refined.shape[1] == len(cluster):
                    block = refined
                    vecs[:, cluster] = block
        for col, j in zip(block.T, cluster):
            mu = np.vdot(col, t @ col)
            dist = np.abs(roots - mu)
            k = int(np.argmin(dist))
            if dist[k] > 1e-6:
                raise AmbiguousLabel(f"T eigenvalue {mu:.6g} is not an n-th root of unity (n={n})")
            labels[j] = symmetric_label(k, n)
    return SymmetryLabels(eigen.values.copy(), labels, vecs, n)


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def label_spectrum(spec: RingSpec, sym: CyclicSymmetry | None = None, cluster_tol: float = DEGENERACY_TOL) -> SymmetryLabels:
    if sym is None:
        sym = detect_symmetry(spec)
    norm, _ = gauge_normalize(spec)
    h = build_hamiltonian(norm)
    eig = hermitian_eig(h)
    return symmetry_labels(eig, shift_operator(spec.n_sites, sym.p), sym.n, cluster_tol=cluster_tol, h=h)


def symmetry_kets(n_sites: int, sym: CyclicSymmetry, label: int) -> np.ndarray:
    """Columns |label, i> for i = 0..p-1."""
    n, p = sym.n, sym.p
    omega = np.exp(2j * np.pi / n)
    kets = np.zeros((n_sites, p), dtype=complex)
    for i in range(p):
        for k in range(n):
            kets[i + k * p, i] = omega ** (k * label) / math.sqrt(n)
    return kets


def labels_range(n: int) -> list[int]:
    h = (n - 1) // 2
    return list(range(-h, h + 1))


def projectors(n_sites: int, sym: CyclicSymmetry) -> dict[int, np.ndarray]:
    out = {}
    for l in labels_range(sym.n):
        k = symmetry_kets(n_sites, sym, l)
        out[l] = k @ k.conj().T
    return out


@dataclass(frozen=True)
class ScalarBlock:
    """1x1 block left over when p = 1; its only eigenvalue is 2|J| cos(phase)."""

    magnitude: float
    total_phase: float

    def eigenvalues(self) -> np.ndarray:
        return np.array([2.0 * self.magnitude * math.cos(self.total_phase)])


@dataclass(frozen=True)
class Block:
    label: int
    total_phase: float
    ring: RingSpec | ScalarBlock

    def eigenvalues(self) -> np.ndarray:
        if isinstance(self.ring, ScalarBlock):
            return self.ring.eigenvalues()
        return hermitian_eig(build_hamiltonian(self.ring)).values


def block_reduce(spec: RingSpec, sym: CyclicSymmetry | None = None) -> list[Block]:
    """Split a c_n-symmetric ring into n rings of length p.

    Block ``l`` keeps the magnitudes of the first period and carries total
    phase phi/n + 2 pi l / n, with phi the unreduced phase sum.
    """
    if sym is None:
        sym = detect_symmetry(spec)
    if sym.n <= 1:
        raise NoSymmetry("ring has no nontrivial cyclic symmetry")
    n, p = sym.n, sym.p
    mags = spec.magnitudes[:p]
    blocks = []
    for l in labels_range(n):
        phi_l = spec.phase_sum / n + 2 * math.pi * l / n
        if p == 1:
            ring: RingSpec | ScalarBlock = ScalarBlock(mags[0], phi_l)
        else:
            ring = RingSpec(p, mags, (phi_l / p,) * p, phase_sum=phi_l)
        blocks.append(Block(l, phi_l, ring))
    return blocks


def block_matrix(spec: RingSpec, sym: CyclicSymmetry, label: int) -> np.ndarray:
    """<label, i| H |label, j> in the gauge-normalized frame."""
    norm, _ = gauge_normalize(spec)
    k = symmetry_kets(spec.n_sites, sym, label)
    return k.conj().T @ build_hamiltonian(norm) @ k


def char_poly_check(spec: RingSpec) -> tuple[complex, float]:
    """det(H) next to its closed form 2 prod|J| cos(phi) for odd N."""
    det = determinant(build_hamiltonian(spec))
    pred = 2.0 * math.prod(spec.magnitudes) * math.cos(total_phase(spec))
    return det, pred
