"""Dense complex linear algebra for small Hermitian problems.

Everything downstream (ring spectra, propagators, Fock sectors) goes
through :func:`hermitian_eig`, a cyclic Jacobi solver.  Matrices here are
at most a few dozen rows, so robustness is preferred over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qturnplate.errors import NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-12
OFFDIAG_RTOL = 1e-14
MAX_SWEEPS = 100


@dataclass(frozen=True)
class HermitianEigen:
    """Ascending eigenvalues and matching column eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i M t) from the stored decomposition."""
        phases = np.exp(-1j * self.values * t)
        return (self.vectors * phases) @ self.vectors.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def hermiticity_error(m) -> float:
    a = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    # Phase out arg(a_pq), then apply a real Jacobi rotation (Rutishauser form).
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    app, aqq = a[p, p].real, a[q, q].real
    tau = (aqq - app) / (2.0 * mag)
    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ g
    a[idx, :] = g.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ g


def hermitian_eig(m, max_sweeps: int = MAX_SWEEPS) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Converged when the off-diagonal Frobenius norm drops below
    ``1e-14 * ||M||_F``.  Raises :class:`NotHermitian` if
    ``max|M - M^H| > 1e-12`` and :class:`NoConvergence` if the sweep
    budget runs out.
    """
    a = as_matrix(m)
    err = hermiticity_error(a)
    if err > HERMITIAN_TOL:
        raise NotHermitian(f"max |M - M^H| = {err:.3e}")
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    target = OFFDIAG_RTOL * scale
    # Below this an element is left alone; rotating it only adds rounding noise.
    skip = 1e-3 * target / max(n, 1)

    def off_norm() -> float:
        d = a - np.diag(np.diag(a))
        return float(np.linalg.norm(d))

    for _ in range(max_sweeps):
        if scale == 0.0 or off_norm() < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > skip:
                    _rotate(a, v, p, q)
    else:
        if off_norm() >= target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    values = np.diag(a).real.copy()
    order = np.argsort(values, kind="stable")
    return HermitianEigen(values[order], v[:, order])


def propagator(m, t: float, eigen: HermitianEigen | None = None) -> np.ndarray:
    """Unitary exp(-i M t) via the spectral decomposition of Hermitian M."""
    if eigen is None:
        eigen = hermitian_eig(m)
    return eigen.propagator(t)


def determinant(m) -> complex:
    """Determinant by Gaussian elimination with partial pivoting."""
    a = as_matrix(m).copy()
    n = a.shape[0]
    det = 1.0 + 0.0j
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0:
            return 0.0 + 0.0j
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        if k + 1 < n:
            factors = a[k + 1 :, k] / a[k, k]
            a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
    return complex(det)


def eigen_clusters(values: np.ndarray, tol: float = 1e-9) -> list[np.ndarray]:
    """Group indices of ascending eigenvalues into degenerate clusters."""
    if len(values) == 0:
        return []
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[groups[-1][-1]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]
