"""Energy/symmetry matching fits and turnplate verification.

A labeled spectrum matches c_n when every eigenvalue can be written as
``(l / n + Z) * eps + eps0`` with integer Z.  Evolving for ``2 pi / eps``
then acts on any state as the shift T (|i> -> |i + p>) times a global
phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qturnplate.numerics import hermitian_eig
from qturnplate.symmetry import ShiftOperator, SymmetryLabels, commutator_norm
from qturnplate.errors import NotCommuting

DEFAULT_TOL = 1e-9
DEFAULT_ZMAX = 10


@dataclass(frozen=True)
class MatchingFit:
    epsilon: float
    epsilon0: float
    z_values: tuple[int, ...]
    residual: float
    n: int

    @property
    def tau(self) -> float:
        return period(self)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "epsilon0": self.epsilon0,
            "z_values": list(self.z_values),
            "residual": self.residual,
            "tau": self.tau,
        }


@dataclass(frozen=True)
class TurnplateReport:
    tau: float
    step_fidelities: np.ndarray
    step_phases: np.ndarray
    phase_consistent: bool


def _score(values, labels, n, eps, anchors):
    frac = labels / n
    best = None
    for a in anchors:
        eps0 = values[a] - frac[a] * eps
        z = np.rint((values - eps0) / eps - frac)
        res = float(np.max(np.abs(values - (frac + z) * eps - eps0)))
        if best is None or res < best[0]:
            best = (res, eps0, z)
    return best


def _refine(values, coeff, eps, eps0, res):
    # Least-squares (eps, eps0) for fixed integers; keep it only if it helps.
    a = np.column_stack([coeff, np.ones_like(coeff)])
    (e, e0), *_ = np.linalg.lstsq(a, values, rcond=None)
    r = float(np.max(np.abs(values - a @ np.array([e, e0]))))
    if e > 0 and r < res:
        return float(e), float(e0), r
    return eps, eps0, res


def fit_matching(
    labeled: SymmetryLabels,
    tol: float = DEFAULT_TOL,
    z_max: int = DEFAULT_ZMAX,
) -> MatchingFit | None:
    """Search for (eps, eps0, Z) reproducing the labeled spectrum.

    Candidates come from every ordered eigenvalue pair and integer offset
    dZ in [-z_max, z_max].  Among candidates with residual <= tol and all
    |Z| <= z_max (after moving eps0 into [0, eps)), the largest eps wins,
    i.e. the shortest turnplate period; ties go to the smaller |eps0|.
    Returns None when nothing fits or the spectrum has a single level.
    """
    values = np.asarray(labeled.values, dtype=float)
    labels = np.asarray(labeled.labels, dtype=float)
    n = labeled.n
    m = len(values)
    if m < 2:
        return None
    anchors = range(m)
    candidates: list[float] = []
    for j in range(m):
        for k in range(m):
            if j == k:
                continue
            dl = (labels[j] - labels[k]) / n
            de = values[j] - values[k]
            for dz in range(-z_max, z_max + 1):
                den = dl + dz
                if abs(den) < 1e-12:
                    continue
                eps = de / den
                if eps > tol:
                    candidates.append(eps)
    best: MatchingFit | None = None
    last = math.inf
    for eps in sorted(candidates, reverse=True):
        if math.isfinite(last) and last - eps <= 1e-12 * last:
            continue
        last = eps
        res, eps0, z = _score(values, labels, n, eps, anchors)
        if res > tol:
            continue
        eps, eps0, res = _refine(values, labels / n + z, eps, eps0, res)
        shift = math.floor(eps0 / eps)
        eps0 -= shift * eps
        z = z + shift
        if np.max(np.abs(z)) > z_max:
            continue
        fit = MatchingFit(float(eps), float(eps0), tuple(int(x) for x in z), res, n)
        if best is None:
            best = fit
        elif abs(fit.epsilon - best.epsilon) <= tol and abs(fit.epsilon0) < abs(best.epsilon0):
            best = fit
        elif fit.epsilon < best.epsilon - tol:
            break
    return best


def period(fit: MatchingFit) -> float:
    return 2.0 * math.pi / fit.epsilon


def verify_turnplate(
    h: np.ndarray,
    shift: ShiftOperator,
    fit: MatchingFit,
    psi0: np.ndarray,
    hops: int,
    phase_tol: float = 1e-6,
) -> TurnplateReport:
    """Evolve psi0 over ``hops`` periods and compare with T**k psi0."""
    if commutator_norm(h, shift.matrix) > 1e-10 * max(1.0, float(np.max(np.abs(h)))):
        raise NotCommuting("H does not commute with the shift operator")
    psi0 = np.asarray(psi0, dtype=complex)
    eig = hermitian_eig(h)
    tau = period(fit)
    fids = np.empty(hops)
    phases = np.empty(hops, dtype=complex)
    for k in range(1, hops + 1):
        psi = eig.propagator(k * tau) @ psi0
        overlap = np.vdot(shift.power(k) @ psi0, psi)
        fids[k - 1] = min(abs(overlap), 1.0)
        phases[k - 1] = overlap / abs(overlap) if abs(overlap) > 0 else 0.0
    ratios = phases[1:] / phases[:-1] if hops > 1 else np.array([])
    consistent = bool(np.all(np.abs(ratios - ratios[0]) <= phase_tol)) if ratios.size else True
    return TurnplateReport(tau, fids, phases, consistent)
