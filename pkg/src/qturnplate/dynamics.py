"""Single-excitation time evolution, probability traces and peak finding.

Convention: i d|psi>/dt = +H |psi>, so U(t) = exp(-i H t).  The Heisenberg
amplitude vector of an annihilation operator evolves with S(t) = exp(+i H t)
= U(t)^H.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from qturnplate.numerics import HermitianEigen, hermitian_eig

DEFAULT_STEPS = 2000


@dataclass(frozen=True)
class TraceSeries:
    times: np.ndarray
    series: np.ndarray  # shape (n_series, n_times)
    labels: tuple[str, ...] = ()

    def column(self, site: int) -> np.ndarray:
        """Series for a 1-based site."""
        return self.series[site - 1]

    def to_csv(self) -> str:
        names = self.labels or tuple(f"p{i + 1}" for i in range(self.series.shape[0]))
        buf = io.StringIO()
        buf.write(",".join(("t",) + tuple(names)) + "\n")
        for k, t in enumerate(self.times):
            row = [t, *self.series[:, k]]
            # round-off below 1e-15 is noise and would make files platform dependent
            buf.write(",".join(f"{0.0 if abs(x) < CSV_FLOOR else x:.12g}" for x in row) + "\n")
        return buf.getvalue()


CSV_FLOOR = 1e-15


def time_grid(t_max: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ValueError("steps must be >= 2")
    return np.linspace(0.0, float(t_max), int(steps))


def evolve_state(h, psi0, times, eigen: HermitianEigen | None = None) -> np.ndarray:
    """States exp(-i H t) psi0, one row per time."""
    if eigen is None:
        eigen = hermitian_eig(h)
    psi0 = np.asarray(psi0, dtype=complex)
    coeff = eigen.vectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), eigen.values))
    return (phases * coeff) @ eigen.vectors.T


def probability_trace(h, psi0, t_max: float, steps: int = DEFAULT_STEPS) -> TraceSeries:
    times = time_grid(t_max, steps)
    states = evolve_state(h, psi0, times)
    return TraceSeries(times, (np.abs(states) ** 2).T)


def transfer_matrix(h, t: float, eigen: HermitianEigen | None = None) -> np.ndarray:
    """S(t) = exp(+i H t), the fundamental solution of i dA/dt = -H A."""
    if eigen is None:
        eigen = hermitian_eig(h)
    return eigen.propagator(-t)


def _refine_peak(times: np.ndarray, y: np.ndarray, k: int) -> float:
    if k == 0 or k == len(y) - 1:
        return float(times[k])
    ly = np.log(np.maximum(y[k - 1 : k + 2], 1e-300))
    den = ly[0] - 2 * ly[1] + ly[2]
    if den >= 0:
        return float(times[k])
    offset = 0.5 * (ly[0] - ly[2]) / den
    return float(times[k] + offset * (times[k + 1] - times[k]))


def _first_excursion(y: np.ndarray, threshold: float, low: float) -> tuple[int, int] | None:
    """First run above ``threshold`` (ending below ``low``) not starting at t = 0."""
    pos = 0
    while True:
        above = np.flatnonzero(y[pos:] >= threshold)
        if above.size == 0:
            return None
        start = stop = pos + int(above[0])
        i = start
        while i + 1 < len(y) and y[i + 1] >= low:
            i += 1
            if y[i] >= threshold:
                stop = i
        if start > 0:
            return start, stop
        pos = i + 1
        if pos >= len(y):
            return None


def detect_transfer_time(trace: TraceSeries, target_site: int, threshold: float) -> float | None:
    """Time of the first peak of P_target above ``threshold``.

    An excursion already under way at t = 0 is the initial state, not a
    transfer, and is skipped.  The first excursion above ``threshold`` is delimited with hysteresis
    (it only ends once P falls below ``threshold - (1 - threshold) / 2``) so
    that small fast oscillations riding on a slow transfer peak do not split
    it.  The peak is the vertex of a least-squares parabola through
    log P over the excursion; with three or fewer samples it is the
    classic three-point parabola around the highest sample.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    y = trace.column(target_site)
    t = trace.times
    found = _first_excursion(y, threshold, threshold - 0.5 * (1.0 - threshold))
    if found is None:
        return None
    start, stop = found
    k = start + int(np.argmax(y[start : stop + 1]))
    # A run clipped by either end of the grid is not a completed peak.
    if (k == len(y) - 1 and k > 0 and y[k] > y[k - 1]) or (k == 0 and len(y) > 1 and y[1] >= y[0]):
        return None
    if stop - start + 1 <= 3:
        return _refine_peak(t, y, k)
    tt = t[start : stop + 1]
    ly = np.log(np.maximum(y[start : stop + 1], 1e-300))
    centre = tt.mean()
    a, b, _ = np.polyfit(tt - centre, ly, 2)
    if a >= 0:
        return _refine_peak(t, y, k)
    return float(centre - b / (2 * a))


def max_transfer_probability(h, t_max: float, steps: int) -> float:
    """max over t in [0, t_max] and l != l' of |<l'|U(t)|l>|^2."""
    eig = hermitian_eig(h)
    n = h.shape[0]
    off = ~np.eye(n, dtype=bool)
    best = 0.0
    for t in time_grid(t_max, steps):
        u = eig.propagator(t)
        best = max(best, float(np.max(np.abs(u[off]) ** 2)))
    return best


def predicted_grid(tau: float, steps: int = DEFAULT_STEPS, periods: float = 3.2) -> tuple[float, int]:
    return periods * tau, steps


def phase_of(z: complex) -> float:
    return math.atan2(z.imag, z.real)
