"""Bosonic Fock-space simulation of the resonator ring.

H_R = sum_l (J_l a_l a^+_{l+1} + J_l^* a^+_l a_{l+1}) conserves the photon
number, so states are stored sector by sector (0..n_max photons) and every
sector evolves exactly under its own matrix.  In the one-photon sector
H_R is the transpose of the single-excitation matrix; as a consequence a
photon launched at mode l reaches mode l' with amplitude
<l| exp(-i H t) |l'>, i.e. the Fock ring turns opposite to the
single-excitation picture of the same spec.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from qturnplate.dynamics import TraceSeries, detect_transfer_time
from qturnplate.errors import SectorOverflow
from qturnplate.numerics import HermitianEigen, hermitian_eig
from qturnplate.ring import RingSpec, build_hamiltonian

DEFAULT_NMAX = 2


@dataclass(frozen=True)
class FockBasis:
    """Occupation vectors of one photon-number sector.

    Ordered lexicographically with mode 1 most significant, largest first:
    (n, 0, ..., 0) comes first, so the one-photon sector lists sites 1..N
    in order.
    """

    n_modes: int
    total_photons: int
    states: tuple[tuple[int, ...], ...]

    @property
    def index(self) -> dict[tuple[int, ...], int]:
        return _index(self.n_modes, self.total_photons)

    def __len__(self) -> int:
        return len(self.states)


def _compositions(n: int, modes: int):
    if modes == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, modes - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _states(n_modes: int, n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(_compositions(n, n_modes))


@lru_cache(maxsize=None)
def _index(n_modes: int, n: int) -> dict[tuple[int, ...], int]:
    return {s: i for i, s in enumerate(_states(n_modes, n))}


def fock_basis(n_modes: int, total_photons: int) -> FockBasis:
    return FockBasis(n_modes, total_photons, _states(n_modes, total_photons))


def one_body_matrix(spec: RingSpec) -> np.ndarray:
    """h with H_R = sum_{j,i} h[j, i] a^+_j a_i; equals H(J).T."""
    return build_hamiltonian(spec).T


def sector_hamiltonian_from_one_body(h1: np.ndarray, n_photons: int) -> np.ndarray:
    """Matrix of sum_{j,i} h1[j, i] a^+_j a_i in the ``n_photons`` sector."""
    n_modes = h1.shape[0]
    states = _states(n_modes, n_photons)
    index = _index(n_modes, n_photons)
    out = np.zeros((len(states), len(states)), dtype=complex)
    pairs = np.argwhere(h1 != 0)
    for col, occ in enumerate(states):
        for j, i in pairs:
            if occ[i] == 0:
                continue
            if i == j:
                out[col, col] += h1[i, i] * occ[i]
                continue
            new = list(occ)
            new[i] -= 1
            new[j] += 1
            out[index[tuple(new)], col] += h1[j, i] * math.sqrt(occ[i] * (occ[j] + 1))
    return out


def build_sector_hamiltonian(spec: RingSpec, n_photons: int) -> np.ndarray:
    return sector_hamiltonian_from_one_body(one_body_matrix(spec), n_photons)


@dataclass(frozen=True)
class SectorState:
    n_modes: int
    sectors: tuple[np.ndarray, ...]  # sectors[n] lives in fock_basis(n_modes, n)

    @property
    def n_max(self) -> int:
        return len(self.sectors) - 1

    def sector_norms(self) -> np.ndarray:
        return np.array([float(np.vdot(a, a).real) for a in self.sectors])

    def norm(self) -> float:
        return float(math.sqrt(self.sector_norms().sum()))


def input_state(n_modes: int, mode: int, psi, n_max: int = DEFAULT_NMAX) -> SectorState:
    """Single-mode state ``psi`` (number-state amplitudes) on 0-based ``mode``, vacuum elsewhere."""
    psi = np.asarray(psi, dtype=complex)
    nz = np.flatnonzero(np.abs(psi) > 0)
    if nz.size and nz[-1] > n_max:
        raise SectorOverflow(f"input has {nz[-1]} photons but n_max = {n_max}")
    sectors = []
    for n in range(n_max + 1):
        amp = np.zeros(len(_states(n_modes, n)), dtype=complex)
        if n < len(psi):
            occ = [0] * n_modes
            occ[mode] = n
            amp[_index(n_modes, n)[tuple(occ)]] = psi[n]
        sectors.append(amp)
    return SectorState(n_modes, tuple(sectors))


class FockPropagator:
    """Per-sector eigendecompositions, reused across time points."""

    def __init__(self, spec: RingSpec, n_max: int = DEFAULT_NMAX):
        self.spec = spec
        self.n_max = n_max
        self.eigen: list[HermitianEigen] = [hermitian_eig(build_sector_hamiltonian(spec, n)) for n in range(n_max + 1)]

    def evolve(self, state: SectorState, t: float) -> SectorState:
        if state.n_max > self.n_max:
            raise SectorOverflow("state carries more sectors than the propagator")
        out = []
        for eig, amp in zip(self.eigen, state.sectors):
            c = eig.vectors.conj().T @ amp
            out.append(eig.vectors @ (np.exp(-1j * eig.values * t) * c))
        return SectorState(state.n_modes, tuple(out))


def evolve_fock(spec: RingSpec, psi, mode: int, n_max: int, times) -> list[SectorState]:
    """Evolve single-mode input ``psi`` on 0-based ``mode`` to each time."""
    start = input_state(spec.n_sites, mode, psi, n_max)
    prop = FockPropagator(spec, n_max)
    return [prop.evolve(start, float(t)) for t in np.asarray(times, dtype=float)]


@dataclass(frozen=True)
class ModeDensity:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> str:
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        return json.dumps({"dim": self.dim, "matrix": rows})

    @classmethod
    def from_json(cls, text: str) -> ModeDensity:
        d = json.loads(text)
        return cls(np.array([[complex(re, im) for re, im in row] for row in d["matrix"]]))


@lru_cache(maxsize=None)
def _mode_layout(n_modes: int, n_max: int, mode: int):
    """Per sector: (photons in ``mode``, rest-configuration id) of each basis state."""
    rest_ids: dict[tuple[int, ...], int] = {}
    layout = []
    for n in range(n_max + 1):
        ms, rs = [], []
        for occ in _states(n_modes, n):
            rest = occ[:mode] + occ[mode + 1 :]
            rs.append(rest_ids.setdefault(rest, len(rest_ids)))
            ms.append(occ[mode])
        layout.append((np.array(ms), np.array(rs)))
    return layout, len(rest_ids)


def reduce_mode(state: SectorState, mode: int, n_max: int | None = None) -> ModeDensity:
    """Reduced density matrix of 0-based ``mode`` in the number basis 0..n_max."""
    if n_max is None:
        n_max = state.n_max
    layout, n_rest = _mode_layout(state.n_modes, state.n_max, mode)
    amp = np.zeros((n_max + 1, n_rest), dtype=complex)
    for (ms, rs), a in zip(layout, state.sectors):
        amp[ms, rs] += a
    rho = amp @ amp.conj().T
    return ModeDensity(0.5 * (rho + rho.conj().T))


def fidelity(rho: ModeDensity, psi) -> float:
    """<psi| rho |psi>."""
    psi = np.zeros(rho.dim, dtype=complex) + _pad(psi, rho.dim)
    return float(np.vdot(psi, rho.matrix @ psi).real)


def _pad(psi, dim: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    out = np.zeros(dim, dtype=complex)
    out[: min(dim, len(psi))] = psi[:dim]
    return out


def phase_identified(psi, hops: int, theta: float) -> np.ndarray:
    """Multiply the m-photon amplitude by exp(i m hops theta)."""
    psi = np.asarray(psi, dtype=complex)
    m = np.arange(len(psi))
    return psi * np.exp(1j * m * hops * theta)


def single_photon_oracle(s: complex, psi, theta: float) -> float:
    """Closed-form fidelity for a <=1-photon input a|0> + b|1>.

    A receiving mode holding amplitude ``s`` of the photon is left in
    |a|0> + b s|1>><..| + |b|^2 (1 - |s|^2)|0><0|; its overlap with
    a|0> + b e^{i theta}|1> is returned.
    """
    a, b = complex(psi[0]), complex(psi[1]) if len(psi) > 1 else 0.0
    pa, pb = abs(a) ** 2, abs(b) ** 2
    return abs(pa + pb * s * np.exp(-1j * theta)) ** 2 + pb * (1 - abs(s) ** 2) * pa


@dataclass(frozen=True)
class HopInfo:
    """Measured first hop of a photon launched at ``input_site`` (0-based sites)."""

    input_site: int
    first_hop_site: int
    hop_time: float
    theta: float
    orbit: tuple[int, ...]  # orbit[k] is the site reached after k hops
    site_phases: tuple[float, ...]  # photon phase at orbit[k] at time k * hop_time


def measure_hop(spec: RingSpec, input_site: int, p: int, t_max: float, steps: int, threshold: float = 0.99) -> HopInfo | None:
    """Find which neighbour on the p-spaced orbit receives the photon first.

    Uses the one-photon sector directly: the amplitude at mode l' is
    exp(-i h t)[l', l], h = H(J).T.  ``theta`` is the phase of that
    amplitude at the measured hop time.  ``site_phases[k]`` is the phase
    found at the k-th orbit site after k hops; in the uniform gauge it is
    k * theta, in other gauges it also absorbs the site phases.
    """
    n = spec.n_sites
    eig = hermitian_eig(one_body_matrix(spec))
    times = np.linspace(0.0, t_max, steps)
    cands = sorted({(input_site + p) % n, (input_site - p) % n})
    phases = np.exp(-1j * np.outer(times, eig.values))
    best = None
    for c in cands:
        amps = (phases * eig.vectors[input_site].conj()) @ eig.vectors[c]
        trace = TraceSeries(times, (np.abs(amps) ** 2)[None, :])
        t_hop = detect_transfer_time(trace, 1, threshold)
        if t_hop is not None and (best is None or t_hop < best[1]):
            best = (c, t_hop)
    if best is None:
        return None
    site, t_hop = best
    amp = eig.propagator(t_hop)[site, input_site]
    step = (site - input_site) % n
    orbit = tuple((input_site + k * step) % n for k in range(n // math.gcd(step, n)))
    site_phases = tuple(
        0.0 if k == 0 else float(np.angle(eig.propagator(k * t_hop)[s, input_site])) for k, s in enumerate(orbit)
    )
    return HopInfo(input_site, site, t_hop, float(np.angle(amp)), orbit, site_phases)


def hops_to(hop: HopInfo | None, site: int) -> int:
    if hop is None or site not in hop.orbit:
        return 0
    return hop.orbit.index(site)


def identified_target(psi, hop: HopInfo | None, site: int) -> np.ndarray:
    """Input state expressed in the phase-identified basis of ``site``."""
    if hop is None or site not in hop.orbit:
        return np.asarray(psi, dtype=complex)
    return phase_identified(psi, 1, hop.site_phases[hop.orbit.index(site)])


def fidelity_trace(
    spec: RingSpec,
    psi,
    input_site: int,
    times,
    n_max: int = DEFAULT_NMAX,
    hop: HopInfo | None = None,
) -> TraceSeries:
    """Per-site F_i(t) = <psi_i| rho_i(t) |psi_i>.

    With ``hop`` given, psi_i is the input in the phase-identified basis of
    site i (sites off the orbit keep the raw input); otherwise the raw input
    is used at every site.
    """
    n = spec.n_sites
    start = input_state(n, input_site, psi, n_max)
    prop = FockPropagator(spec, n_max)
    targets = [_pad(identified_target(psi, hop, i), n_max + 1) for i in range(n)]
    times = np.asarray(times, dtype=float)
    out = np.empty((n, len(times)))
    for k, t in enumerate(times):
        st = prop.evolve(start, t)
        for i in range(n):
            out[i, k] = fidelity(reduce_mode(st, i), targets[i])
    labels = tuple(f"f_site{i + 1}" for i in range(n))
    return TraceSeries(times, out, labels)
