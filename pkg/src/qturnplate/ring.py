"""Ring model instances and the single-excitation Hamiltonian.

Sites are 0-based internally; link ``l`` couples site ``l`` to site
``l + 1`` and the last link closes the ring back to site 0.  CLI and JSON
use 1-based site numbers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qturnplate.errors import InvalidSpec


def wrap_phase(x: float) -> float:
    """Reduce an angle into (-pi, pi]."""
    y = math.remainder(float(x), 2 * math.pi)
    return math.pi if y <= -math.pi else y


@dataclass(frozen=True)
class RingSpec:
    """Ring of ``n_sites`` resonators with complex link couplings.

    ``magnitudes[l]`` and ``phases[l]`` describe link ``l``.  Phases are
    stored reduced into (-pi, pi]; ``phase_sum`` keeps the unreduced sum of
    the phases as given, which fixes the branch used by
    :func:`gauge_normalize`.
    """

    n_sites: int
    magnitudes: tuple[float, ...]
    phases: tuple[float, ...]
    phase_sum: float = field(default=None, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        n = self.n_sites
        if not isinstance(n, (int, np.integer)) or n < 3 or n % 2 == 0:
            raise InvalidSpec(f"n_sites must be an odd integer >= 3, got {n!r}")
        mags = tuple(float(m) for m in self.magnitudes)
        raw = tuple(float(p) for p in self.phases)
        if len(mags) != n or len(raw) != n:
            raise InvalidSpec(f"expected {n} couplings, got {len(mags)} magnitudes and {len(raw)} phases")
        if not all(math.isfinite(m) and m > 0 for m in mags):
            raise InvalidSpec("coupling magnitudes must be finite and > 0")
        if not all(math.isfinite(p) for p in raw):
            raise InvalidSpec("coupling phases must be finite")
        object.__setattr__(self, "n_sites", int(n))
        object.__setattr__(self, "magnitudes", mags)
        object.__setattr__(self, "phases", tuple(wrap_phase(p) for p in raw))
        if self.phase_sum is None:
            object.__setattr__(self, "phase_sum", math.fsum(raw))

    @classmethod
    def from_couplings(cls, couplings) -> RingSpec:
        """Build from complex link couplings ``J_l``."""
        c = np.asarray(couplings, dtype=complex)
        return cls(len(c), tuple(np.abs(c)), tuple(np.angle(c)))

    @classmethod
    def uniform(cls, n_sites: int, magnitude: float = 1.0, total_phase: float = 0.0) -> RingSpec:
        return cls(n_sites, (magnitude,) * n_sites, (total_phase / n_sites,) * n_sites, phase_sum=float(total_phase))

    @property
    def couplings(self) -> np.ndarray:
        return np.asarray(self.magnitudes) * np.exp(1j * np.asarray(self.phases))

    def conjugate(self) -> RingSpec:
        """Time-reversed ring: every phase negated."""
        return RingSpec(self.n_sites, self.magnitudes, tuple(-p for p in self.phases), phase_sum=-self.phase_sum)

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "couplings": [{"mag": m, "phase": p} for m, p in zip(self.magnitudes, self.phases)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> RingSpec:
        try:
            n = d["n_sites"]
            if "uniform" in d:
                u = d["uniform"]
                return cls.uniform(n, float(u["mag"]), float(u["total_phase"]))
            links = d["couplings"]
            return cls(n, tuple(c["mag"] for c in links), tuple(c["phase"] for c in links))
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"malformed ring spec: {exc!r}") from exc


def load_spec(path) -> RingSpec:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidSpec(f"cannot read spec {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidSpec("spec must be a JSON object")
    return RingSpec.from_dict(data)


def dump_spec(spec: RingSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2)


@dataclass(frozen=True)
class GaugeMap:
    """Diagonal gauge D = diag(exp(i * site_phases)).

    ``phase_sum`` records the unreduced total phase whose N-th part was
    distributed over the links.
    """

    site_phases: np.ndarray
    phase_sum: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.asarray(self.site_phases)))

    def apply(self, h: np.ndarray) -> np.ndarray:
        d = np.exp(1j * np.asarray(self.site_phases))
        return d[:, None] * h * d.conj()[None, :]


def build_hamiltonian(spec: RingSpec) -> np.ndarray:
    """Single-excitation matrix: H[l, l+1] = J_l, H[l+1, l] = conj(J_l)."""
    n = spec.n_sites
    j = spec.couplings
    h = np.zeros((n, n), dtype=complex)
    idx = np.arange(n)
    nxt = (idx + 1) % n
    h[idx, nxt] = j
    h[nxt, idx] = j.conj()
    return h


def total_phase(spec: RingSpec) -> float:
    return wrap_phase(math.fsum(spec.phases))


def gauge_normalize(spec: RingSpec) -> tuple[RingSpec, GaugeMap]:
    """Move to the gauge where every link has phase ``phase_sum / N``.

    With D = diag(exp(i theta)), (D H D^H)[l, l+1] = J_l exp(i(theta_l -
    theta_{l+1})).  Choosing theta_0 = 0 and
    theta_{l+1} = theta_l + phi_l - phi_bar makes each link phase phi_bar.
    """
    n = spec.n_sites
    phi_bar = spec.phase_sum / n
    phases = np.asarray(spec.phases)
    theta = np.zeros(n)
    theta[1:] = np.cumsum(phases[:-1] - phi_bar)
    # Link n-1 closes automatically: sum of reduced phases differs from
    # phase_sum by a multiple of 2 pi, which the exponential absorbs.
    new = RingSpec(n, spec.magnitudes, (phi_bar,) * n, phase_sum=spec.phase_sum)
    return new, GaugeMap(theta, spec.phase_sum)


def random_gauge(spec: RingSpec, rng: np.random.Generator) -> tuple[RingSpec, GaugeMap]:
    """Apply random site phases; used for gauge-invariance checks."""
    theta = rng.uniform(-math.pi, math.pi, spec.n_sites)
    nxt = np.roll(theta, -1)
    phases = np.asarray(spec.phases) + theta - nxt
    return RingSpec(spec.n_sites, spec.magnitudes, tuple(phases), phase_sum=spec.phase_sum), GaugeMap(theta, spec.phase_sum)


def uniform_ring_spectrum(n_sites: int, magnitude: float, total_phase: float) -> np.ndarray:
    """Closed-form spectrum 2|J| cos((2 pi k + phi) / N) of a uniform ring."""
    if n_sites < 1 or n_sites % 2 == 0:
        raise InvalidSpec("uniform_ring_spectrum needs odd N")
    if magnitude <= 0:
        raise InvalidSpec("magnitude must be > 0")
    k = np.arange(n_sites)
    return np.sort(2.0 * magnitude * np.cos((2 * np.pi * k + total_phase) / n_sites))
