import math

import numpy as np
import pytest

from conftest import TAU3, dimer_nine, random_spec, random_state, triangle
from qturnplate.dynamics import (
    TraceSeries,
    detect_transfer_time,
    evolve_state,
    max_transfer_probability,
    probability_trace,
    transfer_matrix,
)
from qturnplate.numerics import hermitian_eig
from qturnplate.ring import RingSpec, build_hamiltonian


def test_evolve_t0_is_identity(rng):
    spec = random_spec(rng)
    psi = random_state(rng, spec.n_sites)
    np.testing.assert_allclose(evolve_state(build_hamiltonian(spec), psi, [0.0])[0], psi, atol=1e-14)


def test_triangle_hops():
    h = build_hamiltonian(triangle())
    states = evolve_state(h, [1, 0, 0], [TAU3, 2 * TAU3, 3 * TAU3])
    probs = np.abs(states) ** 2
    np.testing.assert_allclose(probs, np.eye(3)[[1, 2, 0]], atol=1e-12)


def test_norm_conservation(rng):
    for _ in range(5):
        spec = random_spec(rng)
        states = evolve_state(build_hamiltonian(spec), random_state(rng, spec.n_sites), np.linspace(0, 500, 101))
        assert np.max(np.abs(np.linalg.norm(states, axis=1) - 1)) <= 1e-10


def test_trace_sums_to_one_and_endpoints(rng):
    spec = random_spec(rng)
    tr = probability_trace(build_hamiltonian(spec), np.eye(spec.n_sites)[0], 12.5, 50)
    assert tr.times[0] == 0 and tr.times[-1] == 12.5 and len(tr.times) == 50
    np.testing.assert_allclose(tr.series.sum(axis=0), 1.0, atol=1e-10)


def test_eigenvector_trace_is_constant():
    h = build_hamiltonian(triangle())
    v = hermitian_eig(h).vectors[:, 0]
    tr = probability_trace(h, v, 10.0, 30)
    np.testing.assert_allclose(tr.series, np.abs(v[:, None]) ** 2 * np.ones((1, 30)), atol=1e-12)


def test_triangle_trace_periodicity():
    h = build_hamiltonian(triangle())
    a = probability_trace(h, [1, 0, 0], 2.0, 200)
    shifted = np.abs(evolve_state(h, [1, 0, 0], a.times + 3 * TAU3)) ** 2
    np.testing.assert_allclose(shifted.T, a.series, atol=1e-8)


def test_dimer_nine_trace_peak():
    tr = probability_trace(build_hamiltonian(dimer_nine()), np.eye(9)[0], 3.2 * 120.92, 2000)
    window = (tr.times > 110) & (tr.times < 130)
    assert tr.column(4)[window].max() >= 0.999


def test_transfer_matrix_properties(rng):
    spec = random_spec(rng)
    h = build_hamiltonian(spec)
    np.testing.assert_allclose(transfer_matrix(h, 0.0), np.eye(spec.n_sites), atol=1e-14)
    s = transfer_matrix(h, 2.3)
    np.testing.assert_allclose(s @ transfer_matrix(h, -2.3), np.eye(spec.n_sites), atol=1e-10)
    u = hermitian_eig(h).propagator(2.3)
    np.testing.assert_allclose(s, u.conj().T, atol=1e-12)


def test_transfer_matrix_triangle():
    s = transfer_matrix(build_hamiltonian(triangle()), TAU3)
    # S = U^H, and U[1, 0] has unit modulus at tau
    assert abs(s[0, 1]) == pytest.approx(1.0, abs=1e-12)


def test_transfer_matrix_solves_heisenberg_equation():
    h = build_hamiltonian(triangle())
    dt = 1e-6
    s = transfer_matrix(h, 0.7)
    ds = (transfer_matrix(h, 0.7 + dt) - transfer_matrix(h, 0.7 - dt)) / (2 * dt)
    # i dA/dt = -H A
    np.testing.assert_allclose(1j * ds, -h @ s, atol=1e-7)


def test_reciprocity_under_conjugation(rng):
    for _ in range(5):
        spec = random_spec(rng)
        t = rng.uniform(0, 20)
        u = hermitian_eig(build_hamiltonian(spec)).propagator(t)
        uc = hermitian_eig(build_hamiltonian(spec.conjugate())).propagator(t)
        np.testing.assert_allclose(np.abs(u) ** 2, np.abs(uc.T) ** 2, atol=1e-10)


def test_detect_triangle():
    tr = probability_trace(build_hamiltonian(triangle()), [1, 0, 0], 3.2 * TAU3, 2000)
    assert detect_transfer_time(tr, 2, 0.99) == pytest.approx(1.2092, abs=1e-3)
    assert detect_transfer_time(tr, 1, 0.99) == pytest.approx(3 * TAU3, abs=1e-3)


def test_detect_constant_trace():
    tr = TraceSeries(np.linspace(0, 1, 10), np.full((1, 10), 0.5))
    assert detect_transfer_time(tr, 1, 0.9) is None
    tr = TraceSeries(np.linspace(0, 1, 10), np.ones((1, 10)))
    assert detect_transfer_time(tr, 1, 0.9) is None


def test_detect_dimer_nine():
    tr = probability_trace(build_hamiltonian(dimer_nine()), np.eye(9)[0], 3.2 * 120.92, 2000)
    assert detect_transfer_time(tr, 4, 0.99) == pytest.approx(120.92, abs=0.1)


def test_detect_rejects_bad_threshold():
    tr = TraceSeries(np.linspace(0, 1, 3), np.zeros((1, 3)))
    with pytest.raises(ValueError):
        detect_transfer_time(tr, 1, 0.0)


def test_csv_format():
    tr = probability_trace(build_hamiltonian(triangle()), [1, 0, 0], 1.0, 3)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,p1,p2,p3"
    assert len(lines) == 4
    assert lines[1] == "0,1,0,0"


def test_pentagon_never_transfers_perfectly():
    h = build_hamiltonian(RingSpec.uniform(5, 1.0, math.pi / 2))
    assert max_transfer_probability(h, 50.0, 5001) < 1 - 1e-4
