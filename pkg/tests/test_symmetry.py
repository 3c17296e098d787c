import math

import numpy as np
import pytest

from conftest import SQRT3, grouped_nine, random_spec
from qturnplate.errors import AmbiguousLabel, InvalidDivisor, NoSymmetry, NotCommuting
from qturnplate.numerics import hermitian_eig
from qturnplate.ring import RingSpec, build_hamiltonian, gauge_normalize
from qturnplate.symmetry import (
    CyclicSymmetry,
    ScalarBlock,
    block_matrix,
    block_reduce,
    char_poly_check,
    commutator_norm,
    detect_symmetry,
    label_spectrum,
    projectors,
    shift_operator,
    symmetry_labels,
)


def periodic_spec(rng, n, p, flux=None):
    mags = tuple(rng.uniform(0.5, 2.0, p)) * n
    phases = rng.uniform(-math.pi, math.pi, n * p)
    if flux is not None:
        phases += (flux - phases.sum()) / (n * p)
    return RingSpec(n * p, mags, tuple(phases))


def test_detect_grouped_nine():
    assert detect_symmetry(grouped_nine()) == CyclicSymmetry(3, 3)


def test_detect_uniform_triangle():
    assert detect_symmetry(RingSpec.uniform(3)) == CyclicSymmetry(3, 1)


def test_detect_none_matches_brute_force(rng):
    s = RingSpec(9, tuple(rng.uniform(0.5, 2, 9)), (0.1,) * 9)
    m = np.array(s.magnitudes)
    brute = [d for d in (9, 3) if np.allclose(m, np.roll(m, -(9 // d)))]
    assert brute == []
    assert detect_symmetry(s) == CyclicSymmetry(1, 9)


def test_detect_ignores_raw_phase_pattern(rng):
    s = periodic_spec(rng, 5, 3)
    assert detect_symmetry(s) == CyclicSymmetry(5, 3)


def test_shift_operator_powers():
    t = shift_operator(3, 1)
    np.testing.assert_array_equal(np.linalg.matrix_power(t.matrix, 3), np.eye(3))
    assert t.matrix[1, 0] == 1
    with pytest.raises(InvalidDivisor):
        shift_operator(9, 2)


def test_shift_commutes_only_with_symmetric_ring(rng):
    t = shift_operator(9, 3)
    h = build_hamiltonian(grouped_nine())
    assert commutator_norm(h, t.matrix) < 1e-12
    h_bad = build_hamiltonian(RingSpec(9, (1, 4, 1, 1, 4, 1, 1, 4, 2), (math.pi / 18,) * 9))
    assert commutator_norm(h_bad, t.matrix) > 0.1


def test_triangle_labels_known():
    lab = label_spectrum(RingSpec.uniform(3, 1.0, math.pi / 2))
    got = dict(zip(np.round(lab.values, 9), lab.labels))
    assert got == {round(SQRT3, 9): 0, round(-SQRT3, 9): 1, 0.0: -1}


def test_trivial_symmetry_labels(rng):
    s = random_spec(rng, 7)
    e = hermitian_eig(build_hamiltonian(s))
    lab = symmetry_labels(e, shift_operator(7, 7), 1)
    assert np.all(lab.labels == 0)


def test_grouped_nine_label_counts():
    lab = label_spectrum(grouped_nine())
    assert sorted(np.bincount(lab.labels + 1)) == [3, 3, 3]


def test_refined_vectors_diagonalize_t(rng):
    # uniform ring of 9: all levels but one are doubly degenerate
    for spec in (RingSpec.uniform(9, 1.0, 0.0), periodic_spec(rng, 3, 3), periodic_spec(rng, 5, 3)):
        sym = detect_symmetry(spec)
        lab = label_spectrum(spec, sym)
        t = shift_operator(spec.n_sites, sym.p).matrix
        h = build_hamiltonian(gauge_normalize(spec)[0])
        omega = np.exp(2j * math.pi / sym.n)
        for v, l, e in zip(lab.refined_vectors.T, lab.labels, lab.values):
            np.testing.assert_allclose(t @ v, omega ** (-l) * v, atol=1e-9)
            np.testing.assert_allclose(h @ v, e * v, atol=1e-9)


def test_labels_reject_noncommuting():
    spec = RingSpec(9, (1, 4, 1, 1, 4, 1, 1, 4, 2), (0.1,) * 9)
    e = hermitian_eig(build_hamiltonian(spec))
    with pytest.raises(NotCommuting):
        symmetry_labels(e, shift_operator(9, 3), 3)


def test_ambiguous_label():
    # T^3 = 1 but we claim n = 5: eigenvalues of T are not fifth roots
    e = hermitian_eig(build_hamiltonian(RingSpec.uniform(3, 1.0, 0.3)))
    with pytest.raises(AmbiguousLabel):
        symmetry_labels(e, shift_operator(3, 1), 5)


def test_grouped_nine_blocks():
    blocks = block_reduce(grouped_nine())
    phases = sorted(b.total_phase for b in blocks)
    assert phases == pytest.approx(sorted([math.pi / 6, math.pi / 6 + 2 * math.pi / 3, math.pi / 6 - 2 * math.pi / 3]))
    for b in blocks:
        assert b.ring.magnitudes == (1.0, 4.0, 1.0)
    union = np.sort(np.concatenate([b.eigenvalues() for b in blocks]))
    full = hermitian_eig(build_hamiltonian(grouped_nine())).values
    np.testing.assert_allclose(union, full, atol=1e-9)


def test_scalar_blocks_for_p1():
    spec = RingSpec.uniform(3, 1.5, 0.4)
    blocks = block_reduce(spec)
    assert all(isinstance(b.ring, ScalarBlock) for b in blocks)
    for b in blocks:
        assert b.eigenvalues()[0] == pytest.approx(3.0 * math.cos(0.4 / 3 + 2 * math.pi * b.label / 3))
    union = np.sort(np.concatenate([b.eigenvalues() for b in blocks]))
    np.testing.assert_allclose(union, hermitian_eig(build_hamiltonian(spec)).values, atol=1e-12)


def test_no_symmetry_block_reduce(rng):
    with pytest.raises(NoSymmetry):
        block_reduce(RingSpec(9, tuple(rng.uniform(0.5, 2, 9)), (0.0,) * 9))


@pytest.mark.parametrize("n,p", [(3, 3), (3, 5), (5, 3), (7, 1)])
def test_block_completeness(rng, n, p):
    for _ in range(3):
        spec = periodic_spec(rng, n, p)
        union = np.sort(np.concatenate([b.eigenvalues() for b in block_reduce(spec)]))
        np.testing.assert_allclose(union, hermitian_eig(build_hamiltonian(spec)).values, atol=1e-9)


def test_block_matrix_matches_reduced_ring():
    spec = grouped_nine()
    sym = detect_symmetry(spec)
    for b in block_reduce(spec, sym):
        m = block_matrix(spec, sym, b.label)
        np.testing.assert_allclose(np.linalg.eigvalsh(m), b.eigenvalues(), atol=1e-12)


def test_projectors():
    spec = grouped_nine()
    sym = detect_symmetry(spec)
    proj = projectors(9, sym)
    np.testing.assert_allclose(sum(proj.values()), np.eye(9), atol=1e-12)
    h = build_hamiltonian(gauge_normalize(spec)[0])
    for a, pa in proj.items():
        np.testing.assert_allclose(pa @ pa, pa, atol=1e-12)
        for b, pb in proj.items():
            if a != b:
                assert np.max(np.abs(pa @ h @ pb)) < 1e-12


def test_char_poly_examples():
    det, pred = char_poly_check(RingSpec.uniform(3, 1.0, math.pi / 2))
    assert abs(det) < 1e-14 and abs(pred) < 1e-15
    det, pred = char_poly_check(RingSpec.uniform(3))
    assert det == pytest.approx(2.0) and pred == pytest.approx(2.0)


def test_char_poly_random(rng):
    for _ in range(20):
        spec = random_spec(rng)
        det, pred = char_poly_check(spec)
        assert abs(det - pred) <= 1e-8 * abs(pred)
        assert abs(np.linalg.det(build_hamiltonian(spec)) - pred) <= 1e-8 * abs(pred)


@pytest.mark.parametrize("k", [0, 1, -1, 2])
def test_symmetric_spectrum_at_quarter_flux(rng, k):
    n = int(rng.choice([3, 5, 7, 9]))
    spec = RingSpec(n, tuple(rng.uniform(0.5, 2, n)), (0.0,) * (n - 1) + (math.pi / 2 + k * math.pi,))
    vals = hermitian_eig(build_hamiltonian(spec)).values
    np.testing.assert_allclose(vals, -vals[::-1], atol=1e-9)
    assert np.min(np.abs(vals)) < 1e-9
