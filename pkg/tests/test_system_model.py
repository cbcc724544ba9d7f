import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubit_resonance import (
    AmbiguousClustering,
    DegenerateSystem,
    NLevelSystem,
    QubitSystem,
    SpinBosonParams,
    bohr_spectrum,
    qubit_from_matrices,
    spin_boson_hamiltonian,
    spin_boson_to_qubit,
)
from qubit_resonance.errors import ValidationError

SIGMA_Z = np.diag([1.0, -1.0])


def test_qubit_bohr_spectrum():
    bs = bohr_spectrum(QubitSystem(Delta=1.0).as_nlevel())
    assert bs.frequencies == (-1.0, 0.0, 1.0)
    assert bs.index_set(0.0) == {(1, 1), (2, 2)}
    assert bs.index_set(1.0) == {(2, 1)}
    assert bs.index_set(-1.0) == {(1, 2)}


def test_three_level_degenerate_bohr_frequency():
    bs = bohr_spectrum(NLevelSystem((0.0, 1.0, 2.0), np.zeros((3, 3))))
    assert bs.frequencies == (-2.0, -1.0, 0.0, 1.0, 2.0)
    assert bs.index_set(1.0) == {(2, 1), (3, 2)}


def test_fully_degenerate_levels():
    bs = bohr_spectrum(NLevelSystem((0.0, 0.0), np.zeros((2, 2))))
    assert bs.frequencies == (0.0,)
    assert bs.index_set(0.0) == {(1, 1), (1, 2), (2, 1), (2, 2)}


def test_near_degeneracy_within_tolerance_is_merged():
    bs = bohr_spectrum(NLevelSystem((0.0, 1.0, 2.0 + 1e-12), np.zeros((3, 3))))
    assert len(bs.index_set(1.0)) == 2


def test_chained_clustering_is_ambiguous():
    # neighbouring gaps 1, 1.0008, 1.0016, 1.0024 chain into one class 2.4e-3 wide
    E = (0.0, 1.0, 2.0 + 0.8e-3, 3.0 + 2.4e-3, 4.0 + 4.8e-3)
    with pytest.raises(AmbiguousClustering):
        bohr_spectrum(NLevelSystem(E, np.zeros((5, 5))), degeneracy_tol=1e-3)


def test_nonhermitian_coupling_rejected():
    with pytest.raises(ValidationError):
        NLevelSystem((0.0, 1.0), np.array([[0, 1], [0, 0]]))


def test_unsorted_energies_rejected():
    with pytest.raises(ValidationError):
        NLevelSystem((1.0, 0.0), np.zeros((2, 2)))


def test_qubit_requires_positive_gap():
    with pytest.raises(ValidationError):
        QubitSystem(Delta=0.0)


def test_coupling_matrix_hermitian():
    q = QubitSystem(Delta=1.0, a=0.3, b=-0.2, c=0.1 + 0.4j)
    G = q.coupling_matrix
    assert np.array_equal(G, G.conj().T)


def test_spin_boson_symmetric_well():
    q = spin_boson_to_qubit(SpinBosonParams(0.0, 1.0))
    assert (q.Delta, q.a, q.b, q.c) == (1.0, 0.0, 0.0, 0.5)


def test_spin_boson_no_tunneling():
    q = spin_boson_to_qubit(SpinBosonParams(1.0, 0.0))
    assert (q.Delta, q.a, q.b, q.c) == (1.0, -1.0, 1.0, 0.0)


def test_spin_boson_generic():
    q = spin_boson_to_qubit(SpinBosonParams(1.0, 1.0))
    assert q.Delta == pytest.approx(math.sqrt(2), abs=1e-15)
    assert q.a == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    assert q.b == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert q.c.real == pytest.approx(0.5 / math.sqrt(2), abs=1e-15)


def test_spin_boson_degenerate():
    with pytest.raises(DegenerateSystem):
        SpinBosonParams(0.0, 0.0)


def test_qubit_from_matrices_diagonal_basis():
    q = qubit_from_matrices(np.diag([0.0, 1.0]), np.array([[0, 1], [1, 0]]))
    assert q.Delta == pytest.approx(1.0)
    assert (q.a, q.b) == pytest.approx((0.0, 0.0))
    assert q.c == pytest.approx(1.0)


def test_qubit_from_matrices_identity_coupling():
    H = np.array([[0.3, 0.7 - 0.2j], [0.7 + 0.2j, -1.1]])
    q = qubit_from_matrices(H, np.eye(2))
    assert (q.a, q.b, abs(q.c)) == pytest.approx((1.0, 1.0, 0.0), abs=1e-14)


def test_qubit_from_matrices_rejects_degenerate():
    with pytest.raises(DegenerateSystem):
        qubit_from_matrices(np.eye(2), SIGMA_Z)


def test_rotated_convention_matches_matrix_route():
    sb = SpinBosonParams(1.0, 1.0)
    q = qubit_from_matrices(spin_boson_hamiltonian(sb), SIGMA_Z)
    r = spin_boson_to_qubit(sb, "rotated")
    assert (q.Delta, q.a, q.b, abs(q.c)) == pytest.approx((r.Delta, r.a, r.b, abs(r.c)), abs=1e-12)


def test_published_convention_c_is_half_of_rotated():
    sb = SpinBosonParams(0.4, 1.3)
    assert abs(spin_boson_to_qubit(sb, "published").c) == pytest.approx(
        0.5 * abs(spin_boson_to_qubit(sb, "rotated").c), rel=1e-15
    )


finite = st.floats(-5.0, 5.0, allow_nan=False)


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=5))
def test_bohr_spectrum_symmetry(energies):
    E = tuple(sorted(energies))
    bs = bohr_spectrum(NLevelSystem(E, np.zeros((len(E), len(E)))), degeneracy_tol=1e-9)
    assert 0.0 in bs.pairs
    assert {(k, k) for k in range(1, len(E) + 1)} <= bs.pairs[0.0]
    for e, members in bs.pairs.items():
        assert bs.pairs[-e] == frozenset((n, m) for m, n in members)


@given(eps=finite, d0=st.floats(0.0, 5.0), hbar=st.floats(0.2, 3.0))
def test_rotated_round_trip(eps, d0, hbar):
    if abs(eps) < 1e-3 and d0 < 1e-3:
        return
    sb = SpinBosonParams(eps, d0, hbar)
    q = qubit_from_matrices(spin_boson_hamiltonian(sb), SIGMA_Z)
    r = spin_boson_to_qubit(sb, "rotated")
    assert q.Delta == pytest.approx(r.Delta, rel=1e-12)
    for x, y in ((abs(q.a), abs(r.a)), (abs(q.b), abs(r.b)), (abs(q.c), abs(r.c))):
        assert abs(x - y) <= 1e-12


@given(
    h=st.tuples(finite, finite, finite, finite),
    g=st.tuples(finite, finite, finite, finite),
    shift=finite,
)
def test_energy_shift_invariance(h, g, shift):
    H = np.array([[h[0], h[2] + 1j * h[3]], [h[2] - 1j * h[3], h[1]]])
    G = np.array([[g[0], g[2] + 1j * g[3]], [g[2] - 1j * g[3], g[1]]])
    w = np.linalg.eigvalsh(H)
    if w[1] - w[0] < 1e-2:
        return
    q1 = qubit_from_matrices(H, G)
    q2 = qubit_from_matrices(H + shift * np.eye(2), G)
    assert q1.c.imag == 0 and q1.c.real >= 0
    for x, y in ((q1.a, q2.a), (q1.b, q2.b), (abs(q1.c), abs(q2.c))):
        assert abs(x - y) <= 1e-9 * (1 + max(map(abs, g)))
