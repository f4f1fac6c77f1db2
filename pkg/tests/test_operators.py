import itertools

import numpy as np
import pytest
from conftest import kron_string

from symham import kernels
from symham.operators import (
    MAX_SITES,
    HermitianOperator,
    PauliString,
    PauliSum,
    StateVector,
    apply_spin_lowering,
    commutes,
    conjugate_state,
    materialize_pauli_string,
    parity_x,
    partial_spin_squared,
    spin_component_sum,
    sz_squared_sum,
    total_spin_component,
    total_spin_squared,
    zz_sum,
)


@pytest.mark.parametrize("letters", ["X", "Y", "Z", "I", "XY", "YZ", "ZXI", "YYY", "IXYZ"])
def test_pauli_string_matches_kron(letters, backend):
    xm, sm, ph = PauliString(letters, 0.7).masks()
    got = backend.pauli_matrix(len(letters), xm, sm, complex(ph))
    np.testing.assert_allclose(got, kron_string(letters, 0.7), atol=1e-15)


def test_all_three_site_strings(backend):
    for letters in map("".join, itertools.product("IXYZ", repeat=3)):
        xm, sm, ph = PauliString(letters).masks()
        np.testing.assert_array_equal(backend.pauli_matrix(3, xm, sm, complex(ph)), kron_string(letters))


def test_backends_bit_identical(rng):
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernels not built")
    py, cy = kernels.get_backend("python"), kernels.get_backend("cython")
    s = PauliSum([PauliString.on_sites(5, {1: "X", 3: "X"}), PauliString.on_sites(5, {2: "Z", 5: "Z"}, -0.3)])
    xm, sm, ph = s._packed
    np.testing.assert_array_equal(py.pauli_sum_matrix(5, xm, sm, ph), cy.pauli_sum_matrix(5, xm, sm, ph))
    x = rng.standard_normal((32, 3))
    np.testing.assert_array_equal(py.apply_pauli_sum(5, xm, sm, ph, x), cy.apply_pauli_sum(5, xm, sm, ph, x))


def test_traceless_unless_identity():
    for letters in ("XI", "IZ", "YY"):
        assert abs(np.trace(materialize_pauli_string(PauliString(letters)).matrix)) == 0
    assert np.trace(materialize_pauli_string(PauliString("II")).matrix) == 4


def test_pauli_sum_apply_matches_dense(rng):
    s = spin_component_sum("y", 4) + zz_sum(1, 3, 4)
    dense = s.to_operator().matrix
    x = rng.standard_normal((16, 5)) + 1j * rng.standard_normal((16, 5))
    np.testing.assert_allclose(s.apply(x), dense @ x, atol=1e-14)
    np.testing.assert_allclose(s.apply(x[:, 0]), dense @ x[:, 0], atol=1e-14)


def test_real_sums_stay_real():
    s = PauliSum([PauliString("YY"), PauliString("XX")])
    assert s.is_real
    assert s.to_operator().is_real
    assert not spin_component_sum("y", 2).is_real


def test_on_sites_is_one_based():
    assert PauliString.on_sites(3, {1: "X", 3: "Z"}).letters == "XIZ"
    with pytest.raises(ValueError):
        PauliString.on_sites(3, {0: "X"})
    with pytest.raises(ValueError):
        PauliString("XQ")


def test_spin_algebra():
    L = 3
    sx, sy, sz = (total_spin_component(a, L).matrix for a in "xyz")
    np.testing.assert_allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-14)
    s2 = total_spin_squared(L).matrix
    np.testing.assert_allclose(s2, sx @ sx + sy @ sy + sz @ sz, atol=1e-13)
    # spectrum S(S+1) with S = 3/2 (x4) and 1/2 (x2 copies of 2)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(s2)), [0.75] * 4 + [3.75] * 4, atol=1e-12)


def test_partial_spin_squared_commutes():
    L = 4
    ops = [partial_spin_squared(n, L) for n in range(2, L + 1)] + [total_spin_component("z", L)]
    for a, b in itertools.combinations(ops, 2):
        assert commutes(a, b)
    with pytest.raises(ValueError):
        partial_spin_squared(1, L)


def test_sz_squared_and_parity():
    L = 4
    sz = total_spin_component("z", L).matrix
    np.testing.assert_allclose(sz_squared_sum(L).to_operator().matrix, sz @ sz, atol=1e-14)
    px = parity_x(L).matrix
    np.testing.assert_allclose(px @ px, np.eye(16))
    np.testing.assert_allclose(px @ sz @ px, -sz, atol=1e-14)


def test_basis_convention_site1_msb():
    # |0...0> is all spins up: S_z = +L/2
    sz = total_spin_component("z", 3).matrix
    assert sz[0, 0] == 1.5
    z1 = materialize_pauli_string(PauliString("ZII")).matrix
    assert z1[4, 4] == -1  # index 4 = 100: site 1 down


def test_spin_lowering():
    L = 3
    sx, sy = total_spin_component("x", L).matrix, total_spin_component("y", L).matrix
    s_minus = sx - 1j * sy
    x = np.arange(8.0)
    np.testing.assert_allclose(apply_spin_lowering(x, L), s_minus @ x, atol=1e-14)


def test_hermitian_validation():
    with pytest.raises(ValueError, match="not Hermitian"):
        HermitianOperator(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError, match="power of 2"):
        HermitianOperator(np.eye(3))
    op = HermitianOperator(np.eye(4, dtype=complex))
    assert op.is_real and op.n_sites == 2
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_site_cap():
    with pytest.raises(ValueError, match="cap"):
        parity_x(MAX_SITES + 1)


def test_state_vector():
    psi = StateVector(np.array([1, 1j]) / np.sqrt(2))
    np.testing.assert_allclose(conjugate_state(psi).amplitudes, np.array([1, -1j]) / np.sqrt(2))
    with pytest.raises(ValueError, match="normalized"):
        StateVector([1.0, 1.0])


def test_fallback_selected_by_environment():
    import subprocess
    import sys

    code = "from symham import kernels; print(kernels.BACKEND)"
    env = {"SYMHAM_KERNELS": "python", "PATH": ""}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
