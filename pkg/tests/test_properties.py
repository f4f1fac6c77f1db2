"""Property-based checks on random Pauli strings, sums and coupling draws."""
import numpy as np
from conftest import BACKENDS, kron_string
from hypothesis import given, settings
from hypothesis import strategies as st

from symham import kernels
from symham.basis import model_basis
from symham.families import ParameterVector, assemble, make_family
from symham.operators import PauliString, PauliSum
from symham.recovery import build_constraint_matrix, eigenstates, numerical_rank, solve_recovery

letters = st.text(alphabet="IXYZ", min_size=1, max_size=5)
coeff = st.floats(-3, 3, allow_nan=False)


@given(letters, coeff, st.sampled_from(BACKENDS))
def test_pauli_matrix_oracle(s, c, name):
    be = kernels.get_backend(name)
    xm, sm, ph = PauliString(s, c).masks()
    np.testing.assert_allclose(be.pauli_matrix(len(s), xm, sm, complex(ph)), kron_string(s, c), atol=1e-14)


@given(st.lists(st.tuples(st.text(alphabet="IXYZ", min_size=3, max_size=3), coeff), min_size=1, max_size=6),
       st.integers(0, 2 ** 31 - 1))
def test_pauli_sum_apply_is_dense_product(terms, seed):
    s = PauliSum([PauliString(a, c) for a, c in terms])
    x = np.random.default_rng(seed).standard_normal((8, 2))
    np.testing.assert_allclose(s.apply(x), s.to_operator().matrix @ x, atol=1e-12)
    M = s.to_operator().matrix
    np.testing.assert_allclose(M, M.conj().T, atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["xxx", "xxz"]), st.integers(3, 5),
       st.lists(st.floats(0.1, 2.0), min_size=8, max_size=8),
       st.lists(st.booleans(), min_size=8, max_size=8),
       st.floats(0.2, 10.0))
def test_recovery_invariants(model, L, mags, signs, scale):
    """Kernel contains x*, rank <= N, and recovery is invariant under theta -> c theta."""
    f = make_family(model, L)
    a = np.array([m if s else -m for m, s in zip(mags, signs)])[: f.N]
    basis = model_basis(model, L)
    theta = ParameterVector(a)
    one = eigenstates(f, theta, basis)
    many = eigenstates(f, theta.scaled(scale), basis)
    H = assemble(f, theta).matrix
    for r1, rc in zip(one[::5], many[::5]):
        assert np.linalg.norm(H @ r1.state - r1.energy * r1.state) < 1e-10 * max(1, abs(r1.energy))
        Q = build_constraint_matrix(f, r1, basis)
        assert np.linalg.norm(Q.rows @ r1.solution) <= 1e-10 * max(np.linalg.norm(Q.rows, 2), 1e-300)
        rank = numerical_rank(Q)[0]
        assert rank <= f.N
        s1 = solve_recovery(Q)
        sc = solve_recovery(build_constraint_matrix(f, rc, basis))
        assert s1.verdict == sc.verdict
        if s1.recoverable:
            assert abs(abs(s1.solution.as_solution() @ sc.solution.as_solution())
                       / np.linalg.norm(s1.solution.as_solution())
                       / np.linalg.norm(sc.solution.as_solution()) - 1) < 1e-8
