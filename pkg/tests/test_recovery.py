from fractions import Fraction

import numpy as np
import pytest

from symham.basis import IrrepLabel, model_basis
from symham.families import ParameterVector, make_family, sample_parameters, xxz_family
from symham.golden import GOLDEN
from symham.recovery import (
    ConstraintMatrix,
    InstanceChecks,
    SectorError,
    accidental_equation_count,
    build_constraint_matrix,
    eigenstates,
    m0_parity,
    numerical_rank,
    predict_accidental,
    predict_xxx,
    predict_xxz,
    rank_census,
    recovery_census,
    solve_recovery,
    verdict_of,
)


def brute_force_rank(f, psi, tol=1e-9):
    """Rank of the real matrix [h_1 psi, ..., h_N psi, -psi] (no symmetry reduction)."""
    M = np.column_stack([f.apply_terms(psi), -psi])
    M = np.vstack([M.real, M.imag]) if np.iscomplexobj(M) else M
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.count_nonzero(sv > tol * sv[0]))


@pytest.mark.parametrize("model,L", [("xxx", 4), ("xxx", 5), ("xxz", 4), ("xxz", 5)])
def test_rank_matches_brute_force(model, L):
    f = make_family(model, L)
    basis = model_basis(model, L)
    theta = sample_parameters(f, 11)
    for rec in eigenstates(f, theta, basis):
        Q = build_constraint_matrix(f, rec, basis)
        assert numerical_rank(Q)[0] == brute_force_rank(f, rec.state)


@pytest.mark.parametrize("model,L", [("xxx", 4), ("xxz", 5)])
def test_ground_truth_in_kernel_and_modes_agree(model, L):
    f = make_family(model, L)
    basis = model_basis(model, L)
    theta = sample_parameters(f, 5)
    for rec in eigenstates(f, theta, basis):
        Q = build_constraint_matrix(f, rec, basis, "symmetry_blocks")
        F = build_constraint_matrix(f, rec, basis, "full_basis")
        assert np.linalg.norm(Q.rows @ rec.solution) <= 1e-10 * np.linalg.norm(Q.rows, 2)
        assert numerical_rank(Q)[0] == numerical_rank(F)[0]
        # realified basis: every imaginary row is dropped
        assert all(p.part == "re" for p in Q.provenance)


def test_recoverable_state_aligns_with_truth():
    L = 6
    f = make_family("xxx", L)
    basis = model_basis("xxx", L)
    theta = sample_parameters(f, 0)
    S0 = IrrepLabel("su2", 0)
    hits = 0
    for rec in eigenstates(f, theta, basis):
        if rec.classification.labels != (S0,):
            continue
        r = solve_recovery(build_constraint_matrix(f, rec, basis))
        assert r.recoverable and r.rank == f.N
        assert r.coupling_alignment <= 1e-8
        assert abs(np.sum(r.solution.couplings ** 2) - 1) < 1e-12
        assert r.solution.couplings[np.argmax(np.abs(r.solution.couplings))] > 0
        hits += 1
    assert hits == 5 * 1  # nu_0 = 5 states with S = 0


def test_unrecoverable_has_degenerate_kernel():
    f = make_family("xxz", 3)
    basis = model_basis("xxz", 3)
    for rec in eigenstates(f, sample_parameters(f, 1), basis):
        r = solve_recovery(build_constraint_matrix(f, rec, basis))
        assert not r.recoverable
        assert r.rank < f.N
        assert r.gram_eigenvalues[-2] <= 1e-9 * r.gram_eigenvalues[0] * 10


def test_solver_on_hand_built_matrix():
    # Q x = 0 with x = (1, 2, 3) (a_1, a_2, E): rank 2 = N
    Q = ConstraintMatrix(np.array([[3.0, 0, -1], [0, 3, -2]]), (), (), 2, "symmetry_blocks",
                         ground_truth=np.array([1.0, 2, 3]))
    r = solve_recovery(Q)
    assert r.recoverable
    np.testing.assert_allclose(r.solution.as_solution(), np.array([1, 2, 3]) / np.sqrt(5), atol=1e-12)
    assert r.alignment < 1e-14
    assert list(r.gram_eigenvalues) == sorted(r.gram_eigenvalues, reverse=True)
    assert r.to_dict()["schema_version"] == 1


def test_numerical_rank_threshold():
    Q = np.diag([1.0, 1e-8, 1e-10])
    assert numerical_rank(Q, 1e-9)[0] == 2
    assert numerical_rank(Q, 1e-7)[0] == 1
    assert numerical_rank(np.zeros((2, 2)))[0] == 0


def test_row_dropping_is_recorded():
    f = make_family("xxx", 3)
    basis = model_basis("xxx", 3)
    rec = eigenstates(f, sample_parameters(f, 0), basis)[0]
    Q = build_constraint_matrix(f, rec, basis, "full_basis")
    assert Q.n_rows + len(Q.dropped) == 2 * basis.dim
    with pytest.raises(ValueError):
        build_constraint_matrix(f, rec, basis, "sideways")


def _golden(table, L, S):
    return GOLDEN[table][(L, str(Fraction(S)))]


@pytest.mark.parametrize("L", range(3, 8))
def test_predict_xxx_matches_golden(L):
    S = Fraction(L % 2, 2)
    while S <= Fraction(L, 2):
        assert predict_xxx(L, S) == _golden("xxx-recovery", L, S)
        S += 1


@pytest.mark.parametrize("L", range(2, 8))
def test_predict_xxz_matches_golden(L):
    for key, want in GOLDEN["xxz-recovery"].items():
        if key[0] != L or want == "/":
            continue
        m = Fraction(key[1])
        labels = [IrrepLabel("u1", 0, 1), IrrepLabel("u1", 0, -1)] if m == 0 else [IrrepLabel("u1", m)]
        assert {predict_xxz(L, p) for p in labels} == {want}


def test_predictor_rejects_missing_sector():
    with pytest.raises(SectorError):
        predict_xxx(4, Fraction(1, 2))
    with pytest.raises(SectorError):
        predict_accidental(3, 3)


def test_accidental_prediction_and_parity():
    assert predict_accidental(4, 2) == "O"
    assert predict_accidental(4, 0) == "X"
    assert accidental_equation_count(4, 2) == 1 + 4 + 3
    # |S=0> of two sites is the singlet: odd under the global flip
    assert m0_parity(2, 0) == -1 and m0_parity(2, 1) == 1
    b = model_basis("xxx", 4)
    from symham.operators import parity_x
    px = parity_x(4).matrix
    for k, lab in enumerate(b.labels):
        if lab.m == 0:
            v = b.vectors[:, k]
            assert abs(v @ px @ v - m0_parity(4, lab.irrep.value)) < 1e-10


def test_verdict_of():
    assert verdict_of([True, True]) == "O"
    assert verdict_of([False]) == "X"
    assert verdict_of([True, False]) == "OX"


def test_small_census_and_checks():
    checks = InstanceChecks()
    census = recovery_census("xxz", 5, trials=3, seed=0, checks=checks, check_modes=True)
    assert {str(s): c.verdict for s, c in census.items()} == {"1/2": "O", "3/2": "X", "5/2": "X"}
    assert sum(c.states for c in census.values()) == 3 * 32
    assert checks.max_kernel_ratio <= 1e-10
    assert not checks.mode_mismatches
    assert checks.block_rank_violations == 0 and checks.alignment_violations == 0


def test_rank_census_subset_of_golden():
    golden = GOLDEN["accidental-ranks"]
    for seed in (1, 2):
        for L in (3, 4):
            for S, cell in rank_census(L, trials=20, seed=seed).items():
                want = {int(r) for r in golden[(L, str(S))].split(",")}
                assert cell.ranks <= want


def test_census_is_deterministic():
    a = recovery_census("xxx", 4, trials=2, seed=9)
    b = recovery_census("xxx", 4, trials=2, seed=9)
    assert [c.to_dict() for c in a.values()] == [c.to_dict() for c in b.values()]


def test_census_rejects_bad_trials():
    with pytest.raises(ValueError):
        recovery_census("xxx", 3, trials=0)


def test_eigenstates_sorted_and_exact():
    f = xxz_family(4)
    theta = ParameterVector(np.linspace(-1, 1, f.N))
    recs = eigenstates(f, theta)
    energies = [r.energy for r in recs]
    assert energies == sorted(energies)
    assert recs[0].classification is None
