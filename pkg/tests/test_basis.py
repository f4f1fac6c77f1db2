from fractions import Fraction

import numpy as np
import pytest

from symham.basis import (
    BasisLabel,
    IrrepLabel,
    LabeledBasis,
    UnresolvedDegeneracyError,
    classify_state,
    decomposition_report,
    model_basis,
    realify,
    simultaneous_eigenbasis,
)
from symham.families import make_family
from symham.operators import spin_component_sum, total_spin_squared
from symham.oracles import xxx_multiplicity, xxz_multiplicity, xxx_sectors, xxz_sectors
from symham.verify import wigner_eckart


@pytest.mark.parametrize("L", range(2, 9))
def test_xxx_degeneracies_match_binomial_oracle(L):
    rep = decomposition_report("xxx", L)
    got = {p.value: nu for p, _, nu in rep.entries}
    assert got == {S: xxx_multiplicity(L, S) for S in xxx_sectors(L)}
    assert rep.total_dim() == 2 ** L


@pytest.mark.parametrize("L", range(2, 9))
def test_xxz_degeneracies_match_binomial_oracle(L):
    rep = decomposition_report("xxz", L)
    got = {(p.value, p.parity): nu for p, _, nu in rep.entries}
    assert got == {(m, par): xxz_multiplicity(L, m, par) for m, par in xxz_sectors(L)}
    assert rep.total_dim() == 2 ** L


def test_formula_rendering():
    assert decomposition_report("xxz", 7).formula() == "1×2^{7/2}, 7×2^{5/2}, 21×2^{3/2}, 35×2^{1/2}"
    assert decomposition_report("xxx", 7).formula() == "1×8, 6×6, 14×4, 14×2"


@pytest.mark.parametrize("model", ["xxx", "xxz"])
@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_basis_is_real_orthonormal_and_labeled(model, L):
    b = model_basis(model, L)
    assert not np.iscomplexobj(b.vectors)
    assert b.orthonormality_error() < 1e-12
    assert b.is_labeled


@pytest.mark.parametrize("model", ["xxx", "xxz"])
@pytest.mark.parametrize("L", [2, 3, 4, 5])
def test_wigner_eckart_exhaustive(model, L):
    cross, spread = wigner_eckart(model, L, 1e-8)
    assert cross <= 1e-10
    assert spread <= 1e-10


def test_xxx_labels_are_total_spin():
    L = 5
    b = model_basis("xxx", L)
    s2 = total_spin_squared(L).matrix
    for k, lab in enumerate(b.labels):
        S = lab.irrep.value
        np.testing.assert_allclose(s2 @ b.vectors[:, k], float(S * (S + 1)) * b.vectors[:, k], atol=1e-10)
    sz = spin_component_sum("z", L).to_operator().matrix
    for k, lab in enumerate(b.labels):
        assert abs(b.vectors[:, k] @ sz @ b.vectors[:, k] - float(lab.m)) < 1e-10


def test_xxz_doublet_components():
    L = 4
    b = model_basis("xxz", L)
    sz = spin_component_sum("z", L).to_operator().matrix
    for k, lab in enumerate(b.labels):
        m = b.vectors[:, k] @ sz @ b.vectors[:, k]
        if lab.irrep.value == 0:
            assert abs(m) < 1e-12
        else:
            assert abs(m - (1 if lab.component == 1 else -1) * float(lab.irrep.value)) < 1e-12


def test_irrep_label_roundtrip():
    for p in (IrrepLabel("su2", Fraction(3, 2)), IrrepLabel("u1", 0, -1), IrrepLabel("u1", 2)):
        assert IrrepLabel.parse(str(p)) == p
    assert str(IrrepLabel("u1", 0, 1)) == "1^{0,+1}"
    with pytest.raises(ValueError):
        IrrepLabel("u1", 0)
    with pytest.raises(ValueError):
        IrrepLabel("u1", 1, 1)


def test_unresolved_degeneracy_detected():
    # S_z alone leaves multi-dimensional eigenspaces
    with pytest.raises(UnresolvedDegeneracyError):
        simultaneous_eigenbasis([spin_component_sum("z", 3)])
    b = simultaneous_eigenbasis([spin_component_sum("z", 3)], require_complete=False)
    assert sorted(b.unresolved) == [3, 3]


def test_realify_recovers_real_span(rng):
    f = make_family("xxx", 3)
    raw = simultaneous_eigenbasis(f.labeling_sums)
    # rotate each eigenspace by a random complex unitary
    v = raw.vectors.astype(complex)
    groups = {}
    for k, lab in enumerate(raw.labels):
        groups.setdefault(lab.raw, []).append(k)
    for cols in groups.values():
        z = rng.standard_normal((len(cols), len(cols))) + 1j * rng.standard_normal((len(cols), len(cols)))
        u, _ = np.linalg.qr(z)
        v[:, cols] = v[:, cols] @ u
    scrambled = LabeledBasis(v, raw.labels)
    real = realify(scrambled)
    assert not np.iscomplexobj(real.vectors)
    assert real.orthonormality_error() < 1e-12
    for cols in groups.values():
        P = real.vectors[:, cols] @ real.vectors[:, cols].T
        np.testing.assert_allclose(P @ raw.vectors[:, cols], raw.vectors[:, cols], atol=1e-12)


def test_realify_rejects_non_conjugation_invariant():
    v = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)
    b = LabeledBasis(v, [BasisLabel(raw=(0.0,)), BasisLabel(raw=(1.0,))])
    with pytest.raises(ValueError, match="conjugation"):
        realify(b)


def test_classify_state():
    b = model_basis("xxz", 4)
    k = b.indices(IrrepLabel("u1", 1))[0]
    cls = classify_state(b.vectors[:, k], b)
    assert cls.labels == (IrrepLabel("u1", 1),) and cls.is_single
    mix = (b.vectors[:, 0] + b.vectors[:, -1]) / np.sqrt(2)
    assert len(classify_state(mix, b).labels) == 2


def test_decomposition_range():
    with pytest.raises(ValueError):
        decomposition_report("xxx", 13)
