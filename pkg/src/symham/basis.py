"""Symmetry-adapted bases: joint eigenvectors of a labeling set, tagged by irrep.

Pipeline for the built-in models::

    simultaneous_eigenbasis -> realify -> label_irreps
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .families import HamiltonianFamily, make_family
from .operators import (
    StateVector,
    apply_spin_lowering,
    as_applicable,
    parity_x_sum,
    spin_component_sum,
)

TOL_CLUSTER = 1e-8
TOL_COMM = 1e-10
TOL_REAL = 1e-12
TOL_PROJ = 1e-10


class UnresolvedDegeneracyError(ValueError):
    """The labeling operators do not split the space into 1-dim joint eigenspaces."""


class LabelingError(ValueError):
    """Joint eigenvalues do not assemble into complete irrep multiplets."""


def _half(x: float, what: str) -> Fraction:
    twice = round(2 * x)
    if abs(2 * x - twice) > 1e-6:
        raise LabelingError(f"{what} = {x!r} is not a half-integer")
    return Fraction(twice, 2)


def fmt_half(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class IrrepLabel:
    """Irrep of the model's symmetry group.

    ``su2``: total spin ``value`` (XXX). ``u1``: magnetization magnitude
    ``value`` (XXZ), with Pi_x ``parity`` only when the magnitude is 0.
    """

    kind: str
    value: Fraction
    parity: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if self.kind not in ("su2", "u1"):
            raise ValueError(f"unknown irrep kind {self.kind!r}")
        if self.kind == "u1" and (self.value == 0) != (self.parity is not None):
            raise ValueError("u1 irreps carry a parity exactly when |m| = 0")

    @property
    def dim(self) -> int:
        if self.kind == "su2":
            return int(2 * self.value + 1)
        return 1 if self.value == 0 else 2

    def sort_key(self):
        return (self.kind, -self.value, -(self.parity or 0))

    def __str__(self):
        if self.kind == "su2":
            return f"S={fmt_half(self.value)}"
        if self.value == 0:
            return f"1^{{0,{self.parity:+d}}}"
        return f"2^{{{fmt_half(self.value)}}}"

    @classmethod
    def parse(cls, text: str) -> "IrrepLabel":
        if text.startswith("S="):
            return cls("su2", Fraction(text[2:]))
        if text.startswith("1^{0,"):
            return cls("u1", Fraction(0), int(text[5:-1]))
        if text.startswith("2^{"):
            return cls("u1", Fraction(text[3:-1]))
        raise ValueError(f"cannot parse irrep label {text!r}")


@dataclass(frozen=True)
class BasisLabel:
    raw: tuple
    irrep: IrrepLabel | None = None
    copy: int | None = None
    component: int | None = None
    m: Fraction | None = None


@dataclass(frozen=True, eq=False)
class LabeledBasis:
    """Orthonormal basis stored as the columns of ``vectors``."""

    vectors: np.ndarray
    labels: tuple
    model: str | None = None
    unresolved: tuple = ()

    def __post_init__(self):
        v = np.array(self.vectors)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", tuple(self.labels))
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[1] != len(self.labels):
            raise ValueError("basis needs one label per column of a square matrix")

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def is_labeled(self) -> bool:
        return all(lab.irrep is not None for lab in self.labels)

    def irreps(self) -> dict:
        """Degeneracy nu_p of every irrep present, ordered by label."""
        counts: dict = {}
        for lab in self.labels:
            if lab.component == 1:
                counts[lab.irrep] = counts.get(lab.irrep, 0) + 1
        return {p: counts[p] for p in sorted(counts, key=IrrepLabel.sort_key)}

    def indices(self, p: IrrepLabel) -> np.ndarray:
        return np.array([k for k, lab in enumerate(self.labels) if lab.irrep == p], dtype=int)

    def orthonormality_error(self) -> float:
        v = self.vectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude of each column real and positive.

    Among near-ties the lowest index wins, so the choice is stable run to run.
    """
    v = np.array(vectors)
    mags = np.abs(v)
    peak = mags.max(axis=0)
    pivot = np.argmax(mags >= peak * (1 - 1e-9), axis=0)
    ref = v[pivot, np.arange(v.shape[1])]
    phase = np.conj(ref) / np.abs(ref)
    if not np.iscomplexobj(v):
        phase = phase.real
    return v * phase


def _commutator_probe(a_apply, b_apply, d, rng):
    x = rng.standard_normal((d, 4))
    return float(np.max(np.abs(a_apply(b_apply(x)) - b_apply(a_apply(x)))))


def _check_commuting(ops, tol_comm):
    applies = [as_applicable(op) for op in ops]
    d = ops[0].dim
    rng = np.random.default_rng(12345)
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            err = _commutator_probe(applies[i], applies[j], d, rng)
            if err > tol_comm * max(1.0, d ** 0.5) * 10:
                raise ValueError(f"labeling operators {i} and {j} do not commute (probe {err:.2e})")


def simultaneous_eigenbasis(ops, tol_cluster: float = TOL_CLUSTER, tol_comm: float = TOL_COMM,
                            require_complete: bool = True) -> LabeledBasis:
    """Joint eigenbasis of pairwise-commuting Hermitian operators.

    Diagonalizes ``ops[0]``, clusters eigenvalues whose gaps fall below
    ``tol_cluster`` times the operator's spectral range, and refines each
    cluster with the next operator. Labels carry the tuple of cluster
    representatives only.
    """
    ops = list(ops)
    if not ops:
        raise ValueError("need at least one operator")
    d = ops[0].dim
    if any(op.dim != d for op in ops):
        raise ValueError("operators act on spaces of different dimension")
    _check_commuting(ops, tol_comm)

    dtype = float if all(getattr(op, "is_real", False) for op in ops) else complex
    groups = [(np.eye(d, dtype=dtype), ())]
    for op in ops:
        apply = as_applicable(op)
        spectra = []
        for B, tup in groups:
            A = B.conj().T @ apply(B)
            A = (A + A.conj().T) / 2
            off = A - np.diag(np.diag(A))
            if not np.any(off):
                w = np.diag(A).real
                order = np.argsort(w, kind="stable")
                w, V = w[order], B[:, order]
            else:
                w, U = np.linalg.eigh(A)
                V = B @ U
            spectra.append((V, w, tup))
        allw = np.concatenate([w for _, w, _ in spectra])
        spread = float(allw.max() - allw.min())
        thr = tol_cluster * (spread if spread > 0 else 1.0)
        groups = []
        for V, w, tup in spectra:
            cuts = np.flatnonzero(np.diff(w) > thr) + 1
            for idx in np.split(np.arange(len(w)), cuts):
                groups.append((V[:, idx], tup + (float(np.mean(w[idx])),)))

    unresolved = tuple(B.shape[1] for B, _ in groups if B.shape[1] > 1)
    if unresolved and require_complete:
        raise UnresolvedDegeneracyError(
            f"{len(unresolved)} joint eigenspaces of dimension > 1 (sizes {sorted(set(unresolved))})"
        )
    vectors = fix_phases(np.hstack([B for B, _ in groups]))
    labels = [BasisLabel(raw=tup) for B, tup in groups for _ in range(B.shape[1])]
    return LabeledBasis(vectors, labels, unresolved=unresolved)


def realify(basis: LabeledBasis, tol_real: float = TOL_REAL, tol_kinv: float = 1e-8) -> LabeledBasis:
    """Replace each joint eigenspace by an orthonormal real basis of the same span.

    Requires every eigenspace (vectors sharing a raw eigenvalue tuple) to be
    invariant under complex conjugation.
    """
    v = basis.vectors
    if not np.iscomplexobj(v):
        return basis
    groups: dict = {}
    for k, lab in enumerate(basis.labels):
        groups.setdefault(lab.raw, []).append(k)
    out = np.zeros(v.shape, dtype=float)
    for raw, cols in groups.items():
        B = v[:, cols]
        if np.max(np.abs(B.imag)) <= tol_real:
            out[:, cols] = B.real
            continue
        Bc = B.conj()
        resid = np.max(np.abs(Bc - B @ (B.conj().T @ Bc)))
        if resid > tol_kinv:
            raise ValueError(f"eigenspace {raw} is not invariant under complex conjugation ({resid:.2e})")
        U, s, _ = np.linalg.svd(np.hstack([B.real, B.imag]), full_matrices=False)
        k = len(cols)
        if s[k - 1] <= tol_kinv:
            raise ValueError(f"real parts of eigenspace {raw} are rank deficient")
        out[:, cols] = U[:, :k]
    return LabeledBasis(fix_phases(out), basis.labels, basis.model, basis.unresolved)


def _spin_from_casimir(x: float) -> Fraction:
    return _half((-1 + np.sqrt(1 + 4 * max(x, 0.0))) / 2, "total spin")


def _label_xxx(basis: LabeledBasis, L: int):
    v = np.array(basis.vectors)
    entries = []
    for k, lab in enumerate(basis.labels):
        m = _half(lab.raw[0], "S_z eigenvalue")
        spins = tuple(_spin_from_casimir(x) for x in lab.raw[1:])
        entries.append((spins[-1], spins[:-1], m, k))

    multiplets: dict = {}
    for S, inter, m, k in entries:
        multiplets.setdefault((S, inter), {})
        if m in multiplets[(S, inter)]:
            raise LabelingError(f"duplicate state S={S}, m={m} for intermediate spins {inter}")
        multiplets[(S, inter)][m] = k

    cols, labels = [], []
    by_spin: dict = {}
    for S, inter in multiplets:
        by_spin.setdefault(S, []).append(inter)
    for S in sorted(by_spin, reverse=True):
        p = IrrepLabel("su2", S)
        for copy, inter in enumerate(sorted(by_spin[S]), start=1):
            comps = multiplets[(S, inter)]
            expected = [S - j for j in range(int(2 * S) + 1)]
            if sorted(comps, reverse=True) != expected:
                raise LabelingError(f"incomplete multiplet S={S} for intermediate spins {inter}")
            prev = None
            for c, m in enumerate(expected, start=1):
                vec = v[:, comps[m]]
                if prev is not None:
                    # relative phase fixed by S_- |S, m+1> having positive overlap
                    overlap = np.vdot(vec, apply_spin_lowering(prev, L))
                    vec = vec * (np.conj(overlap) / abs(overlap) if np.iscomplexobj(vec) else np.sign(overlap))
                cols.append(vec)
                labels.append(BasisLabel(basis.labels[comps[m]].raw, p, copy, c, m))
                prev = vec
    return np.column_stack(cols), labels


def _label_xxz(basis: LabeledBasis, L: int):
    v = np.array(basis.vectors)
    sz = spin_component_sum("z", L)
    px = parity_x_sum(L)
    singles: dict = {}
    doublets: dict = {}
    for k, lab in enumerate(basis.labels):
        absm = _half(np.sqrt(max(lab.raw[0], 0.0)), "|m|")
        zz = tuple(int(round(x)) for x in lab.raw[2:])
        if absm == 0:
            parity = int(round(lab.raw[1]))
            if parity not in (1, -1):
                raise LabelingError(f"Pi_x eigenvalue {lab.raw[1]!r} is not +-1")
            singles.setdefault(parity, {})
            if zz in singles[parity]:
                raise LabelingError(f"duplicate m=0 state for correlators {zz}")
            singles[parity][zz] = k
        else:
            doublets.setdefault(absm, {}).setdefault(zz, []).append(k)

    cols, labels = [], []
    for absm in sorted(doublets, reverse=True):
        p = IrrepLabel("u1", absm)
        for copy, zz in enumerate(sorted(doublets[absm]), start=1):
            ks = doublets[absm][zz]
            if len(ks) != 2:
                raise LabelingError(f"|m|={absm} component without its partner (correlators {zz})")
            B = v[:, ks]
            w, U = np.linalg.eigh(B.conj().T @ sz.apply(B))
            up = fix_phases((B @ U[:, [1]]))[:, 0]
            if abs(w[1] - float(absm)) > 1e-8:
                raise LabelingError(f"doublet does not carry m = +{absm}")
            down = px.apply(up)
            raw = (float(absm) ** 2, 0.0) + tuple(float(x) for x in zz)
            cols += [up, down]
            labels += [BasisLabel(raw, p, copy, 1, absm), BasisLabel(raw, p, copy, 2, -absm)]
    for parity in (1, -1):
        p = IrrepLabel("u1", Fraction(0), parity)
        for copy, zz in enumerate(sorted(singles.get(parity, {})), start=1):
            k = singles[parity][zz]
            cols.append(v[:, k])
            labels.append(BasisLabel(basis.labels[k].raw, p, copy, 1, Fraction(0)))
    return np.column_stack(cols), labels


def label_irreps(basis: LabeledBasis, model: str) -> LabeledBasis:
    """Attach (irrep, copy i, component m) labels from the raw eigenvalue tuples.

    XXX raw tuples are (S_z, S_2^2, ..., S_L^2); XXZ raw tuples are
    (S_z^2, Pi_x, Z1Z2, ..., Z1ZL). Component phases are aligned so that
    family terms have the same reduced matrix for every component.
    """
    L = basis.dim.bit_length() - 1
    if model == "xxx":
        vecs, labels = _label_xxx(basis, L)
    elif model == "xxz":
        vecs, labels = _label_xxz(basis, L)
    else:
        raise ValueError(f"unknown model {model!r}")
    if len(labels) != basis.dim:
        raise LabelingError("labeling lost basis vectors")
    return LabeledBasis(vecs, labels, model, basis.unresolved)


def build_basis(family: HamiltonianFamily, tol_cluster: float = TOL_CLUSTER) -> LabeledBasis:
    """Full pipeline for a built-in family."""
    return _cached_basis(family.model, family.L, float(tol_cluster))


@lru_cache(maxsize=32)
def _cached_basis(model, L, tol_cluster):
    family = make_family(model, L)
    raw = simultaneous_eigenbasis(family.labeling_sums, tol_cluster=tol_cluster)
    if family.has_real_structure:
        raw = realify(raw)
    return label_irreps(raw, model)


def model_basis(model: str, L: int, tol_cluster: float = TOL_CLUSTER) -> LabeledBasis:
    return _cached_basis(model, L, float(tol_cluster))


@dataclass(frozen=True)
class DecompositionReport:
    model: str
    L: int
    entries: tuple  # (IrrepLabel, d_p, nu_p)

    @property
    def n_r(self) -> int:
        return len(self.entries)

    def degeneracy(self, p: IrrepLabel) -> int:
        for q, _, nu in self.entries:
            if q == p:
                return nu
        return 0

    def total_dim(self) -> int:
        return sum(d * nu for _, d, nu in self.entries)

    def formula(self) -> str:
        parts = []
        for p, d, nu in self.entries:
            name = str(d) if p.kind == "su2" else str(p)
            parts.append(f"{nu}×{name}")
        return ", ".join(parts)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "L": self.L,
            "n_r": self.n_r,
            "irreps": [{"label": str(p), "dim": d, "nu": nu} for p, d, nu in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_markdown(self) -> str:
        rows = ["| L | Decomposition of Hilbert space |", "|---|---|"]
        rows.append(f"| {self.L} | {self.formula()} |")
        return "\n".join(rows)


def decomposition_report(model: str, L: int, tol_cluster: float = TOL_CLUSTER) -> DecompositionReport:
    if not 2 <= L <= 12:
        raise ValueError(f"L must lie in 2..12, got {L}")
    basis = model_basis(model, L, tol_cluster)
    entries = tuple((p, p.dim, nu) for p, nu in basis.irreps().items())
    report = DecompositionReport(model, L, entries)
    if report.total_dim() != 2 ** L:
        raise LabelingError(f"irrep dimensions sum to {report.total_dim()}, expected {2 ** L}")
    return report


@dataclass(frozen=True)
class StateClassification:
    labels: tuple  # Lambda(psi), ordered
    weights: dict  # IrrepLabel -> total squared projection

    @property
    def is_single(self) -> bool:
        return len(self.labels) == 1


def classify_state(psi, basis: LabeledBasis, tol_proj: float = TOL_PROJ) -> StateClassification:
    """Irreps carrying more than ``tol_proj`` of the state's squared norm."""
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    c = basis.vectors.conj().T @ amps
    w = np.abs(c) ** 2
    weights: dict = {}
    for lab, wk in zip(basis.labels, w):
        weights[lab.irrep] = weights.get(lab.irrep, 0.0) + float(wk)
    weights = {p: weights[p] for p in sorted(weights, key=IrrepLabel.sort_key)}
    present = tuple(p for p, wt in weights.items() if wt > tol_proj)
    return StateClassification(present, weights)


__all__ = [
    "BasisLabel",
    "DecompositionReport",
    "IrrepLabel",
    "LabeledBasis",
    "LabelingError",
    "StateClassification",
    "UnresolvedDegeneracyError",
    "build_basis",
    "classify_state",
    "decomposition_report",
    "fix_phases",
    "label_irreps",
    "model_basis",
    "realify",
    "simultaneous_eigenbasis",
]
