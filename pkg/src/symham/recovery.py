"""Constraint matrices, rank tests and coupling recovery from one eigenstate."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basis import (
    TOL_CLUSTER,
    TOL_PROJ,
    IrrepLabel,
    LabeledBasis,
    StateClassification,
    classify_state,
    decomposition_report,
    fmt_half,
    model_basis,
)
from .families import HamiltonianFamily, ParameterVector, assemble, make_family, sample_parameters, trial_seed

TOL_RANK = 1e-9
TOL_EIG = 1e-10
TOL_ROW = 1e-12
SCHEMA_VERSION = 1

MODES = ("symmetry_blocks", "full_basis")


class SectorError(ValueError):
    """Requested symmetry sector does not exist for this chain length."""


@dataclass(frozen=True, eq=False)
class EigenstateRecord:
    state: np.ndarray
    energy: float
    params: ParameterVector
    index: int
    classification: StateClassification | None = None

    def __post_init__(self):
        s = np.array(self.state)
        s.setflags(write=False)
        object.__setattr__(self, "state", s)

    @property
    def solution(self) -> np.ndarray:
        """Ground-truth x* = (a*, E)."""
        return np.append(self.params.couplings, self.energy)


def eigenstates(f: HamiltonianFamily, theta: ParameterVector, basis: LabeledBasis | None = None,
                tol_eig: float = TOL_EIG, tol_proj: float = TOL_PROJ) -> list:
    """All eigenstates of H(theta), energies ascending.

    Vectors inside a degenerate level are whatever the dense solver returns.
    """
    H = assemble(f, theta).matrix
    w, V = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(w))))
    resid = np.linalg.norm(H @ V - V * w, axis=0)
    if resid.max() > tol_eig * scale:
        raise np.linalg.LinAlgError(f"eigenvector residual {resid.max():.2e} exceeds tolerance")
    records = []
    for k in range(len(w)):
        cls = classify_state(V[:, k], basis, tol_proj) if basis is not None else None
        records.append(EigenstateRecord(V[:, k], float(w[k]), theta, k, cls))
    return records


@dataclass(frozen=True)
class RowProvenance:
    basis_index: int
    irrep: IrrepLabel | None
    copy: int | None
    component: int | None
    part: str  # "re" or "im"


@dataclass(frozen=True, eq=False)
class ConstraintMatrix:
    """Real matrix Q with N + 1 columns; Q x = 0 for x = (a_1..a_N, E)."""

    rows: np.ndarray
    provenance: tuple
    dropped: tuple
    N: int
    mode: str
    blocks: tuple = ()
    ground_truth: np.ndarray | None = None
    model: str = ""
    L: int = 0

    def __post_init__(self):
        r = np.array(self.rows, dtype=float).reshape(-1, self.N + 1)
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def block_rows(self, p: IrrepLabel) -> np.ndarray:
        keep = [k for k, prov in enumerate(self.provenance) if prov.irrep == p]
        return self.rows[keep]


def build_constraint_matrix(f: HamiltonianFamily, rec: EigenstateRecord, basis: LabeledBasis,
                            mode: str = "symmetry_blocks", tol_proj: float = TOL_PROJ,
                            tol_row: float = TOL_ROW) -> ConstraintMatrix:
    """Project H psi = E psi onto basis vectors, one real and one imaginary row each.

    ``symmetry_blocks`` keeps the vectors of the irreps in Lambda(psi);
    ``full_basis`` keeps all of them. Rows whose largest entry is at most
    ``tol_row`` times the largest entry of Q are dropped and recorded.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    psi = rec.state
    if psi.shape[0] != basis.dim or basis.dim != f.dim:
        raise ValueError("state, basis and family dimensions differ")
    M = np.column_stack([f.apply_terms(psi), -psi])
    if mode == "symmetry_blocks":
        lam = classify_state(psi, basis, tol_proj).labels
        keep = [k for k, lab in enumerate(basis.labels) if lab.irrep in lam]
    else:
        lam = tuple(basis.irreps())
        keep = list(range(basis.dim))
    C = basis.vectors[:, keep].conj().T @ M
    re = np.real(C)
    im = np.imag(C) if np.iscomplexobj(C) else np.zeros_like(re)
    thr = tol_row * float(np.max(np.abs(C))) if C.size else 0.0

    rows, prov, dropped = [], [], []
    for j, k in enumerate(keep):
        lab = basis.labels[k]
        for part, row in (("re", re[j]), ("im", im[j])):
            tag = RowProvenance(k, lab.irrep, lab.copy, lab.component, part)
            if np.max(np.abs(row)) <= thr:
                dropped.append(tag)
            else:
                rows.append(row)
                prov.append(tag)
    return ConstraintMatrix(
        np.array(rows).reshape(-1, f.N + 1), tuple(prov), tuple(dropped), f.N, mode,
        blocks=tuple(lam), ground_truth=rec.solution, model=f.model, L=f.L,
    )


def numerical_rank(Q, tol_rank: float = TOL_RANK):
    """(rank, singular values): count of singular values above tol_rank * sigma_max."""
    rows = Q.rows if isinstance(Q, ConstraintMatrix) else np.asarray(Q, dtype=float)
    if rows.size == 0:
        return 0, np.zeros(0)
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[0] == 0:
        return 0, sv
    return int(np.count_nonzero(sv > tol_rank * sv[0])), sv


def misalignment(x, y) -> float:
    """1 - |cos| between two vectors."""
    return max(0.0, float(1.0 - abs(np.dot(x, y)) / (np.linalg.norm(x) * np.linalg.norm(y))))


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    singular_values: np.ndarray
    rank: int
    N: int
    verdict: str
    solution: ParameterVector
    gram_eigenvalues: np.ndarray  # descending, D_11 >= ... >= D_{N+1,N+1}
    residual: float
    alignment: float | None = None
    coupling_alignment: float | None = None
    n_rows: int = 0
    n_dropped: int = 0
    blocks: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def recoverable(self) -> bool:
        return self.verdict == "recoverable"

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "N": self.N,
            "rank": self.rank,
            "verdict": self.verdict,
            "singular_values": [float(s) for s in self.singular_values],
            "gram_eigenvalues": [float(s) for s in self.gram_eigenvalues],
            "solution": self.solution.to_dict(),
            "residual": self.residual,
            "alignment": self.alignment,
            "coupling_alignment": self.coupling_alignment,
            "n_rows": self.n_rows,
            "n_dropped": self.n_dropped,
            "blocks": [str(p) for p in self.blocks],
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def solve_recovery(Q: ConstraintMatrix, tol_rank: float = TOL_RANK) -> RecoveryReport:
    """Minimize x^T Q^T Q x over sum_n a_n^2 = 1 via the lowest eigenvector of Q^T Q.

    The verdict is ``recoverable`` iff rank Q = N; otherwise the returned
    minimizer is one of many.
    """
    N = Q.N
    G = Q.rows.T @ Q.rows
    w, U = np.linalg.eigh(G)
    x = U[:, 0].copy()
    norm = np.linalg.norm(x[:N])
    if norm > 0:
        x /= norm
    lead = int(np.argmax(np.abs(x[:N])))
    if x[lead] < 0:
        x = -x
    rank, sv = numerical_rank(Q, tol_rank)
    alignment = coupling_alignment = None
    if Q.ground_truth is not None:
        alignment = misalignment(x, Q.ground_truth)
        coupling_alignment = misalignment(x[:N], Q.ground_truth[:N])
    return RecoveryReport(
        singular_values=sv,
        rank=rank,
        N=N,
        verdict="recoverable" if rank == N else "unrecoverable",
        solution=ParameterVector(x[:N], x[N]),
        gram_eigenvalues=w[::-1].copy(),
        residual=float(np.linalg.norm(Q.rows @ x)) if Q.n_rows else 0.0,
        alignment=alignment,
        coupling_alignment=coupling_alignment,
        n_rows=Q.n_rows,
        n_dropped=len(Q.dropped),
        blocks=Q.blocks,
    )


# -- closed-form predictors -------------------------------------------------

def _check_spin_sector(L: int, S) -> Fraction:
    S = Fraction(S)
    if S < 0 or S > Fraction(L, 2) or (2 * S) % 2 != L % 2:
        raise SectorError(f"no total-spin sector S={S} for L={L}")
    return S


def predict_xxx(L: int, S, tol_cluster: float = TOL_CLUSTER) -> str:
    """'O' iff nu_S >= N = L - 1."""
    S = _check_spin_sector(L, S)
    nu = decomposition_report("xxx", L, tol_cluster).degeneracy(IrrepLabel("su2", S))
    if nu == 0:
        raise SectorError(f"no total-spin sector S={S} for L={L}")
    return "O" if nu >= L - 1 else "X"


def predict_xxz(L: int, label: IrrepLabel, tol_cluster: float = TOL_CLUSTER) -> str:
    """'O' iff nu_label >= N = 2(L - 1)."""
    nu = decomposition_report("xxz", L, tol_cluster).degeneracy(label)
    if nu == 0:
        raise SectorError(f"no XXZ sector {label} for L={L}")
    return "O" if nu >= 2 * (L - 1) else "X"


def m0_parity(L: int, S) -> int:
    """Pi_x eigenvalue of the m = 0 member of a spin-S multiplet (even L)."""
    return 1 if (L // 2 + int(Fraction(S))) % 2 == 0 else -1


def accidental_equation_count(L: int, S, tol_cluster: float = TOL_CLUSTER) -> int:
    """sum over |m| <= S of nu_|m|, counting one parity sector at m = 0."""
    S = _check_spin_sector(L, S)
    report = decomposition_report("xxz", L, tol_cluster)
    total = 0
    absm = S
    while absm >= 0:
        if absm == 0:
            total += report.degeneracy(IrrepLabel("u1", 0, m0_parity(L, S)))
        else:
            total += report.degeneracy(IrrepLabel("u1", absm))
        absm -= 1
    return total


def predict_accidental(L: int, S, tol_cluster: float = TOL_CLUSTER) -> str:
    """Necessary condition only: 'O' iff the available equations number at least 2(L - 1)."""
    return "O" if accidental_equation_count(L, S, tol_cluster) >= 2 * (L - 1) else "X"


# -- censuses ---------------------------------------------------------------

def verdict_of(flags) -> str:
    flags = set(flags)
    if flags == {True}:
        return "O"
    if flags == {False}:
        return "X"
    return "OX"


@dataclass
class CensusCell:
    """Aggregate over every eigenstate that fell into one sector."""

    sector: Fraction
    ranks: set = field(default_factory=set)
    outcomes: set = field(default_factory=set)
    states: int = 0
    worst_alignment: float = 0.0
    examples: dict = field(default_factory=dict)  # rank -> singular values of one instance

    @property
    def verdict(self) -> str:
        return verdict_of(self.outcomes)

    def add(self, report: RecoveryReport) -> None:
        self.states += 1
        self.ranks.add(report.rank)
        self.outcomes.add(report.recoverable)
        if report.recoverable and report.coupling_alignment is not None:
            self.worst_alignment = max(self.worst_alignment, report.coupling_alignment)
        if report.rank not in self.examples:
            self.examples[report.rank] = [float(s) for s in report.singular_values]

    def to_dict(self) -> dict:
        return {
            "sector": fmt_half(self.sector),
            "ranks": sorted(self.ranks),
            "verdict": self.verdict,
            "states": self.states,
            "worst_alignment": self.worst_alignment,
            "example_spectra": {str(k): v for k, v in sorted(self.examples.items())},
        }


@dataclass
class InstanceChecks:
    """Per-instance invariant bookkeeping gathered while a census runs."""

    instances: int = 0
    max_kernel_ratio: float = 0.0
    imaginary_rows: int = 0
    rank_bound_violations: int = 0
    block_rank_violations: int = 0
    alignment_violations: int = 0  # recoverable but 1 - |cos| > 1e-8
    null_violations: int = 0  # unrecoverable yet kernel of Q^T Q is 1-dimensional
    mode_checked: int = 0
    mode_mismatches: list = field(default_factory=list)

    def record(self, Q: ConstraintMatrix, report: RecoveryReport, basis: LabeledBasis,
               tol_rank: float, full_rank: int | None = None, where: str = "") -> None:
        self.instances += 1
        if Q.n_rows:
            qnorm = float(np.linalg.norm(Q.rows, 2))
            kres = float(np.linalg.norm(Q.rows @ Q.ground_truth))
            if qnorm > 0:
                self.max_kernel_ratio = max(self.max_kernel_ratio, kres / qnorm)
        self.imaginary_rows += sum(1 for p in Q.provenance if p.part == "im")
        if report.rank > Q.N or report.rank > Q.n_rows:
            self.rank_bound_violations += 1
        nu = basis.irreps()
        for p in Q.blocks:
            block = Q.block_rows(p)
            if block.size and numerical_rank(block, tol_rank)[0] > nu[p]:
                self.block_rank_violations += 1
        null = (Q.N + 1) - report.rank
        if report.recoverable:
            if report.coupling_alignment is not None and report.coupling_alignment > 1e-8:
                self.alignment_violations += 1
        elif null < 2:
            self.null_violations += 1
        if full_rank is not None:
            self.mode_checked += 1
            if full_rank != report.rank:
                self.mode_mismatches.append({"where": where, "blocks": report.rank, "full": full_rank})

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "max_kernel_ratio": self.max_kernel_ratio,
            "imaginary_rows": self.imaginary_rows,
            "rank_bound_violations": self.rank_bound_violations,
            "block_rank_violations": self.block_rank_violations,
            "alignment_violations": self.alignment_violations,
            "null_violations": self.null_violations,
            "mode_checked": self.mode_checked,
            "mode_mismatches": self.mode_mismatches,
        }


def _sector_of(cls: StateClassification, model: str) -> Fraction:
    if not cls.is_single:
        raise SectorError(f"state spans several irreps: {[str(p) for p in cls.labels]}")
    return cls.labels[0].value


def recovery_census(model: str, L: int, trials: int = 20, seed: int = 0, tol_rank: float = TOL_RANK,
                    tol_proj: float = TOL_PROJ, tol_cluster: float = TOL_CLUSTER,
                    checks: InstanceChecks | None = None, check_modes: bool = False) -> dict:
    """Recover from every eigenstate of ``trials`` generic instances.

    Returns ``{sector: CensusCell}`` keyed by total spin S (xxx) or |m| (xxz).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    f = make_family(model, L)
    basis = model_basis(model, L, tol_cluster)
    cells: dict = {}
    for t in range(trials):
        theta = sample_parameters(f, trial_seed(seed, L, t), "generic")
        for rec in eigenstates(f, theta, basis, tol_proj=tol_proj):
            sector = _sector_of(rec.classification, model)
            Q = build_constraint_matrix(f, rec, basis, "symmetry_blocks", tol_proj)
            report = solve_recovery(Q, tol_rank)
            cells.setdefault(sector, CensusCell(sector)).add(report)
            if checks is not None:
                full = None
                if check_modes:
                    full = numerical_rank(build_constraint_matrix(f, rec, basis, "full_basis", tol_proj), tol_rank)[0]
                checks.record(Q, report, basis, tol_rank, full, where=f"{model} L={L} trial={t} state={rec.index}")
    return {s: cells[s] for s in sorted(cells)}


def rank_census(L: int, trials: int = 20, seed: int = 0, tol_rank: float = TOL_RANK,
                tol_proj: float = TOL_PROJ, tol_cluster: float = TOL_CLUSTER,
                checks: InstanceChecks | None = None, check_modes: bool = False) -> dict:
    """XXX instances learned as members of the XXZ family.

    Each eigenstate is sorted by total spin S (against the XXX basis) and its
    constraint matrix is built from the XXZ irreps it touches. Returns
    ``{S: CensusCell}``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    f = make_family("xxz", L)
    xxz_basis = model_basis("xxz", L, tol_cluster)
    xxx_basis = model_basis("xxx", L, tol_cluster)
    cells: dict = {}
    for t in range(trials):
        theta = sample_parameters(f, trial_seed(seed, L, t), "accidental_xxx")
        for rec in eigenstates(f, theta, None):
            S = _sector_of(classify_state(rec.state, xxx_basis, tol_proj), "xxx")
            Q = build_constraint_matrix(f, rec, xxz_basis, "symmetry_blocks", tol_proj)
            report = solve_recovery(Q, tol_rank)
            cells.setdefault(S, CensusCell(S)).add(report)
            if checks is not None:
                full = None
                if check_modes:
                    full = numerical_rank(build_constraint_matrix(f, rec, xxz_basis, "full_basis", tol_proj), tol_rank)[0]
                checks.record(Q, report, xxz_basis, tol_rank, full, where=f"accidental L={L} trial={t} state={rec.index}")
    return {s: cells[s] for s in sorted(cells)}
