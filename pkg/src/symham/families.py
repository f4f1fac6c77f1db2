"""Parameterized XXX and XXZ chain families H(a) = sum_n a_n h_n."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .operators import (
    HermitianOperator,
    PauliString,
    PauliSum,
    _check_sites,
    commutes,
    parity_x_sum,
    partial_spin_squared_sum,
    spin_component_sum,
    sz_squared_sum,
    zz_sum,
)

MODELS = ("xxx", "xxz")
POLICIES = ("generic", "accidental_xxx")

# couplings are drawn from [-HIGH, -LOW] u [LOW, HIGH]
COUPLING_LOW = 0.1
COUPLING_HIGH = 2.0


def _bond(L, l, letters, label):
    return PauliSum([PauliString.on_sites(L, {l: a, l + 1: a}) for a in letters], label=label)


@dataclass(frozen=True, eq=False)
class HamiltonianFamily:
    """Known Hermitian terms with unknown real couplings.

    Terms, symmetry generators and labeling operators are held as Pauli sums;
    the dense ``HermitianOperator`` forms are built on first access.
    """

    model: str
    L: int
    term_sums: tuple
    symmetry_sums: tuple
    labeling_sums: tuple
    has_real_structure: bool = True
    policies: tuple = field(default=("generic",))

    @property
    def N(self) -> int:
        return len(self.term_sums)

    @property
    def dim(self) -> int:
        return 1 << self.L

    @property
    def labels(self) -> tuple:
        return tuple(t.label for t in self.term_sums)

    @cached_property
    def terms(self) -> tuple:
        return tuple(t.to_operator() for t in self.term_sums)

    @cached_property
    def symmetry_generators(self) -> tuple:
        return tuple(g.to_operator() for g in self.symmetry_sums)

    @cached_property
    def labeling_operators(self) -> tuple:
        return tuple(g.to_operator() for g in self.labeling_sums)

    def apply_terms(self, psi) -> np.ndarray:
        """Columns h_1 psi, ..., h_N psi as a (d, N) array."""
        psi = np.asarray(psi)
        if psi.ndim != 1:
            raise ValueError("apply_terms takes a single state vector")
        return np.column_stack([t.apply(psi) for t in self.term_sums])

    def check_invariants(self, tol_comm: float = 1e-10, tol_rank: float = 1e-9) -> None:
        """Raise ValueError if any family invariant fails."""
        d = self.dim
        mats = [t.matrix for t in self.terms]
        for t, m in zip(self.term_sums, mats):
            if abs(np.trace(m)) > tol_comm * d:
                raise ValueError(f"term {t.label} is not traceless")
        vecs = np.array([m.ravel() for m in mats])
        gram = (vecs.conj() @ vecs.T).real / d
        ev = np.linalg.eigvalsh(gram)
        if ev[0] <= tol_rank * ev[-1]:
            raise ValueError("family terms are linearly dependent")
        for g in self.symmetry_generators:
            for t, h in zip(self.term_sums, self.terms):
                if not commutes(g, h, tol_comm):
                    raise ValueError(f"generator {g.label} does not commute with {t.label}")
        ops = self.labeling_operators
        for i, a in enumerate(ops):
            for b in ops[i + 1:]:
                if not commutes(a, b, tol_comm):
                    raise ValueError(f"labeling operators {a.label} and {b.label} do not commute")
        if self.has_real_structure and any(not h.is_real for h in self.terms):
            raise ValueError("family flagged real but has complex terms")

    def describe(self) -> dict:
        return {
            "model": self.model,
            "L": self.L,
            "N": self.N,
            "terms": list(self.labels),
            "symmetry_generators": [g.label for g in self.symmetry_sums],
            "labeling_operators": [g.label for g in self.labeling_sums],
            "has_real_structure": self.has_real_structure,
        }


def xxx_family(L: int) -> HamiltonianFamily:
    """Heisenberg chain: one coupling J_l per bond on XX + YY + ZZ."""
    _check_sites(L, minimum=2)
    terms = tuple(_bond(L, l, "XYZ", f"XXX[{l},{l + 1}]") for l in range(1, L))
    sym = tuple(spin_component_sum(a, L) for a in "xyz")
    labeling = (spin_component_sum("z", L),) + tuple(partial_spin_squared_sum(n, L) for n in range(2, L + 1))
    return HamiltonianFamily("xxx", L, terms, sym, labeling)


def xxz_family(L: int) -> HamiltonianFamily:
    """XXZ chain: per bond a ZZ term then an XX + YY term."""
    _check_sites(L, minimum=2)
    terms = []
    for l in range(1, L):
        terms.append(_bond(L, l, "Z", f"ZZ[{l},{l + 1}]"))
        terms.append(_bond(L, l, "XY", f"XY[{l},{l + 1}]"))
    sym = (spin_component_sum("z", L), parity_x_sum(L))
    labeling = (sz_squared_sum(L), parity_x_sum(L)) + tuple(zz_sum(1, i, L) for i in range(2, L + 1))
    return HamiltonianFamily("xxz", L, tuple(terms), sym, labeling, policies=POLICIES)


def make_family(model: str, L: int) -> HamiltonianFamily:
    if model == "xxx":
        return xxx_family(L)
    if model == "xxz":
        return xxz_family(L)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Couplings a_1..a_N, plus the energy when this is a solution vector."""

    couplings: np.ndarray
    energy: float | None = None

    def __post_init__(self):
        a = np.array(self.couplings, dtype=float).ravel()
        a.setflags(write=False)
        object.__setattr__(self, "couplings", a)
        if self.energy is not None:
            object.__setattr__(self, "energy", float(self.energy))

    @property
    def N(self) -> int:
        return self.couplings.shape[0]

    def as_solution(self) -> np.ndarray:
        """x = (a_1, ..., a_N, E)."""
        if self.energy is None:
            raise ValueError("parameter vector has no energy")
        return np.append(self.couplings, self.energy)

    def scaled(self, c: float) -> "ParameterVector":
        return ParameterVector(c * self.couplings, None if self.energy is None else c * self.energy)

    def to_dict(self) -> dict:
        out = {"couplings": [float(x) for x in self.couplings]}
        if self.energy is not None:
            out["energy"] = self.energy
        return out


def assemble(f: HamiltonianFamily, theta: ParameterVector) -> HermitianOperator:
    """Dense H = sum_n a_n h_n."""
    a = theta.couplings if isinstance(theta, ParameterVector) else np.asarray(theta, dtype=float)
    if a.shape != (f.N,):
        raise ValueError(f"expected {f.N} couplings, got {a.shape[0] if a.ndim else 0}")
    strings = [
        PauliString(s.letters, s.coefficient * float(an))
        for an, term in zip(a, f.term_sums)
        for s in term.strings
    ]
    return HermitianOperator(PauliSum(strings).to_operator().matrix, label=f"H_{f.model}")


def sample_parameters(f: HamiltonianFamily, seed: int, policy: str = "generic") -> ParameterVector:
    """Draw couplings uniformly from [-2, -0.1] u [0.1, 2].

    ``accidental_xxx`` draws one value per bond and uses it for both the ZZ
    and the XY term, which makes an XXZ instance an XXX Hamiltonian.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown sampling policy {policy!r}")
    if policy == "accidental_xxx" and f.model != "xxz":
        raise ValueError("accidental_xxx sampling only applies to the XXZ family")
    n = f.L - 1 if policy == "accidental_xxx" else f.N
    rng = np.random.default_rng(seed)
    magnitude = rng.uniform(COUPLING_LOW, COUPLING_HIGH, size=n)
    sign = np.where(rng.integers(0, 2, size=n) == 1, 1.0, -1.0)
    values = sign * magnitude
    if policy == "accidental_xxx":
        values = np.repeat(values, 2)
    return ParameterVector(values)


def trial_seed(seed: int, *key: int) -> int:
    """Independent per-task seed derived from a base seed and an integer key."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
