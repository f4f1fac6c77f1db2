"""Elementary operators for spin-1/2 chains.

Basis convention: computational basis states are indexed by bit strings with
site 1 as the most significant bit, and bit value 0 is spin up (sigma^z = +1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from . import kernels

MAX_SITES = 12

TOL_HERM = 1e-12
TOL_NORM = 1e-10


def _check_sites(L, minimum=1):
    if not isinstance(L, (int, np.integer)) or L < minimum:
        raise ValueError(f"number of sites must be an integer >= {minimum}, got {L!r}")
    if L > MAX_SITES:
        raise ValueError(f"number of sites {L} exceeds the dense-storage cap {MAX_SITES}")


def _frozen(a):
    a = np.array(a, copy=True)
    if np.iscomplexobj(a) and not np.any(a.imag):
        a = np.ascontiguousarray(a.real)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix on a chain of spin-1/2 sites.

    Entries are stored with a real dtype whenever the matrix has no
    imaginary part; the array is read-only.
    """

    matrix: np.ndarray
    label: str = ""
    tol_herm: float | None = field(default=None, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        d = m.shape[0]
        if d < 2 or d & (d - 1):
            raise ValueError(f"operator dimension {d} is not a power of 2")
        scale = float(np.max(np.abs(m))) if m.size else 0.0
        tol = (TOL_HERM if self.tol_herm is None else self.tol_herm) * scale
        err = float(np.max(np.abs(m - m.conj().T)))
        if err > tol:
            raise ValueError(f"operator {self.label!r} is not Hermitian (|A - A^H|_max = {err:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix)

    def __matmul__(self, other):
        if isinstance(other, HermitianOperator):
            return self.matrix @ other.matrix
        return self.matrix @ np.asarray(other)

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class PauliString:
    """``coefficient * P_1 (x) P_2 (x) ... (x) P_L`` with P_l in {I, X, Y, Z}."""

    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        letters = "".join(self.letters).upper()
        if not letters:
            raise ValueError("a Pauli string needs at least one site")
        bad = set(letters) - set("IXYZ")
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)}")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @classmethod
    def on_sites(cls, L: int, ops: Mapping[int, str], coefficient: float = 1.0) -> "PauliString":
        """Build a string from a ``{site: letter}`` map with 1-based sites."""
        letters = ["I"] * L
        for site, letter in ops.items():
            if not 1 <= site <= L:
                raise ValueError(f"site {site} outside 1..{L}")
            letters[site - 1] = letter
        return cls("".join(letters), coefficient)

    @property
    def length(self) -> int:
        return len(self.letters)

    def masks(self) -> tuple[int, int, complex]:
        """Return (flip mask, sign mask, phase) for the signed-permutation form."""
        L = self.length
        xmask = smask = 0
        n_y = 0
        for site, letter in enumerate(self.letters):
            bit = 1 << (L - 1 - site)
            if letter in "XY":
                xmask |= bit
            if letter in "YZ":
                smask |= bit
            n_y += letter == "Y"
        return xmask, smask, self.coefficient * (1j) ** n_y


def materialize_pauli_string(p: PauliString) -> HermitianOperator:
    _check_sites(p.length)
    xmask, smask, phase = p.masks()
    m = kernels.pauli_matrix(p.length, xmask, smask, complex(phase))
    return HermitianOperator(m, label=p.letters)


@dataclass(frozen=True)
class PauliSum:
    """Real linear combination of Pauli strings on a common chain.

    Applied to state blocks through the Pauli kernels without forming the
    dense matrix; ``to_operator`` materializes it.
    """

    strings: tuple
    label: str = ""

    def __post_init__(self):
        strings = tuple(self.strings)
        if not strings:
            raise ValueError("empty Pauli sum")
        L = strings[0].length
        if any(s.length != L for s in strings):
            raise ValueError("Pauli strings of different lengths")
        _check_sites(L)
        object.__setattr__(self, "strings", strings)

    @property
    def n_sites(self) -> int:
        return self.strings[0].length

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @cached_property
    def _packed(self):
        packed = [s.masks() for s in self.strings]
        xm = np.array([p[0] for p in packed], dtype=np.uint64)
        sm = np.array([p[1] for p in packed], dtype=np.uint64)
        ph = np.array([p[2] for p in packed], dtype=complex)
        if not np.any(ph.imag):
            ph = ph.real.copy()
        return xm, sm, ph

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self._packed[2])

    def apply(self, states):
        """Act on a vector or on the columns of a (d, k) block."""
        return kernels.apply_pauli_sum(self.n_sites, *self._packed, states)

    def to_operator(self) -> HermitianOperator:
        return HermitianOperator(kernels.pauli_sum_matrix(self.n_sites, *self._packed), label=self.label)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.strings + other.strings, label=f"{self.label}+{other.label}")


def spin_component_sum(axis: str, L: int) -> PauliSum:
    _check_sites(L)
    axis = axis.lower()
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    strings = [PauliString.on_sites(L, {l: axis.upper()}, 0.5) for l in range(1, L + 1)]
    return PauliSum(strings, label=f"S_{axis}")


def total_spin_component(axis: str, L: int) -> HermitianOperator:
    """Return S_axis = 1/2 sum_l sigma_l^axis."""
    return spin_component_sum(axis, L).to_operator()


def partial_spin_squared_sum(n: int, L: int) -> PauliSum:
    _check_sites(L)
    if not 2 <= n <= L:
        raise ValueError(f"prefix length must satisfy 2 <= n <= L, got n={n}, L={L}")
    # S_n^2 = 3n/4 + 1/2 sum_{k<l<=n} (XX + YY + ZZ)_{kl}
    strings = [PauliString("I" * L, 0.75 * n)]
    for k in range(1, n + 1):
        for l in range(k + 1, n + 1):
            strings.extend(PauliString.on_sites(L, {k: a, l: a}, 0.5) for a in "XYZ")
    return PauliSum(strings, label=f"S_{n}^2")


def partial_spin_squared(n: int, L: int) -> HermitianOperator:
    """Squared total spin of the first ``n`` sites, identity on the rest."""
    return partial_spin_squared_sum(n, L).to_operator()


def total_spin_squared_sum(L: int) -> PauliSum:
    if L == 1:
        return PauliSum([PauliString("I", 0.75)], label="S^2")
    return PauliSum(partial_spin_squared_sum(L, L).strings, label="S^2")


def total_spin_squared(L: int) -> HermitianOperator:
    return total_spin_squared_sum(L).to_operator()


def sz_squared_sum(L: int) -> PauliSum:
    """S_z^2 = L/4 + 1/2 sum_{k<l} Z_k Z_l; stands in for |S_z| in labeling sets."""
    _check_sites(L)
    strings = [PauliString("I" * L, 0.25 * L)]
    strings.extend(
        PauliString.on_sites(L, {k: "Z", l: "Z"}, 0.5)
        for k in range(1, L + 1)
        for l in range(k + 1, L + 1)
    )
    return PauliSum(strings, label="S_z^2")


def parity_x_sum(L: int) -> PauliSum:
    _check_sites(L)
    return PauliSum([PauliString("X" * L)], label="Pi_x")


def parity_x(L: int) -> HermitianOperator:
    """Global spin flip: tensor product of sigma^x on every site."""
    return parity_x_sum(L).to_operator()


def zz_sum(i: int, j: int, L: int) -> PauliSum:
    """sigma_i^z sigma_j^z (1-based sites)."""
    _check_sites(L)
    return PauliSum([PauliString.on_sites(L, {i: "Z", j: "Z"})], label=f"Z{i}Z{j}")


def apply_spin_lowering(states, L: int) -> np.ndarray:
    """Apply S_- = sum_l sigma_l^- (spin up -> down, i.e. bit 0 -> 1)."""
    _check_sites(L)
    st = np.asarray(states)
    out = np.zeros_like(st)
    idx = np.arange(1 << L)
    for site in range(L):
        bit = 1 << (L - 1 - site)
        up = idx[(idx & bit) == 0]
        out[up | bit] += st[up]
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    tol_norm: float = field(default=TOL_NORM, repr=False)

    def __post_init__(self):
        a = _frozen(np.asarray(self.amplitudes).ravel())
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > self.tol_norm:
            raise ValueError(f"state is not normalized (norm = {norm!r})")
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def conjugate_state(psi: StateVector) -> StateVector:
    """Complex conjugation K in the computational basis."""
    return StateVector(np.conj(psi.amplitudes), tol_norm=psi.tol_norm)


def commutes(A: HermitianOperator, B: HermitianOperator, tol: float = 1e-10) -> bool:
    a = A.matrix if isinstance(A, HermitianOperator) else np.asarray(A)
    b = B.matrix if isinstance(B, HermitianOperator) else np.asarray(B)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a @ b - b @ a))) <= tol


def as_applicable(op):
    """Return a callable applying ``op`` (PauliSum, HermitianOperator or array) to a block."""
    if isinstance(op, PauliSum):
        return op.apply
    m = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    return lambda states: m @ states
