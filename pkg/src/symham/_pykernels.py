"""Pure numpy implementation of the Pauli-string kernels (fallback)."""
import numpy as np


def _signs(n_sites, smask):
    idx = np.arange(1 << n_sites, dtype=np.uint64)
    v = idx & np.uint64(smask)
    parity = np.zeros(idx.shape, dtype=np.uint64)
    for b in range(n_sites):
        parity ^= (v >> np.uint64(b)) & np.uint64(1)
    return 1.0 - 2.0 * parity.astype(np.float64)


def pauli_matrix(n_sites, xmask, smask, phase):
    d = 1 << n_sites
    cols = np.arange(d, dtype=np.uint64)
    rows = (cols ^ np.uint64(xmask)).astype(np.intp)
    out = np.zeros((d, d), dtype=np.complex128)
    out[rows, cols.astype(np.intp)] = phase * _signs(n_sites, smask)
    return out


def pauli_sum_matrix(n_sites, xmasks, smasks, phases):
    """Dense matrix of ``sum_s phase_s * P_s``; real dtype when every phase is real."""
    d = 1 << n_sites
    ph = np.asarray(phases)
    if np.iscomplexobj(ph) and np.any(ph.imag != 0):
        out = np.zeros((d, d), dtype=np.complex128)
    else:
        out = np.zeros((d, d), dtype=np.float64)
        ph = np.real(ph)
    cols = np.arange(d, dtype=np.uint64)
    icols = cols.astype(np.intp)
    for x, s, p in zip(np.asarray(xmasks, dtype=np.uint64), np.asarray(smasks, dtype=np.uint64), ph):
        out[(cols ^ x).astype(np.intp), icols] += p * _signs(n_sites, int(s))
    return out


def apply_pauli_sum(n_sites, xmasks, smasks, phases, states):
    """Apply ``sum_s phase_s * P_s`` to the columns of ``states`` (shape (d, k))."""
    st = np.asarray(states)
    squeeze = st.ndim == 1
    if squeeze:
        st = st[:, None]
    d = 1 << n_sites
    if st.shape[0] != d:
        raise ValueError(f"state dimension {st.shape[0]} does not match {n_sites} sites")
    ph = np.asarray(phases)
    if np.iscomplexobj(st) or (np.iscomplexobj(ph) and np.any(ph.imag != 0)):
        dtype = np.complex128
    else:
        dtype = np.float64
        ph = np.real(ph)
    st = st.astype(dtype, copy=False)
    out = np.zeros(st.shape, dtype=dtype)
    cols = np.arange(d, dtype=np.uint64)
    for x, s, p in zip(np.asarray(xmasks, dtype=np.uint64), np.asarray(smasks, dtype=np.uint64), ph):
        rows = (cols ^ x).astype(np.intp)
        out[rows] += (p * _signs(n_sites, int(s)))[:, None] * st
    return out[:, 0] if squeeze else out
