# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Pauli-string kernels.

A Pauli string on L sites is a signed permutation matrix: column ``j`` has a
single nonzero entry at row ``j ^ xmask`` equal to ``phase * (-1)**parity(j & smask)``.
"""
import numpy as np

ctypedef unsigned long long u64


cdef inline int _parity(u64 v) noexcept nogil:
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return <int>(v & 1)


def pauli_matrix(int n_sites, u64 xmask, u64 smask, double complex phase):
    cdef Py_ssize_t d = (<Py_ssize_t>1) << n_sites
    cdef Py_ssize_t j
    out = np.zeros((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] m = out
    with nogil:
        for j in range(d):
            if _parity(<u64>j & smask):
                m[<Py_ssize_t>(<u64>j ^ xmask), j] = -phase
            else:
                m[<Py_ssize_t>(<u64>j ^ xmask), j] = phase
    return out


def pauli_sum_matrix(int n_sites, xmasks, smasks, phases):
    """Dense matrix of ``sum_s phase_s * P_s``; real dtype when every phase is real."""
    cdef Py_ssize_t d = (<Py_ssize_t>1) << n_sites
    cdef const u64[::1] xm = np.ascontiguousarray(xmasks, dtype=np.uint64)
    cdef const u64[::1] sm = np.ascontiguousarray(smasks, dtype=np.uint64)
    ph = np.asarray(phases)
    cdef Py_ssize_t s, j
    cdef double[:, ::1] mr
    cdef double complex[:, ::1] mc
    cdef const double[::1] pr
    cdef const double complex[::1] pc
    if np.iscomplexobj(ph) and np.any(ph.imag != 0):
        out = np.zeros((d, d), dtype=np.complex128)
        mc = out
        pc = np.ascontiguousarray(ph, dtype=np.complex128)
        with nogil:
            for s in range(xm.shape[0]):
                for j in range(d):
                    if _parity(<u64>j & sm[s]):
                        mc[<Py_ssize_t>(<u64>j ^ xm[s]), j] = mc[<Py_ssize_t>(<u64>j ^ xm[s]), j] - pc[s]
                    else:
                        mc[<Py_ssize_t>(<u64>j ^ xm[s]), j] = mc[<Py_ssize_t>(<u64>j ^ xm[s]), j] + pc[s]
    else:
        out = np.zeros((d, d), dtype=np.float64)
        mr = out
        pr = np.ascontiguousarray(np.real(ph), dtype=np.float64)
        with nogil:
            for s in range(xm.shape[0]):
                for j in range(d):
                    if _parity(<u64>j & sm[s]):
                        mr[<Py_ssize_t>(<u64>j ^ xm[s]), j] -= pr[s]
                    else:
                        mr[<Py_ssize_t>(<u64>j ^ xm[s]), j] += pr[s]
    return out


cdef void _apply_real(const double[:, ::1] src, double[:, ::1] dst,
                      const u64[::1] xm, const u64[::1] sm,
                      const double[::1] ph) noexcept nogil:
    cdef Py_ssize_t d = src.shape[0], k = src.shape[1]
    cdef Py_ssize_t s, j, c, row
    cdef double f
    for s in range(xm.shape[0]):
        for j in range(d):
            f = -ph[s] if _parity(<u64>j & sm[s]) else ph[s]
            row = <Py_ssize_t>(<u64>j ^ xm[s])
            for c in range(k):
                dst[row, c] += f * src[j, c]


cdef void _apply_complex(const double complex[:, ::1] src, double complex[:, ::1] dst,
                         const u64[::1] xm, const u64[::1] sm,
                         const double complex[::1] ph) noexcept nogil:
    cdef Py_ssize_t d = src.shape[0], k = src.shape[1]
    cdef Py_ssize_t s, j, c, row
    cdef double complex f
    for s in range(xm.shape[0]):
        for j in range(d):
            f = -ph[s] if _parity(<u64>j & sm[s]) else ph[s]
            row = <Py_ssize_t>(<u64>j ^ xm[s])
            for c in range(k):
                dst[row, c] = dst[row, c] + f * src[j, c]


def apply_pauli_sum(int n_sites, xmasks, smasks, phases, states):
    """Apply ``sum_s phase_s * P_s`` to the columns of ``states`` (shape (d, k))."""
    xm = np.ascontiguousarray(xmasks, dtype=np.uint64)
    sm = np.ascontiguousarray(smasks, dtype=np.uint64)
    ph = np.asarray(phases)
    st = np.asarray(states)
    squeeze = st.ndim == 1
    if squeeze:
        st = st[:, None]
    if st.shape[0] != (1 << n_sites):
        raise ValueError(f"state dimension {st.shape[0]} does not match {n_sites} sites")
    if np.iscomplexobj(st) or np.iscomplexobj(ph) and np.any(ph.imag != 0):
        src_c = np.ascontiguousarray(st, dtype=np.complex128)
        out_c = np.zeros_like(src_c)
        _apply_complex(src_c, out_c, xm, sm, np.ascontiguousarray(ph, dtype=np.complex128))
        out = out_c
    else:
        src_r = np.ascontiguousarray(st, dtype=np.float64)
        out_r = np.zeros_like(src_r)
        _apply_real(src_r, out_r, xm, sm, np.ascontiguousarray(np.real(ph), dtype=np.float64))
        out = out_r
    return out[:, 0] if squeeze else out
