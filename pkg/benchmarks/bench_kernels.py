"""Time the Pauli kernels: compiled vs numpy fallback vs dense Kronecker products.

    python3 benchmarks/bench_kernels.py --L 8 10 12 --repeat 5
"""
import argparse
import importlib.util
import timeit

import numpy as np

from symham.families import xxz_family
from symham.kernels import get_backend

_P = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1j], [1j, 0.0]]),
    "Z": np.diag([1.0, -1.0]),
}


def dense_sum(strings):
    total = 0
    for s in strings:
        m = np.array([[s.coefficient]], dtype=complex)
        for a in s.letters:
            m = np.kron(m, _P[a])
        total = total + m
    return total


def bench(L, repeat, width):
    strings = [s for t in xxz_family(L).term_sums for s in t.strings]
    xm = np.array([s.masks()[0] for s in strings], dtype=np.uint64)
    sm = np.array([s.masks()[1] for s in strings], dtype=np.uint64)
    ph = np.array([s.masks()[2] for s in strings], dtype=complex).real.copy()
    x = np.random.default_rng(0).standard_normal((1 << L, width))
    rows = []
    names = ["python"] + (["cython"] if importlib.util.find_spec("symham._ckernels") else [])
    for name in names:
        be = get_backend(name)
        t_mat = min(timeit.repeat(lambda: be.pauli_sum_matrix(L, xm, sm, ph), number=1, repeat=repeat))
        t_app = min(timeit.repeat(lambda: be.apply_pauli_sum(L, xm, sm, ph, x), number=1, repeat=repeat))
        rows.append((name, t_mat, t_app))
    if L <= 10:
        t_dense = min(timeit.repeat(lambda: dense_sum(strings), number=1, repeat=max(1, repeat // 2)))
        H = dense_sum(strings)
        t_mv = min(timeit.repeat(lambda: H @ x, number=1, repeat=repeat))
        rows.append(("dense kron", t_dense, t_mv))
    return len(strings), rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, nargs="+", default=[6, 8, 10, 12])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--width", type=int, default=8, help="columns in the applied state block")
    args = ap.parse_args(argv)
    print(f"{'L':>3} {'strings':>7} {'backend':<11} {'build H (ms)':>13} {'apply (ms)':>11}")
    for L in args.L:
        n, rows = bench(L, args.repeat, args.width)
        for name, t_mat, t_app in rows:
            print(f"{L:>3} {n:>7} {name:<11} {1e3 * t_mat:>13.3f} {1e3 * t_app:>11.3f}")


if __name__ == "__main__":
    main()
