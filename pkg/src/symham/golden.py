"""Golden reference tables, one string or dict per table id.

Recovery grids use O (succeeds), X (fails), OX (succeeds for some states
only) and "/" for sectors that do not exist at that chain length.
"""
from fractions import Fraction

SPIN_COLUMNS = ("0", "1/2", "1", "3/2", "2", "5/2", "3", "7/2")

# L -> {irrep dimension: degeneracy}
XXX_DECOMPOSITION = {
    2: {3: 1, 1: 1},
    3: {4: 1, 2: 2},
    4: {5: 1, 3: 3, 1: 2},
    5: {6: 1, 4: 4, 2: 5},
    6: {7: 1, 5: 5, 3: 9, 1: 5},
    7: {8: 1, 6: 6, 4: 14, 2: 14},
}

# L -> {irrep label: degeneracy}
XXZ_DECOMPOSITION = {
    2: {"1^{0,+1}": 1, "1^{0,-1}": 1, "2^{1}": 1},
    3: {"2^{3/2}": 1, "2^{1/2}": 3},
    4: {"1^{0,+1}": 3, "1^{0,-1}": 3, "2^{1}": 4, "2^{2}": 1},
    5: {"2^{5/2}": 1, "2^{3/2}": 5, "2^{1/2}": 10},
    6: {"1^{0,+1}": 10, "1^{0,-1}": 10, "2^{1}": 15, "2^{2}": 6, "2^{3}": 1},
    7: {"2^{7/2}": 1, "2^{5/2}": 7, "2^{3/2}": 21, "2^{1/2}": 35},
}

XXX_RECOVERY = """
3 | / O / X / / / /
4 | X / O / X / / /
5 | / O / O / X / /
6 | O / O / O / X /
7 | / O / O / O / X
"""

XXZ_RECOVERY = """
2 | X / X / / / / /
3 | / X / X / / / /
4 | X / X / X / / /
5 | / O / X / X / /
6 | O / O / X / X /
7 | / O / O / X / X
"""

ACCIDENTAL_PREDICT = """
2 | X / O / / / / /
3 | / X / O / / / /
4 | X / O / O / / /
5 | / O / O / O / /
6 | O / O / O / O /
7 | / O / O / O / O
"""

ACCIDENTAL_RANKS = """
2 | 1 / 1 / / / / /
3 | / 3 / 1,3 / / / /
4 | 3 / 3,4,6 / 1,3,4 / / /
5 | / 8 / 5,8 / 1,5 / /
6 | 10 / 10 / 6,10 / 1,5,6 /
7 | / 12 / 12 / 7,12 / 1,7
"""

ACCIDENTAL_VERDICTS = """
2 | X / X / / / / /
3 | / X / X / / / /
4 | X / OX / X / / /
5 | / O / OX / X / /
6 | O / O / OX / X /
7 | / O / O / OX / X
"""


def _grid(text):
    cells = {}
    for line in text.strip().splitlines():
        head, body = line.split("|")
        values = body.split()
        if len(values) != len(SPIN_COLUMNS):
            raise ValueError(f"malformed golden row {line!r}")
        for col, val in zip(SPIN_COLUMNS, values):
            cells[(int(head), col)] = val
    return cells


def _xxx_decomp_cells():
    cells = {}
    for L, dims in XXX_DECOMPOSITION.items():
        for d, nu in dims.items():
            S = Fraction(d - 1, 2)
            cells[(L, str(S))] = str(nu)
    return cells


def _xxz_decomp_cells():
    return {(L, label): str(nu) for L, row in XXZ_DECOMPOSITION.items() for label, nu in row.items()}


GOLDEN = {
    "xxx-decomp": _xxx_decomp_cells(),
    "xxz-decomp": _xxz_decomp_cells(),
    "xxx-recovery": _grid(XXX_RECOVERY),
    "xxz-recovery": _grid(XXZ_RECOVERY),
    "accidental-predict": _grid(ACCIDENTAL_PREDICT),
    "accidental-ranks": _grid(ACCIDENTAL_RANKS),
    "accidental-verdicts": _grid(ACCIDENTAL_VERDICTS),
}

TABLE_IDS = tuple(GOLDEN)
