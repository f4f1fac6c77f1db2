"""End-to-end acceptance criteria, one PASS/FAIL line each.

Run under pytest (lines are printed even with output capture on) or directly:
``python3 tests/test_acceptance.py``.
"""
import sys
import time

import pytest

from symham import basis, cli
from symham.tables import TableConfig, compare_to_golden
from symham.verify import verify_all

DEFAULT = cli.RunConfig()
_cache = {}


def _emit(n, ok, text, capsys=None):
    line = f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {text}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)


def _cold():
    basis._cached_basis.cache_clear()
    return time.perf_counter()


def _table(table_id):
    return cli.cmd_table(DEFAULT, table_id)


def criterion_1():
    t0 = _cold()
    arts = [cli.cmd_decompose(cli.RunConfig(model=m)) for m in ("xxx", "xxz")]
    dt = time.perf_counter() - t0
    bad = [m for a in arts for m in compare_to_golden(a)]
    ok = not bad and dt < 10
    return ok, f"decomposition tables L=2..7, {len(bad)} mismatched cells, {dt:.2f}s (limit 10s)"


def _recovery(n, table_id):
    t0 = _cold()
    art = _table(table_id)
    dt = time.perf_counter() - t0
    bad = compare_to_golden(art)
    worst = max((d["worst_alignment"] for d in art.details.values() if d["verdict"] == "O"), default=0.0)
    ok = not bad and worst <= 1e-8 and dt < 60
    return ok, (f"{table_id} at 20 trials, {len(bad)} mismatched cells, worst O-cell "
                f"1-|cos| {worst:.1e} (limit 1e-8), {dt:.1f}s (limit 60s)")


def criterion_2():
    return _recovery(2, "xxx-recovery")


def criterion_3():
    return _recovery(3, "xxz-recovery")


def criterion_4():
    bad = compare_to_golden(_table("accidental-predict"))
    return not bad, f"accidental-predict, {len(bad)} mismatched cells"


def criterion_5():
    from symham.tables import accidental_tables

    t0 = _cold()
    ranks, verdicts = accidental_tables(DEFAULT.table_config())
    dt = time.perf_counter() - t0
    bad = compare_to_golden(ranks) + compare_to_golden(verdicts)
    ox = all(verdicts.cell(L, S) == "OX" for L, S in ((4, "1"), (5, "3/2"), (6, "2"), (7, "5/2")))
    gap = _table("accidental-predict").cell(4, "2") == "O" and verdicts.cell(4, "2") == "X"
    ok = not bad and ox and gap and dt < 120
    return ok, (f"rank sets and verdicts at 20 trials, {len(bad)} mismatched cells, OX cells "
                f"{'present' if ox else 'MISSING'}, (L=4,S=2) predicted O observed "
                f"{verdicts.cell(4, '2')}, {dt:.1f}s (limit 120s)")


def _verify():
    if "first" not in _cache:
        _cold()
        _cache["first"] = verify_all(TableConfig())
    return _cache["first"]


REQUIRED = (
    "dimension sums",
    "binomial oracle",
    "Wigner-Eckart blocks",
    "kernel residual",
    "mode equivalence (generic instances)",
    "scale invariance",
    "imaginary rows vanish",
)


def criterion_6():
    res = _verify()
    checks = {c.name: c for c in res.checks}
    failed = [n for n in REQUIRED if not checks[n].passed]
    acc = checks["mode equivalence (accidental instances)"].values
    gen = checks["mode equivalence (generic instances)"].values
    text = (f"{len(REQUIRED) - len(failed)}/{len(REQUIRED)} property suites hold"
            + (f" (failed: {', '.join(failed)})" if failed else "")
            + f"; mode equivalence on {gen['checked']} generic instances; accidental instances: "
            f"{len(acc['mismatches'])}/{acc['checked']} differ, reported not gated")
    return not failed, text


def criterion_7():
    first = _verify().to_json()
    second = verify_all(TableConfig()).to_json()
    ok = first == second
    return ok, f"two verify-all runs at seed 0: JSON {'byte-identical' if ok else 'DIFFERS'} ({len(first)} bytes)"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7]


@pytest.mark.slow
@pytest.mark.parametrize("n", range(1, 8))
def test_criterion(n, capsys):
    ok, text = CRITERIA[n - 1]()
    _emit(n, ok, text, capsys)
    assert ok, text


if __name__ == "__main__":
    results = []
    for n, fn in enumerate(CRITERIA, 1):
        ok, text = fn()
        _emit(n, ok, text)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
