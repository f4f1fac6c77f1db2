"""Command-line entry point: decompose | recover | table | verify-all.

Every flag can also be set through an environment variable SYMHAM_<FLAG>
(for example SYMHAM_TOL_RANK=1e-8); explicit flags win over the environment.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from dataclasses import dataclass

from .basis import TOL_CLUSTER, TOL_PROJ, classify_state, fmt_half, model_basis
from .families import make_family, sample_parameters
from .golden import TABLE_IDS
from .recovery import (
    TOL_RANK,
    SectorError,
    build_constraint_matrix,
    eigenstates,
    predict_accidental,
    predict_xxx,
    predict_xxz,
    solve_recovery,
)
from .tables import FORMATS, TableConfig, build_table, decomposition_table
from .verify import verify_all

MODELS = ("xxx", "xxz", "xxz-accidental")
ENV_PREFIX = "SYMHAM_"


@dataclass(frozen=True)
class RunConfig:
    model: str = "xxx"
    L: int | None = None
    L_max: int | None = None
    seed: int = 0
    trials: int = 20
    tol_rank: float = TOL_RANK
    tol_cluster: float = TOL_CLUSTER
    tol_proj: float = TOL_PROJ
    format: str = "json"
    out: str | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        for L in (self.L, self.L_max):
            if L is not None and not 2 <= L <= 12:
                raise ValueError(f"L must lie in 2..12, got {L}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        for name in ("tol_rank", "tol_cluster", "tol_proj"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def table_config(self) -> TableConfig:
        """--L alone selects one chain length; neither flag selects 2..7."""
        if self.L is None and self.L_max is None:
            lo, hi = 2, 7
        elif self.L is None:
            lo, hi = 2, self.L_max
        else:
            lo, hi = self.L, self.L if self.L_max is None else self.L_max
        return TableConfig(lo, hi, self.trials, self.seed, self.tol_rank, self.tol_proj, self.tol_cluster)


_FIELDS = {
    "model": str,
    "L": int,
    "L_max": int,
    "seed": int,
    "trials": int,
    "tol_rank": float,
    "tol_cluster": float,
    "tol_proj": float,
    "format": str,
    "out": str,
}


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    values = {}
    for name, conv in _FIELDS.items():
        v = getattr(args, name, None)
        if v is None:
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw is not None and raw != "":
                try:
                    v = conv(raw)
                except ValueError as exc:
                    raise ValueError(f"{ENV_PREFIX}{name.upper()}={raw!r}: {exc}") from None
        if v is not None:
            values[name] = v
    return RunConfig(**values)


# -- commands ------------------------------------------------------------------

def cmd_decompose(cfg: RunConfig):
    if cfg.model not in ("xxx", "xxz"):
        raise ValueError("decompose takes --model xxx or xxz")
    return decomposition_table(cfg.model, cfg.table_config())


def cmd_table(cfg: RunConfig, table_id: str):
    return build_table(table_id, cfg.table_config())


def _predicted(model: str, L: int, cls, spin, tol_cluster):
    """Closed-form verdict for the state's sector, None if it has no single sector."""
    try:
        if model == "xxx":
            return predict_xxx(L, cls.labels[0].value, tol_cluster)
        if model == "xxz":
            return predict_xxz(L, cls.labels[0], tol_cluster)
        return None if spin is None else predict_accidental(L, spin, tol_cluster)
    except (SectorError, IndexError):
        return None


def cmd_recover(cfg: RunConfig, index: int):
    """One instance: sample -> diagonalize -> classify -> build Q -> rank -> solve."""
    if cfg.L is None:
        raise ValueError("recover needs --L")
    L = cfg.L
    family_model = "xxx" if cfg.model == "xxx" else "xxz"
    policy = "accidental_xxx" if cfg.model == "xxz-accidental" else "generic"
    f = make_family(family_model, L)
    basis = model_basis(family_model, L, cfg.tol_cluster)
    theta = sample_parameters(f, cfg.seed, policy)
    records = eigenstates(f, theta, basis, tol_proj=cfg.tol_proj)
    if not 0 <= index < len(records):
        raise ValueError(f"eigenstate index must lie in 0..{len(records) - 1}, got {index}")
    rec = records[index]
    Q = build_constraint_matrix(f, rec, basis, "symmetry_blocks", cfg.tol_proj)
    report = solve_recovery(Q, cfg.tol_rank)

    spin = None
    if cfg.model == "xxz-accidental":
        spin_cls = classify_state(rec.state, model_basis("xxx", L, cfg.tol_cluster), cfg.tol_proj)
        if spin_cls.is_single:
            spin = spin_cls.labels[0].value
    report.extra.update(
        model=cfg.model,
        L=L,
        seed=cfg.seed,
        index=index,
        energy=rec.energy,
        terms=list(f.labels),
        ground_truth=theta.to_dict()["couplings"],
        sectors=[str(p) for p in rec.classification.labels],
        sector_weights={str(p): w for p, w in rec.classification.weights.items() if w > cfg.tol_proj},
        total_spin=None if spin is None else fmt_half(spin),
        predicted=_predicted(cfg.model, L, rec.classification, spin, cfg.tol_cluster),
        tolerances={"tol_rank": cfg.tol_rank, "tol_proj": cfg.tol_proj, "tol_cluster": cfg.tol_cluster},
    )
    return report


def _flat_rows(d: dict, prefix=""):
    for k in sorted(d):
        v = d[k]
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flat_rows(v, key + ".")
        elif isinstance(v, list):
            yield key, " ".join(str(x) for x in v)
        else:
            yield key, "" if v is None else str(v)


def render_report(report, fmt: str) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    rows = list(_flat_rows(report.to_dict()))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["field", "value"])
        w.writerows(rows)
        return buf.getvalue()
    lines = ["| field | value |", "|---|---|"] + [f"| {k} | {v} |" for k, v in rows]
    return "\n".join(lines) + "\n"


def write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".symham-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- argument parsing ------------------------------------------------------------

def _common(p: argparse.ArgumentParser, model=True):
    if model:
        p.add_argument("--model", choices=MODELS, default=None, help="model family (default xxx)")
    p.add_argument("--L", type=int, default=None, help="chain length, or first length of a range")
    p.add_argument("--L-max", dest="L_max", type=int, default=None, help="last chain length of the range")
    p.add_argument("--seed", type=int, default=None, help="base random seed (default 0)")
    p.add_argument("--trials", type=int, default=None, help="random instances per L (default 20)")
    p.add_argument("--tol-rank", dest="tol_rank", type=float, default=None)
    p.add_argument("--tol-cluster", dest="tol_cluster", type=float, default=None)
    p.add_argument("--tol-proj", dest="tol_proj", type=float, default=None)
    p.add_argument("--format", choices=FORMATS, default=None, help="output format (default json)")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symham", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="irrep decomposition of the Hilbert space")
    _common(p)

    p = sub.add_parser("recover", help="recover couplings from one eigenstate of one instance")
    _common(p)
    p.add_argument("--index", type=int, default=0, help="eigenstate index, energies ascending")

    p = sub.add_parser("table", help="regenerate one reference table")
    p.add_argument("table_id", choices=TABLE_IDS)
    _common(p, model=False)

    p = sub.add_parser("verify-all", help="regenerate all tables, diff against golden values, run invariants")
    _common(p, model=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "decompose":
            write_output(cmd_decompose(cfg).render(cfg.format), cfg.out)
        elif args.command == "table":
            write_output(cmd_table(cfg, args.table_id).render(cfg.format), cfg.out)
        elif args.command == "recover":
            write_output(render_report(cmd_recover(cfg, args.index), cfg.format), cfg.out)
        else:
            result = verify_all(cfg.table_config())
            print(result.summary(), file=sys.stderr)
            write_output(result.to_json(), cfg.out)
            return 0 if result.ok else 1
    except ValueError as exc:
        parser.exit(2, f"symham: error: {exc}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
