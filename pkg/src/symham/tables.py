"""Table artifacts: cell grids keyed by (L, column) with JSON, CSV and markdown renderers."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .basis import TOL_CLUSTER, TOL_PROJ, IrrepLabel, decomposition_report, fmt_half
from .golden import GOLDEN, TABLE_IDS
from .recovery import (
    SCHEMA_VERSION,
    TOL_RANK,
    InstanceChecks,
    SectorError,
    predict_accidental,
    rank_census,
    recovery_census,
)

ABSENT = "/"
FORMATS = ("json", "csv", "md")

TITLES = {
    "xxx-decomp": "XXX decomposition: degeneracy of each total spin S",
    "xxz-decomp": "XXZ decomposition: degeneracy of each irrep",
    "xxx-recovery": "XXX recovery from one eigenstate, by total spin S",
    "xxz-recovery": "XXZ recovery from one eigenstate, by |S_z|",
    "accidental-predict": "XXX instances in the XXZ family: equation-count prediction, by S",
    "accidental-ranks": "XXX instances in the XXZ family: observed ranks of Q, by S",
    "accidental-verdicts": "XXX instances in the XXZ family: observed outcome, by S",
}


@dataclass(frozen=True)
class TableConfig:
    L_min: int = 2
    L_max: int = 7
    trials: int = 20
    seed: int = 0
    tol_rank: float = TOL_RANK
    tol_proj: float = TOL_PROJ
    tol_cluster: float = TOL_CLUSTER

    def __post_init__(self):
        if not 2 <= self.L_min <= self.L_max <= 12:
            raise ValueError(f"need 2 <= L <= L_max <= 12, got L={self.L_min}, L_max={self.L_max}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        for name in ("tol_rank", "tol_proj", "tol_cluster"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def Ls(self) -> range:
        return range(self.L_min, self.L_max + 1)

    def provenance(self, stochastic: bool = True) -> dict:
        out = {
            "L_range": [self.L_min, self.L_max],
            "tol_cluster": self.tol_cluster,
            "version": __version__,
            "schema_version": SCHEMA_VERSION,
        }
        if stochastic:
            out.update(seed=self.seed, trials=self.trials, tol_rank=self.tol_rank, tol_proj=self.tol_proj,
                       trial_seeding="trial t at length L draws from SeedSequence(seed, spawn_key=(L, t))")
        return out


@dataclass
class TableArtifact:
    table_id: str
    columns: list
    rows: list
    cells: dict  # (L, column) -> str
    provenance: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)  # (L, column) -> dict, JSON only
    column_header: str = "S"

    @property
    def title(self) -> str:
        return TITLES.get(self.table_id, self.table_id)

    def cell(self, L: int, column: str) -> str:
        return self.cells.get((L, column), ABSENT)

    def grid(self) -> list:
        return [[str(L)] + [self.cell(L, c) for c in self.columns] for L in self.rows]

    def to_dict(self) -> dict:
        out = {
            "table": self.table_id,
            "title": self.title,
            "schema_version": SCHEMA_VERSION,
            "provenance": self.provenance,
            "column_header": self.column_header,
            "columns": list(self.columns),
            "rows": list(self.rows),
            "cells": {str(L): {c: self.cell(L, c) for c in self.columns} for L in self.rows},
        }
        if self.details:
            out["details"] = {
                str(L): {c: self.details[(L, c)] for c in self.columns if (L, c) in self.details}
                for L in self.rows
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["L"] + list(self.columns))
        w.writerows(self.grid())
        return buf.getvalue()

    def to_markdown(self) -> str:
        prefix = "S=" if self.column_header == "S" else ""
        head = ["L"] + [c if c == "decomposition" else prefix + c for c in self.columns]
        lines = [f"**{self.title}**", "", "| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        lines += ["| " + " | ".join(r) + " |" for r in self.grid()]
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt in ("md", "markdown"):
            return self.to_markdown()
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def parse_csv(text: str) -> dict:
    """Inverse of ``to_csv`` on the cell grid."""
    reader = list(csv.reader(io.StringIO(text)))
    cols = reader[0][1:]
    return {(int(r[0]), c): v for r in reader[1:] for c, v in zip(cols, r[1:])}


def parse_markdown(text: str) -> dict:
    rows = [ln for ln in text.splitlines() if ln.startswith("|") and not ln.startswith("|---")]
    split = [[x.strip() for x in ln.strip("|").split("|")] for ln in rows]
    cols = [c.split("=", 1)[1] if c.startswith("S=") else c for c in split[0][1:]]
    return {(int(r[0]), c): v for r in split[1:] for c, v in zip(cols, r[1:])}


# -- builders ---------------------------------------------------------------

def spin_columns(L_max: int) -> list:
    return [fmt_half(Fraction(k, 2)) for k in range(L_max + 1)]


def xxz_columns(L_max: int) -> list:
    cols = [str(IrrepLabel("u1", 0, 1)), str(IrrepLabel("u1", 0, -1))]
    cols += [str(IrrepLabel("u1", Fraction(k, 2))) for k in range(1, L_max + 1)]
    return cols


def decomposition_table(model: str, cfg: TableConfig) -> TableArtifact:
    if model not in ("xxx", "xxz"):
        raise ValueError(f"unknown model {model!r}")
    cols = spin_columns(cfg.L_max) if model == "xxx" else xxz_columns(cfg.L_max)
    cells, details = {}, {}
    for L in cfg.Ls:
        rep = decomposition_report(model, L, cfg.tol_cluster)
        for p, d, nu in rep.entries:
            col = fmt_half(p.value) if model == "xxx" else str(p)
            cells[(L, col)] = str(nu)
        cells[(L, "decomposition")] = rep.formula()
        details[(L, "decomposition")] = {"n_r": rep.n_r, "total_dim": rep.total_dim()}
    return TableArtifact(
        f"{model}-decomp", cols + ["decomposition"], list(cfg.Ls), cells,
        cfg.provenance(stochastic=False), details, "S" if model == "xxx" else "irrep",
    )


def _census_cells(census, cells, details, L, key):
    for sector, cell in census.items():
        col = fmt_half(sector)
        cells[(L, col)] = key(cell)
        details[(L, col)] = cell.to_dict()


def recovery_table(model: str, cfg: TableConfig, checks: InstanceChecks | None = None,
                   check_modes: bool = False) -> TableArtifact:
    """Census verdicts per sector; the XXX grid starts at L = 3 like its golden counterpart."""
    Ls = [L for L in cfg.Ls if model != "xxx" or L >= 3]
    cells, details = {}, {}
    for L in Ls:
        census = recovery_census(model, L, cfg.trials, cfg.seed, cfg.tol_rank, cfg.tol_proj,
                                 cfg.tol_cluster, checks=checks, check_modes=check_modes)
        _census_cells(census, cells, details, L, lambda c: c.verdict)
    return TableArtifact(f"{model}-recovery", spin_columns(cfg.L_max), Ls, cells, cfg.provenance(),
                         details, "S" if model == "xxx" else "|S_z|")


def accidental_predict_table(cfg: TableConfig) -> TableArtifact:
    cols = spin_columns(cfg.L_max)
    cells = {}
    for L in cfg.Ls:
        for col in cols:
            try:
                cells[(L, col)] = predict_accidental(L, Fraction(col), cfg.tol_cluster)
            except SectorError:
                pass
    return TableArtifact("accidental-predict", cols, list(cfg.Ls), cells, cfg.provenance(stochastic=False))


def accidental_tables(cfg: TableConfig, checks: InstanceChecks | None = None,
                      check_modes: bool = False) -> tuple:
    """(ranks, verdicts) artifacts from one rank census per L."""
    cols = spin_columns(cfg.L_max)
    rank_cells, verdict_cells, details = {}, {}, {}
    for L in cfg.Ls:
        census = rank_census(L, cfg.trials, cfg.seed, cfg.tol_rank, cfg.tol_proj, cfg.tol_cluster,
                             checks=checks, check_modes=check_modes)
        _census_cells(census, rank_cells, details, L, lambda c: ",".join(str(r) for r in sorted(c.ranks)))
        _census_cells(census, verdict_cells, {}, L, lambda c: c.verdict)
    prov = cfg.provenance()
    return (
        TableArtifact("accidental-ranks", cols, list(cfg.Ls), rank_cells, prov, details),
        TableArtifact("accidental-verdicts", cols, list(cfg.Ls), verdict_cells, prov, details),
    )


def build_table(table_id: str, cfg: TableConfig) -> TableArtifact:
    if table_id == "xxx-decomp":
        return decomposition_table("xxx", cfg)
    if table_id == "xxz-decomp":
        return decomposition_table("xxz", cfg)
    if table_id == "xxx-recovery":
        return recovery_table("xxx", cfg)
    if table_id == "xxz-recovery":
        return recovery_table("xxz", cfg)
    if table_id == "accidental-predict":
        return accidental_predict_table(cfg)
    if table_id == "accidental-ranks":
        return accidental_tables(cfg)[0]
    if table_id == "accidental-verdicts":
        return accidental_tables(cfg)[1]
    raise ValueError(f"unknown table {table_id!r}; expected one of {TABLE_IDS}")


# -- golden comparison --------------------------------------------------------

@dataclass(frozen=True)
class CellMismatch:
    table_id: str
    L: int
    column: str
    expected: str
    got: str
    spectra: dict | None = None

    def to_dict(self) -> dict:
        out = {"table": self.table_id, "L": self.L, "column": self.column,
               "expected": self.expected, "got": self.got}
        if self.spectra is not None:
            out["example_spectra"] = self.spectra
        return out

    def __str__(self):
        return f"{self.table_id} L={self.L} {self.column}: expected {self.expected!r}, got {self.got!r}"


def compare_to_golden(art: TableArtifact) -> list:
    """Mismatched cells on every golden row the artifact covers.

    Sectors missing from the golden table count as "/".
    """
    golden = GOLDEN[art.table_id]
    golden_rows = {L for L, _ in golden}
    out = []
    for L in art.rows:
        if L not in golden_rows:
            continue
        for col in art.columns:
            if col == "decomposition":
                continue
            want, got = golden.get((L, col), ABSENT), art.cell(L, col)
            if want != got:
                spectra = art.details.get((L, col), {}).get("example_spectra")
                out.append(CellMismatch(art.table_id, L, col, want, got, spectra))
    return out
