"""CSV ingestion for genome-shaped data, result serialization, cluster reports.

Input files carry a header row naming ``chromosome``, ``position``, and one
or more sample columns of log2 ratios. Chromosomes are assembled in natural
order (1..22, X, Y, then anything else lexicographically) into one
genome-level sequence; the chromosome-offset map is kept so detected
clusters convert back to per-chromosome coordinates exactly. Windows may
span a chromosome boundary at the genome level; such clusters are flagged
by writing the boundary chromosomes as "a..b" in reports.

All numeric output uses 6 significant digits and files are byte-stable
given identical inputs and seeds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .types import DetectionResult, Panel, Series, validate


@dataclass(frozen=True)
class GenomicRecord:
    """One probe: chromosome, base-pair position, log2 ratio."""

    chromosome: str
    position: int
    log2ratio: float

    def __post_init__(self):
        if self.position < 0:
            raise ValueError("position must be nonnegative")
        if not math.isfinite(self.log2ratio):
            raise ValueError("log2ratio must be finite")


@dataclass(frozen=True)
class ClusterReport:
    """A detected cluster in genomic coordinates (begin/end inclusive loci)."""

    chromosome: str
    begin_position: int
    end_position: int
    begin_index: int
    end_index: int
    direction: str

    def __post_init__(self):
        if not self.begin_index < self.end_index:
            raise ValueError("cluster must have begin < end")

    @property
    def crosses_boundary(self) -> bool:
        return ".." in self.chromosome


def _natural_chrom_key(name: str):
    try:
        return (0, int(name), "")
    except ValueError:
        if name in ("X", "Y"):
            return (1, 0 if name == "X" else 1, "")
        return (2, 0, name)


@dataclass(frozen=True)
class GenomeMap:
    """Chromosome blocks of the assembled genome-level sequence.

    blocks maps chromosome name -> (start, stop) half-open 0-based index
    range; positions holds the per-locus base-pair coordinate.
    """

    chromosomes: tuple[str, ...]
    starts: tuple[int, ...]
    stops: tuple[int, ...]
    positions: np.ndarray

    def locus(self, index: int) -> tuple[str, int]:
        """(chromosome, base-pair position) of a 1-based sequence index."""
        i = index - 1
        if not 0 <= i < self.positions.size:
            raise ValueError(f"index {index} outside the genome range")
        block = int(np.searchsorted(np.asarray(self.stops), i, side="right"))
        return self.chromosomes[block], int(self.positions[i])

    @property
    def p(self) -> int:
        return self.positions.size


def read_csv(path: str, samples: Optional[Sequence[str]] = None):
    """Parse a genome CSV into a Series (one sample) or Panel (several).

    Rows with missing values in the selected columns are dropped (the count
    is returned); malformed rows and duplicated positions raise with their
    line numbers. Returns (series_or_panel, genome_map, n_dropped).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        cols = [c.strip() for c in header]
        if len(cols) < 3 or cols[0].lower() != "chromosome" or cols[1].lower() != "position":
            raise ValueError(
                f"{path}: header must be 'chromosome,position,<sample>...', got {header!r}")
        sample_names = cols[2:]
        if samples is None:
            selected = list(sample_names)
        else:
            selected = list(samples)
            missing = [s for s in selected if s not in sample_names]
            if missing:
                raise ValueError(f"{path}: unknown sample column(s) {missing}")
        sel_idx = [2 + sample_names.index(s) for s in selected]

        per_chrom: dict[str, list] = {}
        n_dropped = 0
        for ln, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(cols):
                raise ValueError(f"{path}: line {ln}: expected {len(cols)} fields, got {len(row)}")
            fields = [row[0].strip(), row[1].strip()] + [row[i].strip() for i in sel_idx]
            if any(f == "" or f.upper() in ("NA", "NAN") for f in fields):
                n_dropped += 1
                continue
            chrom = fields[0]
            try:
                pos = int(fields[1])
                vals = [float(f) for f in fields[2:]]
            except ValueError as exc:
                raise ValueError(f"{path}: line {ln}: {exc}") from None
            if pos < 0:
                raise ValueError(f"{path}: line {ln}: negative position")
            if any(not math.isfinite(v) for v in vals):
                n_dropped += 1
                continue
            per_chrom.setdefault(chrom, []).append((pos, ln, vals))

    if not per_chrom:
        raise ValueError(f"{path}: no usable rows")

    chroms = sorted(per_chrom, key=_natural_chrom_key)
    positions: list[int] = []
    starts: list[int] = []
    stops: list[int] = []
    data_rows: list[list[float]] = []
    for chrom in chroms:
        rows = sorted(per_chrom[chrom], key=lambda t: (t[0], t[1]))
        for (pa, la, _), (pb, lb, _) in zip(rows, rows[1:]):
            if pa == pb:
                raise ValueError(
                    f"{path}: duplicate position {pa} on chromosome {chrom} "
                    f"(lines {la} and {lb})")
        starts.append(len(positions))
        positions.extend(r[0] for r in rows)
        stops.append(len(positions))
        data_rows.extend(r[2] for r in rows)

    gmap = GenomeMap(chromosomes=tuple(chroms), starts=tuple(starts), stops=tuple(stops),
                     positions=np.asarray(positions, dtype=np.int64))
    matrix = np.asarray(data_rows, dtype=float)
    if len(selected) == 1:
        obj = validate(Series(matrix[:, 0], label=selected[0]))
    else:
        obj = validate(Panel(matrix.T, labels=tuple(selected)))
    return obj, gmap, n_dropped


def _g(value: float) -> str:
    return f"{value:.6g}"


def cluster_reports(result: DetectionResult, genome_map: Optional[GenomeMap],
                    p: int) -> list[ClusterReport]:
    """Convert detected clusters to genomic coordinates (indices if no map)."""
    direction = "amplification"
    for kind in result.statistics:
        if kind in ("R_dagger", "R_j4", "R_star_j4"):
            direction = "two_sided"
    reports = []
    for a, b in result.clusters:
        last = min(b - 1, p)
        if genome_map is not None:
            ca, pa = genome_map.locus(a)
            cb, pb = genome_map.locus(last)
            chrom = ca if ca == cb else f"{ca}..{cb}"
        else:
            chrom, pa, pb = "-", a, last
        reports.append(ClusterReport(chromosome=chrom, begin_position=pa, end_position=pb,
                                     begin_index=a, end_index=b, direction=direction))
    return reports


def emit_result(result: DetectionResult, prefix: str, p: int,
                genome_map: Optional[GenomeMap] = None) -> list[str]:
    """Write the clusters CSV, per-statistic traces, and a text summary.

    Returns the written paths. The clusters file round-trips through
    read_clusters exactly.
    """
    paths = []
    reports = cluster_reports(result, genome_map, p)
    cluster_path = f"{prefix}_clusters.csv"
    with open(cluster_path, "w") as fh:
        fh.write("chromosome,begin_position,end_position,begin_index,end_index,direction\n")
        for r in reports:
            fh.write(f"{r.chromosome},{r.begin_position},{r.end_position},"
                     f"{r.begin_index},{r.end_index},{r.direction}\n")
    paths.append(cluster_path)

    for kind, stat in sorted(result.statistics.items()):
        trace_path = f"{prefix}_stat_{kind}.tsv"
        with open(trace_path, "w") as fh:
            fh.write("offset\tvalue\n")
            for j, v in zip(range(stat.start, stat.stop), stat.values):
                fh.write(f"{j}\t{_g(v)}\n")
        paths.append(trace_path)

    summary_path = f"{prefix}_summary.txt"
    with open(summary_path, "w") as fh:
        fh.write(f"omnibus_rejected  {str(result.rejected_null).lower()}\n")
        fh.write(f"gamma             {_g(result.gamma)}\n")
        fh.write(f"delta             {_g(result.delta) if result.delta is not None else '-'}\n")
        if result.sigma2_hat is not None:
            fh.write(f"sigma2_hat        {_g(result.sigma2_hat)}\n")
        if result.kappa2_hat is not None:
            fh.write(f"kappa2_hat        {_g(result.kappa2_hat)}\n")
        if result.kappa_clamped:
            fh.write("warning           kappa estimate clamped at its floor\n")
        fh.write(f"breakpoints       {' '.join(str(b) for b in result.breakpoints) or '-'}\n")
        fh.write(f"n_spurious        {result.n_spurious}\n")
        fh.write("clusters\n")
        if not reports:
            fh.write("  (none)\n")
        for r in reports:
            flag = "  boundary-crossing" if r.crosses_boundary else ""
            fh.write(f"  {r.chromosome:>6}  {r.begin_position}..{r.end_position}"
                     f"  idx {r.begin_index}..{r.end_index}  {r.direction}{flag}\n")
    paths.append(summary_path)
    return paths


def read_clusters(path: str) -> list[ClusterReport]:
    """Read back a clusters CSV written by emit_result."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(ClusterReport(
                chromosome=row["chromosome"],
                begin_position=int(row["begin_position"]),
                end_position=int(row["end_position"]),
                begin_index=int(row["begin_index"]),
                end_index=int(row["end_index"]),
                direction=row["direction"],
            ))
    return out


# ---------------------------------------------------------------------------
# bundled synthetic genome generator

_CHROM_WEIGHTS = {
    "1": 8.0, "2": 7.8, "3": 6.5, "4": 6.2, "5": 5.9, "6": 5.6, "7": 5.2,
    "8": 4.8, "9": 4.5, "10": 4.4, "11": 4.4, "12": 4.3, "13": 3.7, "14": 3.5,
    "15": 3.3, "16": 2.9, "17": 2.7, "18": 2.5, "19": 2.0, "20": 2.1,
    "21": 1.5, "22": 1.6, "X": 5.0,
}

SYNTHETIC_CLUSTERS = (("8", 0.35, 180, 0.85), ("17", 0.30, 150, 1.0), ("20", 0.25, 200, 0.7))
SYNTHETIC_NOISE_SD = 0.3


def make_synthetic_acgh(path: str, p: int = 6691, seed: int = 20260809) -> dict:
    """Write a synthetic genome-shaped CSV with planted amplification clusters.

    23 chromosomes, two sample columns sharing the planted means with
    independent noise. Returns the planted truth: cluster index ranges
    (1-based, half-open on the genome-level sequence) and the layout.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    chroms = sorted(_CHROM_WEIGHTS, key=_natural_chrom_key)
    weights = np.array([_CHROM_WEIGHTS[c] for c in chroms])
    counts = np.floor(weights / weights.sum() * p).astype(int)
    counts[0] += p - counts.sum()

    mu = np.zeros(p)
    planted = []
    offset = 0
    offsets = {}
    for chrom, cnt in zip(chroms, counts):
        offsets[chrom] = (offset, offset + cnt)
        offset += cnt
    for chrom, rel, width, amp in SYNTHETIC_CLUSTERS:
        lo, hi = offsets[chrom]
        start = lo + int(rel * (hi - lo))
        mu[start : start + width] = amp
        planted.append((start + 1, start + width + 1))

    with open(path, "w") as fh:
        fh.write("chromosome,position,sample_a,sample_b\n")
        i = 0
        for chrom, cnt in zip(chroms, counts):
            gaps = rng.integers(2_000, 120_000, size=cnt)
            positions = np.cumsum(gaps) + 50_000
            za = mu[i : i + cnt] + SYNTHETIC_NOISE_SD * rng.standard_normal(cnt)
            zb = mu[i : i + cnt] + SYNTHETIC_NOISE_SD * rng.standard_normal(cnt)
            for pos, a, b in zip(positions, za, zb):
                fh.write(f"{chrom},{pos},{a:.6g},{b:.6g}\n")
            i += cnt
    return {"clusters": planted, "p": p, "chromosomes": dict(zip(chroms, counts.tolist()))}
