"""Bits-per-byte benchmark over the Calgary corpus"""

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

from ..errors import CorruptStreamError
from .backends import Backend

log = logging.getLogger(__name__)

CALGARY_FILES = (
    "bib",
    "book1",
    "book2",
    "geo",
    "news",
    "obj1",
    "obj2",
    "paper1",
    "paper2",
    "pic",
    "progc",
    "progl",
    "progp",
    "trans",
)

CSV_HEADER = ("file", "original", "compressed", "bpb")


def bits_per_byte(original: int, compressed: int) -> float:
    if original == 0:
        return 0.0
    return 8.0 * compressed / original


@dataclass(frozen=True)
class BenchmarkRow:
    file: str
    original: int
    compressed: Optional[int]

    @property
    def skipped(self):
        return self.compressed is None

    @property
    def bpb(self) -> Optional[float]:
        if self.skipped:
            return None
        return bits_per_byte(self.original, self.compressed)


@dataclass
class BenchmarkReport:
    rows: Dict[str, List[BenchmarkRow]] = field(default_factory=dict)

    def average_bpb(self, backend: str) -> Optional[float]:
        """Unweighted mean bpb over the files that were not skipped"""
        values = [row.bpb for row in self.rows.get(backend, []) if not row.skipped]
        if not values:
            return None
        return sum(values) / len(values)

    def write_csv(self, stream):
        """One section per backend: a '# backend' line, the header, rows, AVERAGE"""
        writer = csv.writer(stream, lineterminator="\n")
        for backend, rows in self.rows.items():
            stream.write(f"# {backend}\n")
            writer.writerow(CSV_HEADER)
            for row in rows:
                if row.skipped:
                    writer.writerow((row.file, "", "", "skipped"))
                else:
                    writer.writerow((row.file, row.original, row.compressed, f"{row.bpb:.3f}"))
            average = self.average_bpb(backend)
            writer.writerow(("AVERAGE", "", "", "" if average is None else f"{average:.3f}"))


def calgary_benchmark(
    directory,
    backends: Iterable[Backend],
    files: Optional[Sequence[str]] = None,
    verify: bool = False,
) -> BenchmarkReport:
    """Compresses every corpus file with every backend

    Missing files are reported as skipped rows.  With verify the stream
    is decompressed again and compared with the input.
    """
    names = CALGARY_FILES if files is None else tuple(files)
    contents = {}
    for name in names:
        path = os.path.join(directory, name)
        try:
            with open(path, "rb") as f:
                contents[name] = f.read()
        except FileNotFoundError:
            log.warning("skipping %s: not found in %s", name, directory)

    report = BenchmarkReport()
    for backend in backends:
        rows = []
        for name in names:
            data = contents.get(name)
            if data is None:
                rows.append(BenchmarkRow(name, 0, None))
                continue
            stream = backend.compress(data)
            if verify and backend.decompress(stream) != data:
                raise CorruptStreamError(f"{backend.name} does not round-trip {name}")
            row = BenchmarkRow(name, len(data), len(stream))
            log.info(
                "%s %s: %d -> %d bytes, %.3f bpb",
                backend.name,
                name,
                row.original,
                row.compressed,
                row.bpb,
            )
            rows.append(row)
        report.rows[backend.name] = rows
    return report
