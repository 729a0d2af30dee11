"""Sweep drivers: clustering-error curves and search precision tables

A sweep is cut into independent cells, one per (backend, technique,
seed, level, repeat) for curves and one per (backend, technique, level)
for search.  Cells run in a process pool and the results are merged in
cell order, so the output files do not depend on the worker count.
"""

import concurrent.futures
import csv
import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import clustering
from .compressors import get_backend
from .errors import NcdLabError, ValidationError
from .ncd import LengthCache, ncd_matrix
from .search import (
    CorpusDocument,
    PrecisionCurve,
    build_topic_corpus,
    index_corpus,
    precision_at_k,
    precision_improvement,
    query,
    topic_relevance,
)
from .textops import (
    DistortionSpec,
    Shuffle,
    Substitution,
    build_removal_set,
    distort_document,
    load_frequency_table,
    read_corpus,
)

log = logging.getLogger(__name__)

CURVE_HEADER = (
    "backend",
    "selection",
    "substitution",
    "shuffle",
    "level",
    "error",
    "mean",
    "stddev",
)
SUMMARY_HEADER = (
    "backend",
    "selection",
    "substitution",
    "shuffle",
    "average_ce",
    "e0",
    "delta",
    "normalized",
)

# per-process state set up by _init_worker
_STATE = {}


@dataclass(frozen=True)
class Combination:
    backend: str
    selection: str
    substitution: str
    shuffle: str = Shuffle.NONE.value

    @property
    def name(self) -> str:
        parts = [self.backend, self.selection, self.substitution]
        if self.shuffle != Shuffle.NONE.value:
            parts.append(self.shuffle)
        return ".".join(parts)


@dataclass(frozen=True)
class Cell:
    combination: Combination
    seed: int
    level: float
    repeat: int = 0


@dataclass(frozen=True)
class CellResult:
    cell: Cell
    error: Optional[float] = None
    newick: str = ""
    failure: str = ""
    extra: Tuple = ()


def combinations(config, with_shuffles=True) -> List[Combination]:
    """Every technique of the config; random-character text is never shuffled"""
    out = []
    shuffles = config.shuffles if with_shuffles else (Shuffle.NONE,)
    for backend in config.backends:
        for selection in config.selections:
            for substitution in config.substitutions:
                for shuffle in shuffles:
                    if shuffle is not Shuffle.NONE and substitution is not Substitution.ASTERISK:
                        log.info(
                            "skipping %s.%s.%s.%s: only asterisk text is shuffled",
                            backend,
                            selection.value,
                            substitution.value,
                            shuffle.value,
                        )
                        continue
                    out.append(
                        Combination(backend, selection.value, substitution.value, shuffle.value)
                    )
    return out


def _init_worker(state):
    _STATE.clear()
    _STATE.update(state)
    _STATE["cache"] = LengthCache()
    _STATE["backends"] = {}


def _backend(name):
    backends = _STATE["backends"]
    if name not in backends:
        backends[name] = get_backend(name, **_STATE["backend_options"].get(name, {}))
    return backends[name]


def _spec(cell):
    combination = cell.combination
    return DistortionSpec(
        combination.selection,
        combination.substitution,
        combination.shuffle,
        cell.level,
        cell.seed,
    )


def _run_curve_cell(cell: Cell) -> CellResult:
    try:
        spec = _spec(cell)
        table = _STATE["table"]
        removal = build_removal_set(table, spec.selection, spec.level, spec.seed)
        docs = [
            (doc.doc_id, distort_document(doc.doc_id, doc.data, table, spec, removal, cell.repeat))
            for doc in _STATE["docs"]
        ]
        backend = _backend(cell.combination.backend)
        matrix = ncd_matrix(backend, [(doc_id, d.data) for doc_id, d in docs], 1, _STATE["cache"])
        tree = clustering.build_dendrogram(
            matrix, _STATE["builder"], seed=cell.seed + cell.repeat, patience=_STATE["patience"]
        )
        report = clustering.clustering_error(tree, _STATE["assignment"])
        return CellResult(cell, float(report.error), tree.to_newick())
    except NcdLabError as e:
        return CellResult(cell, failure=str(e))
    except Exception as e:
        log.exception("%s level %.1f failed", cell.combination.name, cell.level)
        return CellResult(cell, failure=f"{type(e).__name__}: {e}")


def _run_cells(fn, cells, workers, state):
    if workers <= 1:
        _init_worker(state)
        return [fn(cell) for cell in cells]
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers, initializer=_init_worker, initargs=(state,)
    ) as pool:
        return list(pool.map(fn, cells, chunksize=max(1, len(cells) // (workers * 4))))


def _drop_failed(results):
    """Removes every cell of a combination that had a failing cell"""
    failed = {}
    for result in results:
        if result.failure and result.cell.combination not in failed:
            failed[result.cell.combination] = result.failure
    for combination, reason in failed.items():
        log.error("aborting %s: %s", combination.name, reason)
    return [r for r in results if r.cell.combination not in failed], failed


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value):
    if value is None:
        return "undefined"
    return f"{value:.4f}"


def _snapshot(config):
    os.makedirs(config.run_dir, exist_ok=True)
    with open(os.path.join(config.run_dir, "config.json"), "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")


@dataclass(frozen=True)
class CurveRow:
    combination: Combination
    level: float
    error: float
    mean: float
    stddev: float


def run_curve(config) -> Dict[str, object]:
    """Runs the clustering-error sweep and writes curve.csv, summary.csv and trees/"""
    docs = read_corpus(config.dataset)
    table = load_frequency_table(config.frequency_list)
    if config.assignment:
        assignment = clustering.load_assignment(config.assignment)
    else:
        assignment = clustering.assignment_from_ids(doc.doc_id for doc in docs)
    missing = [doc.doc_id for doc in docs if doc.doc_id not in assignment]
    if missing:
        raise ValidationError(f"no cluster label for {', '.join(missing)}")
    ids = {doc.doc_id for doc in docs}
    assignment = {doc_id: label for doc_id, label in assignment.items() if doc_id in ids}

    cells = []
    for combination in combinations(config):
        repeats = 1 if combination.shuffle == Shuffle.NONE.value else config.repeats
        for seed in config.seeds:
            for level in config.levels:
                for repeat in range(repeats):
                    cells.append(Cell(combination, seed, level, repeat))
    log.info(
        "curve sweep: %d documents, %d cells, %d workers", len(docs), len(cells), config.workers
    )

    state = {
        "docs": docs,
        "table": table,
        "assignment": assignment,
        "backend_options": dict(config.backend_options),
        "builder": config.builder,
        "patience": config.patience,
    }
    results, failed = _drop_failed(_run_cells(_run_curve_cell, cells, config.workers, state))

    _snapshot(config)
    trees_dir = os.path.join(config.run_dir, "trees")
    os.makedirs(trees_dir, exist_ok=True)
    grouped = defaultdict(list)
    for result in results:
        cell = result.cell
        grouped[(cell.combination, cell.level)].append(result.error)
        if cell.repeat == 0:
            name = f"{cell.combination.name}.{cell.level:.1f}.s{cell.seed}.nwk"
            with open(os.path.join(trees_dir, name), "w", encoding="utf-8") as f:
                f.write(result.newick + "\n")

    rows = []
    for (combination, level), errors in grouped.items():
        mean, stddev = clustering.repeat_summary(errors)
        rows.append(CurveRow(combination, level, errors[0], mean, stddev))
    _write_csv(
        os.path.join(config.run_dir, "curve.csv"),
        CURVE_HEADER,
        [
            (
                r.combination.backend,
                r.combination.selection,
                r.combination.substitution,
                r.combination.shuffle,
                f"{r.level:.1f}",
                f"{r.error:g}",
                f"{r.mean:.4f}",
                f"{r.stddev:.4f}",
            )
            for r in rows
        ],
    )

    summary = []
    by_combination = defaultdict(dict)
    for r in rows:
        by_combination[r.combination][r.level] = r.mean
    for combination, means in by_combination.items():
        graded = {level: value for level, value in means.items() if level > 0}
        if len(graded) < 10:
            log.warning("%s: not every level 0.1..1.0 ran, no summary", combination.name)
            continue
        average = clustering.average_ce(graded)
        e0 = means.get(0.0)
        if e0 is None:
            summary.append((*_combination_fields(combination), _fmt(average), "", "", ""))
            continue
        errors = clustering.error_summaries(e0, average)
        summary.append(
            (
                *_combination_fields(combination),
                _fmt(average),
                _fmt(e0),
                _fmt(errors.delta),
                _fmt(errors.normalized),
            )
        )
    _write_csv(os.path.join(config.run_dir, "summary.csv"), SUMMARY_HEADER, summary)
    log.info("curve written to %s", config.run_dir)
    return {"rows": rows, "summary": summary, "failed": failed}


def _combination_fields(combination):
    return (
        combination.backend,
        combination.selection,
        combination.substitution,
        combination.shuffle,
    )


def _run_search_cell(cell: Cell) -> CellResult:
    try:
        spec = _spec(cell)
        table = _STATE["table"]
        removal = build_removal_set(table, spec.selection, spec.level, spec.seed)
        documents = [
            CorpusDocument(
                doc.doc_id,
                doc.topic,
                distort_document(doc.doc_id, doc.data, table, spec, removal).data,
            )
            for doc in _STATE["documents"]
        ]
        stores = index_corpus(documents, _STATE["max_window_kb"], _STATE["overlap"])
        backend = _backend(cell.combination.backend)
        ks = _STATE["ks"]
        curves = []
        short = 0
        for q in _STATE["queries"]:
            result = query(
                stores, backend, q.data, max(ks), cache=_STATE["cache"], query_id=q.query_id
            )
            usable = [k for k in ks if k <= len(result)]
            short += len(usable) < len(ks)
            if usable:
                curves.append(precision_at_k(result, topic_relevance(q.topic), usable))
        if short:
            log.warning(
                "%s level %.1f: %d queries ranked fewer than %d passages",
                cell.combination.name,
                cell.level,
                short,
                max(ks),
            )
        values = {}
        for k in ks:
            with_k = [c for c in curves if k in c.values]
            if with_k:
                values[k] = sum(c.values[k] for c in with_k) / len(with_k)
        return CellResult(cell, extra=tuple(sorted(values.items())))
    except NcdLabError as e:
        return CellResult(cell, failure=str(e))
    except Exception as e:
        log.exception("%s level %.1f failed", cell.combination.name, cell.level)
        return CellResult(cell, failure=f"{type(e).__name__}: {e}")


def run_search_eval(config) -> Dict[str, object]:
    """Precision at K per distortion level, one table per technique

    The topic documents (and so the passages and their labels) are
    distorted per level; queries stay undistorted.
    """
    if config.search is None:
        raise ValidationError("the configuration has no 'search' section")
    search = config.search
    corpus = build_topic_corpus(search.corpus, search.queries_per_topic, config.seeds[0])
    if not corpus.queries:
        raise ValidationError("search evaluation needs at least one query per topic")
    table = load_frequency_table(config.frequency_list)
    cells = [
        Cell(combination, config.seeds[0], level)
        for combination in combinations(config, with_shuffles=False)
        for level in config.levels
    ]
    state = {
        "documents": list(corpus.documents),
        "queries": list(corpus.queries),
        "table": table,
        "backend_options": dict(config.backend_options),
        "max_window_kb": search.max_window_kb,
        "overlap": search.overlap,
        "ks": tuple(sorted(search.ks)),
    }
    results, failed = _drop_failed(_run_cells(_run_search_cell, cells, config.workers, state))

    _snapshot(config)
    tables = defaultdict(dict)
    for result in results:
        tables[result.cell.combination][result.cell.level] = dict(result.extra)
    ks = sorted(search.ks)
    header = ("level",) + tuple(f"P@{k}" for k in ks)
    improvements = []
    for combination, by_level in tables.items():
        rows = []
        for level in sorted(by_level):
            values = by_level[level]
            rows.append((f"{level:.1f}",) + tuple(_fmt_optional(values.get(k)) for k in ks))
        _write_csv(os.path.join(config.run_dir, "search", f"{combination.name}.csv"), header, rows)
        curves = {
            level: PrecisionCurve({k: values[k] for k in ks})
            for level, values in by_level.items()
            if all(k in values for k in ks)
        }
        if 0.0 in curves and len(curves) > 1:
            gain = precision_improvement(curves)
            improvements.append((combination.name,) + tuple(_fmt(gain[k]) for k in ks))
    _write_csv(
        os.path.join(config.run_dir, "search", "improvement.csv"),
        ("technique",) + tuple(f"P@{k}" for k in ks),
        improvements,
    )
    log.info("search evaluation written to %s", config.run_dir)
    return {"tables": dict(tables), "failed": failed}


def _fmt_optional(value):
    return "" if value is None else f"{value:.4f}"
