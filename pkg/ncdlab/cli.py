"""Command line interface

Every command prints its result (a number, CSV or PBM) on stdout and
logs on stderr.  Exit codes: 0 on success, 2 on bad input, 3 when a run
fails.
"""

import argparse
import csv
import logging
import os
import sys
from typing import List, Optional

from . import __version__, clustering, experiments, search, textops
from .compressors import BACKENDS, calgary_benchmark, get_backend
from .config import load_config
from .errors import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, NcdLabError, ValidationError
from .ncd import LengthCache, ncd, ncd_matrix, read_matrix

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _setup_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    root = logging.getLogger()
    root.setLevel(level)
    handlers = [logging.StreamHandler(sys.stderr)]
    if args.log_file:
        os.makedirs(os.path.dirname(os.path.abspath(args.log_file)), exist_ok=True)
        handlers.append(logging.FileHandler(args.log_file, encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    return handlers


def _option_value(text):
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"backend option value {text!r} is not an integer") from None


def _backend(args, name=None):
    options = {}
    for item in args.option or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"backend option {item!r} is not KEY=VALUE")
        options[key] = _option_value(value)
    return get_backend(name or args.backend, **options)


def _read(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _emit(text, output=None):
    if output is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(os.path.abspath(output)), exist_ok=True)
    with open(output, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    log.info("wrote %s", output)


def _levels(text):
    return tuple(textops.check_level(float(v)) for v in text.split(","))


def cmd_ncd(args):
    backend = _backend(args)
    value = ncd(backend, _read(args.x), _read(args.y), what=f"({args.x}, {args.y})")
    print(f"{value:.6f}")


def cmd_matrix(args):
    backend = _backend(args)
    docs = textops.read_corpus(args.directory)
    matrix = ncd_matrix(backend, docs, workers=args.workers, cache=LengthCache())
    if args.format == "square":
        _emit(matrix.to_square(), args.output)
    else:
        _emit(matrix.to_csv(), args.output)


def _spec(args, level=None, substitution=None):
    return textops.DistortionSpec(
        args.selection,
        substitution or args.substitution,
        getattr(args, "shuffle", textops.Shuffle.NONE.value),
        args.level if level is None else level,
        args.seed,
    )


def _inputs(path):
    if os.path.isdir(path):
        return textops.read_corpus(path)
    return [textops.Document(os.path.basename(path), _read(path))]


def cmd_distort(args):
    table = textops.load_frequency_table(args.frequency_list)
    spec = _spec(args)
    removal = textops.build_removal_set(table, spec.selection, spec.level, spec.seed)
    log.info(
        "removal set of %d words, cumulative frequency %.4f",
        len(removal),
        removal.cumulative_frequency,
    )
    for doc in _inputs(args.input):
        distorted = textops.distort_document(doc.doc_id, doc.data, table, spec, removal)
        path = textops.write_distorted(args.output, doc.doc_id, distorted, spec)
        if distorted.words_total:
            log.debug(
                "%s: %.1f%% of words substituted",
                path,
                100 * textops.percentage_substituted(distorted),
            )
        print(path)


def _config_overrides(args):
    overrides = {"output": args.output, "workers": args.workers, "repeats": args.repeats}
    for key in ("seeds", "backends"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value.split(",")
    if args.levels is not None:
        overrides["levels"] = _levels(args.levels)
    return overrides


def cmd_curve(args):
    config = load_config(args.config, _config_overrides(args))
    result = experiments.run_curve(config)
    if result["failed"]:
        log.error("%d combinations aborted", len(result["failed"]))
    print(os.path.join(config.run_dir, "curve.csv"))
    return EXIT_RUNTIME if result["failed"] and not result["rows"] else EXIT_OK


def cmd_cluster(args):
    if args.tree:
        with open(args.tree, encoding="utf-8") as f:
            tree = clustering.Dendrogram.from_newick(f.read(), args.tree)
    else:
        matrix = read_matrix(args.matrix).check()
        tree = clustering.build_dendrogram(matrix, args.method, args.seed, args.patience)
    if args.newick:
        _emit(tree.to_newick() + "\n", args.newick)
    if args.dot:
        _emit(tree.to_dot(), args.dot)
    if args.assignment:
        assignment = clustering.load_assignment(args.assignment)
    else:
        assignment = clustering.assignment_from_ids(tree.leaves)
    report = clustering.clustering_error(tree, assignment)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("achieved", "perfect", "error"))
    writer.writerow((report.achieved_sum, report.perfect_sum, report.error))


def _topic_documents(directory):
    docs = textops.read_corpus(directory)
    topics = clustering.assignment_from_ids(doc.doc_id for doc in docs)
    return [search.CorpusDocument(doc.doc_id, topics[doc.doc_id], doc.data) for doc in docs]


def _overlap(text):
    if text is None:
        return None
    return float(text) if "." in text else int(text)


def cmd_search_index(args):
    stores = search.index_corpus(
        _topic_documents(args.corpus),
        args.max_window_kb,
        _overlap(args.overlap),
        args.stores,
        args.workers,
    )
    for store in stores:
        print(f"{store.name}\t{len(store)}")


def cmd_search_query(args):
    stores = search.load_stores(args.stores)
    backend = _backend(args)
    result = search.query(
        stores, backend, _read(args.query), args.k, args.workers, query_id=args.query
    )
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("rank", "doc_id", "offset", "ncd", "topic"))
    for rank, hit in enumerate(result.hits, 1):
        passage = hit.passage
        writer.writerow((rank, passage.doc_id, passage.offset, f"{hit.score:.6f}", passage.topic))


def cmd_search_eval(args):
    config = load_config(args.config, _config_overrides(args))
    result = experiments.run_search_eval(config)
    print(os.path.join(config.run_dir, "search"))
    return EXIT_RUNTIME if result["failed"] and not result["tables"] else EXIT_OK


def cmd_calgary(args):
    backends = [_backend(args, name) for name in args.backends.split(",")]
    report = calgary_benchmark(args.directory, backends, verify=args.verify)
    if args.output:
        os.makedirs(os.path.dirname(os.path.abspath(args.output)), exist_ok=True)
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            report.write_csv(f)
    else:
        report.write_csv(sys.stdout)


def cmd_entropy(args):
    print(f"{textops.entropy(args.probs):.6f}")


def cmd_removal_map(args):
    table = textops.load_frequency_table(args.frequency_list)
    removal = textops.build_removal_set(table, args.selection, args.level, args.seed)
    doc = textops.normalize_and_tokenize(_read(args.document))
    _emit(textops.emit_removal_map(doc, removal, args.width).to_pbm(), args.output)


def cmd_complexity(args):
    table = textops.load_frequency_table(args.frequency_list)
    backend = _backend(args)
    raw = _read(args.document)
    doc_id = os.path.basename(args.document)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(("level", "substituted", "compressed"))
    for level in _levels(args.levels):
        distorted = textops.distort_document(doc_id, raw, table, _spec(args, level))
        writer.writerow(
            (
                f"{level:.1f}",
                f"{textops.percentage_substituted(distorted):.4f}",
                textops.complexity_estimate(backend, distorted),
            )
        )


def _add_backend(parser, default="lz"):
    parser.add_argument("--backend", "-b", default=default, choices=sorted(BACKENDS))
    parser.add_argument(
        "--option",
        "-O",
        action="append",
        metavar="KEY=VALUE",
        help="backend option such as search_size=4096 or order=4",
    )


def _add_workers(parser):
    parser.add_argument("--workers", "-j", type=int, default=1)


def _add_distortion(parser, substitution=True):
    parser.add_argument("--frequency-list", "-f", required=True)
    parser.add_argument(
        "--selection", "-s", default="mfw", choices=[m.value for m in textops.Selection]
    )
    if substitution:
        parser.add_argument(
            "--substitution", default="asterisk", choices=[m.value for m in textops.Substitution]
        )
    parser.add_argument("--seed", type=int, default=0)


def _add_overrides(parser):
    parser.add_argument("config", help="experiment JSON file")
    parser.add_argument("--output", "-o", help="output directory, overrides the config")
    parser.add_argument("--workers", "-j", type=int)
    parser.add_argument("--repeats", type=int)
    parser.add_argument("--seeds", help="comma separated")
    parser.add_argument("--backends", help="comma separated")
    parser.add_argument("--levels", help="comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncdlab", description="Compression distance text clustering and retrieval"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true")
    parser.add_argument("--quiet", "-q", action="store_true")
    parser.add_argument("--log-file")
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    p = commands.add_parser("ncd", help="distance between two files")
    p.add_argument("x")
    p.add_argument("y")
    _add_backend(p)
    p.set_defaults(func=cmd_ncd)

    p = commands.add_parser("matrix", help="distance matrix over a directory")
    p.add_argument("directory")
    p.add_argument("--format", choices=("csv", "square"), default="csv")
    p.add_argument("--output", "-o")
    _add_backend(p)
    _add_workers(p)
    p.set_defaults(func=cmd_matrix)

    p = commands.add_parser("distort", help="write distorted copies of documents")
    p.add_argument("input", help="file or directory")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--level", "-l", type=float, required=True)
    p.add_argument("--shuffle", default="none", choices=[m.value for m in textops.Shuffle])
    _add_distortion(p)
    p.set_defaults(func=cmd_distort)

    p = commands.add_parser("curve", help="clustering-error sweep")
    _add_overrides(p)
    p.set_defaults(func=cmd_curve)

    p = commands.add_parser("cluster", help="build a tree and score it")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrix", "-m", help="matrix file, .csv or square format")
    source.add_argument("--tree", "-t", help="Newick file to re-score")
    p.add_argument("--method", choices=clustering.BUILDERS, default="nj")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int)
    p.add_argument("--assignment", "-a", help="id<TAB>cluster file")
    p.add_argument("--newick")
    p.add_argument("--dot")
    p.set_defaults(func=cmd_cluster)

    p = commands.add_parser("search", help="passage retrieval")
    search_commands = p.add_subparsers(dest="search_command", metavar="command")
    search_commands.required = True

    s = search_commands.add_parser("index", help="cut a topic corpus into passage stores")
    s.add_argument("corpus", help="directory of topic subdirectories")
    s.add_argument("stores", help="output directory")
    s.add_argument("--max-window-kb", type=int, default=search.DEFAULT_MAX_WINDOW_KB)
    s.add_argument("--overlap", help="bytes, or a fraction of the window such as 0.25")
    _add_workers(s)
    s.set_defaults(func=cmd_search_index)

    s = search_commands.add_parser("query", help="rank passages against a query file")
    s.add_argument("stores")
    s.add_argument("query")
    s.add_argument("-k", type=int, default=10)
    _add_backend(s)
    _add_workers(s)
    s.set_defaults(func=cmd_search_query)

    s = search_commands.add_parser("eval", help="precision at K per distortion level")
    _add_overrides(s)
    s.set_defaults(func=cmd_search_eval)

    p = commands.add_parser("calgary", help="bits per byte over the Calgary corpus")
    p.add_argument("directory")
    p.add_argument("--backends", default=",".join(BACKENDS))
    p.add_argument("--verify", action="store_true", help="decompress and compare")
    p.add_argument("--output", "-o")
    p.add_argument("--option", "-O", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_calgary)

    p = commands.add_parser("entropy", help="Shannon entropy of a distribution")
    p.add_argument("probs", type=float, nargs="+")
    p.set_defaults(func=cmd_entropy)

    p = commands.add_parser("removal-map", help="PBM map of substituted words")
    p.add_argument("document")
    p.add_argument("--level", "-l", type=float, required=True)
    p.add_argument("--width", "-w", type=int, default=80)
    p.add_argument("--output", "-o")
    _add_distortion(p, substitution=False)
    p.set_defaults(func=cmd_removal_map)

    p = commands.add_parser("complexity", help="compressed size of a document per level")
    p.add_argument("document")
    p.add_argument("--levels", default=",".join(f"{v:.1f}" for v in textops.LEVELS))
    _add_distortion(p)
    _add_backend(p)
    p.set_defaults(func=cmd_complexity)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = _setup_logging(args)
    try:
        code = args.func(args)
        return EXIT_OK if code is None else code
    except NcdLabError as e:
        log.error("%s", e)
        return e.exit_code
    except (FileNotFoundError, IsADirectoryError, NotADirectoryError) as e:
        log.error("%s: %s", e.filename, e.strerror)
        return EXIT_VALIDATION
    except ValueError as e:
        log.error("%s", e)
        return EXIT_VALIDATION
    except OSError as e:
        log.error("%s", e)
        return EXIT_RUNTIME
    finally:
        root = logging.getLogger()
        for handler in handlers:
            root.removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
