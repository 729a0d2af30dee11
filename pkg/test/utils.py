import contextlib
import os
import random
import re
import sys
from pathlib import Path

from ncdlab import cli
from ncdlab.compressors import LzBackend

TEST_DIR = Path(os.path.dirname(os.path.realpath(__file__)))
REPO_DIR = TEST_DIR.parent
FREQUENCY_LIST = REPO_DIR / "etc" / "english-freq.tsv"
# twelve public-domain texts, three per top directory
DESK_DIR = REPO_DIR / "etc" / "desk"

# a short match chain keeps the many matrices of the suite fast
FAST_LZ = LzBackend(max_chain=64)

FUNCTION_WORDS = (
    "the of and a in to it is was for with on that by at are not this but they from had "
    "which or we an were as all if can her said who one so up them some when could"
).split()

# topic vocabularies are disjoint; a few words sit at the rare end of etc/english-freq.tsv
TOPICS = {
    "astronomy": (
        "nebula comet telescope orbit planet galaxy quasar pulsar asteroid meteor "
        "eclipse perihelion aphelion parallax redshift supernova corona photosphere "
        "magnitude spectrograph"
    ).split(),
    "baking": (
        "sourdough flour yeast dough crumb crust oven proofing knead gluten starter "
        "levain batard boule scoring hydration rye spelt brioche ganache"
    ).split(),
    "sailing": (
        "fjord harbour keel rudder jib mainsail tiller halyard mooring anchor spinnaker "
        "starboard port windward leeward regatta dinghy ketch schooner mast"
    ).split(),
    "music": (
        "violin sonata cello concerto symphony overture allegro adagio crescendo "
        "staccato legato fugue cadenza etude quartet viola oboe bassoon timpani scherzo"
    ).split(),
}


def eprint(*args, **kwargs):
    """eprint prints to stderr"""

    print(*args, file=sys.stderr, **kwargs)


def make_text(rng, vocabulary, size, topic_share=0.4):
    """Seeded pseudo prose of roughly size bytes over vocabulary plus function words"""
    words = []
    length = 0
    while length < size:
        sentence = []
        for _ in range(rng.randint(6, 14)):
            if rng.random() < topic_share:
                sentence.append(rng.choice(vocabulary))
            else:
                sentence.append(rng.choice(FUNCTION_WORDS))
        text = " ".join(sentence).capitalize() + "."
        words.append(text)
        length += len(text) + 1
    return " ".join(words)[:size]


def make_desk_corpus(directory, per_topic=3, sizes=(2048, 8192), seed=0, topics=None):
    """Writes <directory>/<topic>/<topic><i>.txt and returns the sorted doc ids

    Document sizes are drawn uniformly from sizes (inclusive).
    """
    directory = Path(directory)
    ids = []
    for topic in sorted(topics or TOPICS):
        (directory / topic).mkdir(parents=True, exist_ok=True)
        for i in range(per_topic):
            rng = random.Random(f"desk:{seed}:{topic}:{i}")
            size = rng.randint(*sizes)
            text = make_text(rng, TOPICS[topic], size)
            (directory / topic / f"{topic}{i}.txt").write_text(text, encoding="ascii")
            ids.append(f"{topic}/{topic}{i}.txt")
    return sorted(ids)


def near_duplicate(data: bytes, fraction: float, seed=0) -> bytes:
    """Replaces fraction of the bytes of data with random printable bytes"""
    rng = random.Random(seed)
    out = bytearray(data)
    positions = list(range(len(out)))
    rng.shuffle(positions)
    for pos in positions[: int(len(out) * fraction)]:
        out[pos] = rng.randint(33, 126)
    return bytes(out)


def same_split_sets(a, b):
    """Tree isomorphism check on leaf-labelled unrooted trees"""
    return a.splits() == b.splits()


def run_cli(*args, capsys=None):
    """Runs the ncdlab command line in process and returns (exit code, stdout)"""
    code = cli.main([str(arg) for arg in args])
    out = ""
    if capsys is not None:
        out = capsys.readouterr().out
    return code, out


@contextlib.contextmanager
def log_contains(caplog, re_string, times=None):
    """Checks if during this with block the log matches re_string

    re_string:
        The regex to search for.
    times:
        If None, any number of matches is accepted. If a number, only that
        specific number of matches is accepted.
    """
    start = len(caplog.records)
    yield
    content = "\n".join(record.getMessage() for record in caplog.records[start:])
    if times is None:
        assert re.search(re_string, content), content
    else:
        match_count = len(re.findall(re_string, content))
        assert match_count == times, content
