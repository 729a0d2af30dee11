"""Experiment configuration

One JSON file describes a run; relative paths are resolved against the
directory holding the file.  Command line flags override single keys.
etc/experiment.json lists every key with its default.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Mapping, Optional, Tuple

from .clustering import BUILDERS
from .compressors import BACKENDS, get_backend
from .errors import ParseError, ValidationError
from .search import DEFAULT_KS, DEFAULT_MAX_WINDOW_KB
from .textops import LEVELS, Selection, Shuffle, Substitution, check_level, parse_choice

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchConfig:
    corpus: str
    queries_per_topic: int = 1
    max_window_kb: int = DEFAULT_MAX_WINDOW_KB
    overlap: Optional[float] = None
    ks: Tuple[int, ...] = DEFAULT_KS


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    frequency_list: str
    assignment: Optional[str] = None
    backends: Tuple[str, ...] = ("lz",)
    selections: Tuple[Selection, ...] = tuple(Selection)
    substitutions: Tuple[Substitution, ...] = tuple(Substitution)
    shuffles: Tuple[Shuffle, ...] = (Shuffle.NONE,)
    levels: Tuple[float, ...] = LEVELS
    seeds: Tuple[int, ...] = (0,)
    repeats: int = 10
    output: str = "runs"
    run_name: str = "run"
    workers: int = 1
    builder: str = "nj"
    patience: Optional[int] = None
    backend_options: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    search: Optional[SearchConfig] = None

    @property
    def run_dir(self) -> str:
        return os.path.join(self.output, self.run_name)

    def make_backends(self):
        return [get_backend(name, **self.backend_options.get(name, {})) for name in self.backends]

    def to_dict(self) -> Dict[str, Any]:
        """Plain JSON-ready snapshot, enums as their names"""
        out = asdict(self)
        for key in ("selections", "substitutions", "shuffles"):
            out[key] = [member.value for member in getattr(self, key)]
        for key, value in out.items():
            if isinstance(value, tuple):
                out[key] = list(value)
        if self.search is not None:
            out["search"]["ks"] = list(self.search.ks)
        return out

    def validate(self) -> "ExperimentConfig":
        for key in ("dataset", "frequency_list", "assignment"):
            path = getattr(self, key)
            if path is not None and not os.path.exists(path):
                raise ValidationError(f"{key} {path} does not exist")
        if self.search is not None and not os.path.isdir(self.search.corpus):
            raise ValidationError(f"search corpus {self.search.corpus} is not a directory")
        for name in self.backends:
            if name not in BACKENDS:
                raise ValidationError(f"unknown backend {name!r}")
        for name in self.backend_options:
            if name not in BACKENDS:
                raise ValidationError(f"options given for unknown backend {name!r}")
        if self.builder not in BUILDERS:
            raise ValidationError(f"unknown tree builder {self.builder!r}")
        if self.workers < 1 or self.repeats < 1:
            raise ValidationError("workers and repeats must be at least 1")
        if not self.seeds:
            raise ValidationError("at least one seed is needed")
        self.make_backends()
        return self


def _tuple(value, convert=lambda v: v):
    if isinstance(value, (str, int, float)):
        value = [value]
    return tuple(convert(v) for v in value)


_CONVERTERS = {
    "backends": lambda v: _tuple(v, str),
    "selections": lambda v: _tuple(v, lambda x: parse_choice(Selection, x)),
    "substitutions": lambda v: _tuple(v, lambda x: parse_choice(Substitution, x)),
    "shuffles": lambda v: _tuple(v, lambda x: parse_choice(Shuffle, x)),
    "levels": lambda v: _tuple(v, check_level),
    "seeds": lambda v: _tuple(v, int),
    "repeats": int,
    "workers": int,
}


def _resolve(base, path):
    if path is None:
        return None
    return os.path.normpath(os.path.join(base, os.path.expanduser(path)))


def config_from_dict(raw: Mapping[str, Any], base_dir=".", run_name="run") -> ExperimentConfig:
    raw = dict(raw)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValidationError(f"unknown configuration keys: {', '.join(unknown)}")
    for key in ("dataset", "frequency_list"):
        if key not in raw:
            raise ValidationError(f"configuration lacks {key!r}")

    values = {"run_name": run_name}
    for key, value in raw.items():
        if value is None:
            values[key] = None
            continue
        convert = _CONVERTERS.get(key)
        try:
            values[key] = convert(value) if convert else value
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"bad value for {key!r}: {e}") from None

    for key in ("dataset", "frequency_list", "assignment", "output"):
        if key in values:
            values[key] = _resolve(base_dir, values[key])
    if "output" not in values:
        values["output"] = _resolve(base_dir, "runs")

    search = values.get("search")
    if search is not None:
        if not isinstance(search, Mapping) or "corpus" not in search:
            raise ValidationError("'search' must be an object with a 'corpus' key")
        try:
            search = dict(search)
            if "ks" in search:
                search["ks"] = _tuple(search["ks"], int)
            search["corpus"] = _resolve(base_dir, search["corpus"])
            values["search"] = SearchConfig(**search)
        except TypeError as e:
            raise ValidationError(f"bad 'search' section: {e}") from None
    return ExperimentConfig(**values)


def load_config(path, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Loads and validates path; overrides (already parsed flags) win over the file

    Override paths are taken relative to the working directory.
    """
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, path, e.lineno) from None
    except FileNotFoundError:
        raise ValidationError(f"{path}: no such configuration file") from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be an object", path)
    raw = {key: value for key, value in raw.items() if not key.startswith("_")}
    run_name = os.path.splitext(os.path.basename(path))[0]
    config = config_from_dict(raw, os.path.dirname(os.path.abspath(path)), run_name)
    if overrides:
        cwd_paths = {"output": _resolve(os.getcwd(), overrides.get("output"))}
        plain = {key: value for key, value in overrides.items() if value is not None}
        converted = {}
        for key, value in plain.items():
            if key == "output":
                converted[key] = cwd_paths["output"]
            elif key in _CONVERTERS:
                converted[key] = _CONVERTERS[key](value)
            else:
                converted[key] = value
        config = replace(config, **converted)
        log.debug("overrides applied: %s", ", ".join(sorted(converted)))
    return config.validate()
