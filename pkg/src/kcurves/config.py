"""Experiment configuration: YAML files merged over per-command defaults.

Keys are validated against the defaults, so a typo is an error rather than
a silently ignored setting.  Errors carry the line of the offending key.
"""
from __future__ import annotations

import copy
import os

import yaml

from .errors import ConfigError
from .kernels import Family

__all__ = ["DEFAULTS", "load_config", "resolve", "parse_override"]

_KERNEL = {"family": "laplace", "sigma": 1.0, "nu": 0.5, "amplitude": 1.0}


def _kernel(**kw):
    k = dict(_KERNEL)
    k.update(kw)
    return k


_DATA = {"mnist_images": None, "mnist_labels": None, "cifar_batches": None}
_COMMON = {"seed": 0, "output": {"dir": "out", "prefix": None}, "fit": {"window": None}}

DEFAULTS = {
    "teacher-student": {
        "teacher": _kernel(),
        "student": _kernel(),
        "dims": [1],
        "n_grid": {"start": 16, "stop": 4096, "num": 15},
        "n_test": 1000,
        "replicas": 100,
        "estimator": "sampled",
    },
    "lattice-mse": {
        "teacher": _kernel(sigma=0.1),
        "student": _kernel(sigma=0.1),
        "d": [1],
        "L": 1.0,
        "m": {"start": 16, "stop": 1024, "num": 7},
        "star_sum": {"truncation": None, "rel_tol": 1e-10, "max_truncation": None},
    },
    "kpca": {
        "source": "synthetic",
        "dim": 3,
        "teacher": _kernel(),
        "student": _kernel(),
        "n_tilde": 1024,
        "replicas": 1,
        "n_grid": None,
        "tail_method": "loglog",
        "dataset": "mnist",
        "data": dict(_DATA),
    },
    "appendix-h": {
        "spectrum": {"theta": 1.5, "q": 0.0, "alpha_S": None, "alpha_T": None, "d": None, "modes": 100000},
        "n_grid": {"start": 10, "stop": 2500, "num": 20},
    },
    "effdim": {
        "source": "hypersphere",
        "dim": 3,
        "n_points": 30000,
        "subset_sizes": {"start": 100, "stop": 30000, "num": 12},
        "replicas": 10,
        "dataset": "mnist",
        "data": dict(_DATA),
    },
    "realdata-regress": {
        "dataset": "mnist",
        "data": dict(_DATA),
        "kernel": _kernel(sigma=1000.0),
        "n_grid": {"start": 128, "stop": 4096, "num": 6},
        "n_test": 1000,
        "replicas": 20,
    },
    "realdata-svm": {
        "dataset": "mnist",
        "data": dict(_DATA),
        "kernel": _kernel(sigma=1000.0),
        "n_grid": {"start": 128, "stop": 4096, "num": 6},
        "n_test": 1000,
        "replicas": 20,
        "C": 1e4,
        "tol": 1e-3,
    },
}
for _d in DEFAULTS.values():
    _d.update(copy.deepcopy(_COMMON))

_KERNEL_KEYS = {"teacher", "student", "kernel"}
# keys whose value may be a list or a {start, stop, num} mapping
_GRID_KEYS = {"n_grid", "m", "subset_sizes"}
_CHOICES = {
    "estimator": {"sampled", "closed_form"},
    "source": {"synthetic", "hypersphere", "mnist", "cifar10"},
    "dataset": {"mnist", "cifar10"},
    "tail_method": {"truncated", "loglog"},
}


class _Node(dict):
    """Mapping that remembers the source line of each key."""

    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self.lines = {}


def _to_python(node):
    if isinstance(node, yaml.MappingNode):
        out = _Node()
        for k, v in node.value:
            key = k.value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            out[key] = _to_python(v)
            out.lines[key] = k.start_mark.line + 1
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v) for v in node.value]
    return yaml.safe_load(yaml.serialize(node))


def _line(node, key):
    return getattr(node, "lines", {}).get(key)


def _merge(defaults, user, path, command):
    out = copy.deepcopy(defaults)
    for key, val in user.items():
        where = _line(user, key)
        dotted = ".".join(path + [key])
        if key not in defaults:
            raise ConfigError(f"unknown key {dotted!r} for {command}", where)
        if key in _KERNEL_KEYS:
            vals = val if isinstance(val, list) else [val]
            if key != "teacher" and isinstance(val, list):
                raise ConfigError(f"{dotted} must be a single kernel", where)
            merged = [_merge_kernel(v, dotted, where, command) for v in vals]
            out[key] = merged if isinstance(val, list) else merged[0]
        elif key in _GRID_KEYS and isinstance(val, list):
            out[key] = val
        elif isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{dotted} must be a mapping", where)
            out[key] = _merge(defaults[key], val, path + [key], command)
        else:
            if key in _CHOICES and val not in _CHOICES[key]:
                raise ConfigError(f"{dotted}={val!r} not one of {sorted(_CHOICES[key])}", where)
            out[key] = val
    return out


def _merge_kernel(val, dotted, where, command):
    if not isinstance(val, dict):
        raise ConfigError(f"{dotted} must be a kernel mapping", where)
    k = _merge(_KERNEL, val, dotted.split("."), command)
    try:
        Family(k["family"])
    except ValueError:
        line = _line(val, "family") or where
        raise ConfigError(f"unknown kernel family {k['family']!r}", line) from None
    return k


def parse_override(text: str):
    """``"a.b=v"`` to ``(["a", "b"], value)``; the value is parsed as YAML."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    return key.strip().split("."), yaml.safe_load(raw)


def _apply_override(tree, keys, value):
    node = tree
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = _Node()
        node = node[k]
    node[keys[-1]] = value


def _check_data(cfg, command):
    source = cfg.get("source")
    needs = None
    if command.startswith("realdata") or source in ("mnist", "cifar10"):
        needs = cfg.get("dataset") if source in (None, "synthetic", "hypersphere") else source
        if source in ("mnist", "cifar10"):
            cfg["dataset"] = source
    if needs is None:
        return
    data = cfg["data"]
    keys = ["mnist_images", "mnist_labels"] if needs == "mnist" else ["cifar_batches"]
    for key in keys:
        paths = data.get(key)
        if paths is None:
            raise ConfigError(f"data.{key} is required for {needs}")
        for p in paths if isinstance(paths, list) else [paths]:
            if not os.path.exists(p):
                raise ConfigError(f"data.{key}: no such file {p!r}")


def resolve(command: str, text: str = "", overrides=()) -> dict:
    """Fully resolved configuration for ``command``.

    Parameters
    ----------
    command : str
        Sweep name, a key of :data:`DEFAULTS`.
    text : str
        YAML source; may be empty.
    overrides : sequence of str
        ``key.path=value`` settings applied on top of the file.
    """
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        node = yaml.compose(text) if text.strip() else None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from None
    user = _to_python(node) if node is not None else _Node()
    if not isinstance(user, dict):
        raise ConfigError("top level must be a mapping", 1)
    if "command" in user:
        if user["command"] != command:
            raise ConfigError(f"file is for {user['command']!r}, not {command!r}", _line(user, "command"))
        del user["command"]
    for o in overrides:
        keys, value = parse_override(o)
        _apply_override(user, keys, value)
    cfg = _merge(DEFAULTS[command], user, [], command)
    _check_data(cfg, command)
    return cfg


def load_config(command: str, path=None, overrides=()) -> dict:
    text = ""
    if path is not None:
        with open(path) as f:
            text = f.read()
    return resolve(command, text, overrides)
