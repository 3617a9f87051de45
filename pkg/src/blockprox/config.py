"""Flat ``key=value`` files for :class:`~blockprox.core.SolverConfig`.

Keys mirror the dataclass fields, with a section prefix for the nested
rules::

    # comment
    schedule.kind = shuffled_per_cycle
    step.gamma = 2
    extrap.mode = fista_capped
    extrap.delta = 0.9
    extrap.monotone = true
    seed = 7
    max_cycles = 200
    tol_obj = 1e-10
    tol_residual = 0
"""

import dataclasses

from .core import ExtrapRule, Schedule, SolverConfig, StepRule

_SECTIONS = {"schedule": Schedule, "step": StepRule, "extrap": ExtrapRule}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(cls, name, raw):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    if name not in fields or name == "custom":
        raise KeyError(f"unknown key {cls.__name__}.{name}")
    f = fields[name]
    default = f.default if f.default is not dataclasses.MISSING else None
    raw = raw.strip()
    if isinstance(default, bool):
        low = raw.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float) or (default is None and name == "cap_scale"):
        return None if raw.lower() == "none" else float(raw)
    if isinstance(default, tuple):
        if name == "groups":
            return tuple(tuple(int(b) for b in g.split(",") if b.strip())
                         for g in raw.split(";") if g.strip())
        return tuple(int(b) for b in raw.split(",") if b.strip())
    return raw


def config_from_dict(items, base=None):
    """Build a config from ``{"section.field": "value"}`` strings."""
    base = SolverConfig() if base is None else base
    nested = {sec: {} for sec in _SECTIONS}
    top = {}
    for key, raw in items.items():
        key = key.strip()
        if "." in key:
            sec, name = key.split(".", 1)
            if sec not in _SECTIONS:
                raise KeyError(f"unknown section {sec!r}")
            nested[sec][name] = _coerce(_SECTIONS[sec], name, raw)
        else:
            if key in _SECTIONS:
                raise KeyError(f"{key!r} needs a field name")
            top[key] = _coerce(SolverConfig, key, raw)
    parts = {sec: dataclasses.replace(getattr(base, sec), **vals)
             for sec, vals in nested.items()}
    return dataclasses.replace(base, **parts, **top)


def parse_config(text, base=None):
    items = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        items[key.strip()] = value
    return config_from_dict(items, base)


def load_config(path, base=None):
    with open(path) as fh:
        return parse_config(fh.read(), base)


def dump_config(config):
    """Inverse of :func:`parse_config` (the ``custom`` callable is dropped)."""
    lines = []
    for sec in _SECTIONS:
        obj = getattr(config, sec)
        for f in dataclasses.fields(obj):
            if f.name == "custom":
                continue
            v = getattr(obj, f.name)
            if f.name == "groups":
                v = ";".join(",".join(str(b) for b in g) for g in v)
            elif isinstance(v, tuple):
                v = ",".join(str(b) for b in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{sec}.{f.name} = {v}")
    for f in dataclasses.fields(config):
        if f.name in _SECTIONS:
            continue
        v = getattr(config, f.name)
        lines.append(f"{f.name} = {repr(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"
