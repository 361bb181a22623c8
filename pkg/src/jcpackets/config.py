"""
Run configuration: a YAML tree mapped onto dataclasses.

Validation errors carry the dotted path of the offending field, e.g.
``state.n_bar: must be >= 0``. Every ``auto`` value is replaced by a number
during a run and the resolved tree is echoed into the manifest, so the
manifest itself is a valid config for re-running.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError

AUTO = "auto"
STATE_KINDS = ("fock", "coherent", "thermal", "cat", "custom")


@dataclass
class StateConfig:
    kind: str = "coherent"
    n: int | None = None
    n_bar: float | None = 20.0
    alpha: float | None = None
    phi: float = math.pi
    mode: str = "exact"
    n_max: int | None = None
    file: str | None = None


@dataclass
class FmapConfig:
    kind: str = "jcm"
    g: float = 1.0


@dataclass
class GridConfig:
    t_end: float = 140.0
    dt: float | str = AUTO
    complex: bool = False
    tau_units: bool = False


@dataclass
class WindowConfig:
    T: float | str = AUTO
    end: float | None = None
    pad: int = 8


@dataclass
class PacketsConfig:
    m_range: list | str = AUTO


@dataclass
class RetrievalConfig:
    n_max: int | str = AUTO
    m: int = 0
    validate: bool = False
    spectrum: str | None = None


@dataclass
class OverlapConfig:
    T: float = 5.0
    band: int = 1
    ridge: float = 0.0
    floor: float = 1e-6


@dataclass
class RunConfig:
    state: StateConfig = field(default_factory=StateConfig)
    fmap: FmapConfig = field(default_factory=FmapConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    window: WindowConfig = field(default_factory=WindowConfig)
    packets: PacketsConfig = field(default_factory=PacketsConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    overlap: OverlapConfig = field(default_factory=OverlapConfig)
    trace: str | None = None
    out: str = "out"
    seed: int = 0  # reserved; every stage is deterministic

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> "RunConfig":
        s = self.state
        if s.kind not in STATE_KINDS:
            raise ConfigError("state.kind", f"must be one of {', '.join(STATE_KINDS)}, got {s.kind!r}")
        if s.kind == "fock":
            _require_int(s.n, "state.n", minimum=0)
        if s.kind in ("coherent", "thermal"):
            _require_number(s.n_bar, "state.n_bar", minimum=0)
        if s.kind == "cat":
            _require_number(s.alpha, "state.alpha", minimum=0)
            _require_number(s.phi, "state.phi", minimum=0)
            if not s.phi < 2 * math.pi:
                raise ConfigError("state.phi", "must lie in [0, 2pi)")
            if s.mode not in ("exact", "large-alpha"):
                raise ConfigError("state.mode", f"must be 'exact' or 'large-alpha', got {s.mode!r}")
        if s.kind == "custom" and not s.file:
            raise ConfigError("state.file", "custom states need a JSON distribution file")
        if s.n_max is not None:
            _require_int(s.n_max, "state.n_max", minimum=0)

        if self.fmap.kind not in ("jcm", "linear"):
            raise ConfigError("fmap.kind", f"must be 'jcm' or 'linear', got {self.fmap.kind!r}")
        _require_number(self.fmap.g, "fmap.g", minimum=0, strict=True)

        _require_number(self.grid.t_end, "grid.t_end", minimum=0, strict=True)
        if self.grid.dt != AUTO:
            _require_number(self.grid.dt, "grid.dt", minimum=0, strict=True)

        w = self.window
        if w.T != AUTO:
            _require_number(w.T, "window.T", minimum=0, strict=True)
        if w.end is not None:
            _require_number(w.end, "window.end", minimum=0, strict=True)
        _require_int(w.pad, "window.pad", minimum=1)

        m = self.packets.m_range
        if m != AUTO:
            if not (isinstance(m, list) and len(m) == 2 and all(_is_int(v) for v in m) and m[0] <= m[1]):
                raise ConfigError("packets.m_range", "must be 'auto' or [m_lo, m_hi] with m_lo <= m_hi")

        r = self.retrieval
        if r.n_max != AUTO:
            _require_int(r.n_max, "retrieval.n_max", minimum=0)
        _require_int(r.m, "retrieval.m")

        o = self.overlap
        _require_number(o.T, "overlap.T", minimum=0, strict=True)
        if o.band not in (1, 2):
            raise ConfigError("overlap.band", f"must be 1 or 2, got {o.band!r}")
        _require_number(o.ridge, "overlap.ridge", minimum=0)
        _require_number(o.floor, "overlap.floor", minimum=0, strict=True)
        return self


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _require_int(v, path, minimum=None):
    if not _is_int(v):
        raise ConfigError(path, f"must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {v}")


def _require_number(v, path, minimum=None, strict=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(path, f"must be a finite number, got {v!r}")
    if minimum is not None and (v < minimum or (strict and v == minimum)):
        raise ConfigError(path, f"must be {'>' if strict else '>='} {minimum}, got {v}")


def _build(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", f"expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in known:
            raise ConfigError(where, "unknown field")
        sub = _SECTIONS.get(key) if not path else None
        kwargs[key] = _build(sub, value, where) if sub else value
    return cls(**kwargs)


_SECTIONS = {
    "state": StateConfig,
    "fmap": FmapConfig,
    "grid": GridConfig,
    "window": WindowConfig,
    "packets": PacketsConfig,
    "retrieval": RetrievalConfig,
    "overlap": OverlapConfig,
}


def config_from_dict(data: dict | None) -> RunConfig:
    """Build and validate a RunConfig; a manifest's ``config`` block is accepted too."""
    if isinstance(data, dict) and "config" in data and "outputs" in data:
        data = data["config"]
    return _build(RunConfig, data or {}, "").validate()


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads YAML 1.2 floats such as ``1e-6``."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


def load_config(path: str | Path) -> RunConfig:
    """Read a YAML config, or a JSON manifest whose ``config`` block is reused."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.load(text, Loader=_Loader)
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(str(path), f"cannot parse config: {exc}") from None
    return config_from_dict(data)
