"""
Command-line pipeline: ``jcpackets {simulate,decompose,retrieve,retrieve-overlap,state}``.

Each verb reads an optional YAML config, applies flag overrides, writes CSV
and JSON data files into ``--out`` and finishes with ``manifest.json``
(written atomically, last). Exit codes: 0 success, 2 configuration or
argument error, 3 numerical failure. ``JCPACKETS_LOG_LEVEL`` sets logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import tempfile
import time
from contextlib import contextmanager
from importlib import metadata
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .charfn import KGrid, chi_eval
from .config import AUTO, RunConfig
from .errors import ConfigError, InvalidArgumentError, NumericalError
from .inversion import (
    FrequencyMap,
    InversionTrace,
    TimeGrid,
    aligned_dt,
    auto_dt,
    complex_trace,
    inversion_trace,
    locate_revivals,
)
from .overlap import SolverOptions, build_fredholm_system, solve_w0, windowed_spectrum
from .packets import (
    Spectrum,
    auto_window,
    decompose,
    default_m_range,
    estimate_n_tilde,
    extract_packet_zero,
    packet_center_time,
    propagate_packet,
)
from .retrieval import retrieval_curve, retrieve_distribution, validate_retrieval
from .states import (
    CatParams,
    PhotonDistribution,
    cat_distribution,
    coherent_distribution,
    fock_distribution,
    thermal_distribution,
)

log = logging.getLogger("jcpackets")
LOG_ENV = "JCPACKETS_LOG_LEVEL"
FMT = "%.17g"


# ---------------------------------------------------------------- file io


def write_csv(path: Path, header: str, columns) -> None:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, fmt=FMT, delimiter=",", header=header, comments="")


def read_csv(path: Path, header: str) -> np.ndarray:
    path = Path(path)
    try:
        with path.open() as fh:
            first = fh.readline().strip()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from None
    if first != header:
        raise ConfigError(str(path), f"expected header {header!r}, found {first!r}")
    return np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_trace(path: Path, trace: InversionTrace) -> None:
    write_csv(path, "t,W", [trace.times, trace.values])


def read_trace(path) -> InversionTrace:
    data = read_csv(path, "t,W")
    t, w = data[:, 0], data[:, 1]
    if t.size < 2:
        raise ConfigError(str(path), "trace needs at least two samples")
    dt = (t[-1] - t[0]) / (t.size - 1)
    if np.abs(np.diff(t) - dt).max() > 1e-9 * max(dt, abs(t[-1])):
        raise ConfigError(str(path), "trace times are not uniformly spaced")
    return InversionTrace(TimeGrid(float(t[0]), float(dt), t.size), w)


def write_spectrum(path: Path, spec: Spectrum) -> None:
    write_csv(path, "nu,Re,Im", [spec.nu, spec.values.real, spec.values.imag])
    meta = {"window_T": spec.window_T, "dt": spec.dt, "t0": spec.t0, "source": spec.source}
    meta["window"] = list(spec.window) if spec.window else None
    write_json(path.with_suffix(".json"), meta)


def read_spectrum(path) -> Spectrum:
    path = Path(path)
    data = read_csv(path, "nu,Re,Im")
    nu, values = data[:, 0], data[:, 1] + 1j * data[:, 2]
    meta_path = path.with_suffix(".json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    else:
        # the FFT grid spans exactly 1/dt
        meta = {"window_T": math.nan, "dt": 1.0 / (nu.size * (nu[1] - nu[0])), "t0": 0.0, "source": "W"}
    window = tuple(meta["window"]) if meta.get("window") else None
    return Spectrum(nu, values, meta["window_T"], meta["dt"], meta.get("t0", 0.0), meta.get("source", "W"), window)


def atomic_write_json(path: Path, data) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".manifest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------- run state


class Run:
    """Collects outputs, diagnostics and timings; writes the manifest last."""

    def __init__(self, command: str, cfg: RunConfig, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.outputs: list[str] = []
        self.diagnostics: dict = {}
        self.timings: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def spectrum(self, name: str, spec: Spectrum) -> None:
        write_spectrum(self.path(name), spec)
        self.outputs.append(str(Path(name).with_suffix(".json")))

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        log.info("stage %s", name)
        yield
        self.timings[name] = time.perf_counter() - start

    def finish(self) -> Path:
        manifest = {
            "command": self.command,
            "config": self.cfg.to_dict(),
            "versions": _versions(),
            "outputs": sorted(set(self.outputs)),
            "diagnostics": self.diagnostics,
            "timings": self.timings,
        }
        target = self.out / "manifest.json"
        atomic_write_json(target, _jsonable(manifest))
        return target


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("jcpackets", "numpy", "scipy", "pyyaml"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


# ---------------------------------------------------------------- pipeline pieces


def build_distribution(cfg: RunConfig) -> PhotonDistribution:
    s = cfg.state
    if s.kind == "fock":
        return fock_distribution(s.n)
    if s.kind == "coherent":
        return coherent_distribution(s.n_bar, s.n_max)
    if s.kind == "thermal":
        return thermal_distribution(s.n_bar, s.n_max)
    if s.kind == "cat":
        return cat_distribution(CatParams(s.alpha, s.phi), s.n_max, s.mode)
    try:
        text = Path(s.file).read_text()
    except OSError as exc:
        raise ConfigError("state.file", f"cannot read {s.file}: {exc.strerror}") from None
    return PhotonDistribution.from_json(text)


def build_fmap(cfg: RunConfig) -> FrequencyMap:
    return FrequencyMap(cfg.fmap.kind, cfg.fmap.g)


def resolve_dt(cfg: RunConfig, dist: PhotonDistribution, fmap: FrequencyMap, mark: float | None = None) -> float:
    dt = auto_dt(fmap, dist.n_max) if cfg.grid.dt == AUTO else float(cfg.grid.dt)
    if cfg.grid.dt == AUTO and mark:
        dt = aligned_dt(dt, mark)
    cfg.grid.dt = dt
    return dt


def obtain_trace(cfg: RunConfig, fmap: FrequencyMap, t_end: float | None = None, mark: float | None = None):
    """(trace, distribution or None): read ``cfg.trace`` or simulate the configured state."""
    if cfg.trace:
        trace = read_trace(cfg.trace)
        cfg.grid.dt = trace.grid.dt
        cfg.grid.t_end = trace.grid.t_end
        return trace, None
    dist = build_distribution(cfg)
    dt = resolve_dt(cfg, dist, fmap, mark)
    grid = TimeGrid.span(cfg.grid.t_end if t_end is None else t_end, dt)
    return inversion_trace(dist, fmap, grid), dist


def resolve_window(cfg: RunConfig, trace: InversionTrace, fmap: FrequencyMap) -> tuple[float, float]:
    """(n_tilde, T): auto window unless T is given; both are echoed into the config."""
    if cfg.window.T == AUTO:
        n_tilde, T = auto_window(trace, fmap)
        log.info("auto window: n_tilde=%.4f T=%.6g", n_tilde, T)
    else:
        T = float(cfg.window.T)
        n_tilde = estimate_n_tilde(trace, fmap)
    cfg.window.T = T
    return n_tilde, T


def packet_zero_spectrum(cfg: RunConfig, trace: InversionTrace, T: float, pad: int) -> Spectrum:
    try:
        return extract_packet_zero(trace, T, window_end=cfg.window.end, zero_pad_factor=pad)
    except InvalidArgumentError as exc:
        raise InvalidArgumentError(f"{exc}; set window.T / window.end manually") from None


def _truth_errors(result, dist: PhotonDistribution | None) -> dict:
    if dist is None:
        return {}
    truth = dist.padded(result.n_max)
    return {"max_error_vs_state": float(np.abs(result.probs_raw - truth).max())}


# ---------------------------------------------------------------- verbs


def cmd_simulate(cfg: RunConfig, run: Run) -> None:
    fmap = build_fmap(cfg)
    dist = build_distribution(cfg)
    dt = resolve_dt(cfg, dist, fmap)
    grid = TimeGrid.span(cfg.grid.t_end, dt)
    with run.stage("simulate"):
        z = complex_trace(dist, fmap, grid)
        trace = z.real
    write_trace(run.path("trace.csv"), trace)
    if cfg.grid.complex:
        write_csv(run.path("trace_complex.csv"), "t,ReZ,ImZ", [z.times, z.values.real, z.values.imag])
    diag = {"n_max": dist.n_max, "W0": float(trace.values[0]), "count": grid.count}
    if fmap.kind == "jcm":
        n_tilde = estimate_n_tilde(trace, fmap)
        tau = packet_center_time(1, n_tilde, fmap.g)
        diag.update(n_tilde=n_tilde, tau_formula=tau)
        if grid.t_end >= 4 * tau / 3:
            # first revival maximum, reported next to the formula value
            diag["tau_first_peak"] = float(locate_revivals(trace, tau, [1])[0])
        if cfg.grid.tau_units:
            write_csv(run.path("trace_tau.csv"), "t_over_tau,W", [trace.times / tau, trace.values])
    elif cfg.grid.tau_units:
        raise ConfigError("grid.tau_units", "tau units are defined for the jcm map only")
    run.diagnostics["simulate"] = diag


def cmd_decompose(cfg: RunConfig, run: Run) -> None:
    fmap = build_fmap(cfg)
    with run.stage("trace"):
        trace, _ = obtain_trace(cfg, fmap)
    n_tilde, T = resolve_window(cfg, trace, fmap)
    t_end = trace.grid.t_end
    if cfg.packets.m_range == AUTO:
        m_values = default_m_range(t_end, n_tilde, fmap.g)
        cfg.packets.m_range = [m_values.start, m_values.stop - 1]
    lo, hi = cfg.packets.m_range
    m_values = list(range(lo, hi + 1))
    with run.stage("spectrum"):
        base = packet_zero_spectrum(cfg, trace, T, cfg.window.pad)
        window_len = base.window[1] - base.window[0]
        # inverse-transform period must hold the reconstruction interval with margin
        needed = math.ceil(2 * (t_end + T) / (window_len + trace.grid.dt))
        td_pad = max(cfg.window.pad, needed)
        td_base = base if td_pad == cfg.window.pad else packet_zero_spectrum(cfg, trace, T, td_pad)
    with run.stage("packets"):
        packets = decompose(td_base, m_values, trace.grid, fmap.g, n_tilde)
        total = packets.total()
    run.spectrum("spectrum_m0.csv", base)
    for m, z in zip(packets.m_indices, packets.packets):
        write_csv(run.path(f"packet_m{m}.csv"), "t,ReZ,ImZ", [z.times, z.values.real, z.values.imag])
    write_csv(run.path("reconstruction.csv"), "t,W_sum,W_direct", [trace.times, total.values, trace.values])
    manifest = {
        "g": fmap.g,
        "window_T": base.window_T,
        "window": list(base.window),
        "m_indices": m_values,
        "n_tilde": n_tilde,
        "time_domain_pad": td_pad,
    }
    write_json(run.path("packets.json"), manifest)
    run.diagnostics["decompose"] = {
        "linf_gap": float(np.abs(total.values - trace.values).max()),
        "n_tilde": n_tilde,
        "window_T": T,
        "window": list(base.window),
        "time_domain_pad": td_pad,
    }


def _retrieval_n_max(cfg: RunConfig):
    return None if cfg.retrieval.n_max == AUTO else int(cfg.retrieval.n_max)


def cmd_retrieve(cfg: RunConfig, run: Run) -> None:
    fmap = build_fmap(cfg)
    trace = dist = None
    if cfg.retrieval.spectrum:
        base = read_spectrum(cfg.retrieval.spectrum)
        if cfg.retrieval.validate:
            if not (cfg.trace or cfg.state):
                raise ConfigError("retrieval.validate", "validation needs a trace or a state")
            with run.stage("trace"):
                trace, dist = obtain_trace(cfg, fmap)
    else:
        with run.stage("trace"):
            trace, dist = obtain_trace(cfg, fmap)
        _, T = resolve_window(cfg, trace, fmap)
        with run.stage("spectrum"):
            base = packet_zero_spectrum(cfg, trace, T, cfg.window.pad)
    spec = propagate_packet(base, cfg.retrieval.m, fmap.g) if cfg.retrieval.m else base
    with run.stage("retrieve"):
        result = retrieve_distribution(spec, fmap, _retrieval_n_max(cfg))
    cfg.retrieval.n_max = result.n_max
    data = result.to_dict()
    diag = dict(result.diagnostics)
    diag.update(_truth_errors(result, dist))
    if cfg.retrieval.validate:
        with run.stage("validate"):
            report = validate_retrieval(result, trace, fmap)
        diag["validation"] = report.to_dict()
        data["diagnostics"] = dict(data["diagnostics"], validation=report.to_dict())
    write_json(run.path("retrieval.json"), _jsonable(data))
    n_fine = np.linspace(0, result.n_max, 20 * result.n_max + 1)
    write_csv(run.path("retrieval_curve.csv"), "n,P", [n_fine, retrieval_curve(spec, fmap, n_fine)])
    run.diagnostics["retrieve"] = diag


def cmd_retrieve_overlap(cfg: RunConfig, run: Run) -> None:
    fmap = build_fmap(cfg)
    T = float(cfg.overlap.T)
    with run.stage("trace"):
        trace, dist = obtain_trace(cfg, fmap, t_end=T, mark=T)
    with run.stage("spectrum"):
        observed = windowed_spectrum(trace, T, cfg.window.pad)
    with run.stage("solve"):
        system = build_fredholm_system(observed, fmap.g, cfg.overlap.band, cfg.overlap.floor)
        w0, report = solve_w0(system, SolverOptions(regularization=cfg.overlap.ridge), report=True)
    with run.stage("retrieve"):
        n_max = _retrieval_n_max(cfg)
        corrected = retrieve_distribution(w0, fmap, n_max)
        naive = retrieve_distribution(observed, fmap, corrected.n_max)
    cfg.retrieval.n_max = corrected.n_max
    run.spectrum("spectrum_observed.csv", observed)
    run.spectrum("spectrum_w0.csv", w0)
    write_json(run.path("retrieval_naive.json"), _jsonable(naive.to_dict()))
    write_json(run.path("retrieval.json"), _jsonable(corrected.to_dict()))
    write_json(run.path("solver.json"), _jsonable(report.to_dict()))
    diag = {"solver": report.to_dict(), "naive": naive.diagnostics, "corrected": corrected.diagnostics}
    if dist is not None:
        diag["max_error_naive"] = _truth_errors(naive, dist)["max_error_vs_state"]
        diag["max_error_corrected"] = _truth_errors(corrected, dist)["max_error_vs_state"]
    run.diagnostics["retrieve_overlap"] = diag


def cmd_state(cfg: RunConfig, run: Run | None) -> None:
    dist = build_distribution(cfg)
    print(dist.to_json())
    if run is None:
        return
    write_json(run.path("distribution.json"), dist.to_dict())
    k = KGrid.for_distribution(dist).k
    chi = chi_eval(dist, k)
    write_csv(run.path("chi.csv"), "k,Re,Im", [k, chi.real, chi.imag])
    run.diagnostics["state"] = {"n_max": dist.n_max, "mean": dist.mean()}


COMMANDS = {
    "simulate": cmd_simulate,
    "decompose": cmd_decompose,
    "retrieve": cmd_retrieve,
    "retrieve-overlap": cmd_retrieve_overlap,
    "state": cmd_state,
}


# ---------------------------------------------------------------- argument handling


def _m_range(text: str):
    parts = text.replace(":", ",").split(",")
    try:
        lo, hi = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return [lo, hi]


def _auto_or_float(text: str):
    return AUTO if text == AUTO else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jcpackets", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration (a manifest.json also works)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--state", dest="state_kind", choices=cfgmod.STATE_KINDS)
        p.add_argument("--nbar", type=float, help="mean photon number (coherent, thermal)")
        p.add_argument("--n", type=int, help="Fock photon number")
        p.add_argument("--alpha", type=float)
        p.add_argument("--phi", type=float)
        p.add_argument("--mode", choices=("exact", "large-alpha"))
        p.add_argument("--n-max", type=int, help="state truncation")
        p.add_argument("--state-file", help="custom distribution JSON")
        p.add_argument("--g", type=float, help="coupling constant")
        p.add_argument("--fmap", choices=("jcm", "linear"))
        p.add_argument("--t-end", type=float)
        p.add_argument("--dt", type=_auto_or_float)
        p.add_argument("--trace", help="input trace CSV (t,W) instead of simulating")
        if name == "simulate":
            p.add_argument("--complex", action="store_true", help="also write Z(t)")
            p.add_argument("--tau-units", action="store_true", help="also write the trace against t/tau")
        if name in ("decompose", "retrieve", "retrieve-overlap"):
            p.add_argument("--window", type=_auto_or_float, help="window half-width T (gT)")
            p.add_argument("--pad", type=int, help="zero-padding factor")
        if name in ("decompose", "retrieve"):
            p.add_argument("--window-end", type=float, help="window end for asymmetric windows")
        if name == "decompose":
            p.add_argument("--m-range", type=_m_range, help="packet indices LO:HI")
        if name in ("retrieve", "retrieve-overlap"):
            p.add_argument("--retrieve-n-max", type=int)
        if name == "retrieve":
            p.add_argument("--packet", type=int, help="retrieve from packet m")
            p.add_argument("--spectrum", help="packet spectrum CSV (nu,Re,Im)")
            p.add_argument("--validate", action="store_true")
        if name == "retrieve-overlap":
            p.add_argument("--band", type=int, choices=(1, 2))
            p.add_argument("--ridge", type=float)
            p.add_argument("--floor", type=float)
    return parser


_OVERRIDES = {
    "state_kind": ("state", "kind"),
    "nbar": ("state", "n_bar"),
    "n": ("state", "n"),
    "alpha": ("state", "alpha"),
    "phi": ("state", "phi"),
    "mode": ("state", "mode"),
    "n_max": ("state", "n_max"),
    "state_file": ("state", "file"),
    "g": ("fmap", "g"),
    "fmap": ("fmap", "kind"),
    "t_end": ("grid", "t_end"),
    "dt": ("grid", "dt"),
    "window_end": ("window", "end"),
    "pad": ("window", "pad"),
    "m_range": ("packets", "m_range"),
    "retrieve_n_max": ("retrieval", "n_max"),
    "packet": ("retrieval", "m"),
    "spectrum": ("retrieval", "spectrum"),
    "band": ("overlap", "band"),
    "ridge": ("overlap", "ridge"),
    "floor": ("overlap", "floor"),
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = cfgmod.load_config(args.config) if args.config else RunConfig()
    data = cfg.to_dict()
    for attr, (section, key) in _OVERRIDES.items():
        value = getattr(args, attr, None)
        if value is not None:
            data[section][key] = value
    if getattr(args, "window", None) is not None:
        if args.command == "retrieve-overlap":
            data["overlap"]["T"] = args.window
        else:
            data["window"]["T"] = args.window
    for flag, (section, key) in {"complex": ("grid", "complex"), "tau_units": ("grid", "tau_units"),
                                 "validate": ("retrieval", "validate")}.items():
        if getattr(args, flag, False):
            data[section][key] = True
    if args.trace is not None:
        data["trace"] = args.trace
    if args.out is not None:
        data["out"] = args.out
    return cfgmod.config_from_dict(data)


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "state":
            run = Run("state", cfg, Path(cfg.out)) if args.out else None
        else:
            run = Run(args.command, cfg, Path(cfg.out))
        COMMANDS[args.command](cfg, run)
        if run is not None:
            path = run.finish()
            log.info("wrote %s", path)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"jcpackets: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"jcpackets: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"jcpackets: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
