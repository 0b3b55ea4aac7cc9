"""End-to-end hybrid subspace runs driven by an INI configuration.

A run goes parse -> sector -> ground state -> excitation -> Born sampling ->
short-time measurement -> projection and long-time propagation ->
accumulation -> correlator -> Fourier transform -> peaks -> (optional)
comparison with the dense reference.  Every output file carries the
integral checksum and the full resolved configuration; wall-clock timings
live in their own file so that the remaining outputs are bit-reproducible.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    EXHAUSTIVE,
    STOCHASTIC,
    MERGED_DIM_CAP,
    TimeGrid,
    accumulate_loschmidt,
    assemble_correlator,
    exhaustive_weights,
    merged_loschmidt,
    project_and_propagate,
)
from .eigensolver import DENSE_CAP, Propagator, full_spectrum, ground_state
from .emulator import EmulatorConfig, SubspaceSample, born_sample, measure_many
from .fcidump import DATA_DIR, load_fixture, read_fcidump, table_checksum
from .fock import ExcitationOperator, apply_excitation, build_hamiltonian, enumerate_sector, format_det
from .spectrum import DEFAULT_THRESHOLD, compare_to_reference, extract_peaks, fourier_spectrum, level_errors

__all__ = [
    "ConfigError",
    "PipelineError",
    "RunConfig",
    "RunResult",
    "load_config",
    "config_from_mapping",
    "run_pipeline",
    "run_scaling_sweep",
    "run_variance_study",
    "reference_spectrum",
    "FIXTURE_PREFIX",
    "CONFIG_KEYS",
]

FIXTURE_PREFIX = "fixture:"
SAMPLED, FULL = "sampled", "full"


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    """A stage failed; ``outputs`` lists the files written before the failure."""

    def __init__(self, stage, cause, outputs=()):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.outputs = list(outputs)


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration.

    ``fcidump`` is a file path or ``fixture:<name>`` for a vendored system.
    ``subspace = full`` skips the emulator and uses the whole sector for
    every configuration (the oracle setting).
    """

    fcidump: str
    excitation: str
    emulator: EmulatorConfig = EmulatorConfig()
    grid: TimeGrid = TimeGrid()
    mode: str = STOCHASTIC
    merge_subspaces: bool = False
    subspace: str = SAMPLED
    threshold: float = DEFAULT_THRESHOLD
    omega_max: float | None = None
    output_dir: str = "subspectra-out"
    reference: str = "none"
    dense_cap: int = DENSE_CAP
    merged_dim_cap: int = MERGED_DIM_CAP

    def __post_init__(self):
        if self.mode not in (STOCHASTIC, EXHAUSTIVE):
            raise ConfigError(f"mode must be stochastic or exhaustive, got {self.mode!r}")
        if self.subspace not in (SAMPLED, FULL):
            raise ConfigError(f"subspace must be sampled or full, got {self.subspace!r}")
        if self.reference not in ("none", "dense"):
            raise ConfigError(f"reference must be none or dense, got {self.reference!r}")
        if not self.threshold >= 0:
            raise ConfigError("threshold must be non-negative")
        if self.omega_max is not None and not self.omega_max > 0:
            raise ConfigError("omega-max must be positive")
        if self.dense_cap < 1 or self.merged_dim_cap < 1:
            raise ConfigError("caps must be positive")
        try:
            ExcitationOperator.parse(self.excitation)
        except ValueError as exc:
            raise ConfigError(f"bad excitation {self.excitation!r}: {exc}") from None
        self.fcidump_path()

    def fcidump_path(self):
        if self.fcidump.startswith(FIXTURE_PREFIX):
            path = DATA_DIR / f"{self.fcidump[len(FIXTURE_PREFIX):]}.fcidump"
        else:
            path = Path(self.fcidump)
        if not path.is_file():
            raise ConfigError(f"integral file not found: {self.fcidump}")
        return path

    def load_table(self):
        if self.fcidump.startswith(FIXTURE_PREFIX):
            return load_fixture(self.fcidump[len(FIXTURE_PREFIX):])
        return read_fcidump(self.fcidump)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_emulator(self, **changes):
        return self.replace(emulator=dataclasses.replace(self.emulator, **changes))

    def echo(self):
        """Every setting, defaults included, keyed as in the config file."""
        e, g = self.emulator, self.grid
        return {
            "run": {
                "fcidump": self.fcidump,
                "excitation": str(ExcitationOperator.parse(self.excitation)),
                "output-dir": self.output_dir,
                "reference": self.reference,
                "dense-cap": self.dense_cap,
            },
            "emulator": {
                "t-step": e.t_step,
                "n-steps": e.n_steps,
                "shots": e.shots_per_step,
                "seed": e.seed,
                "n-samples": e.n_samples,
            },
            "dynamics": {
                "t-max-long": g.t_max_long,
                "dt-long": g.dt_long,
                "mode": self.mode,
                "merge-subspaces": self.merge_subspaces,
                "subspace": self.subspace,
                "merged-dim-cap": self.merged_dim_cap,
            },
            "spectrum": {"threshold": self.threshold, "omega-max": self.omega_max},
        }


# key -> (section, parser); sections keep the file readable, keys are unique
CONFIG_KEYS = {
    "fcidump": ("run", str),
    "excitation": ("run", str),
    "output-dir": ("run", str),
    "reference": ("run", str),
    "dense-cap": ("run", int),
    "t-step": ("emulator", float),
    "n-steps": ("emulator", int),
    "shots": ("emulator", int),
    "seed": ("emulator", int),
    "n-samples": ("emulator", int),
    "t-max-long": ("dynamics", float),
    "dt-long": ("dynamics", float),
    "mode": ("dynamics", str),
    "merge-subspaces": ("dynamics", "bool"),
    "subspace": ("dynamics", str),
    "merged-dim-cap": ("dynamics", int),
    "threshold": ("spectrum", float),
    "omega-max": ("spectrum", float),
}

_BOOL = {"true": True, "yes": True, "1": True, "on": True, "false": False, "no": False, "0": False, "off": False}


def _convert(key, raw):
    kind = CONFIG_KEYS[key][1]
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if kind == "bool":
            return raw if isinstance(raw, bool) else _BOOL[str(raw).lower()]
        if kind is str:
            return str(raw)
        if kind is int and isinstance(raw, str):
            return int(raw.replace("_", ""))
        return kind(raw)
    except (KeyError, ValueError, TypeError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def config_from_mapping(values):
    """Build a RunConfig from flat ``kebab-key -> value`` pairs (None = default)."""
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    v = {k: _convert(k, x) for k, x in values.items() if x is not None}
    for required in ("fcidump", "excitation"):
        if required not in v:
            raise ConfigError(f"missing required key {required!r}")
    try:
        emu = EmulatorConfig(**{
            name: v[key]
            for key, name in (("t-step", "t_step"), ("n-steps", "n_steps"), ("shots", "shots_per_step"),
                              ("seed", "seed"), ("n-samples", "n_samples"))
            if key in v
        })
        grid = TimeGrid(**{name: v[key] for key, name in (("t-max-long", "t_max_long"), ("dt-long", "dt_long")) if key in v})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    kw = {
        name: v[key]
        for key, name in (("mode", "mode"), ("merge-subspaces", "merge_subspaces"), ("subspace", "subspace"),
                          ("threshold", "threshold"), ("omega-max", "omega_max"), ("output-dir", "output_dir"),
                          ("reference", "reference"), ("dense-cap", "dense_cap"), ("merged-dim-cap", "merged_dim_cap"))
        if key in v
    }
    return RunConfig(fcidump=v["fcidump"], excitation=v["excitation"], emulator=emu, grid=grid, **kw)


def read_config_file(path):
    """Flat ``key -> raw string`` pairs from an INI file.

    ``;`` starts a comment, also after a value.  Empty values are skipped.
    Relative ``fcidump`` and ``output-dir`` paths are resolved against the
    directory holding the config file.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    flat = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            if CONFIG_KEYS[key][0] != section:
                raise ConfigError(f"{path}: key {key!r} belongs in [{CONFIG_KEYS[key][0]}], not [{section}]")
            if raw.strip():  # an empty value keeps the default
                flat[key] = raw
    for key in ("fcidump", "output-dir"):
        raw = flat.get(key)
        if raw and not raw.startswith(FIXTURE_PREFIX) and not Path(raw).is_absolute():
            flat[key] = str(path.parent / raw)
    return flat


def load_config(path=None, **overrides):
    """RunConfig from an optional INI file plus ``kebab-key`` overrides."""
    flat = read_config_file(path) if path is not None else {}
    flat.update({k: x for k, x in overrides.items() if x is not None})
    return config_from_mapping(flat)


# ---------------------------------------------------------------- outputs


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class _Writer:
    """Writes provenance-stamped CSV/JSON files and remembers what it wrote."""

    def __init__(self, out_dir, checksum, config):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.checksum = checksum
        self.config = config
        self.written = []

    def _record(self, name):
        if name not in self.written:
            self.written.append(name)
        return self.dir / name

    def csv(self, name, header, rows):
        buf = io.StringIO()
        buf.write(f"# checksum: {self.checksum}\n")
        buf.write(f"# config: {json.dumps(self.config, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
        self._record(name).write_text(buf.getvalue())

    def json(self, name, payload, stamp=True):
        if stamp:
            payload = {"checksum": self.checksum, "config": self.config, **payload}
        self._record(name).write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


class _Timer:
    def __init__(self):
        self.stages = {}
        self.current = None

    @contextmanager
    def stage(self, name):
        self.current = name
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = time.perf_counter() - t0


# ---------------------------------------------------------------- run


@dataclass
class RunResult:
    """Everything a run computed; files hold the same content on disk."""

    config: RunConfig
    checksum: str
    e0: float
    a_norm2: float
    psi_A: object
    subspaces: dict
    weights: dict
    series: object
    spectrum: object
    reference: object = None
    comparison: object = None
    manifest: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)


@dataclass
class _Prepared:
    table: object
    checksum: str
    e0: float
    psi_A: object
    a_norm2: float
    H_A: object
    sector_A: object
    propagator: object


def _prepare(cfg, timer):
    with timer.stage("parse"):
        table = cfg.load_table()
        checksum = table_checksum(table)
    with timer.stage("sector"):
        op = ExcitationOperator.parse(cfg.excitation)
        if max(p for _, p in op.factors) >= 2 * table.norb:
            raise ConfigError(f"excitation {op} addresses an orbital beyond norb = {table.norb}")
        sec0 = enumerate_sector(table.norb, table.n_up, table.n_down)
        H0 = build_hamiltonian(table, sec0.dets)
    with timer.stage("ground_state"):
        e0, psi0 = ground_state(H0, sec0, dense_cap=cfg.dense_cap)
    with timer.stage("apply_excitation"):
        psi_A, a_norm2 = apply_excitation(op, psi0)
        sec_A = psi_A.sector
        H_A = H0 if sec_A.same_as(sec0) else build_hamiltonian(table, sec_A.dets)
    return _Prepared(table, checksum, e0, psi_A, a_norm2, H_A, sec_A, Propagator(H_A, dense_cap=cfg.dense_cap))


def _sample_weights(cfg, prep):
    """Configurations and weights: Born frequencies or exact probabilities."""
    if cfg.mode == EXHAUSTIVE:
        w = exhaustive_weights(prep.psi_A)
        return w, {x: None for x in w}
    bs = born_sample(prep.psi_A, cfg.emulator.n_samples, cfg.emulator.seed)
    return dict(zip(bs.dets, bs.frequencies.tolist())), dict(zip(bs.dets, bs.counts.tolist()))


def _subspaces(cfg, prep, xs):
    if cfg.subspace == FULL:
        dets = prep.sector_A.dets
        return {x: SubspaceSample(x, dets, {x: 0.0}) for x in xs}
    return measure_many(sorted(xs), prep.H_A, prep.sector_A, cfg.emulator, propagator=prep.propagator)


def _loschmidt(cfg, prep, weights, subspaces, cache=None):
    n = cfg.emulator.n_samples if cfg.mode == STOCHASTIC else None
    if cfg.merge_subspaces:
        union = set()
        for s in subspaces.values():
            union.update(s.members)
        return merged_loschmidt(weights, prep.psi_A, union, prep.table, cfg.grid, cfg.mode, n,
                                dense_cap=cfg.dense_cap, dim_cap=cfg.merged_dim_cap)
    cache = {"proj": {}, "series": {}} if cache is None else cache
    estimators = {}
    for x in sorted(weights):
        members = subspaces[x].members
        key = (x, members)
        if key not in cache["series"]:
            # one projected Hamiltonian per distinct subspace, shared across x
            proj = cache["proj"].get(members)
            if proj is None:
                proj = project_and_propagate(x, members, prep.table, dense_cap=cfg.dense_cap)
                cache["proj"][members] = proj
            cache["series"][key] = dataclasses.replace(proj, x=x).estimator_series(prep.psi_A, cfg.grid)
        estimators[x] = cache["series"][key]
    return accumulate_loschmidt(weights, estimators, cfg.grid, cfg.mode, n)


def _subspace_summary(subspaces, weights):
    dims = {x: subspaces[x].dim for x in weights}
    values = np.array(list(dims.values()))
    hist = {}
    for d in values.tolist():
        hist[d] = hist.get(d, 0) + 1
    return {
        "n_configurations": len(dims),
        "max_dim": int(values.max()),
        "mean_dim": float(values.mean()),
        "weighted_mean_dim": float(sum(weights[x] * dims[x] for x in dims) / sum(weights.values())),
        "dim_histogram": dict(sorted(hist.items())),
    }


def run_pipeline(cfg, write=True):
    """Execute one full run; returns a RunResult and writes its files.

    On failure a PipelineError names the stage; files already written (and
    a manifest marked ``failed``) stay on disk.
    """
    timer = _Timer()
    writer = None
    manifest = {"version": __version__, "status": "running"}
    try:
        prep = _prepare(cfg, timer)
        echo = cfg.echo()
        if write:
            writer = _Writer(cfg.output_dir, prep.checksum, echo)
        manifest.update({
            "checksum": prep.checksum,
            "config": echo,
            "seeds": {"born": cfg.emulator.seed, "measurement": cfg.emulator.seed},
            "system": {
                "norb": prep.table.norb, "nelec": prep.table.nelec, "ms2": prep.table.ms2,
                "target_sector": [prep.sector_A.n_up, prep.sector_A.n_down],
                "target_dim": len(prep.sector_A),
            },
            "e0": prep.e0,
            "a_norm2": prep.a_norm2,
        })

        with timer.stage("born_sample"):
            weights, counts = _sample_weights(cfg, prep)
        with timer.stage("measure"):
            subspaces = _subspaces(cfg, prep, weights)
        summary = _subspace_summary(subspaces, weights)
        manifest["subspaces"] = summary
        if writer:
            rows = [
                (x, format_det(x, prep.table.norb), counts[x] if counts[x] is not None else "", weights[x], subspaces[x].dim)
                for x in sorted(weights)
            ]
            writer.csv("subspaces.csv", ["x_word", "x_occupation", "count", "weight", "dim"], rows)

        with timer.stage("project_propagate"):
            series = _loschmidt(cfg, prep, weights, subspaces)
        with timer.stage("assemble"):
            series = assemble_correlator(series, prep.e0, prep.a_norm2)
        N = cfg.grid.n_half
        manifest["loschmidt_t0"] = complex(series.loschmidt[N])
        if writer:
            cols = ["t", "re_g", "im_g", "re_l", "im_l"]
            data = [series.times, series.g_a.real, series.g_a.imag, series.loschmidt.real, series.loschmidt.imag]
            if series.stderr is not None:
                cols.append("stderr_l")
                data.append(series.stderr)
            writer.csv("gat.csv", cols, zip(*data))

        with timer.stage("fourier"):
            spec = fourier_spectrum(series, cfg.omega_max)
        if writer:
            writer.csv("spectrum.csv", ["omega", "magnitude", "re", "im"],
                       zip(spec.omega, spec.magnitude, spec.values.real, spec.values.imag))
        with timer.stage("peaks"):
            spec = extract_peaks(spec, cfg.threshold)

        ref = report = None
        if cfg.reference == "dense":
            with timer.stage("reference"):
                ref = full_spectrum(prep.H_A, prep.psi_A, e0=prep.e0, a_norm2=prep.a_norm2)
                report = compare_to_reference(spec, ref)
        manifest["spectrum"] = {
            "resolution": spec.resolution,
            "T": spec.T,
            "threshold": spec.threshold,
            "n_peaks": len(spec.peaks),
            "imag_fraction": spec.imag_fraction(),
            "heights_note": "heights use the dt/(2T) normalisation; positions are convention independent",
        }
        if report is not None:
            manifest["comparison"] = {
                "n_matched": len(report.matched), "n_merged": len(report.merged),
                "n_misses": len(report.misses), "n_spurious": len(report.spurious),
                "max_abs_error": report.max_error, "match_tol": report.match_tol,
            }
        if writer:
            writer.json("peaks.json", _peaks_payload(spec, report))
        manifest["status"] = "ok"
        return RunResult(
            config=cfg, checksum=prep.checksum, e0=prep.e0, a_norm2=prep.a_norm2, psi_A=prep.psi_A,
            subspaces=subspaces, weights=weights, series=series, spectrum=spec, reference=ref,
            comparison=report, manifest=manifest, timings=dict(timer.stages),
            outputs=list(writer.written) if writer else [],
        )
    except Exception as exc:
        manifest["status"] = "failed"
        manifest["failed_stage"] = timer.current
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        raise PipelineError(timer.current, exc, writer.written if writer else []) from exc
    finally:
        if writer is not None:
            manifest["outputs"] = sorted(set(writer.written) | {"manifest.json", "timings.json"})
            writer.json("manifest.json", manifest, stamp=False)
            writer.json("timings.json", {"seconds": timer.stages}, stamp=False)


def _peaks_payload(spec, report):
    by_peak = {}
    if report is not None:
        for g, _w, p, err in report.matched + report.merged:
            by_peak.setdefault(p, []).append((g, err))
    peaks = []
    for pk in spec.peaks:
        hits = by_peak.get(pk.omega, [])
        best = min(hits, key=lambda h: h[1]) if hits else (None, None)
        peaks.append({
            "omega": pk.omega, "height": pk.height, "interp_refined": pk.interp_refined,
            "matched_reference": best[0], "abs_error": best[1],
        })
    out = {"resolution": spec.resolution, "threshold": spec.threshold, "peaks": peaks}
    if report is not None:
        out["comparison"] = report.to_dict()
    return out


# ---------------------------------------------------------------- sweeps


def run_scaling_sweep(cfg, shot_list, seeds=None, write=True):
    """Peak-position error versus shots per measurement round.

    For each seed the Born samples are drawn once; each shot count then
    re-measures with prefix-stable streams, so larger counts only add
    outcomes.  ``level_error`` is the largest distance from a weighted
    reference level to its nearest extracted peak.
    """
    shot_list = [int(s) for s in shot_list]
    if not shot_list or any(s < 1 for s in shot_list) or shot_list != sorted(shot_list):
        raise ConfigError("shot list must be ascending positive integers")
    seeds = [cfg.emulator.seed] if seeds is None else [int(s) for s in seeds]
    timer = _Timer()
    prep = _prepare(cfg, timer)
    ref = full_spectrum(prep.H_A, prep.psi_A, e0=prep.e0, a_norm2=prep.a_norm2)
    rows = []
    for seed in seeds:
        base = cfg.with_emulator(seed=seed)
        weights, _ = _sample_weights(base, prep)
        cache = {"proj": {}, "series": {}}
        for shots in shot_list:
            run_cfg = base.with_emulator(shots_per_step=shots)
            subspaces = _subspaces(run_cfg, prep, weights)
            series = assemble_correlator(_loschmidt(run_cfg, prep, weights, subspaces, cache), prep.e0, prep.a_norm2)
            spec = extract_peaks(fourier_spectrum(series, cfg.omega_max), cfg.threshold)
            report = compare_to_reference(spec, ref)
            _, errs = level_errors(spec, ref)
            dims = [subspaces[x].dim for x in weights]
            rows.append({
                "seed": seed, "shots": shots, "max_dim": max(dims), "mean_dim": float(np.mean(dims)),
                "n_peaks": len(spec.peaks), "n_matched": len(report.matched), "n_merged": len(report.merged),
                "n_misses": len(report.misses), "n_spurious": len(report.spurious),
                "level_error": float(errs.max()) if len(errs) else 0.0,
                "mean_level_error": float(errs.mean()) if len(errs) else 0.0,
                "resolution": spec.resolution,
            })
    if write:
        echo = cfg.echo()
        echo["sweep"] = {"shots": shot_list, "seeds": seeds}
        w = _Writer(cfg.output_dir, prep.checksum, echo)
        header = list(rows[0])
        w.csv("sweep.csv", header, ([r[k] for k in header] for r in rows))
    return rows


def run_variance_study(cfg, times, n_draws=0, estimators=("sampling", "alternative"), write=True):
    """Exact, closed-form and empirical estimator variances at each time."""
    from .diagnostics import alt_estimator_variance, sampling_strategy_variance

    timer = _Timer()
    prep = _prepare(cfg, timer)
    rows = []
    for t in times:
        for name in estimators:
            if name == "sampling":
                rep = sampling_strategy_variance(prep.psi_A, prep.H_A, t, n_draws, cfg.emulator.seed, prep.propagator)
            elif name == "alternative":
                rep = alt_estimator_variance(prep.psi_A, prep.H_A, t, n_draws=n_draws, seed=cfg.emulator.seed,
                                             propagator=prep.propagator)
            else:
                raise ConfigError(f"unknown estimator {name!r}")
            rows.append((name, rep.t, rep.empirical_var, rep.predicted_var, rep.exact_var, rep.bound,
                         rep.l_a_exact.real, rep.l_a_exact.imag, rep.n_draws))
    if write:
        echo = cfg.echo()
        echo["variance"] = {"times": [float(t) for t in times], "draws": n_draws, "estimators": list(estimators)}
        w = _Writer(cfg.output_dir, prep.checksum, echo)
        w.csv("variance.csv", ["estimator", "t", "empirical", "predicted", "exact", "bound", "re_l", "im_l", "n_draws"], rows)
    return rows


def reference_spectrum(cfg, write=True):
    """Dense reference levels ``(gap, weight)`` for the configured excitation."""
    timer = _Timer()
    prep = _prepare(cfg, timer)
    ref = full_spectrum(prep.H_A, prep.psi_A, e0=prep.e0, a_norm2=prep.a_norm2)
    gaps, weights = ref.levels()
    if write:
        w = _Writer(cfg.output_dir, prep.checksum, cfg.echo())
        w.csv("reference.csv", ["gap", "weight", "above_threshold"],
              ((g, x, int(x > cfg.threshold)) for g, x in zip(gaps, weights)))
    return ref
