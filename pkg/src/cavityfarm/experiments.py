"""Scripted experiments over the farming engine.

Each experiment takes a declarative scenario (usually loaded from TOML),
runs deterministically, and leaves three kinds of artifact in the output
directory: per-point result files under points/, a JSON manifest recording
the scenario hash and the status of every point, and a final CSV assembled
from the points in grid order.  Because every point is deterministic, reruns
and resumed runs produce byte-identical CSVs regardless of worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from cavityfarm import __version__
from cavityfarm.audit import audit
from cavityfarm.cavity import CavityConfig
from cavityfarm.drivers import (
    GwSpringDriver,
    SampledStrain,
    SineStrain,
    SinusoidDriver,
    StaticDriver,
    StaticStrain,
)
from cavityfarm.farming import InitialFieldSpec, run_perturbed, run_to_fixed_point
from cavityfarm.gaussian import IntegratorConfig

KINDS = ("valley-sweep", "vibration", "freq-response", "gw", "audit")


class ExperimentError(RuntimeError):
    """A point of the experiment failed and --keep-going was not requested."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one experiment run depends on, resolved to absolute units.

    The seed is reserved for future stochastic variants; nothing in the
    deterministic pipelines consumes it, but it participates in the hash so
    runs that declare different seeds never share a manifest.
    """

    kind: str
    cavity: CavityConfig
    initial_field: InitialFieldSpec = InitialFieldSpec()
    integrator: IntegratorConfig = IntegratorConfig()
    out_dir: str = "results"
    seed: int = 0
    fp_tol: float = 1e-9
    fp_max_cycles: int = 2000
    fp_min_cycles: int = 0
    grid: tuple[float, ...] | None = None
    amplitude: float | None = None
    gamma: float | None = None
    n_periods: float = 3.0
    n_cycles: int | None = None
    spring_omega0: float | None = None
    spring_q: float | None = None
    strain_kind: str | None = None
    strain_h0: float | None = None
    strain_omega: float | None = None
    waveform: str | None = None
    audit_span: tuple[float, float] | None = None
    audit_small_cycles: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.kind in ("valley-sweep", "freq-response") and not self.grid:
            raise ValueError(f"{self.kind} needs a non-empty sweep grid")
        if self.kind == "valley-sweep" and self.grid:
            floor = self.cavity.cycle_time / self.cavity.length
            bad = [f for f in self.grid if f < floor - 1e-12]
            if bad:
                raise ValueError(
                    f"flight factors {bad} are below the interaction time {floor}"
                )
        if self.kind in ("vibration", "freq-response") and self.amplitude is None:
            raise ValueError(f"{self.kind} needs a vibration amplitude")
        if self.kind == "vibration" and self.gamma is None:
            raise ValueError("vibration needs a vibration frequency")
        if self.kind == "gw":
            if self.spring_omega0 is None or self.spring_q is None:
                raise ValueError("gw needs spring_omega0 and spring_q")
            if self.strain_kind not in ("sine", "static", "file"):
                raise ValueError("gw strain_kind must be sine, static or file")
            if self.strain_kind == "file" and not self.waveform:
                raise ValueError("strain_kind 'file' needs a waveform path")
            if self.strain_kind != "file" and self.strain_h0 is None:
                raise ValueError("need strain_h0")
            if self.strain_kind == "sine" and self.strain_omega is None:
                raise ValueError("sine strain needs strain_omega")
            if self.strain_kind == "static" and self.n_cycles is None:
                raise ValueError("static strain needs an explicit n_cycles")
        if self.n_periods <= 0:
            raise ValueError("n_periods must be positive")
        if self.n_cycles is not None and self.n_cycles < 1:
            raise ValueError("n_cycles must be at least 1")


def config_hash(scenario: ScenarioConfig) -> str:
    """Hash of everything that determines the numbers (output path excluded)."""
    blob = dataclasses.asdict(scenario)
    blob.pop("out_dir")
    blob["code_version"] = __version__
    return hashlib.sha256(
        json.dumps(blob, sort_keys=True, default=float).encode()
    ).hexdigest()


def default_valley_grid(
    start: float = 3.5,
    stop: float = 6.5,
    step: float = 0.01,
    refine_step: float = 5e-4,
    refine_halfwidth: float = 0.05,
) -> tuple[float, ...]:
    """Coarse grid over [start, stop] with a fine grid near each integer,
    where the valleys are too narrow for the coarse step to resolve."""
    ticks = np.arange(round(start / step), round(stop / step) + 1)
    values = set(np.round(ticks * step, 9))
    for k in range(math.ceil(start), math.floor(stop) + 1):
        lo = max(start, k - refine_halfwidth)
        hi = min(stop, k + refine_halfwidth)
        fine = np.arange(round(lo / refine_step), round(hi / refine_step) + 1)
        values.update(np.round(fine * refine_step, 9))
    return tuple(sorted(values))


def _cavity_from_dict(raw: dict) -> CavityConfig:
    kwargs = dict(raw)
    for key in ("length", "coupling", "omega_gap", "cycle_time", "ramp", "delay", "r1", "r2"):
        if kwargs.get(key) is not None:
            kwargs[key] = float(kwargs[key])
    if "n_modes" in kwargs:
        kwargs["n_modes"] = int(kwargs["n_modes"])
    return CavityConfig(**kwargs)


def load_scenario(path, out_dir: str | None = None) -> ScenarioConfig:
    """Build a ScenarioConfig from a TOML file.

    Vibration parameters may be given in the natural relative units (lengths
    as fractions of the rest length, frequencies as fractions of the
    fundamental mode); they are resolved to absolute values here, so the
    hash and the manifest always speak absolute units.
    """
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)

    if "cavity" not in raw:
        raise ValueError(f"{path}: missing [cavity] section")
    cavity = _cavity_from_dict(raw["cavity"])
    length = cavity.length
    omega_1 = np.pi / length

    kind = raw.get("kind")
    if kind is None:
        raise ValueError(f"{path}: missing 'kind'")

    sweep = raw.get("sweep", {})
    grid: tuple[float, ...] | None = None
    if sweep.get("default"):
        if kind != "valley-sweep":
            raise ValueError("the default grid is only defined for valley-sweep")
        grid = default_valley_grid()
    elif "values" in sweep:
        grid = tuple(float(v) for v in sweep["values"])
    elif "values_rel" in sweep:
        if kind != "freq-response":
            raise ValueError("values_rel (units of the fundamental) is for freq-response")
        grid = tuple(float(v) * omega_1 for v in sweep["values_rel"])

    drive = raw.get("drive", {})
    amplitude = drive.get("amplitude")
    if amplitude is None and "amplitude_rel" in drive:
        amplitude = float(drive["amplitude_rel"]) * length
    gamma = drive.get("gamma")
    if gamma is None and "gamma_rel" in drive:
        gamma = float(drive["gamma_rel"]) * omega_1

    gw = raw.get("gw", {})
    spring_omega0 = gw.get("omega0")
    if spring_omega0 is None and "omega0_rel" in gw:
        spring_omega0 = float(gw["omega0_rel"]) * omega_1
    strain_omega = gw.get("strain_omega")
    if strain_omega is None and "strain_omega_rel" in gw:
        strain_omega = float(gw["strain_omega_rel"]) * omega_1

    aud = raw.get("audit", {})
    span = aud.get("t_span")

    return ScenarioConfig(
        kind=kind,
        cavity=cavity,
        initial_field=InitialFieldSpec(**raw.get("initial_field", {})),
        integrator=IntegratorConfig(**raw.get("integrator", {})),
        out_dir=out_dir or raw.get("out_dir", "results"),
        seed=int(raw.get("seed", 0)),
        fp_tol=float(raw.get("fixed_point", {}).get("tol", 1e-9)),
        fp_max_cycles=int(raw.get("fixed_point", {}).get("max_cycles", 2000)),
        fp_min_cycles=int(raw.get("fixed_point", {}).get("min_cycles", 0)),
        grid=grid,
        amplitude=None if amplitude is None else float(amplitude),
        gamma=None if gamma is None else float(gamma),
        n_periods=float(drive.get("n_periods", 3.0)),
        n_cycles=None if raw.get("n_cycles") is None else int(raw["n_cycles"]),
        spring_omega0=None if spring_omega0 is None else float(spring_omega0),
        spring_q=None if gw.get("q_factor") is None else float(gw["q_factor"]),
        strain_kind=gw.get("strain_kind"),
        strain_h0=None if gw.get("strain_h0") is None else float(gw["strain_h0"]),
        strain_omega=None if strain_omega is None else float(strain_omega),
        waveform=gw.get("waveform"),
        audit_span=None if span is None else (float(span[0]), float(span[1])),
        audit_small_cycles=(
            None if aud.get("small_case_cycles") is None else int(aud["small_case_cycles"])
        ),
    )


def _fmt(value) -> str:
    """Stable scalar formatting for CSV cells: full double precision."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header: list[str], rows) -> None:
    """Write rows atomically with fixed formatting (byte-stable reruns)."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    os.replace(tmp, path)


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a CSV written by write_csv: (header, float array of shape (rows, cols))."""
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = lines[0].split(",")
    data = np.array([[float(cell) for cell in line.split(",")] for line in lines[1:]])
    return header, data


class Manifest:
    """Append-only per-point bookkeeping for one experiment directory.

    Single-writer: only the orchestrating process touches the file, worker
    processes just return results.  Saves are atomic (write + rename).
    """

    def __init__(self, path, scenario_hash: str, kind: str) -> None:
        self.path = Path(path)
        self.data = {
            "config_hash": scenario_hash,
            "code_version": __version__,
            "kind": kind,
            "points": {},
        }
        if self.path.exists():
            with open(self.path) as fh:
                existing = json.load(fh)
            if existing.get("config_hash") != scenario_hash:
                raise ExperimentError(
                    f"{self.path} belongs to a different scenario "
                    f"(hash {existing.get('config_hash')!r}, expected {scenario_hash!r}); "
                    "use a fresh output directory"
                )
            self.data = existing

    def status(self, key: str) -> str | None:
        entry = self.data["points"].get(key)
        return None if entry is None else entry["status"]

    def mark(self, key: str, status: str, wall_clock: float, file=None, error=None) -> None:
        entry = {"status": status, "wall_clock": round(wall_clock, 3)}
        if file is not None:
            entry["file"] = str(file)
        if error is not None:
            entry["error"] = error
        self.data["points"][key] = entry
        self.save()

    def save(self) -> None:
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self.path)


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("CAVITYFARM_WORKERS")
    return max(1, int(env)) if env else 1


def _point_path(out_dir: Path, key: str) -> Path:
    return out_dir / "points" / f"{key}.json"


def _load_point(path: Path):
    with open(path) as fh:
        return json.load(fh)["row"]


def _save_point(path: Path, row, error=None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        json.dump({"row": list(row), "error": error}, fh)
        fh.write("\n")
    os.replace(tmp, path)


def _run_grid(tasks, worker, manifest, out_dir: Path, resume: bool, workers: int):
    """Run (key, payload) tasks through worker, with caching and a pool.

    worker(payload) -> (row, soft_error).  A soft error (e.g. a point that
    ran but did not converge) is recorded and its row kept; an exception
    marks the point failed with no row.  Returns (rows_by_key, hard_errors).
    """
    rows: dict[str, list] = {}
    errors: dict[str, str] = {}
    todo = []
    for key, payload in tasks:
        cached = _point_path(out_dir, key)
        if resume and manifest.status(key) in ("done", "no-convergence") and cached.exists():
            rows[key] = _load_point(cached)
        else:
            todo.append((key, payload))

    def record(key, outcome, wall):
        row, soft_error = outcome
        _save_point(_point_path(out_dir, key), row, soft_error)
        rows[key] = list(row)
        status = "done" if soft_error is None else "no-convergence"
        manifest.mark(key, status, wall, file=str(_point_path(out_dir, key)), error=soft_error)

    if workers <= 1 or len(todo) <= 1:
        for key, payload in todo:
            t0 = time.perf_counter()
            try:
                outcome = worker(payload)
            except Exception as exc:
                errors[key] = f"{type(exc).__name__}: {exc}"
                manifest.mark(key, "failed", time.perf_counter() - t0, error=errors[key])
                continue
            record(key, outcome, time.perf_counter() - t0)
        return rows, errors

    with ProcessPoolExecutor(max_workers=min(workers, len(todo))) as pool:
        t0 = time.perf_counter()
        futures = {pool.submit(worker, payload): key for key, payload in todo}
        for fut in as_completed(futures):
            key = futures[fut]
            wall = time.perf_counter() - t0
            try:
                outcome = fut.result()
            except Exception as exc:
                errors[key] = f"{type(exc).__name__}: {exc}"
                manifest.mark(key, "failed", wall, error=errors[key])
                continue
            record(key, outcome, wall)
    return rows, errors


def _finish(scenario, manifest, out_dir, header, keys, rows, errors, keep_going, csv_name):
    """Assemble the final CSV in grid order and enforce the error policy."""
    ordered = [rows[k] for k in keys if k in rows]
    csv_path = out_dir / csv_name
    write_csv(csv_path, header, ordered)
    manifest.data["csv"] = str(csv_path)
    manifest.save()
    if errors and not keep_going:
        key, msg = next(iter(errors.items()))
        raise ExperimentError(f"{len(errors)} point(s) failed, first: [{key}] {msg}")
    return csv_path


def _prepare(scenario: ScenarioConfig, out_dir):
    out = Path(out_dir if out_dir is not None else scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out / "manifest.json", config_hash(scenario), scenario.kind)
    return out, manifest


def _fixed_point(scenario: ScenarioConfig, cavity: CavityConfig | None = None):
    return run_to_fixed_point(
        scenario.initial_field,
        cavity if cavity is not None else scenario.cavity,
        tol=scenario.fp_tol,
        max_cycles=scenario.fp_max_cycles,
        control=scenario.integrator,
        min_cycles=scenario.fp_min_cycles,
    )


def _valley_point(payload):
    scenario, f = payload
    cfg = scenario.cavity.with_flight_factor(f)
    report = _fixed_point(scenario, cfg)
    if not report.converged:
        row = [f, float("nan"), float("nan"), -1]
        return row, f"no fixed point within {scenario.fp_max_cycles} cycles"
    rec = report.last_record
    return [f, rec.e_n, rec.corr_q1p2, report.cycles_used], None


def valley_sweep(
    scenario: ScenarioConfig,
    out_dir=None,
    resume: bool = False,
    workers: int | None = None,
    keep_going: bool = False,
):
    """Fixed-point entanglement against the flight factor f = (T + delay)/L.

    One rigid-cavity fixed-point run per grid value; emits
    (f, e_n_steady, corr_q1p2_steady, cycles_to_converge) per row.
    Non-convergence is recorded in the manifest, not fatal.
    """
    out, manifest = _prepare(scenario, out_dir)
    keys = [_fmt(f) for f in scenario.grid]
    tasks = [(_fmt(f), (scenario, f)) for f in scenario.grid]
    rows, errors = _run_grid(tasks, _valley_point, manifest, out, resume, resolve_workers(workers))
    header = ["f", "e_n_steady", "corr_q1p2_steady", "cycles_to_converge"]
    return _finish(scenario, manifest, out, header, keys, rows, errors, keep_going, "valley.csv")


def _cycles_for_periods(scenario: ScenarioConfig, omega: float) -> int:
    """Whole cycles covering n_periods of a drive at angular frequency omega."""
    if scenario.n_cycles is not None:
        return scenario.n_cycles
    if omega <= 0:
        raise ValueError("need an explicit n_cycles when the drive has no period")
    span = scenario.n_periods * 2.0 * np.pi / omega
    return max(1, math.ceil(span / scenario.cavity.repetition_time))


def vibration_run(
    scenario: ScenarioConfig,
    out_dir=None,
    resume: bool = False,
    workers: int | None = None,
    keep_going: bool = False,
):
    """Per-cycle pair observables while the length follows L0 + A sin(gamma t).

    Starts from the rigid-cavity fixed point of the scenario's config and
    emits one (cycle, t, e_n, corr_q1p2) row per cycle, t being the record
    time at the end of the cycle's interaction window.
    """
    out, manifest = _prepare(scenario, out_dir)
    csv_path = out / "vibration.csv"
    if resume and manifest.status("run") == "done" and csv_path.exists():
        return csv_path
    t0 = time.perf_counter()
    fp = _fixed_point(scenario)
    if not fp.converged:
        manifest.mark("run", "failed", time.perf_counter() - t0, error="no fixed point")
        raise ExperimentError(f"no fixed point within {scenario.fp_max_cycles} cycles")
    driver = (
        SinusoidDriver(scenario.cavity.length, scenario.amplitude, scenario.gamma)
        if scenario.amplitude > 0 and scenario.gamma > 0
        else StaticDriver(scenario.cavity.length)
    )
    n_cycles = _cycles_for_periods(scenario, scenario.gamma)
    records = run_perturbed(fp, scenario.cavity, driver, n_cycles, control=scenario.integrator)
    rows = [[r.cycle_index, r.t_end, r.e_n, r.corr_q1p2] for r in records]
    write_csv(csv_path, ["cycle", "t", "e_n", "corr_q1p2"], rows)
    manifest.mark("run", "done", time.perf_counter() - t0, file=str(csv_path))
    manifest.data["csv"] = str(csv_path)
    manifest.save()
    return csv_path


def _freq_point(payload):
    scenario, fp, gamma = payload
    cfg = scenario.cavity
    if gamma > 0:
        driver = SinusoidDriver(cfg.length, scenario.amplitude, gamma)
        n_cycles = _cycles_for_periods(scenario, gamma)
    else:
        # quasi-static limit probe: no vibration at all
        driver = StaticDriver(cfg.length)
        n_cycles = scenario.n_cycles or 10
    records = run_perturbed(fp, cfg, driver, n_cycles, control=scenario.integrator)
    response = max(abs(r.corr_q1p2) for r in records)
    return [gamma, response], None


def freq_response(
    scenario: ScenarioConfig,
    out_dir=None,
    resume: bool = False,
    workers: int | None = None,
    keep_going: bool = False,
):
    """Peak |2<q1 p2>| over the drive, per vibration frequency in the grid.

    The rigid-cavity fixed point is computed once and shared; grid points
    are independent and run in parallel.  Emits (gamma, max_abs_corr_q1p2).
    """
    out, manifest = _prepare(scenario, out_dir)
    keys = [_fmt(g) for g in scenario.grid]
    todo_exists = any(
        not (resume and manifest.status(k) in ("done", "no-convergence")
             and _point_path(out, k).exists())
        for k in keys
    )
    fp = None
    if todo_exists:
        t0 = time.perf_counter()
        fp = _fixed_point(scenario)
        if not fp.converged:
            raise ExperimentError(f"no fixed point within {scenario.fp_max_cycles} cycles")
        manifest.data["fixed_point_wall_clock"] = round(time.perf_counter() - t0, 3)
        manifest.save()
    tasks = [(_fmt(g), (scenario, fp, g)) for g in scenario.grid]
    rows, errors = _run_grid(tasks, _freq_point, manifest, out, resume, resolve_workers(workers))
    header = ["gamma", "max_abs_corr_q1p2"]
    return _finish(scenario, manifest, out, header, keys, rows, errors, keep_going, "freq.csv")


def _build_strain(scenario: ScenarioConfig):
    if scenario.strain_kind == "sine":
        return SineStrain(scenario.strain_h0, scenario.strain_omega)
    if scenario.strain_kind == "static":
        return StaticStrain(scenario.strain_h0)
    return SampledStrain.from_csv(scenario.waveform)


def gw_run(
    scenario: ScenarioConfig,
    out_dir=None,
    resume: bool = False,
    workers: int | None = None,
    keep_going: bool = False,
):
    """Farming through a strain-driven spring-mounted cavity.

    Emits (cycle, t, e_n, corr_q1p2, length, displacement) per cycle, the
    last two sampled at the record time.
    """
    out, manifest = _prepare(scenario, out_dir)
    csv_path = out / "gw.csv"
    if resume and manifest.status("run") == "done" and csv_path.exists():
        return csv_path
    t0 = time.perf_counter()
    strain = _build_strain(scenario)
    if scenario.strain_kind == "sine":
        n_cycles = _cycles_for_periods(scenario, scenario.strain_omega)
    elif scenario.strain_kind == "file" and scenario.n_cycles is None:
        n_cycles = max(1, math.floor(strain.t_max / scenario.cavity.repetition_time))
    else:
        n_cycles = scenario.n_cycles
    horizon = n_cycles * scenario.cavity.repetition_time
    driver = GwSpringDriver(
        scenario.cavity.length,
        scenario.spring_omega0,
        scenario.spring_q,
        strain,
        horizon,
    )
    fp = _fixed_point(scenario)
    if not fp.converged:
        manifest.mark("run", "failed", time.perf_counter() - t0, error="no fixed point")
        raise ExperimentError(f"no fixed point within {scenario.fp_max_cycles} cycles")
    records = run_perturbed(fp, scenario.cavity, driver, n_cycles, control=scenario.integrator)
    rows = []
    for r in records:
        ell, _ = driver.length(r.t_end)
        dx, _ = driver.displacement(r.t_end)
        rows.append([r.cycle_index, r.t_end, r.e_n, r.corr_q1p2, ell, dx])
    write_csv(csv_path, ["cycle", "t", "e_n", "corr_q1p2", "length", "displacement"], rows)
    manifest.mark("run", "done", time.perf_counter() - t0, file=str(csv_path))
    manifest.data["csv"] = str(csv_path)
    manifest.save()
    return csv_path


def audit_run(scenario: ScenarioConfig, out_dir=None, **_ignored):
    """Size of the moving-wall corrections for the scenario's driver.

    Writes audit.json with ratio_1 (the Ldot mixing block against the kept
    diagonal), ratio_2 (the Ldot^2 block) and, when small_case_cycles is
    set, the dual-evolution detector drift.
    """
    out, manifest = _prepare(scenario, out_dir)
    t0 = time.perf_counter()
    if scenario.strain_kind is not None:
        span = scenario.audit_span
        if span is None:
            if scenario.strain_omega:
                span = (0.0, scenario.n_periods * 2.0 * np.pi / scenario.strain_omega)
            else:
                raise ValueError("audit of a non-periodic strain needs an explicit t_span")
        driver = GwSpringDriver(
            scenario.cavity.length,
            scenario.spring_omega0,
            scenario.spring_q,
            _build_strain(scenario),
            span[1],
        )
    else:
        if scenario.amplitude is None or scenario.gamma is None:
            raise ValueError("audit needs a [drive] or [gw] section")
        driver = SinusoidDriver(scenario.cavity.length, scenario.amplitude, scenario.gamma)
        span = scenario.audit_span or (0.0, scenario.n_periods * 2.0 * np.pi / scenario.gamma)
    report = audit(scenario.cavity, driver, span, scenario.audit_small_cycles)
    path = out / "audit.json"
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        json.dump(
            {
                "ratio_1": report.ratio_1,
                "ratio_2": report.ratio_2,
                "observable_drift": report.observable_drift,
                "t_span": list(span),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    os.replace(tmp, path)
    manifest.mark("run", "done", time.perf_counter() - t0, file=str(path))
    manifest.save()
    return path


RUNNERS = {
    "valley-sweep": valley_sweep,
    "vibration": vibration_run,
    "freq-response": freq_response,
    "gw": gw_run,
    "audit": audit_run,
}
