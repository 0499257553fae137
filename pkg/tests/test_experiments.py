"""Experiment orchestration: scenario files, deterministic CSVs, resume
behavior, the manifest contract, plotting, and the CLI wiring.

Runs use a deliberately tiny cavity so every pipeline finishes in seconds.
"""

import copy
import dataclasses
import textwrap

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavityfarm.cavity import CavityConfig
from cavityfarm.cli import main
from cavityfarm.experiments import (
    ExperimentError,
    Manifest,
    ScenarioConfig,
    config_hash,
    default_valley_grid,
    _fmt,
    audit_run,
    freq_response,
    gw_run,
    load_scenario,
    read_csv,
    valley_sweep,
    vibration_run,
    write_csv,
)
from cavityfarm.plotting import render

TINY = CavityConfig(length=4.0, n_modes=2, coupling=0.03, delay=1.0)


def tiny_scenario(**overrides) -> ScenarioConfig:
    base = dict(
        kind="vibration",
        cavity=TINY,
        fp_tol=1e-7,
        fp_max_cycles=3000,
        amplitude=0.02,
        gamma=0.8 * np.pi / 4.0,
        n_cycles=3,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


VIBRATION_TOML = textwrap.dedent(
    """\
    kind = "vibration"
    n_cycles = 3

    [cavity]
    length = 4.0
    n_modes = 2
    coupling = 0.03
    delay = 1.0

    [fixed_point]
    tol = 1e-7
    max_cycles = 3000

    [drive]
    amplitude_rel = 0.005
    gamma_rel = 0.8
    """
)


class TestScenarioLoading:
    def test_relative_units_resolve_to_absolute(self, tmp_path):
        path = tmp_path / "vib.toml"
        path.write_text(VIBRATION_TOML)
        scenario = load_scenario(path)
        assert scenario.kind == "vibration"
        assert scenario.amplitude == pytest.approx(0.005 * 4.0)
        assert scenario.gamma == pytest.approx(0.8 * np.pi / 4.0)
        assert scenario.cavity.n_modes == 2
        assert scenario.fp_tol == 1e-7 and scenario.fp_max_cycles == 3000
        assert scenario.n_cycles == 3

    def test_out_dir_override(self, tmp_path):
        path = tmp_path / "vib.toml"
        path.write_text('out_dir = "somewhere"\n' + VIBRATION_TOML)
        assert load_scenario(path).out_dir == "somewhere"
        assert load_scenario(path, out_dir="elsewhere").out_dir == "elsewhere"

    def test_default_grid_only_for_valley(self, tmp_path):
        path = tmp_path / "s.toml"
        path.write_text(
            'kind = "valley-sweep"\n[cavity]\nlength = 8.0\n[sweep]\ndefault = true\n'
        )
        assert load_scenario(path).grid == default_valley_grid()
        path.write_text(
            'kind = "vibration"\n[cavity]\nlength = 8.0\n[sweep]\ndefault = true\n'
        )
        with pytest.raises(ValueError):
            load_scenario(path)

    def test_values_rel_only_for_freq_response(self, tmp_path):
        path = tmp_path / "s.toml"
        path.write_text(
            'kind = "freq-response"\n[cavity]\nlength = 4.0\n'
            "[drive]\namplitude_rel = 0.001\n[sweep]\nvalues_rel = [0.5, 1.0]\n"
        )
        assert load_scenario(path).grid == pytest.approx(
            (0.5 * np.pi / 4.0, np.pi / 4.0)
        )
        path.write_text(
            'kind = "valley-sweep"\n[cavity]\nlength = 4.0\n[sweep]\nvalues_rel = [3.0]\n'
        )
        with pytest.raises(ValueError):
            load_scenario(path)

    def test_missing_pieces_rejected(self, tmp_path):
        path = tmp_path / "s.toml"
        path.write_text('kind = "vibration"\n')
        with pytest.raises(ValueError, match="cavity"):
            load_scenario(path)
        path.write_text("[cavity]\nlength = 8.0\n")
        with pytest.raises(ValueError, match="kind"):
            load_scenario(path)

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            tiny_scenario(kind="resonance-hunt")
        with pytest.raises(ValueError):
            tiny_scenario(kind="valley-sweep", grid=None)
        with pytest.raises(ValueError):
            tiny_scenario(kind="valley-sweep", grid=(2.0,))  # below T / L
        with pytest.raises(ValueError):
            tiny_scenario(amplitude=None)
        with pytest.raises(ValueError):
            tiny_scenario(kind="gw")
        with pytest.raises(ValueError):
            tiny_scenario(n_cycles=0)


class TestConfigHash:
    def test_out_dir_excluded_everything_else_counted(self):
        a = tiny_scenario()
        assert config_hash(a) == config_hash(tiny_scenario())
        assert config_hash(a) == config_hash(tiny_scenario(out_dir="elsewhere"))
        assert config_hash(a) != config_hash(tiny_scenario(seed=1))
        assert config_hash(a) != config_hash(tiny_scenario(gamma=0.7))
        other_cavity = dataclasses.replace(TINY, coupling=0.05)
        assert config_hash(a) != config_hash(tiny_scenario(cavity=other_cavity))


class TestDefaultGrid:
    def test_shape_and_refinement(self):
        grid = default_valley_grid()
        arr = np.array(grid)
        assert arr[0] == 3.5 and arr[-1] == 6.5
        assert np.all(np.diff(arr) > 0)
        assert 3.77 in grid and 5.13 in grid
        # refined pitch near integers, coarse elsewhere
        near = arr[(arr >= 3.95) & (arr <= 4.05)]
        assert np.min(np.diff(near)) == pytest.approx(5e-4)
        far = arr[(arr >= 4.2) & (arr <= 4.8)]
        assert np.min(np.diff(far)) == pytest.approx(0.01)


class TestCsvIo:
    def test_fmt(self):
        assert _fmt(3) == "3"
        assert _fmt(np.int64(7)) == "7"
        assert _fmt(0.1) == "0.10000000000000001"

    @settings(max_examples=60, deadline=None)
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_fmt_round_trips_doubles(self, x):
        assert float(_fmt(x)) == x

    def test_write_read_round_trip(self, tmp_path):
        path = tmp_path / "table.csv"
        rows = [[1, 0.1, -3.5e-17], [2, float("nan"), 2.0]]
        write_csv(path, ["k", "a", "b"], rows)
        header, data = read_csv(path)
        assert header == ["k", "a", "b"]
        assert data[0, 1] == 0.1 and data[0, 2] == -3.5e-17
        assert np.isnan(data[1, 1])

    def test_read_empty_raises(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            read_csv(path)


class TestManifest:
    def test_round_trip_and_hash_guard(self, tmp_path):
        path = tmp_path / "manifest.json"
        m = Manifest(path, "hash-a", "vibration")
        m.mark("3.5", "done", 0.123, file="points/3.5.json")
        again = Manifest(path, "hash-a", "vibration")
        assert again.status("3.5") == "done"
        assert again.status("missing") is None
        with pytest.raises(ExperimentError):
            Manifest(path, "hash-b", "vibration")


@pytest.fixture(scope="module")
def valley_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("valley")
    scenario = tiny_scenario(
        kind="valley-sweep", grid=(2.75, 3.0), amplitude=None, gamma=None, n_cycles=None
    )
    csv_path = valley_sweep(scenario, out_dir=out)
    return scenario, out, csv_path


class TestValleySweep:
    def test_rows_in_grid_order(self, valley_dir):
        _, _, csv_path = valley_dir
        header, data = read_csv(csv_path)
        assert header == ["f", "e_n_steady", "corr_q1p2_steady", "cycles_to_converge"]
        assert list(data[:, 0]) == [2.75, 3.0]
        assert np.all(data[:, 3] > 0)
        assert np.all(np.isfinite(data[:, 1]))

    def test_rerun_is_byte_identical(self, valley_dir, tmp_path):
        scenario, _, csv_path = valley_dir
        other = valley_sweep(scenario, out_dir=tmp_path / "again")
        assert other.read_bytes() == csv_path.read_bytes()

    def test_resume_skips_cached_points(self, valley_dir):
        scenario, out, csv_path = valley_dir
        before = csv_path.read_bytes()
        csv_path.unlink()
        again = valley_sweep(scenario, out_dir=out, resume=True)
        assert again.read_bytes() == before

    def test_foreign_directory_refused(self, valley_dir, tmp_path):
        _, out, _ = valley_dir
        other = tiny_scenario(
            kind="valley-sweep", grid=(2.75,), amplitude=None, gamma=None,
            n_cycles=None, fp_tol=1e-6,
        )
        with pytest.raises(ExperimentError, match="different scenario"):
            valley_sweep(other, out_dir=out)

    def test_non_convergence_is_soft(self, tmp_path):
        scenario = tiny_scenario(
            kind="valley-sweep", grid=(2.75,), amplitude=None, gamma=None,
            n_cycles=None, fp_max_cycles=2, fp_tol=1e-300,
        )
        csv_path = valley_sweep(scenario, out_dir=tmp_path)
        _, data = read_csv(csv_path)
        assert np.isnan(data[0, 1]) and data[0, 3] == -1
        manifest = Manifest(tmp_path / "manifest.json", config_hash(scenario), scenario.kind)
        assert manifest.status(_fmt(2.75)) == "no-convergence"


@pytest.fixture(scope="module")
def vibration_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("vib")
    return vibration_run(tiny_scenario(), out_dir=out)


class TestVibration:
    def test_per_cycle_rows(self, vibration_csv):
        header, data = read_csv(vibration_csv)
        assert header == ["cycle", "t", "e_n", "corr_q1p2"]
        assert list(data[:, 0]) == [0.0, 1.0, 2.0]
        rep = TINY.repetition_time
        assert data[1, 1] == pytest.approx(rep + TINY.cycle_time)

    def test_zero_amplitude_is_flat(self, tmp_path):
        csv_path = vibration_run(
            tiny_scenario(amplitude=0.0, gamma=0.0), out_dir=tmp_path
        )
        _, data = read_csv(csv_path)
        assert np.ptp(data[:, 2]) < 1e-6
        assert np.ptp(data[:, 3]) < 1e-6

    def test_resume_returns_without_recompute(self, vibration_csv):
        stamp = vibration_csv.stat().st_mtime_ns
        again = vibration_run(tiny_scenario(), out_dir=vibration_csv.parent, resume=True)
        assert again == vibration_csv
        assert again.stat().st_mtime_ns == stamp


@pytest.fixture(scope="module")
def freq_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("freq")
    scenario = tiny_scenario(
        kind="freq-response", grid=(0.0, 0.5 * np.pi / 4.0), gamma=None
    )
    return freq_response(scenario, out_dir=out)


class TestFreqResponse:
    def test_rows_and_quasi_static_probe(self, freq_csv):
        header, data = read_csv(freq_csv)
        assert header == ["gamma", "max_abs_corr_q1p2"]
        assert data[0, 0] == 0.0 and data[1, 0] == pytest.approx(0.5 * np.pi / 4.0)
        assert np.all(data[:, 1] >= 0.0)

    def test_worker_count_does_not_change_bytes(self, freq_csv, tmp_path):
        scenario = tiny_scenario(
            kind="freq-response", grid=(0.0, 0.5 * np.pi / 4.0), gamma=None
        )
        parallel = freq_response(scenario, out_dir=tmp_path, workers=2)
        assert parallel.read_bytes() == freq_csv.read_bytes()


@pytest.fixture(scope="module")
def gw_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("gw")
    scenario = tiny_scenario(
        kind="gw", amplitude=None, gamma=None, n_cycles=2,
        spring_omega0=0.5, spring_q=8.0,
        strain_kind="sine", strain_h0=0.0, strain_omega=0.3,
    )
    return gw_run(scenario, out_dir=out)


class TestGw:
    def test_zero_strain_keeps_the_cavity_rigid(self, gw_csv):
        header, data = read_csv(gw_csv)
        assert header == ["cycle", "t", "e_n", "corr_q1p2", "length", "displacement"]
        assert data.shape[0] == 2
        assert np.allclose(data[:, 4], 4.0, atol=1e-12)
        assert np.allclose(data[:, 5], 0.0, atol=1e-12)
        assert np.ptp(data[:, 3]) < 1e-6

    def test_static_strain_needs_cycle_count(self):
        with pytest.raises(ValueError):
            tiny_scenario(
                kind="gw", amplitude=None, gamma=None, n_cycles=None,
                spring_omega0=0.5, spring_q=8.0,
                strain_kind="static", strain_h0=1e-4,
            )


class TestAuditRun:
    def test_writes_ratio_report(self, tmp_path):
        scenario = tiny_scenario(kind="audit", n_cycles=None)
        path = audit_run(scenario, out_dir=tmp_path)
        import json

        blob = json.loads(path.read_text())
        assert set(blob) == {"ratio_1", "ratio_2", "observable_drift", "t_span"}
        assert blob["ratio_1"] > 0 and blob["ratio_2"] > 0
        assert blob["observable_drift"] is None
        assert blob["t_span"][1] == pytest.approx(3.0 * 2.0 * np.pi / scenario.gamma)


class TestPlotting:
    def test_each_kind_renders_stable_svg(self, valley_dir, vibration_csv, freq_csv, gw_csv, tmp_path):
        _, _, valley_csv = valley_dir
        for kind, csv_path in (
            ("valley", valley_csv),
            ("vibration", vibration_csv),
            ("freq", freq_csv),
            ("gw", gw_csv),
        ):
            out = render(csv_path, kind, tmp_path / f"{kind}.svg")
            blob = out.read_bytes()
            assert blob.startswith(b"<?xml")
            render(csv_path, kind, tmp_path / f"{kind}_again.svg")
            assert (tmp_path / f"{kind}_again.svg").read_bytes() == blob

    def test_schema_mismatch_rejected(self, vibration_csv, tmp_path):
        with pytest.raises(ValueError, match="does not look like"):
            render(vibration_csv, "freq", tmp_path / "bad.svg")
        with pytest.raises(ValueError, match="unknown plot kind"):
            render(vibration_csv, "spectrum", tmp_path / "bad.svg")


class TestCli:
    def test_run_and_plot_happy_path(self, tmp_path, capsys):
        config = tmp_path / "vib.toml"
        config.write_text(VIBRATION_TOML)
        out = tmp_path / "run"
        assert main(["vibration", "--config", str(config), "--out", str(out)]) == 0
        csv_path = capsys.readouterr().out.strip()
        assert csv_path.endswith("vibration.csv")
        svg = tmp_path / "fig.svg"
        assert main(["plot", csv_path, "--kind", "vibration", "--out", str(svg)]) == 0
        assert svg.exists()

    def test_kind_mismatch_is_usage_error(self, tmp_path, capsys):
        config = tmp_path / "vib.toml"
        config.write_text(VIBRATION_TOML)
        assert main(["valley-sweep", "--config", str(config)]) == 2
        assert "declares kind" in capsys.readouterr().err

    def test_bad_config_is_usage_error(self, tmp_path, capsys):
        config = tmp_path / "broken.toml"
        config.write_text("[cavity]\nlength = 8.0\n")
        assert main(["vibration", "--config", str(config)]) == 2
        assert "bad scenario config" in capsys.readouterr().err

    def test_failed_point_exits_one_unless_keep_going(self, tmp_path, capsys):
        config = tmp_path / "freq.toml"
        config.write_text(
            textwrap.dedent(
                """\
                kind = "freq-response"
                n_cycles = 2

                [cavity]
                length = 4.0
                n_modes = 2
                coupling = 0.03
                delay = 1.0

                [fixed_point]
                tol = 1e-7
                max_cycles = 3000

                [drive]
                amplitude_rel = 1.5

                [sweep]
                values_rel = [0.5]
                """
            )
        )
        assert main(["freq-response", "--config", str(config), "--out", str(tmp_path / "a")]) == 1
        capsys.readouterr()
        rc = main(
            ["freq-response", "--config", str(config), "--out", str(tmp_path / "b"),
             "--keep-going"]
        )
        assert rc == 0
        _, data = read_csv(capsys.readouterr().out.strip())
        assert data.size == 0
