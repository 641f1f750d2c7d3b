"""Config format and command-line surface.

Exit codes: 0 success; 2 configuration/parameter problems; 3 runtime
generation or estimation failures; 4 file I/O problems.  Every error path
emits a one-line JSON record on stderr.  Identical seed and config must give
byte-identical outputs regardless of worker count.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from softpair.cli import main
from softpair.config import (
    FULL_SOLID_ANGLE,
    RunConfig,
    default_config,
    parse_config,
    serialize_config,
    with_seed,
    with_value,
)
from softpair.errors import ConfigError
from softpair.quantum import Direction

MINIMAL = "emission.alpha = 0.0\ngenerator.n_events = 500\ngenerator.seed = 7\n"

RADIATIVE = (
    "emission.kappa_rad = 12.0\n"
    "emission.kappa_par = 8.0\n"
    "generator.n_events = 4000\n"
    "generator.seed = 11\n"
    "generator.smear_sigma = 0.4\n"
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def last_json(stderr):
    """The error record is the final stderr line; log lines may precede it."""
    return json.loads(stderr.strip().splitlines()[-1])


# ------------------------------------------------------------------- config

def test_empty_config_is_default():
    assert serialize_config(parse_config("")) == serialize_config(default_config())


def test_serialize_parse_round_trip():
    config = parse_config(RADIATIVE)
    text = serialize_config(config)
    again = parse_config(text)
    assert serialize_config(again) == text
    assert again == config


def test_parse_preserves_float_bits():
    text = "emission.e_min = 2.2250738585072014e-308\ngenerator.smear_sigma = 0.30000000000000004\n"
    config = parse_config(text)
    assert config.generator.emission.e_min == 2.2250738585072014e-308
    assert config.generator.smear_sigma == 0.30000000000000004


def test_parse_settings_lists():
    text = (
        "generator.settings_a = 0.0,0.0,1.0 ; 1.0,0.0,0.0\n"
        "generator.settings_b = 0.0,1.0,0.0\n"
        "analysis.correlations = 0:0 1:0\n"
        "analysis.chsh = 0 1 0 0\n"
    )
    config = parse_config(text)
    assert config.generator.settings_a == (Direction(0, 0, 1), Direction(1, 0, 0))
    assert config.generator.settings_b == (Direction(0, 1, 0),)
    assert config.correlations == ((0, 0), (1, 0))
    assert config.chsh == (0, 1, 0, 0)


def test_parse_comments_and_blanks():
    config = parse_config("# a comment\n\ngenerator.seed = 3\n   \n# more\n")
    assert config.generator.seed == 3


def test_unknown_key_names_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("generator.seed = 1\nemission.bogus = 2\n")
    assert exc.value.line == 2
    assert "bogus" in str(exc.value)


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config("generator.seed = 1\ngenerator.seed = 2\n")
    assert exc.value.line == 2


def test_invalid_value_names_field_and_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("emission.e_min = -1\n")
    assert exc.value.field == "emission.e_min"
    assert exc.value.line == 1


def test_malformed_line_rejected():
    with pytest.raises(ConfigError):
        parse_config("generator.seed 5\n")
    with pytest.raises(ConfigError):
        parse_config("generator.seed = five\n")


def test_correlation_index_out_of_range():
    with pytest.raises(ConfigError):
        parse_config("analysis.correlations = 0:3\n")


def test_with_helpers():
    config = default_config()
    assert with_seed(config, 9).generator.seed == 9
    bumped = with_value(config, "emission.kappa_par", "2.5")
    assert bumped.generator.emission.kappa_par == 2.5
    assert config.generator.emission.kappa_par == 1.0  # original untouched


def test_full_solid_angle_constant():
    assert FULL_SOLID_ANGLE == pytest.approx(4.0 * math.pi)


# ------------------------------------------------------------------ run

def test_run_minimal(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", MINIMAL)
    out = tmp_path / "out"
    code, stdout, _ = run_cli(["run", "--config", cfg, "--out", str(out)], capsys)
    assert code == 0
    assert (out / "events.tsv").exists()
    assert (out / "summary.txt").exists()
    summary = (out / "summary.txt").read_text()
    assert "correlation.0.value = -1.0" in summary
    assert "correlation.0.stderr = 0.0" in summary
    assert "events.accepted = 500" in summary
    assert "correlation.0.value = -1.0" in stdout  # echoed unless --quiet


def test_run_quiet_suppresses_echo(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", MINIMAL)
    code, stdout, _ = run_cli(
        ["run", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"], capsys
    )
    assert code == 0
    assert stdout == ""


def test_run_without_config_uses_defaults(tmp_path, capsys):
    code, _, _ = run_cli(["run", "--out", str(tmp_path / "o"), "--quiet"], capsys)
    assert code == 0
    assert (tmp_path / "o" / "events.tsv").exists()


def test_rerun_is_byte_identical(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE)
    code1, _, _ = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "r1"), "--quiet"], capsys)
    code2, _, _ = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "r2"), "--quiet"], capsys)
    assert code1 == 0 and code2 == 0
    assert (tmp_path / "r1" / "events.tsv").read_bytes() == (tmp_path / "r2" / "events.tsv").read_bytes()
    assert (tmp_path / "r1" / "summary.txt").read_bytes() == (tmp_path / "r2" / "summary.txt").read_bytes()


def test_worker_count_does_not_change_bytes(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE)
    outputs = []
    for workers in (1, 2, 3):
        out = tmp_path / f"w{workers}"
        code, _, _ = run_cli(
            ["run", "--config", cfg, "--out", str(out), "--workers", str(workers), "--quiet"],
            capsys,
        )
        assert code == 0
        outputs.append((out / "events.tsv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_backend_flag_changes_provenance_not_ints(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE)
    run_cli(["run", "--config", cfg, "--out", str(tmp_path / "bn"), "--backend", "numpy", "--quiet"], capsys)
    run_cli(["run", "--config", cfg, "--out", str(tmp_path / "br"), "--backend", "reference", "--quiet"], capsys)
    from softpair.logio import read_event_log

    b1, _, m1 = read_event_log(tmp_path / "bn" / "events.tsv")
    b2, _, m2 = read_event_log(tmp_path / "br" / "events.tsv")
    assert m1["backend"] == "numpy" and m2["backend"] == "reference"
    assert np.array_equal(b1.channel, b2.channel)
    assert np.array_equal(b1.s_a, b2.s_a)


def test_seed_override_changes_events(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE)
    run_cli(["run", "--config", cfg, "--out", str(tmp_path / "s1"), "--quiet"], capsys)
    run_cli(["run", "--config", cfg, "--out", str(tmp_path / "s2"), "--seed", "999", "--quiet"], capsys)
    assert (tmp_path / "s1" / "events.tsv").read_bytes() != (tmp_path / "s2" / "events.tsv").read_bytes()


def test_out_dir_env_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOFTPAIR_OUT", str(tmp_path / "envout"))
    cfg = write(tmp_path, "c.txt", MINIMAL)
    code, _, _ = run_cli(["run", "--config", cfg, "--quiet"], capsys)
    assert code == 0
    assert (tmp_path / "envout" / "events.tsv").exists()


def test_out_dir_flag_beats_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOFTPAIR_OUT", str(tmp_path / "envout"))
    cfg = write(tmp_path, "c.txt", MINIMAL)
    code, _, _ = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "flag"), "--quiet"], capsys)
    assert code == 0
    assert (tmp_path / "flag" / "events.tsv").exists()
    assert not (tmp_path / "envout").exists()


# --------------------------------------------------------------- error paths

def test_bad_config_value_exits_2(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", "emission.e_min = -1\n")
    code, _, stderr = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    record = last_json(stderr)
    assert record["error"] == "ConfigError"
    assert record["field"] == "emission.e_min"
    assert record["line"] == 1


def test_generation_failure_exits_3(tmp_path, capsys):
    cfg = write(
        tmp_path, "c.txt",
        "emission.e_min = 0.16\nemission.kappa_rad = 150.0\nemission.kappa_par = 0.0\n"
        "generator.seed = 3\ngenerator.n_events = 400\n",
    )
    code, _, stderr = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 3
    record = last_json(stderr)
    assert record["error"] == "GenerationError"
    assert "lower e_min" in record["message"]


def test_missing_config_file_exits_4(tmp_path, capsys):
    code, _, stderr = run_cli(["run", "--config", str(tmp_path / "nope.txt")], capsys)
    assert code == 4
    record = last_json(stderr)
    assert record["error"] in ("EventLogError", "OSError")


def test_saturated_intensity_exits_2(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", "emission.kappa_rad = 300.0\n")
    code, _, stderr = run_cli(["run", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 2
    assert last_json(stderr)["error"] == "ParameterError"


# ------------------------------------------------------------------- analyze

def test_analyze_reproduces_summary(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE)
    out = tmp_path / "out"
    run_cli(["run", "--config", cfg, "--out", str(out), "--quiet"], capsys)
    original = (out / "summary.txt").read_bytes()
    code, _, _ = run_cli(
        ["analyze", "--log", str(out / "events.tsv"), "--out", str(tmp_path / "s2.txt"), "--quiet"],
        capsys,
    )
    assert code == 0
    assert (tmp_path / "s2.txt").read_bytes() == original


def test_analyze_override_tightens_cut(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE)
    out = tmp_path / "out"
    run_cli(["run", "--config", cfg, "--out", str(out), "--quiet"], capsys)
    override = write(tmp_path, "ov.txt", "cut.solid_angle = 0.05\n")
    code, _, _ = run_cli(
        ["analyze", "--log", str(out / "events.tsv"), "--config", override,
         "--out", str(tmp_path / "s3.txt"), "--quiet"],
        capsys,
    )
    assert code == 0
    text = (tmp_path / "s3.txt").read_text()
    accepted = int(next(l for l in text.splitlines() if l.startswith("events.accepted = ")).split("=")[1])
    assert accepted < 4000


def test_analyze_rejects_generator_overrides(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", MINIMAL)
    out = tmp_path / "out"
    run_cli(["run", "--config", cfg, "--out", str(out), "--quiet"], capsys)
    override = write(tmp_path, "ov.txt", "generator.seed = 9\n")
    code, _, stderr = run_cli(
        ["analyze", "--log", str(out / "events.tsv"), "--config", override,
         "--out", str(tmp_path / "s.txt")],
        capsys,
    )
    assert code == 2
    assert "already generated" in last_json(stderr)["message"]


def test_analyze_refuses_truncated_log(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", MINIMAL)
    out = tmp_path / "out"
    run_cli(["run", "--config", cfg, "--out", str(out), "--quiet"], capsys)
    log = out / "events.tsv"
    lines = log.read_text().splitlines(keepends=True)
    log.write_text("".join(lines[:-1]))  # drop the completeness trailer
    code, _, stderr = run_cli(
        ["analyze", "--log", str(log), "--out", str(tmp_path / "s.txt")], capsys
    )
    assert code == 4
    assert last_json(stderr)["error"] == "EventLogError"
    # explicit opt-in reads what is there
    code2, _, _ = run_cli(
        ["analyze", "--log", str(log), "--allow-partial",
         "--out", str(tmp_path / "s_partial.txt"), "--quiet"],
        capsys,
    )
    assert code2 == 0


# --------------------------------------------------------------------- sweep

def test_sweep_writes_table_and_points(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", RADIATIVE.replace("4000", "1500"))
    out = tmp_path / "sw"
    code, _, _ = run_cli(
        ["sweep", "--config", cfg, "--param", "emission.kappa_par",
         "--values", "0,4,8", "--out", str(out), "--quiet"],
        capsys,
    )
    assert code == 0
    table = (out / "sweep.tsv").read_text().splitlines()
    data = [l for l in table if l and not l.startswith("#")]
    header, rows = data[0].split("\t"), data[1:]
    assert header[0] == "point" and header[1] == "emission.kappa_par"
    assert len(rows) == 3
    values = [float(r.split("\t")[1]) for r in rows]
    assert values == [0.0, 4.0, 8.0]
    # the parallel fraction grows with the knob
    par_col = header.index("parallel_fraction")
    fracs = [float(r.split("\t")[par_col]) for r in rows]
    assert fracs[0] == 0.0
    assert fracs[0] < fracs[1] < fracs[2]
    for i in range(3):
        assert any((out / f).name.startswith(f"point_{i:03d}_") for f in out.iterdir())


def test_sweep_rejects_unknown_param(tmp_path, capsys):
    cfg = write(tmp_path, "c.txt", MINIMAL)
    code, _, stderr = run_cli(
        ["sweep", "--config", cfg, "--param", "emission.nope", "--values", "1,2",
         "--out", str(tmp_path / "sw")],
        capsys,
    )
    assert code == 2
    assert last_json(stderr)["error"] == "ConfigError"


# ------------------------------------------------------------------ plumbing

def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text(MINIMAL.replace("500", "50"))
    proc = subprocess.run(
        [sys.executable, "-m", "softpair", "run", "--config", str(cfg),
         "--out", str(tmp_path / "o"), "--quiet"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "events.tsv").exists()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "softpair" in capsys.readouterr().out
