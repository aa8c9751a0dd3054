"""Config ingestion, runners, persistence, determinism, and the CLI."""

import json
import os

import pytest

from distortion_lab.cli import main as cli_main
from distortion_lab.errors import ConfigError, UnverifiedCertificate
from distortion_lab.matrices import bs_power_certificate
from distortion_lab.reports import (
    ExperimentConfig,
    emit_distortion_table,
    read_certificate,
    run,
    run_config_file,
)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"pipeline": "warp-drive"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"pipeline": "s2", "bogus_key": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"pipeline": "s2", "tol": -1.0})
    cfg = ExperimentConfig.from_dict({"pipeline": "s2", "count": 3})
    assert cfg.digest() == ExperimentConfig.from_dict({"pipeline": "s2", "count": 3}).digest()


def test_bfs_pipeline_and_distortion_table(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "pipeline": "bfs", "k_max": 10,
        "out": str(tmp_path / "bfs.json"), "figures": False,
    })
    report = run(cfg)
    assert report.passed
    cert = read_certificate(str(tmp_path / "bfs.json"))
    assert len(cert.entries) == 11
    csv = emit_distortion_table(cert)
    lines = csv.strip().splitlines()
    assert lines[0] == "n,distortion_lower_bound"
    rows = dict(tuple(map(int, ln.split(","))) for ln in lines[1:])
    for k in range(11):
        assert rows[2 * k + 1] == 2 ** k  # budget 2k+1 certifies the 2^k power


def test_distortion_table_requires_verification():
    cert = bs_power_certificate(3)
    with pytest.raises(UnverifiedCertificate):
        emit_distortion_table(cert)


def test_empty_certificate_table_is_header_only():
    cert = bs_power_certificate(0)
    cert.entries = []
    cert.verification = {"passed": True}
    assert emit_distortion_table(cert).strip() == "n,distortion_lower_bound"


def test_matrix_pipeline(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "pipeline": "matrix",
        "matrix_rows": [["0", "-1"], ["1", "0"]],
        "out": str(tmp_path / "m.json"), "figures": False,
    })
    report = run(cfg)
    assert report.entries[0]["verdict"] == "distorted"
    cfg2 = ExperimentConfig.from_dict({
        "pipeline": "matrix",
        "matrix_rows": [["2", "1"], ["1", "1"]],
        "out": str(tmp_path / "m2.json"), "figures": False,
    })
    assert run(cfg2).entries[0]["verdict"] == "undistorted"


def test_s2_run_writes_outputs_and_reruns_identically(tmp_path):
    base = {
        "pipeline": "s2", "count": 3, "samples": 800, "seed": 1,
        "figures": True, "out": str(tmp_path / "a" / "cert.json"),
    }
    os.makedirs(tmp_path / "a")
    os.makedirs(tmp_path / "b")
    r1 = run(ExperimentConfig.from_dict(dict(base)))
    assert r1.passed
    cert_a = (tmp_path / "a" / "cert.json").read_bytes()
    assert (tmp_path / "a" / "cert.csv").exists()
    assert (tmp_path / "a" / "cert_lengths.png").exists()
    base2 = dict(base)
    base2["out"] = str(tmp_path / "b" / "cert.json")
    run(ExperimentConfig.from_dict(base2))
    cert_b = (tmp_path / "b" / "cert.json").read_bytes()
    assert cert_a == cert_b  # byte-identical across reruns


def test_certificate_persistence_reverifies(tmp_path):
    """A written certificate can be read back and re-verified from scratch."""
    from distortion_lab import s2
    from distortion_lab.schedule import make_schedule, parse_theta
    from distortion_lab.words import GrowthFunction

    cfg = ExperimentConfig.from_dict({
        "pipeline": "s2", "count": 3, "samples": 600, "seed": 2,
        "out": str(tmp_path / "cert.json"), "figures": False,
    })
    run(cfg)
    cert = read_certificate(str(tmp_path / "cert.json"))
    theta = parse_theta(cert.metadata["schedule"]["theta"])
    sch = make_schedule(theta, GrowthFunction.parse("quadratic"), len(cert.entries))
    gens = s2.build_s2_generators(sch)
    report = s2.verify_s2_certificate(gens, cert, samples=600, tol=1e-8, seed=2)
    assert report["passed"]


def test_appendix_pipeline(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "pipeline": "appendix", "experiment": "diameter",
        "r": 0.1, "k": 10, "trials": 20,
        "out": str(tmp_path / "app.json"), "figures": False,
    })
    report = run(cfg)
    assert report.passed
    assert report.entries[0]["all_below_kr"]


def test_run_config_file_and_schema_error(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"pipeline": "bfs", "k_max": 5,
                                "out": str(tmp_path / "c.json"),
                                "figures": False}))
    assert run_config_file(str(path)).passed
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        run_config_file(str(bad))
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps({"pipeline": "bfs", "mystery": True}))
    with pytest.raises(ConfigError):
        run_config_file(str(bad2))


def test_cli_bfs_and_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "cli_bfs.json")
    code = cli_main(["bfs", "--k-max", "6", "--out", out, "--no-figures"])
    assert code == 0
    assert os.path.exists(out)
    # table subcommand consumes the verified certificate
    table_out = str(tmp_path / "table.csv")
    code = cli_main(["table", "--cert", out, "--out", table_out])
    assert code == 0
    assert open(table_out).readline().startswith("n,")


def test_cli_matrix(tmp_path):
    mpath = tmp_path / "mat.json"
    mpath.write_text(json.dumps({"rows": [["1", "1"], ["0", "1"]]}))
    code = cli_main(["matrix", "--check", str(mpath),
                     "--out", str(tmp_path / "mm.json"), "--no-figures"])
    assert code == 0


def test_cli_error_paths(tmp_path, capsys):
    assert cli_main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    assert cli_main(["run", "--config", str(bad)]) == 2


def test_sn_explicit_exponents(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "pipeline": "sn", "dim": 2, "samples": 500,
        "exponents": [3, 5, 8], "inputs": [1],
        "out": str(tmp_path / "sn.json"), "figures": False,
    })
    report = run(cfg)
    assert report.passed
    cert = read_certificate(str(tmp_path / "sn.json"))
    assert [e.exponent for e in cert.entries] == [3, 5, 8]


def test_bfs_reports_exhaustive_lengths(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "pipeline": "bfs", "k_max": 5, "radius": 11,
        "out": str(tmp_path / "bfs.json"), "figures": False,
    })
    report = run(cfg)
    got = {e["i"]: e.get("bfs_exact_length") for e in report.entries}
    assert got == {0: 1, 1: 2, 2: 4, 3: 6, 4: 8, 5: 10}


def test_cli_s1_quick(tmp_path):
    code = cli_main(["s1", "--count", "2", "--samples", "500",
                     "--out", str(tmp_path / "s1.json"), "--no-figures"])
    assert code == 0
