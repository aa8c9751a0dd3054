"""Batch front door: experiment configs, pipeline runners, certificate and
CSV persistence, and reproducibility bookkeeping.

Configs are plain JSON dictionaries with a handful of common required keys;
identical configs reproduce byte-identical certificate files (persisted
floats are hex strings, writes are atomic, all sampling is seeded).  The
report path also renders diagnostic figures next to the delimited output
unless figures are disabled.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

from .errors import ConfigError, UnverifiedCertificate
from .words import DistortionCertificate, GrowthFunction
from .schedule import explicit_schedule, make_schedule, parse_theta

__all__ = [
    "ExperimentConfig",
    "RunReport",
    "run",
    "run_config_file",
    "emit_distortion_table",
    "write_certificate",
    "read_certificate",
    "canonical_json_bytes",
]

_PIPELINES = ("s2", "s1", "sn", "matrix", "bfs", "appendix")


@dataclass
class ExperimentConfig:
    pipeline: str
    theta: str = "cf:golden"
    growth: str = "quadratic"
    count: int = 6
    samples: int = 10_000
    tol: float = 1e-8
    seed: int = 0
    mode: str = "lipschitz"          # s1: lipschitz | c1
    inputs: list = field(default_factory=lambda: [1, 2])  # sn: angle multiples
    dim: int = 2                      # sn: 1 | 2
    matrix_rows: list | None = None   # matrix pipeline
    k_max: int = 10                   # bfs pipeline
    radius: int = 11
    exponents: list | None = None     # sn: explicit exponent list
    experiment: str = "diameter"      # appendix pipeline
    r: float = 0.1
    k: int = 10
    trials: int = 1000
    out: str | None = None
    figures: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if "pipeline" not in data:
            raise ConfigError("config needs a 'pipeline' key")
        if data["pipeline"] not in _PIPELINES:
            raise ConfigError(f"unknown pipeline {data['pipeline']!r}")
        known = {f.name for f in cls.__dataclass_fields__.values()}
        bad = set(data) - known
        if bad:
            raise ConfigError(f"unknown config keys: {sorted(bad)}")
        cfg = cls(**data)
        if cfg.count < 1 or cfg.samples < 1:
            raise ConfigError("count and samples must be positive")
        if cfg.tol <= 0:
            raise ConfigError("tolerance must be positive")
        return cfg

    def digest(self) -> str:
        payload = {k: v for k, v in self.__dict__.items() if k != "out"}
        return hashlib.sha256(canonical_json_bytes(payload)).hexdigest()[:16]


@dataclass
class RunReport:
    config_digest: str
    pipeline: str
    passed: bool
    sup_error: float
    entries: list
    outputs: list
    seconds: float

    def to_json_dict(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "pipeline": self.pipeline,
            "passed": self.passed,
            "sup_error": float.hex(float(self.sup_error)),
            "entries": self.entries,
            "outputs": self.outputs,
            "seconds": round(self.seconds, 3),
        }


def canonical_json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, ensure_ascii=True, indent=1) + "\n").encode()


def _atomic_write(path: str, data: bytes):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_certificate(cert: DistortionCertificate, path: str):
    _atomic_write(path, canonical_json_bytes(cert.to_json_dict()))


def read_certificate(path: str) -> DistortionCertificate:
    with open(path, "rb") as fh:
        return DistortionCertificate.from_json_dict(json.loads(fh.read()))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _cert_csv_rows(cert: DistortionCertificate):
    rows = ["i,n_i,word_length,exponent,sup_error_hex,growth_check"]
    ver = cert.verification or {}
    per_entry = {e.get("i", e.get("position")): e for e in ver.get("entries", [])}
    for e in cert.entries:
        v = per_entry.get(e.index, {})
        err = v.get("sup_error", v.get("assembled_error", float("nan")))
        check = v.get("growth_dominates")
        rows.append(
            f"{e.index},{e.length_bound},{len(e.word)},{e.exponent},"
            f"{float.hex(float(err))},{'' if check is None else check}"
        )
    return "\n".join(rows) + "\n"


def emit_distortion_table(cert: DistortionCertificate) -> str:
    """CSV of certified lower bounds for the distortion function.

    Rows are (word length budget n, largest certified exponent achievable
    within that budget); monotone in n, every row backed by an entry.
    """
    if cert.verification is None or not cert.verification.get("passed", False):
        raise UnverifiedCertificate("emit_distortion_table needs a verified certificate")
    rows = ["n,distortion_lower_bound"]
    best = 0
    for e in sorted(cert.entries, key=lambda e: e.length_bound):
        best = max(best, e.exponent)
        rows.append(f"{e.length_bound},{best}")
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Pipeline runners
# ---------------------------------------------------------------------------


def _out_paths(cfg: ExperimentConfig):
    base = cfg.out or f"{cfg.pipeline}_report"
    stem, ext = os.path.splitext(base)
    cert_path = base if ext == ".json" else stem + ".json"
    return stem, cert_path


def _run_s2(cfg: ExperimentConfig):
    from . import s2 as s2mod

    growth = GrowthFunction.parse(cfg.growth)
    sch = make_schedule(parse_theta(cfg.theta), growth, cfg.count)
    gens = s2mod.build_s2_generators(sch)
    cert = s2mod.emit_s2_certificates(gens, growth=growth)
    ver = s2mod.verify_s2_certificate(gens, cert, samples=cfg.samples,
                                      tol=cfg.tol, seed=cfg.seed, growth=growth)
    return cert, ver["entries"], {"schedule": sch}


def _run_s1(cfg: ExperimentConfig):
    from . import s1 as s1mod

    growth = GrowthFunction.parse(cfg.growth)
    sch = make_schedule(parse_theta(cfg.theta), growth, cfg.count, k_min=19)
    build = s1mod.build_s1_c1_generators if cfg.mode == "c1" else s1mod.build_s1_generators
    gens = build(sch)
    cert = s1mod.emit_s1_certificates(gens)
    ver = s1mod.verify_s1_certificate(gens, cert, samples=cfg.samples,
                                      tol=cfg.tol, seed=cfg.seed)
    extras = {"schedule": sch}
    if cfg.mode == "c1":
        extras["pixton"] = s1mod.pixton_coordinates((0.0, 1.0))
        extras["suspension_table"] = s1mod.suspension_derivative_table(gens)
    return cert, ver["entries"], extras


def _run_sn(cfg: ExperimentConfig):
    from . import sn as snmod

    growth = GrowthFunction.parse(cfg.growth)
    if cfg.exponents:
        sch = explicit_schedule(parse_theta(cfg.theta), cfg.exponents)
    else:
        sch = make_schedule(parse_theta(cfg.theta), growth, cfg.count, k_min=19)
    inputs = cfg.inputs
    if isinstance(inputs, dict) and "maps" in inputs:
        if cfg.dim != 2:
            raise ConfigError("explicit map inputs are supported on the 2-sphere")
        pre = [snmod.prefactored_from_json(d) for d in inputs["maps"]]
        seq, pre, targets = snmod.direct_inputs(pre)
    else:
        if isinstance(inputs, dict):
            inputs = inputs.get("multiples", [1, 2])
        seq, pre, targets = snmod.rotation_inputs(cfg.dim, sch, multiples=list(inputs))
    structure = snmod.build_sn_structure(cfg.dim, seq, pre, targets)
    cert = snmod.emit_sn_certificates(structure)
    ver = snmod.verify_sn_certificates(structure, cert, samples=cfg.samples,
                                       tol=cfg.tol, seed=cfg.seed)
    return cert, ver["entries"], {"schedule": sch}


def _run_matrix(cfg: ExperimentConfig):
    from fractions import Fraction

    from .matrices import RationalMatrix, distorted_in_GL, op_norm_length

    if not cfg.matrix_rows:
        raise ConfigError("matrix pipeline needs 'matrix_rows'")
    m = RationalMatrix.from_rows([[Fraction(x) for x in row] for row in cfg.matrix_rows])
    verdict = distorted_in_GL(m)
    entry = {
        "verdict": "distorted" if verdict else "undistorted",
        "op_norm_length": op_norm_length(m),
        "dim": m.n,
    }
    return None, [entry], {"matrix": m}


def _run_bfs(cfg: ExperimentConfig):
    from .matrices import bs_oracle, bs_power_certificate
    from .words import certificate_check, oracle_checker, word, word_length_bfs
    from .errors import NotFoundWithinRadius

    cert = bs_power_certificate(cfg.k_max)
    oracle = bs_oracle()
    report = certificate_check(cert, oracle_checker(oracle, word(2)))
    entries = []
    for r, e in zip(report.entries, cert.entries):
        row = {"i": r.index, "sup_error": r.error, "passed": r.passed}
        if e.length_bound <= cfg.radius:
            try:
                row["bfs_exact_length"] = word_length_bfs(
                    oracle, word(2) ** e.exponent, cfg.radius)
            except NotFoundWithinRadius:
                row["bfs_exact_length"] = None
        entries.append(row)
    cert.verification = {
        "samples": 0,
        "sup_error": 0.0 if report.passed else math.inf,
        "passed": report.passed,
        "tolerance": 0.0,
        "entries": entries,
    }
    return cert, entries, {}


def _run_appendix(cfg: ExperimentConfig):
    from .sn import cayley_diameter_experiment

    if cfg.experiment != "diameter":
        raise ConfigError(f"unknown appendix experiment {cfg.experiment!r}")
    res = cayley_diameter_experiment(cfg.r, cfg.k, cfg.trials, seed=cfg.seed)
    entry = dict(res)
    entry["passed"] = res["all_below_kr"]
    return None, [entry], {"result": res}


_RUNNERS = {
    "s2": _run_s2,
    "s1": _run_s1,
    "sn": _run_sn,
    "matrix": _run_matrix,
    "bfs": _run_bfs,
    "appendix": _run_appendix,
}


def run(cfg: ExperimentConfig) -> RunReport:
    """Dispatch a config to its pipeline; persist certificate, CSV, figures."""
    t0 = time.time()
    cert, entries, extras = _RUNNERS[cfg.pipeline](cfg)
    outputs = []
    stem, cert_path = _out_paths(cfg)
    if cert is not None:
        write_certificate(cert, cert_path)
        outputs.append(cert_path)
        csv_path = stem + ".csv"
        _atomic_write(csv_path, _cert_csv_rows(cert).encode())
        outputs.append(csv_path)
        if cert.verification and cert.verification.get("passed"):
            table_path = stem + "_distortion.csv"
            _atomic_write(table_path, emit_distortion_table(cert).encode())
            outputs.append(table_path)
    if cfg.figures:
        from . import figures

        outputs.extend(figures.render_report_figures(cfg, cert, entries, extras, stem))
    passed = all(bool(e.get("passed", True)) for e in entries)
    sup = max((float(e.get("sup_error", e.get("assembled_error", 0.0)) or 0.0)
               for e in entries), default=0.0)
    report = RunReport(cfg.digest(), cfg.pipeline, passed, sup, entries, outputs,
                       time.time() - t0)
    report_path = stem + "_report.json"
    _atomic_write(report_path, canonical_json_bytes(report.to_json_dict()))
    return report


def run_config_file(path: str) -> RunReport:
    with open(path, "rb") as fh:
        try:
            data = json.loads(fh.read())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return run(ExperimentConfig.from_dict(data))
