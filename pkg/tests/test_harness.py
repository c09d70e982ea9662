import json

import pytest

from bigtan.errors import ConfigError, SolverError
from bigtan.harness import checks as checks_mod
from bigtan.harness.checks import CHECKS, REGISTRY, Check, SampleSpace
from bigtan.harness.cli import main
from bigtan.harness.config import RunConfig, config_from_mapping, load_config, parse_tolerance
from bigtan.harness.suite import (
    CheckReport,
    emit_report,
    render_json,
    render_text,
    run_check,
    run_suite,
    verdict_from_document,
)

REQUIRED_ANCHORS = [
    "coordinate change rules",
    "vertical splitting",
    "Liouville vector fields",
    "Finsler axioms",
    "Finsler Euler identities",
    "Cartan axioms",
    "Cartan Euler identities",
    "vertical metric",
    "Legendre duality",
    "first vertical Liouville distribution",
    "second vertical Liouville distribution",
    "vertical Liouville distribution",
    "Liouville one-forms",
    "projector components",
    "integrability",
    "projected frame derivatives",
    "leaf connection",
    "covariant derivative lemma",
    "Liouville leaf umbilicity",
    "generalized indicatrix mean curvature",
    "curvature along the Liouville field",
    "no curved leaves",
    "vertical decompositions",
    "subfoliations",
    "totally geodesic line-pair leaves",
    "non-geodesic E' curves",
    "non-umbilical split leaves",
]


def strip_timing(doc):
    for r in doc["reports"]:
        r.pop("seconds")
    return doc


def test_registry_covers_every_anchor():
    covered = {a for c in CHECKS for a in c.anchors}
    missing = [a for a in REQUIRED_ANCHORS if a not in covered]
    assert not missing


def test_registry_names_unique():
    assert len(REGISTRY) == len(CHECKS)


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(dim=1).validate()
    with pytest.raises(ConfigError):
        RunConfig(samples=0).validate()
    with pytest.raises(ConfigError):
        RunConfig(family="kropina").validate()
    with pytest.raises(ConfigError):
        RunConfig(only=["no_such_check"]).validate(REGISTRY)
    with pytest.raises(ConfigError):
        RunConfig(tolerances={"no_such_check": 1.0}).validate(REGISTRY)
    with pytest.raises(ConfigError):
        RunConfig(family="randers", b=(0.9, 0.9)).validate()
    with pytest.raises(ConfigError):
        config_from_mapping({"colour": "blue"})
    with pytest.raises(ConfigError):
        parse_tolerance("curvature")


def test_yaml_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(
        "metric:\n  family: randers\n  b: [0.3, 0.1]\n"
        "dim: 2\nsamples: 3\nseed: 9\n"
        "tolerances:\n  curvature: 1.0e-6\n"
        "only: [curvature, mean_curvature]\nformat: text\n"
        "solver:\n  tol: 1.0e-13\n"
    )
    cfg = load_config(path).validate(REGISTRY)
    assert cfg.family == "randers" and cfg.b == (0.3, 0.1)
    assert cfg.samples == 3 and cfg.seed == 9
    assert cfg.tolerances == {"curvature": 1e-6}
    assert cfg.dual().solver.tol == 1e-13
    reports = run_suite(cfg)
    assert [r.name for r in reports] == ["curvature", "mean_curvature"]
    assert reports[0].tolerance == 1e-6


def test_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("metric: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")


def test_baseline_euclidean_run():
    reports = run_suite(RunConfig(family="euclidean", samples=10))
    assert len(reports) == len(CHECKS)
    for r in reports:
        assert r.passed, r
        limit = 1e-7 if r.name in ("curvature", "sectional_curvature") else 1e-10
        assert r.max_residual <= limit, r.name


def test_mean_curvature_only():
    reports = run_suite(RunConfig(family="randers", samples=20, only=["mean_curvature"]))
    assert len(reports) == 1
    assert reports[0].passed and reports[0].max_residual < 1e-6


def test_determinism():
    cfg = RunConfig(family="randers", samples=5)
    a = strip_timing(json.loads(render_json(run_suite(cfg), cfg.echo())))
    b = strip_timing(json.loads(render_json(run_suite(cfg), cfg.echo())))
    assert a == b


def test_samples_independent_of_filter():
    full = run_suite(RunConfig(family="randers", samples=4))
    one = run_suite(RunConfig(family="randers", samples=4, only=["random_brackets"]))
    match = [r for r in full if r.name == "random_brackets"][0]
    assert match.max_residual == one[0].max_residual


def test_seed_changes_points():
    a = SampleSpace(RunConfig(seed=1)).point(3)
    b = SampleSpace(RunConfig(seed=2)).point(3)
    assert not (a.y == b.y).all()


def test_reference_point_is_sample_zero():
    pt = SampleSpace(RunConfig(family="randers")).point(0)
    assert pt.y.tolist() == [1.0, 0.0] and pt.p.tolist() == [0.0, 2.0]


def test_empty_report(tmp_path, capsys):
    assert emit_report([], "json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reports"] == []


def _report(name, residual, tol, verdict):
    return CheckReport(name, "ref", 10, 0, residual, tol, verdict, 0.1)


def test_failing_report(tmp_path):
    reports = [_report("a", 0.0, 1.0, "pass"), _report("b", 2.0, 1.0, "fail")]
    path = tmp_path / "out.json"
    code = emit_report(reports, "json", path)
    assert code == 1
    doc = json.loads(path.read_text())
    assert verdict_from_document(doc) == code
    assert set(doc["reports"][0]) == {"name", "paper_ref", "samples", "skipped", "max_residual",
                                      "tolerance", "verdict", "seconds", "detail"}
    text = render_text(reports)
    assert "FAIL" in text.splitlines()[2]


def test_json_roundtrip_matches_exit_code(tmp_path):
    cfg = RunConfig(family="euclidean", samples=3, tolerances={"mean_curvature": 0.0})
    path = tmp_path / "r.json"
    code = emit_report(run_suite(cfg), "json", path, cfg.echo())
    doc = json.loads(path.read_text())
    assert code == verdict_from_document(doc) == 1
    assert doc["config_echo"]["samples"] == 3


def _fake_check(fn, name="fake", tol=1e-3, witness=None):
    return Check(name, "fake", ("fake",), fn, tol, witness=witness)


def test_skip_policy():
    space = SampleSpace(RunConfig(samples=40))

    def sometimes(s):
        if s.index in (3, 4):
            raise SolverError("no convergence")
        return {"r": 0.0}

    r = run_check(_fake_check(sometimes), space, 1e-3)
    assert r.skipped == 2 and r.samples == 38
    assert not r.passed                 # 2/40 = 5% is not below 5%

    space = SampleSpace(RunConfig(samples=41))
    assert run_check(_fake_check(sometimes), space, 1e-3).passed


def test_geometry_errors_fail_the_check():
    from bigtan.errors import DegenerateMetricError

    def broken(s):
        raise DegenerateMetricError("singular")

    r = run_check(_fake_check(broken), SampleSpace(RunConfig(samples=2)), 1.0)
    assert not r.passed and r.detail["errors"] == {"DegenerateMetricError": 2}


def test_witness_threshold():
    space = SampleSpace(RunConfig(samples=3))
    low = _fake_check(lambda s: {"w": 0.01, "r": 0.0}, witness=("w", 0.05))
    high = _fake_check(lambda s: {"w": 0.5, "r": 0.0}, witness=("w", 0.05))
    assert not run_check(low, space, 1e-3).passed
    assert run_check(high, space, 1e-3).passed


def test_cli_verify(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code = main(["verify", "--metric", "randers", "--samples", "5", "--only", "mean_curvature,curvature",
                 "--report", str(out), "--tol", "curvature=1e-4"])
    assert code == 0
    doc = json.loads(out.read_text())
    assert [r["name"] for r in doc["reports"]] == ["mean_curvature", "curvature"]
    assert doc["reports"][1]["tolerance"] == 1e-4


def test_cli_usage_errors(capsys):
    assert main(["verify", "--only", "bogus"]) == 2
    assert main(["verify", "--dim", "1"]) == 2
    assert main(["verify", "--tol", "nonsense"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["verify", "--metric", "randers", "--b", "x,y"]) == 2


def test_cli_failure_exit(capsys):
    assert main(["verify", "--samples", "2", "--only", "euler_finsler", "--tol", "euler_finsler=0",
                 "--metric", "randers", "--format", "text"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_cli_unwritable_report(tmp_path, capsys):
    assert main(["verify", "--samples", "1", "--only", "euler_finsler",
                 "--report", str(tmp_path / "no" / "such" / "dir.json")]) == 2
    assert "cannot write report" in capsys.readouterr().err


def test_cli_list_and_show(capsys):
    assert main(["list-checks"]) == 0
    listed = capsys.readouterr().out.splitlines()
    assert len(listed) == len(CHECKS)
    assert main(["show-point", "--metric", "randers", "--seed", "4", "--index", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["index"] == 2 and len(doc["projector_blocks"]["P1"]) == 2
    assert doc["newton_residual"] < 1e-11


def test_per_check_salts_differ():
    salts = {c.salt() for c in checks_mod.CHECKS}
    assert len(salts) == len(checks_mod.CHECKS)
