"""Acceptance criteria, each checked at its stated tolerance over 100 seeded samples.

Runs under pytest (lines are echoed in the terminal summary) or directly:
``python tests/test_acceptance.py``.
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bigtan import leafgeom as lg  # noqa: E402
from bigtan.harness.checks import SampleSpace  # noqa: E402
from bigtan.harness.config import RunConfig  # noqa: E402
from bigtan.harness.suite import render_json, run_suite  # noqa: E402

SAMPLES = 100
SEED = 2024
FAMILIES = ("euclidean", "riemannian_conformal", "randers")
RUNS = [(f, 2) for f in FAMILIES] + [("randers", 3)]

RESULTS: list[str] = []
_cache: dict = {}


def reports(family, dim=2):
    key = (family, dim)
    if key not in _cache:
        cfg = RunConfig(family=family, dim=dim, samples=SAMPLES, seed=SEED)
        _cache[key] = {r.name: r for r in run_suite(cfg)}
    return _cache[key]


def residual(name, family, dim=2):
    r = reports(family, dim)[name]
    if r.skipped >= 0.05 * SAMPLES:
        return float("inf")
    return r.max_residual


def min_witness(name, family, dim=2):
    return reports(family, dim)[name].detail["min_witness"]


def record(number, title, items):
    """items: (label, value, bound, kind) with kind '<', '>' or '=='."""
    ok = True
    parts = []
    for label, value, bound, kind in items:
        good = {"<": value < bound, ">": value > bound, "==": value == bound}[kind]
        ok &= bool(good)
        parts.append(f"{label}={value:.2e}{kind}{bound:g}" + ("" if good else "!"))
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title} | " + ", ".join(parts)
    RESULTS.append(line)
    print(line)
    return ok


def runs_of(families):
    return [(f, d) for f, d in RUNS if f in families]


def test_criterion_01_euler_homogeneity():
    items = []
    for f, d in RUNS:
        tol = 1e-8 if f == "randers" else 1e-10
        items.append((f"F:{f}/{d}", residual("euler_finsler", f, d), tol, "<"))
        items.append((f"K:{f}/{d}", residual("euler_cartan", f, d), tol, "<"))
    assert record(1, "Euler and homogeneity identities", items)


def test_criterion_02_legendre():
    items = [(f"roundtrip:{f}/{d}", residual("legendre_roundtrip", f, d), 1e-9, "<") for f, d in RUNS]
    items += [(f"dual_metric:{f}/{d}", residual("dual_metric", f, d), 1e-7, "<")
              for f, d in runs_of(["randers"])]
    assert record(2, "Legendre round trip and dual metric", items)


def test_criterion_03_projectors():
    names = ("projector_algebra", "vertical_decomposition", "zeta_projector_relations")
    items = [(f"{n}:{f}/{d}", residual(n, f, d), 1e-10, "<") for f, d in RUNS for n in names]
    assert record(3, "projector algebra and decompositions", items)


def test_criterion_04_integrability():
    items = []
    for f, d in RUNS:
        items.append((f"G([X,Y],E):{f}/{d}", residual("random_brackets", f, d), 1e-7, "<"))
        items.append((f"[E1,E2]:{f}/{d}", residual("exact_brackets", f, d), 0.0, "=="))
        items.append((f"r1:{f}/{d}", residual("liouville_norm_derivatives", f, d), 1e-9, "<"))
    assert record(4, "integrability of the Liouville distribution", items)


def test_criterion_05_lemma():
    items = [(f"randers/{d}", residual("covariant_lemma", "randers", d), 1e-6, "<")
             for f, d in runs_of(["randers"])]
    items.append(("euclidean/2", residual("covariant_lemma", "euclidean"), 1e-9, "<"))
    assert record(5, "covariant derivative lemma, two-sided", items)


def test_criterion_06_liouville_leaf():
    items = []
    for f, d in RUNS:
        items.append((f"geodesic:{f}/{d}", residual("liouville_geodesic", f, d), 1e-7, "<"))
        items.append((f"umbilic:{f}/{d}", residual("umbilicity", f, d), 1e-7, "<"))
        items.append((f"|H+1|:{f}/{d}", residual("mean_curvature", f, d), 1e-6, "<"))
    assert record(6, "Liouville leaf geodesic, umbilic, H = -1", items)


def test_criterion_07_curvature():
    items = []
    for f, d in runs_of(["randers"]):
        items.append((f"R:{f}/{d}", residual("curvature", f, d), 1e-5, "<"))
        items.append((f"sec:{f}/{d}", residual("sectional_curvature", f, d), 1e-5, "<"))
    items.append(("R:euclidean/2", residual("curvature", "euclidean"), 1e-10, "<"))
    items.append(("sec:euclidean/2", residual("sectional_curvature", "euclidean"), 1e-10, "<"))
    assert record(7, "vanishing curvature along E", items)


def test_criterion_08_propositions():
    items = []
    for f, d in RUNS:
        items.append((f"tot_geo:{f}/{d}", residual("totally_geodesic", f, d), 1e-8, "<"))
        items.append((f"E'accel:{f}/{d}", residual("eprime_acceleration", f, d), 1e-7, "<"))
        items.append((f"E-coef:{f}/{d}", min_witness("eprime_acceleration", f, d), 1e-3, ">"))
    assert record(8, "totally geodesic line pair, non-geodesic E'", items)


def test_criterion_09_non_umbilic():
    items = []
    for f, d in RUNS:
        space = SampleSpace(RunConfig(family=f, dim=d, seed=SEED))
        at = space.point(0)
        m = space.connection(0).local(at).metric
        gap = abs(m.F2 - m.K2)
        items.append((f"|F2-K2|:{f}/{d}", gap, 0.1, ">"))
        w = lg.non_umbilic_witness(space.connection(0), at)
        items.append((f"dist@fixture:{f}/{d}", w["distance_to_umbilic"], 0.05, ">"))
        items.append((f"a9:{f}/{d}", residual("eprime_derivative", f, d), 1e-7, "<"))
    assert record(9, "split leaves are not umbilical", items)


def _strip(doc):
    for r in doc["reports"]:
        r.pop("seconds")
    return doc


def test_criterion_10_determinism():
    cfg = RunConfig(family="randers", dim=2, samples=SAMPLES, seed=SEED)
    first = _strip(json.loads(render_json(list(reports("randers").values()), cfg.echo())))
    second = _strip(json.loads(render_json(run_suite(cfg), cfg.echo())))
    same = first == second
    RESULTS.append(f"{'PASS' if same else 'FAIL'}  criterion 10: identical reports on rerun | randers/2")
    print(RESULTS[-1])
    assert same


def test_all_checks_pass_every_run():
    failing = [f"{f}/{d}:{n}" for f, d in RUNS for n, r in reports(f, d).items() if not r.passed]
    assert not failing


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
