import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from delpair.errors import InvalidTask, StencilHitsSingularity
from delpair.harness.checks import run_suite
from delpair.harness.cli import main
from delpair.harness.fd import wirtinger_fd
from delpair.harness.report import (
    SCHEMA,
    VerificationReport,
    VerificationTask,
    exit_code,
    merge_reports,
    read_reports,
    write_reports,
)


def test_wirtinger_examples():
    w = 0.3 - 0.7j
    assert abs(wirtinger_fd(lambda z: z, w) - 1) < 1e-10
    assert abs(wirtinger_fd(lambda z: np.conj(z), w)) < 1e-10
    assert abs(wirtinger_fd(lambda z: z * z, 1 + 1j) - (2 + 2j)) < 1e-8
    assert abs(wirtinger_fd(lambda z: z**3, 1 + 1j, scheme="richardson") - 3 * (1 + 1j) ** 2) < 1e-10
    assert abs(wirtinger_fd(lambda z: z * np.conj(z), w, conjugate=True) - w) < 1e-10


def test_wirtinger_singular():
    with pytest.raises(StencilHitsSingularity):
        wirtinger_fd(lambda z: 1 / (z - 1e-5), 0j)


@given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_wirtinger_linear(a, w):
    assert abs(wirtinger_fd(lambda z: a * z + np.conj(a) * np.conj(z), w) - a) < 1e-8 * max(1, abs(a))


def test_empty_suite():
    assert run_suite([]) == []
    assert exit_code([]) == 0


def test_flatness_task_passes():
    (rep,) = run_suite([{"check": "flatness", "tau": [0, 1], "grid": 25, "tol": 1e-8}])
    assert rep.status == "pass"
    assert len(rep.residuals) == 625
    assert rep.constants["off_locus_min"] > 1e-3


def test_collision_fails_with_exit_1():
    task = {
        "check": "reciprocity",
        "tau": [0, 1],
        "section": {"p": [[0.3, 0.3]], "q": [[0.6, 0.2]], "m": 0, "n": 0, "t": [0, 0], "s": [0, 0]},
        "function": {"x": [[0.3, 0.3], [0.5, 0.5]], "y": [[0.4, 0.6], [0.4, 0.2]], "mt": 0, "nt": 0},
    }
    reps = run_suite([task])
    assert "DivisorCollision" in reps[0].error
    assert reps[0].status == "fail"
    assert exit_code(reps) == 1


def test_invalid_inputs():
    reps = run_suite([{"check": "nope"}, {"check": "flatness", "omega": [[[0, 1], [1, 0]], [[0, 0], [0, 1]]]}])
    assert [r.status for r in reps] == ["invalid", "invalid"]
    assert exit_code(reps) == 2
    with pytest.raises(InvalidTask):
        VerificationTask("flatness", tol=-1)
    with pytest.raises(InvalidTask):
        VerificationTask("flatness", grid=0)


def test_task_round_trip():
    t = VerificationTask("twistor", tau=0.3 + 1.2j, grid=3, seed=7, lambdas=[0.5, 2j])
    u = VerificationTask.from_json(json.loads(json.dumps(t.to_json())))
    assert u.to_json() == t.to_json()
    assert u.tol == 1e-12


def test_reports_reproducible_and_order_independent():
    task = {"check": "reciprocity", "tau": [0.2, 1.1], "grid": 2, "seed": 5, "params": {"configs": 2}}
    a = run_suite([task])[0].to_json()
    b = run_suite([task])[0].to_json()
    assert json.dumps(a) == json.dumps(b)
    rep = run_suite([task])[0]
    shuffled = VerificationReport(task=rep.task, points=rep.points[::-1], residuals=rep.residuals[::-1])
    assert shuffled.max_residual == rep.max_residual
    assert shuffled.mean_residual == pytest.approx(rep.mean_residual, rel=1e-15)


def test_workers_preserve_order():
    tasks = [{"check": "curvature", "seed": k, "grid": 1} for k in range(3)] + [{"check": "bogus"}]
    serial = [r.to_json() for r in run_suite(tasks)]
    parallel = [r.to_json() for r in run_suite(tasks, workers=3)]
    assert json.dumps(serial) == json.dumps(parallel)


def test_write_read_merge(tmp_path):
    reps = run_suite([{"check": "curvature", "grid": 1}, {"check": "flatness", "grid": 2}])
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    write_reports(str(p1), reps[:1])
    write_reports(str(p2), reps[1:])
    assert json.loads(p1.read_text())["schema"] == SCHEMA
    back = merge_reports([str(p1), str(p2)])
    assert [r.to_json() for r in back] == [r.to_json() for r in reps]
    p1.write_text(json.dumps({"schema": 99, "reports": []}))
    with pytest.raises(InvalidTask):
        read_reports(str(p1))


def test_cli_theta(capsys):
    assert main(["theta", "--omega", "1j", "--z", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["tail_bound"] <= 1e-12
    assert main(["theta", "--omega", "[[1, 0], [0, 1]]", "--z", "0,0"]) == 2


def test_cli_verify_and_run(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "curvature", "--grid", "1", "--json-out", str(out)]) == 0
    assert "PASS" in capsys.readouterr().out
    assert json.loads(out.read_text())["exit_code"] == 0
    tasks = tmp_path / "tasks.json"
    tasks.write_text(json.dumps({"tasks": [{"check": "flatness", "grid": 2}, {"check": "zzz"}]}))
    assert main(["run", str(tasks)]) == 2
    assert main(["report", "--merge", str(out)]) == 0
    assert main(["run", str(tmp_path / "missing.json")]) == 2
