import json
import math

import numpy as np
import pytest

from app.core.errors import InsufficientQuadratureError
from app.core.exotic import find_exotic_roots
from app.models.domain import Check, RunReport
from app.services.reports import (
    body_sha256,
    certificate_record,
    jsonable,
    load_certificate,
    render_json,
    render_table,
    run_check,
)


def test_run_check_passes_and_fails():
    assert run_check("close", 1.0, 1e-6, lambda: 1.0 + 1e-7).passed
    failed = run_check("far", 1.0, 1e-6, lambda: 2.0)
    assert not failed.passed
    assert failed.actual == 2.0


def test_run_check_records_domain_errors():
    def compute():
        raise InsufficientQuadratureError("did not settle")

    check = run_check("quadrature", 0.0, 1e-9, compute)
    assert not check.passed
    assert check.actual is None
    assert check.error == "did not settle"


def test_run_check_records_crashes_and_nan():
    crashed = run_check("crash", 0.0, 1.0, lambda: 1 / 0)
    assert crashed.error.startswith("ZeroDivisionError")
    assert run_check("nan", 0.0, 1.0, lambda: math.nan).error == "non-finite value nan"


def test_jsonable_handles_complex_and_numpy():
    assert jsonable({"z": 1 + 2j, "v": [np.float64(0.5), np.int64(3)]}) == {
        "z": {"re": 1.0, "im": 2.0},
        "v": [0.5, 3],
    }


def build_report(wall_time_ms):
    report = RunReport(command="qn", parameters={"n": 2}, results={"coefficients": ["1", "0", "1/2"]})
    report.checks.append(Check(name="constant term", expected=1.0, actual=1.0, tolerance=0.0))
    report.wall_time_ms = wall_time_ms
    return report


def test_digest_ignores_wall_time():
    assert body_sha256(build_report(3)) == body_sha256(build_report(4000))


def test_json_rendering():
    document = json.loads(render_json(build_report(12)))
    assert document["passed"] is True
    assert document["wall_time_ms"] == 12
    assert document["body_sha256"] == body_sha256(build_report(12))
    assert document["results"]["coefficients"] == ["1", "0", "1/2"]


def test_table_rendering_lists_coefficients_and_status():
    table = render_table(build_report(5))
    assert "1/2" in table
    assert "PASS  constant term" in table
    assert table.endswith("PASSED")


def test_certificate_record_reloads():
    cert = find_exotic_roots(1, 30.0)[0]
    record = certificate_record(cert)
    assert record["root_im"] == pytest.approx(-8 * math.pi)
    assert load_certificate(json.loads(json.dumps(record))).root == cert.root
