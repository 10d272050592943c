import hashlib
import json
import logging
import math
import time
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from typing import Any

from app.core.errors import VerificationError
from app.models.domain import Check, ExoticVerification, RootCertificate, RunReport

logger = logging.getLogger("berezin_verifier.reports")


def run_check(
    name: str,
    expected: float,
    tolerance: float,
    compute: Callable[[], float],
) -> Check:
    """Evaluate one check; domain failures and crashes become a failed check with the error text."""
    try:
        actual = float(compute())
    except VerificationError as exc:
        logger.warning("Check %s failed: %s", name, exc)
        return Check(name=name, expected=expected, tolerance=tolerance, error=str(exc))
    except Exception as exc:
        logger.error("Check %s crashed", name, exc_info=True)
        return Check(name=name, expected=expected, tolerance=tolerance, error=f"{type(exc).__name__}: {exc}")
    if not math.isfinite(actual):
        return Check(name=name, expected=expected, tolerance=tolerance, error=f"non-finite value {actual}")
    return Check(name=name, expected=expected, actual=actual, tolerance=tolerance)


@contextmanager
def timed(report: RunReport) -> Iterator[RunReport]:
    start = time.perf_counter()
    try:
        yield report
    finally:
        report.wall_time_ms = int((time.perf_counter() - start) * 1000)


def jsonable(value: Any) -> Any:
    """Complex numbers become {"re", "im"} pairs; containers are converted recursively."""
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "item"):
        return jsonable(value.item())
    return value


def report_body(report: RunReport) -> dict[str, Any]:
    body = report.model_dump(exclude={"wall_time_ms"})
    body["passed"] = report.passed
    return jsonable(body)


def body_sha256(report: RunReport) -> str:
    canonical = json.dumps(report_body(report), sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def render_json(report: RunReport) -> str:
    document = report_body(report)
    document["wall_time_ms"] = report.wall_time_ms
    document["body_sha256"] = body_sha256(report)
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False)


def render_table(report: RunReport) -> str:
    lines = [f"{report.command}  ({report.wall_time_ms} ms)"]
    for key, value in sorted(report.parameters.items()):
        lines.append(f"  {key} = {value}")
    coefficients = report.results.get("coefficients")
    if coefficients is not None:
        lines.append("  degree  coefficient")
        lines.extend(f"  {degree:>6}  {c}" for degree, c in enumerate(coefficients))
    width = max((len(c.name) for c in report.checks), default=4)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        actual = "-" if check.actual is None else f"{check.actual:.6e}"
        line = f"  {status}  {check.name:<{width}}  expected {check.expected:.6e}  actual {actual}  tol {check.tolerance:.1e}"
        if check.error:
            line += f"  ({check.error})"
        lines.append(line)
    lines.append("PASSED" if report.passed else "FAILED")
    return "\n".join(lines)


def certificate_record(cert: RootCertificate) -> dict[str, Any]:
    a = cert.a
    return {
        "n": cert.n,
        "root_re": cert.root.real,
        "root_im": cert.root.imag,
        "residual": cert.residual,
        "a_re": a.real,
        "a_im": a.imag,
    }


def load_certificate(record: dict[str, Any]) -> RootCertificate:
    """Rebuild a certificate from its export record; the root is re-validated."""
    root = complex(record["root_re"], record["root_im"])
    return RootCertificate(
        n=record["n"],
        root=root,
        residual=record["residual"],
        newton_steps=record.get("newton_steps", 0),
        seed=complex(record.get("seed_re", root.real), record.get("seed_im", root.imag)),
    )


def verification_record(result: ExoticVerification) -> dict[str, Any]:
    return jsonable(result.model_dump())
