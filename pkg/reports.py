"""Rendering of reports as JSON, plain text and CSV."""

from __future__ import annotations

import csv
import json
import math
from typing import Any, Dict, Iterable, List, Sequence


def _clean(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        # numpy scalars
        return _clean(value.item())
    return value


def to_json(data: Any) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, no NaN/Infinity."""

    return json.dumps(_clean(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _check_lines(checks: Iterable[Dict[str, Any]], indent: str = "  ") -> List[str]:
    lines = []
    for c in checks:
        flag = "ok  " if c["passed"] else "FAIL"
        margin = c["margin"]
        shown = "n/a" if margin is None or not math.isfinite(margin) else f"{margin:+.3e}"
        lines.append(f"{indent}[{flag}] {c['name']}  margin {shown}")
    return lines


def membership_text(report: Dict[str, Any]) -> str:
    pt = report["point"]
    coords = ", ".join(f"{re:+.6g}{im:+.6g}i" for re, im in (*pt["s"], pt["p"]))
    lines = [
        f"{report['query']} n={pt['n']} ({coords})",
        f"  verdict: {report['verdict']}  member: {report['member']}",
        f"  oracle: max root modulus {report['oracle']['max_root_modulus']:.12g}"
        f" -> {report['oracle']['verdict']}",
    ]
    if report["oracle_disagreement"]:
        lines.append("  WARNING: theorem tests disagree with the root oracle")
    lines.extend(_check_lines(report["conditions"]))
    lines.extend(_check_lines(report.get("grid_conditions", [])))
    return "\n".join(lines) + "\n"


def cert_text(title: str, report: Dict[str, Any]) -> str:
    lines = [f"{title}: {report['kind']}"]
    lines.extend(_check_lines(report["checks"]))
    if report.get("witness"):
        lines.append(f"  witness: {json.dumps(_clean(report['witness']), sort_keys=True)}")
    for note in report.get("notes", []):
        lines.append(f"  note: {note}")
    return "\n".join(lines) + "\n"


def fundamental_text(report: Dict[str, Any]) -> str:
    fot = report["fundamental"]
    lines = [
        f"fundamental operators: n={report['n']} dim={report['dim']} defect rank={fot['rank']}",
        "  residuals: " + ", ".join(f"{r:.3e}" for r in fot["residuals"]),
        f"  radius bound: {'passed' if report['radius_bound']['passed'] else 'FAILED'}"
        f" (worst margin {report['radius_bound']['worst_margin']:.6g})",
        f"  almost normal: {report['almost_normal']}",
        "  defect norms: " + ", ".join(f"{d:.6g}" for d in report["defect_norms"]),
    ]
    return "\n".join(lines) + "\n"


def obstruction_text(report: Dict[str, Any]) -> str:
    model = report["model"]
    lines = [
        f"counterexample case {model['case']}: n={model['n']} depth={model['depth']}"
        f" eta={model['eta']} dim={model['layout']['dim']}",
        "hypotheses:",
        *_check_lines(report["hypothesis_checks"]),
        "truncation edge:",
        *_check_lines(report["edge_checks"]),
        "fundamental operators:",
        *_check_lines(report["fundamental"]["checks"]),
        f"almost normal: {report['almost_normal']}",
        f"headline defect: {report['headline_defect']:.12g}"
        f" (expected {report['expected_defect']:.12g})",
        f"linear collapse residual: {report['linear_collapse_residual']:.3e}",
        f"von Neumann sampling: {report['contraction_evidence']['kind']}",
        f"obstruction confirmed: {report['obstruction_confirmed']}",
    ]
    return "\n".join(lines) + "\n"


def export_membership_csv(reports: Sequence[Dict[str, Any]], path: str) -> None:
    """Write one row per membership report to ``path``."""

    headers = [
        "query",
        "n",
        "verdict",
        "member",
        "oracle_max_root_modulus",
        "oracle_verdict",
        "oracle_disagreement",
        "min_margin",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        for r in reports:
            margins = [c["margin"] for c in r["conditions"] if c["margin"] is not None]
            writer.writerow(
                [
                    r["query"],
                    r["point"]["n"],
                    r["verdict"],
                    "" if r["member"] is None else r["member"],
                    f"{r['oracle']['max_root_modulus']:.12g}",
                    r["oracle"]["verdict"],
                    r["oracle_disagreement"],
                    f"{min(margins):.6e}" if margins else "",
                ]
            )
