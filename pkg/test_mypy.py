import subprocess

MODULES = [
    "numerics_core.py",
    "polynomials.py",
    "scalar_geometry.py",
    "operator_tuples.py",
    "fundamental_ops.py",
    "counterexample.py",
    "reports.py",
    "symdisc.py",
    "config/settings.py",
    "parsers/points.py",
]


def test_mypy() -> None:
    result = subprocess.run(
        ["mypy", "--ignore-missing-imports", "--follow-imports=skip", *MODULES],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stdout + result.stderr
