"""Named batch scenarios runnable from the CLI.

Each scenario executes a self-contained experiment with its own independent
cross-checks and returns a machine-readable report: a list of named checks
with pass/fail flags and details.  The CLI exit code reflects failures.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from . import config
from .classify import Pairing, UnicriticalMap, classify_unicritical_pair
from .curves import BiCurve, SplitEndo, is_invariant, preperiodic_pairs_on_curve
from .errors import SplitdynError
from .numeric import curve_pullback_measure, measure_discrepancy
from .poly import Poly


def _check(name: str, passed: bool, detail) -> dict:
    return {"name": name, "pass": bool(passed), "detail": detail}


def _pairing_grid_values() -> list[Fraction]:
    """A 20-point rational grid avoiding the excluded parameter values."""
    values = [
        Fraction(1),
        Fraction(-1),
        Fraction(2),
        Fraction(3),
        Fraction(-3),
        Fraction(1, 2),
        Fraction(-1, 2),
        Fraction(3, 2),
        Fraction(-3, 2),
        Fraction(2, 3),
        Fraction(-2, 3),
        Fraction(5, 2),
        Fraction(-5, 3),
        Fraction(4),
        Fraction(-4),
        Fraction(1, 3),
        Fraction(-1, 3),
        Fraction(5),
        Fraction(7, 2),
        Fraction(-7, 3),
    ]
    assert len(values) == 20
    return values


def _brute_force_pairing(d1: int, c1: Fraction, d2: int, c2: Fraction):
    """Independent oracle: direct power check over a candidate pool of
    rationals r, searching r with r^(d-1) == 1 and c2 == r * c1."""
    if d1 != d2:
        return None
    for num in range(-6, 7):
        for den in range(1, 7):
            if num == 0:
                continue
            r = Fraction(num, den)
            if r ** (d1 - 1) == 1 and c2 == r * c1:
                return r
    return None


def scenario_thm13_grid() -> dict:
    """Pairing criterion over a degree/parameter grid against brute force."""
    checks = []
    grid = _pairing_grid_values()
    total = 0
    agree = 0
    for d1 in (2, 3, 4, 5):
        for d2 in (2, 3, 4, 5):
            for c1 in grid:
                for c2 in grid:
                    u1 = UnicriticalMap.create(d1, c1)
                    u2 = UnicriticalMap.create(d2, c2)
                    if u1.is_exceptional or u2.is_exceptional:
                        continue
                    verdict = classify_unicritical_pair(u1, u2)
                    expected = _brute_force_pairing(d1, c1, d2, c2)
                    total += 1
                    matches = (verdict.verdict is Pairing.PAIRED) == (
                        expected is not None
                    )
                    if matches and expected is not None:
                        matches = verdict.witness.as_fraction() == expected
                    if matches:
                        agree += 1
    checks.append(
        _check(
            "pairing-grid-agreement",
            agree == total,
            {"agreements": agree, "cases": total},
        )
    )
    return {"scenario": "thm13-grid", "checks": checks}


def scenario_prop42_diagonal(samples: int = config.DEFAULT_SAMPLES, seed: int = 0) -> dict:
    """Pullback measures through both projections of an invariant curve agree
    at desk scale; a non-invariant control curve separates cleanly."""
    f = Poly.from_rationals([Fraction(1, 4), 0, 0, 1])   # x^3 + 1/4
    g = Poly.from_rationals([Fraction(-1, 4), 0, 0, 1])  # x^3 - 1/4
    invariant = BiCurve("x + y")
    control = BiCurve("y + 2x")
    phi = SplitEndo(f, g)
    checks = [
        _check("curve-invariant", is_invariant(invariant, phi), "x + y under the pair"),
        _check("control-not-invariant", not is_invariant(control, phi), "y + 2x"),
    ]
    mu1 = curve_pullback_measure(invariant, f, 1, samples, seed)
    mu2 = curve_pullback_measure(invariant, g, 2, samples, seed + 1)
    disc = measure_discrepancy(mu1, mu2)
    checks.append(
        _check(
            "invariant-curve-discrepancy",
            disc < config.DISCREPANCY_SAME_THRESHOLD,
            {"discrepancy": disc, "threshold": config.DISCREPANCY_SAME_THRESHOLD},
        )
    )
    nu1 = curve_pullback_measure(control, f, 1, samples, seed + 2)
    nu2 = curve_pullback_measure(control, g, 2, samples, seed + 3)
    disc_control = measure_discrepancy(nu1, nu2)
    checks.append(
        _check(
            "control-curve-discrepancy",
            disc_control > config.DISCREPANCY_DISTINCT_THRESHOLD,
            {
                "discrepancy": disc_control,
                "threshold": config.DISCREPANCY_DISTINCT_THRESHOLD,
            },
        )
    )
    return {"scenario": "prop42-diagonal", "checks": checks}


def scenario_lemma61_transfer() -> dict:
    """Zero transfer failures on three certified invariant curves."""
    checks = []
    f = Poly.from_rationals([-1, 0, 1])  # x^2 - 1
    cases = [
        ("diagonal", BiCurve("y - x"), f, f),
        ("graph", BiCurve("y - (x^2 - 1)"), f, f),
        (
            "conjugacy-curve",
            BiCurve("x + y"),
            Poly.from_rationals([1, 0, 0, 1]),
            Poly.from_rationals([-1, 0, 0, 1]),
        ),
    ]
    for name, curve, fx, gy in cases:
        phi = SplitEndo(fx, gy)
        invariant = is_invariant(curve, phi)
        report = preperiodic_pairs_on_curve(curve, fx, gy)
        checks.append(
            _check(
                f"{name}-invariant",
                invariant,
                {"curve": str(curve.expr)},
            )
        )
        checks.append(
            _check(
                f"{name}-transfer",
                invariant and not report.failures and not report.truncated,
                {
                    "pairs": [[str(a), str(b)] for a, b in report.pairs],
                    "failures": [[str(a), str(b)] for a, b in report.failures],
                },
            )
        )
    return {"scenario": "lemma61-transfer", "checks": checks}


SCENARIOS: dict[str, Callable[..., dict]] = {
    "thm13-grid": scenario_thm13_grid,
    "prop42-diagonal": scenario_prop42_diagonal,
    "lemma61-transfer": scenario_lemma61_transfer,
}


def run_experiment(name: str, **kwargs) -> dict:
    """Execute a named scenario; unknown names are an error."""
    runner = SCENARIOS.get(name)
    if runner is None:
        raise SplitdynError(
            f"unknown scenario {name!r}; available: {', '.join(sorted(SCENARIOS))}"
        )
    report = runner(**kwargs)
    report["passed"] = all(c["pass"] for c in report["checks"])
    return report
