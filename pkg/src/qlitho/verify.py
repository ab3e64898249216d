"""Named self-check suites: the package's key identities run as one command.

Each suite returns a machine-readable record with the worst deviation it
observed, so the CLI can print one pass/fail line per invariant and tests
can reuse the same implementations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import deposition, planner
from .fock import Geometry, ModePair

ORACLE_TOL = 1e-9
SUM_TOL = 1e-9
CENTER_TOL = 1e-12


@dataclass(frozen=True)
class VerifyResult:
    suite: str
    case: str
    passed: bool
    deviation: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.suite} {self.case} "
            f"max_dev={self.deviation:.3e} tol={self.tolerance:.1e}"
        )


def figure_configurations() -> dict[str, tuple[Geometry, tuple[float, ...], float]]:
    """Named (geometry, phases, period) benchmark settings.

    Two equal three-photon pairs plain and steered to pixel six, the
    uneven (2, 4) split, and the four-pair chain; periods are one full
    pattern repeat.
    """
    pair33 = Geometry((ModePair(1, 3, 1.0), ModePair(2, 3, 0.25)))
    pair24 = Geometry((ModePair(1, 2, 1.0), ModePair(2, 4, 0.2)))
    chain47 = planner.chain_geometry(4, 7)
    zero = lambda g: (0.0,) * len(g.pairs)
    return {
        "two-pair-3-3": (pair33, zero(pair33), 2.0),
        "two-pair-3-3-pixel-6": (pair33, planner.phases_for_pixel(pair33, 6), 2.0),
        "two-pair-2-4": (pair24, zero(pair24), 2.5),
        "chain-4-7": (chain47, zero(chain47), 4.0),
    }


def suite_oracle(samples: int = 2048) -> list[VerifyResult]:
    """Peak-normalized brute-force vs closed-form rate on every benchmark."""
    results = []
    for name, (geometry, phases, period) in figure_configurations().items():
        grid = deposition.SamplingGrid(0.0, period, samples)
        closed = deposition.profile_closed(geometry, phases, grid, "peak_unity")
        state = planner.entry_state(geometry, phases)
        brute = deposition.profile_brute(state, geometry.total_photons, grid, "peak_unity")
        deviation = float(np.abs(closed.values - brute.values).max())
        results.append(VerifyResult("oracle", name, deviation < ORACLE_TOL, deviation, ORACLE_TOL))
    return results


def _sum_to_one_case(name: str, geometry: Geometry, period: float, samples: int) -> VerifyResult:
    grid = deposition.SamplingGrid(0.0, period, samples)
    spec = planner.PixelSpec.from_geometry(geometry)
    xs = grid.points()
    total = np.zeros_like(xs)
    for p in range(1, spec.pixel_count + 1):
        total += deposition.closed_form_values(geometry, planner.phases_for_pixel(geometry, p), xs)
    deviation = float(np.abs(total - 1.0).max())
    return VerifyResult("sum-to-one", name, deviation < SUM_TOL, deviation, SUM_TOL)


def suite_sum_to_one(samples: int = 1024) -> list[VerifyResult]:
    """The family of all single-pixel rates sums to one everywhere."""
    pair33 = Geometry((ModePair(1, 3, 1.0), ModePair(2, 3, 0.25)))
    return [
        _sum_to_one_case("two-pair-3-3-16px", pair33, 2.0, samples),
        _sum_to_one_case("chain-4-7-40px", planner.chain_geometry(4, 7), 4.0, samples),
        _sum_to_one_case("chain-3-6-32px", planner.chain_geometry(3, 6), 4.0, samples),
    ]


def suite_zero_at_centers() -> list[VerifyResult]:
    """Single-pixel rates vanish at the centers of all other pixels."""
    results = []
    seen = set()
    for name, (geometry, _, _) in figure_configurations().items():
        if geometry in seen:
            continue
        seen.add(geometry)
        spec = planner.PixelSpec.from_geometry(geometry)
        centers = np.array(
            [planner.pixel_center(spec, p) for p in range(1, spec.pixel_count + 1)]
        )
        worst = 0.0
        for p in range(1, spec.pixel_count + 1):
            phases = planner.phases_for_pixel(geometry, p)
            rates = deposition.closed_form_values(geometry, phases, centers)
            rates[p - 1] = 0.0
            worst = max(worst, float(rates.max()))
        results.append(
            VerifyResult("zero-at-centers", name, worst < CENTER_TOL, worst, CENTER_TOL)
        )
    return results


def suite_table_one(max_half_photons: int = 5) -> list[VerifyResult]:
    """Partition table rows match their closed formulas exactly."""
    results = []
    for n in range(1, max_half_photons + 1):
        ok = True
        for row in planner.partition_table(n):
            k = row.photons_1
            ok &= row.photons_2 == 2 * n - k
            ok &= row.pixels == (k + 1) * (2 * n - k + 1)
            ok &= row.feature_size == Fraction(1, 2 * (k + 1))
            ok &= row.period == Fraction(2 * n - k + 1, 2)
            ok &= row.pixels * row.feature_size == row.period
        results.append(VerifyResult("table-one", f"half-photons-{n}", bool(ok), 0.0 if ok else 1.0, 0.5))
    return results


SUITES = {
    "oracle": suite_oracle,
    "sum-to-one": suite_sum_to_one,
    "zero-at-centers": suite_zero_at_centers,
    "table-one": suite_table_one,
}


def run_suites(names) -> list[VerifyResult]:
    results = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown verify suite {name!r}; choose from {sorted(SUITES)}")
        results.extend(SUITES[name]())
    return results
