"""Modified Bessel function of the second kind against frozen references."""

import csv
import math
from pathlib import Path

import pytest

from gpucb import bessel_k
from gpucb.kernels import _bessel_k_general

REFERENCE = Path(__file__).parent / "data" / "bessel_kv_reference.csv"


def _load_reference():
    with open(REFERENCE, newline="") as fh:
        return [(float(r["nu"]), float(r["z"]), float(r["k_nu"])) for r in csv.DictReader(fh)]


class TestClosedForms:
    def test_half_order_at_one(self):
        assert bessel_k(0.5, 1.0) == pytest.approx(
            math.sqrt(math.pi / 2.0) * math.exp(-1.0), rel=1e-14
        )

    def test_half_order_at_two(self):
        assert bessel_k(0.5, 2.0) == pytest.approx(
            math.sqrt(math.pi / 4.0) * math.exp(-2.0), rel=1e-14
        )

    def test_three_halves_recurrence(self):
        # K_{3/2}(z) = K_{1/2}(z) (1 + 1/z)
        for z in (0.3, 1.0, 5.0):
            assert bessel_k(1.5, z) == pytest.approx(bessel_k(0.5, z) * (1 + 1 / z), rel=1e-13)


class TestGeneralOrder:
    def test_frozen_oracle_value(self):
        # arbitrary-precision reference computed before the build
        assert bessel_k(0.3, 0.7) == pytest.approx(0.68956248975697498, rel=1e-12)

    def test_reference_table_within_1e_minus_10(self):
        rows = _load_reference()
        assert len(rows) == 500
        worst = 0.0
        for nu, z, expected in rows:
            worst = max(worst, abs(bessel_k(nu, z) - expected) / abs(expected))
        assert worst <= 1e-10

    def test_general_path_agrees_with_closed_form(self):
        # route half-integer orders through the series/continued-fraction
        # path and compare against the finite-sum result
        for nu in (0.5, 1.5, 2.5, 3.5):
            for z in (0.01, 0.5, 1.9, 2.1, 10.0):
                assert _bessel_k_general(nu, z) == pytest.approx(bessel_k(nu, z), rel=1e-12)

    def test_recurrence_identity(self):
        # K_{nu+1}(z) = K_{nu-1}(z) + (2 nu / z) K_nu(z)
        for nu in (0.7, 1.3, 2.9):
            for z in (0.4, 1.7, 6.0):
                lhs = bessel_k(nu + 1.0, z)
                rhs = bessel_k(nu - 1.0, z) if nu > 1.0 else _bessel_k_general(nu - 1.0, z)
                assert lhs == pytest.approx(rhs + (2.0 * nu / z) * bessel_k(nu, z), rel=1e-11)

    def test_decreasing_in_z(self):
        values = [bessel_k(1.1, z) for z in (0.1, 0.5, 1.0, 2.0, 5.0, 20.0)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestErrors:
    def test_nonpositive_argument(self):
        with pytest.raises(ValueError):
            bessel_k(1.0, 0.0)
        with pytest.raises(ValueError):
            bessel_k(1.0, -2.0)

    def test_nonpositive_order(self):
        with pytest.raises(ValueError):
            bessel_k(0.0, 1.0)
        with pytest.raises(ValueError):
            bessel_k(-1.5, 1.0)

    def test_overflow_at_tiny_argument(self):
        with pytest.raises(OverflowError):
            bessel_k(100.5, 1e-8)
