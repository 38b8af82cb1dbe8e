import json
import math

import numpy as np
import pytest

from catflux.partition import (CatCoder, MarkovPartition, PartitionError,
                               Rectangle, birkhoff_frequencies,
                               build_cat_partition, partition_from_json,
                               partition_to_json, transition_matrix,
                               verify_markov)
from catflux.qfield import Q5, eigen_coords
from catflux.torus import CAT_MATRIX, TorusPoint
from fractions import Fraction

LAMBDA_PLUS = (3 + math.sqrt(5)) / 2
TWO_PI = 2 * math.pi


class TestConstruction:
    def test_verify_passes(self, cat_partition):
        report = verify_markov(cat_partition)
        assert report.ok, report.messages

    def test_total_area(self, cat_partition):
        # areas sum to the full torus (4 pi^2 in angle units, 1 in lattice units)
        assert cat_partition.total_area() == Q5(1)
        angle_area = sum(r.u_extent_angle() * r.s_extent_angle()
                         for r in cat_partition.rectangles)
        assert angle_area == pytest.approx(4 * math.pi ** 2, rel=1e-12)

    def test_rectangle_count_documented(self, cat_partition):
        # the count is an output of the construction; pinned for regression
        assert len(cat_partition) == 19

    def test_fixed_point_on_boundary(self, cat_partition):
        # (0,0) is a segment crossing: it must sit on some rectangle corner
        on_corner = False
        for r in cat_partition.rectangles:
            for da in (Q5(0), r.extent_a):
                for db in (Q5(0), r.extent_b):
                    x, y = (r.anchor_a + da + r.anchor_b + db,
                            (r.anchor_a + da) * Q5(Fraction(1, 2), Fraction(1, 2))
                            + (r.anchor_b + db) * Q5(Fraction(1, 2), Fraction(-1, 2)))
                    if x.mod1() == Q5(0) and y.mod1() == Q5(0):
                        on_corner = True
        assert on_corner

    def test_spectral_radius_is_lambda_plus(self, cat_matrix):
        rho = max(abs(np.linalg.eigvals(cat_matrix.T.astype(float))))
        assert rho == pytest.approx(LAMBDA_PLUS, abs=1e-9)


class TestVerifyRejectsBadPartitions:
    def test_shifted_rectangle_fails(self, cat_partition):
        rects = list(cat_partition.rectangles)
        bad = rects[0]
        shifted = Rectangle(bad.rid, bad.anchor_a + Q5(Fraction(1, 10)),
                            bad.anchor_b, bad.extent_a, bad.extent_b)
        broken = MarkovPartition([shifted] + rects[1:], "constructed")
        report = verify_markov(broken)
        assert not report.ok
        assert report.messages

    def test_single_rectangle_fails(self):
        whole = Rectangle(0, Q5(0), Q5(0), Q5(1), Q5(1))
        report = verify_markov(MarkovPartition([whole], "loaded"))
        assert not report.ok


class TestTransitionMatrix:
    def test_rows_and_columns_nonzero(self, cat_matrix):
        assert cat_matrix.T.sum(axis=0).min() >= 1
        assert cat_matrix.T.sum(axis=1).min() >= 1

    def test_mixing_time(self, cat_matrix):
        a = cat_matrix.mixing_time
        assert 0 < a <= 20
        power = np.linalg.matrix_power(cat_matrix.T, 1 + a)
        assert (power > 0).all()
        if a > 1:
            smaller = np.linalg.matrix_power(cat_matrix.T, a)
            assert not (smaller > 0).all()


class TestCoding:
    def test_fixed_point_constant_sequence(self, cat_coder):
        w = cat_coder.encode(TorusPoint(0.0, 0.0), 5)
        assert len(set(w.symbols)) == 1
        assert any(w.boundary_flags)  # (0,0) lies on the boundary set

    def test_decode_contracts_to_point(self, cat_coder):
        rng = np.random.default_rng(17)
        p = TorusPoint(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI))
        ratios = []
        for n in (6, 10, 14):
            center, diam = cat_coder.decode(cat_coder.encode(p, n))
            d1 = min(abs(center.psi1 - p.psi1), TWO_PI - abs(center.psi1 - p.psi1))
            d2 = min(abs(center.psi2 - p.psi2), TWO_PI - abs(center.psi2 - p.psi2))
            dist = math.hypot(d1, d2)
            assert dist <= diam
            ratios.append(diam * LAMBDA_PLUS ** n)
        # C lambda_+^{-n} envelope: the scaled diameters stay bounded
        assert max(ratios) / min(ratios) < 25.0

    def test_diameter_decay_rate(self, cat_coder):
        rng = np.random.default_rng(23)
        p = TorusPoint(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI))
        logs = []
        ns = range(4, 17)
        for n in ns:
            _, diam = cat_coder.decode(cat_coder.encode(p, n))
            logs.append(math.log(diam))
        rate = -np.polyfit(list(ns), logs, 1)[0]
        assert rate == pytest.approx(math.log(LAMBDA_PLUS), rel=0.05)

    def test_decode_monotone(self, cat_coder):
        p = TorusPoint(2.03, 4.71)
        prev = None
        for n in range(3, 12):
            _, diam = cat_coder.decode(cat_coder.encode(p, n))
            if prev is not None:
                assert diam < prev
            prev = diam

    def test_incompatible_window_rejected(self, cat_coder, cat_matrix):
        q = len(cat_coder.partition)
        s0 = 0
        bad = None
        for s1 in range(q):
            if not cat_matrix.T[s0, s1]:
                bad = s1
                break
        assert bad is not None
        from catflux.partition import SymbolWindow
        with pytest.raises(PartitionError, match="incompatible"):
            cat_coder.decode(SymbolWindow([s0, s0, bad], 1))

    def test_shift_covariance(self, cat_coder):
        rng = np.random.default_rng(31)
        for _ in range(100):
            p = TorusPoint(rng.uniform(0, TWO_PI), rng.uniform(0, TWO_PI))
            w1 = cat_coder.encode(p, 4)
            w2 = cat_coder.encode(CAT_MATRIX.apply(p), 3)
            assert w1.symbols[2:] == w2.symbols


class TestBirkhoff:
    def test_frequencies_sum_to_one(self, cat_coder):
        freqs = birkhoff_frequencies(cat_coder, TorusPoint(0.7, 1.9), 20_000)
        assert sum(freqs.values()) == pytest.approx(1.0, abs=1e-12)

    def test_frequencies_match_areas(self, cat_coder, cat_partition):
        freqs = birkhoff_frequencies(cat_coder, TorusPoint(2.7, 0.9), 200_000)
        areas = {r.rid: float(r.area()) for r in cat_partition.rectangles}
        worst = max(abs(freqs[i] - areas[i]) for i in freqs)
        assert worst < 0.01

    def test_pair_frequency_factorization(self, cat_coder, cat_matrix):
        # mixing: joint frequencies approach products of singles as the lag
        # grows (tested at modest statistics)
        from catflux.partition import assign_rectangles
        rng = np.random.default_rng(3)
        N = 120_000
        x = np.empty(N)
        y = np.empty(N)
        cx, cy = 0.137, 0.811
        for i in range(N):
            x[i], y[i] = cx, cy
            cx, cy = (cx + cy) % 1.0, (cx + 2 * cy) % 1.0
        sym = assign_rectangles(cat_coder, x, y)
        q = len(cat_coder.partition)
        singles = np.bincount(sym, minlength=q) / N
        devs = []
        for lag in (1, 6, 10):
            joint = np.zeros((q, q))
            for i, j in zip(sym[:-lag], sym[lag:]):
                joint[i, j] += 1
            joint /= joint.sum()
            devs.append(np.max(np.abs(joint - np.outer(singles, singles))))
        assert devs[-1] < 0.01
        assert devs[-1] < devs[0]


class TestSerialization:
    def test_round_trip(self, cat_partition):
        text = partition_to_json(cat_partition)
        loaded = partition_from_json(text)
        assert loaded.provenance == "loaded"
        assert len(loaded) == len(cat_partition)
        report = verify_markov(loaded)
        assert report.ok
        for a, b in zip(loaded.rectangles, cat_partition.rectangles):
            assert a.anchor_a == b.anchor_a
            assert a.extent_b == b.extent_b

    def test_json_schema(self, cat_partition):
        data = json.loads(partition_to_json(cat_partition))
        assert data["provenance"] == "constructed"
        assert all({"id", "anchor_a", "anchor_b", "extent_a", "extent_b"}
                   <= set(item) for item in data["rectangles"])
