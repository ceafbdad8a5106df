import math

import numpy as np
import pytest

from fepkit.models import HodsmSpec, LiebSpec, arccot
from fepkit.scan import (
    ManifoldSample,
    ScanGrid,
    analytic_degeneracies,
    bz_scan,
    canonical_k,
    detector,
    min_abs_energy,
    refine_degeneracy,
    trace_ring,
)

PI = math.pi


def k_distance(a, b):
    return max(
        PI - abs(abs(x - y) % (2 * PI) - PI) for x, y in zip(a, b)
    )


class TestScanGrid:
    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            ScanGrid(dims=2, resolution=4)

    def test_axes_are_half_open(self):
        axes = ScanGrid(dims=2, resolution=8).axes()
        assert axes[0][0] == -PI and axes[0][-1] < PI

    def test_dims_validation(self):
        with pytest.raises(ValueError):
            ScanGrid(dims=4)


class TestBzScan:
    def test_hermitian_single_candidate(self, policy):
        cands = bz_scan(LiebSpec("hermitian"), ScanGrid(dims=2, resolution=128), policy)
        assert len(cands) == 1
        assert k_distance(cands[0].k, (PI, PI)) <= 1e-8
        assert cands[0].refined

    def test_minimal_fep_two_candidates(self, policy):
        spec = LiebSpec("minimal-fep", epsilon=1.0)
        cands = bz_scan(spec, ScanGrid(dims=2, resolution=128), policy)
        assert len(cands) == 2
        kappa = 2 * arccot(0.5)
        wants = [(kappa, -kappa), (PI, PI)]
        for c, want in zip(cands, wants):
            assert k_distance(c.k, want) <= 1e-8

    def test_nh_symmetric_four_candidates(self, policy):
        spec = LiebSpec("nh-symmetric", epsilon=1.0)
        cands = bz_scan(spec, ScanGrid(dims=2, resolution=128), policy)
        assert len(cands) == 4
        k0 = 2 * PI / 3
        wants = {(mu * k0, nu * k0) for mu in (1, -1) for nu in (1, -1)}
        for c in cands:
            assert min(k_distance(c.k, w) for w in wants) <= 1e-8

    def test_no_misses_no_spurious_vs_analytic(self, policy):
        for spec in [
            LiebSpec("hermitian"),
            LiebSpec("minimal-fep", epsilon=1.0),
            LiebSpec("nh-symmetric", epsilon=1.0),
            LiebSpec("reciprocal", phi=PI / 2, psi=3 * PI / 4),
        ]:
            catalog = analytic_degeneracies(spec)
            cands = bz_scan(spec, ScanGrid(dims=2, resolution=128), policy)
            assert len(cands) == len(catalog)
            for entry in catalog:
                assert min(k_distance(entry.k, c.k) for c in cands) <= 1e-8
            for c in cands:
                assert min(k_distance(c.k, e.k) for e in catalog) <= 1e-8

    def test_candidates_sorted_and_below_energy_cut(self, policy):
        spec = LiebSpec("nh-symmetric", epsilon=1.0)
        cands = bz_scan(spec, ScanGrid(dims=2, resolution=96), policy)
        ks = [c.k for c in cands]
        assert ks == sorted(ks)
        for c in cands:
            assert c.min_abs_energy <= 0.05

    def test_classification_attached_on_request(self, policy):
        spec = LiebSpec("minimal-fep", epsilon=1.0)
        cands = bz_scan(spec, ScanGrid(dims=2, resolution=96), policy, classify=True)
        labels = {tuple(round(x, 4) for x in c.k): c.report.label for c in cands}
        assert sorted(labels.values()) == ["EP3", "FEP"]

    def test_grid_model_dims_must_match(self, policy):
        with pytest.raises(ValueError):
            bz_scan(LiebSpec("hermitian"), ScanGrid(dims=3, resolution=16), policy)

    def test_hodsm_line_degeneracies_found_in_3d(self, policy):
        # full-zone scan at modest resolution; every on-axis analytic point
        # must have a candidate nearby (finds outside the printed set are
        # allowed: the zero set of det H contains curves, flagged not asserted)
        spec = HodsmSpec(3, epsilon=0.5)
        grid = ScanGrid(dims=3, resolution=24)
        cands = bz_scan(spec, grid, policy)
        assert cands, "scan found nothing"
        for c in cands:
            assert c.min_abs_energy <= 0.05
        for entry in analytic_degeneracies(spec):
            near = min(k_distance(entry.k, c.k) for c in cands)
            assert near <= 2 * grid.cell_diagonal(), f"missed {entry.k}"


class TestRefine:
    def test_converges_to_corner_point(self, policy):
        spec = LiebSpec("minimal-fep", epsilon=1.0)
        cand = refine_degeneracy(spec, (PI + 0.05, PI - 0.05), policy)
        assert cand.refined
        assert k_distance(cand.k, (PI, PI)) <= 1e-8

    def test_hodsm_ep4_from_off_point(self, policy):
        spec = HodsmSpec(1, epsilon=2**-0.5)
        cand = refine_degeneracy(spec, (0.0, 0.0, 0.8), policy)
        assert cand.refined
        assert k_distance(cand.k, (0.0, 0.0, PI / 4)) <= 1e-6

    def test_exact_start_returns_immediately(self, policy):
        spec = LiebSpec("hermitian")
        cand = refine_degeneracy(spec, (PI, PI), policy)
        assert cand.refined
        assert k_distance(cand.k, (PI, PI)) <= 1e-10

    def test_two_starts_converge_together(self, policy):
        spec = LiebSpec("nh-symmetric", epsilon=1.0)
        cell = 2 * PI / 128
        k0 = (2 * PI / 3, 2 * PI / 3)
        a = refine_degeneracy(spec, (k0[0] + 0.4 * cell, k0[1] - 0.3 * cell), policy)
        b = refine_degeneracy(spec, (k0[0] - 0.5 * cell, k0[1] + 0.2 * cell), policy)
        assert a.refined and b.refined
        assert k_distance(a.k, b.k) <= 1e-6

    def test_nonconvergence_reported_not_raised(self, policy):
        # outside -3/2 < t/s < -1/2 the parent semimetal is gapped: there is
        # no zero of the detector anywhere, so refinement must report failure
        spec = HodsmSpec(0, t=-2.0, s=1.0)
        cand = refine_degeneracy(spec, (0.3, -0.2, 1.1), policy)
        assert not cand.refined
        assert cand.min_abs_energy > 0.05

    def test_gapped_model_scan_is_empty(self, policy):
        spec = HodsmSpec(0, t=-2.0, s=1.0)
        assert bz_scan(spec, ScanGrid(dims=3, resolution=12), policy) == []


class TestAnalyticCatalog:
    def test_reciprocal_four_points(self):
        spec = LiebSpec("reciprocal", phi=PI / 2, psi=3 * PI / 4)
        entries = analytic_degeneracies(spec)
        labels = {tuple(round(x, 6) for x in e.k): e.label for e in entries}
        assert labels[(round(3 * PI / 4, 6), round(PI / 2, 6))] == "FEP"
        assert labels[(round(-3 * PI / 4, 6), round(-PI / 2, 6))] == "FEP"
        assert labels[(round(3 * PI / 4, 6), round(-PI / 2, 6))] == "EP3"
        assert labels[(round(-3 * PI / 4, 6), round(PI / 2, 6))] == "EP3"

    def test_hermitian_parent_dirac_points(self):
        entries = analytic_degeneracies(HodsmSpec(0, t=-1.0, s=1.0))
        ks = sorted(tuple(round(x, 9) for x in e.k) for e in entries)
        assert ks == [(0.0, 0.0, round(-PI / 2, 9)), (0.0, 0.0, round(PI / 2, 9))]
        assert all(e.partials == (1, 1, 1, 1) for e in entries)

    def test_nh3_catalog(self):
        entries = analytic_degeneracies(HodsmSpec(3, epsilon=0.5))
        feps = [e for e in entries if e.label == "FEP"]
        ep2s = [e for e in entries if e.label == "EP2"]
        assert len(feps) == 2 and len(ep2s) == 4
        assert all(e.partials == (2, 2) for e in feps)
        kz_fep = sorted(round(e.k[2], 9) for e in feps)
        assert kz_fep == [round(-PI / 2, 9), round(PI / 2, 9)]
        kz_ep2 = sorted(round(abs(e.k[2]), 6) for e in ep2s)
        assert kz_ep2 == [round(PI / 4, 6)] * 2 + [round(3 * PI / 4, 6)] * 2

    def test_general_variant_unsupported(self):
        spec = LiebSpec("general", pqrs=lambda k: (1, 1, 1, 1))
        with pytest.raises(ValueError):
            analytic_degeneracies(spec)


class TestTraceRing:
    def test_sample_count_and_alpha(self, policy):
        spec = LiebSpec("reciprocal", phi=PI / 4, psi=PI / 4)
        samples = trace_ring(spec, 64, policy)
        assert len(samples) == 64
        assert all(isinstance(s, ManifoldSample) for s in samples)
        assert all(s.report.alpha == 3 for s in samples)

    def test_special_point_sampled_exactly(self, policy):
        spec = LiebSpec("reciprocal", phi=PI / 4, psi=PI / 4)
        samples = trace_ring(spec, 64, policy)
        special = [s for s in samples if k_distance(s.k, (PI / 4, PI / 4)) <= 1e-12]
        assert len(special) == 1
        assert special[0].report.label == "FEP"

    def test_off_ring_momenta_have_simple_flat_band(self, policy, rng):
        spec = LiebSpec("reciprocal", phi=PI / 4, psi=PI / 4)
        from fepkit.classify import classify_point
        from fepkit.models import lieb_bloch

        checked = 0
        while checked < 10:
            k = tuple(rng.uniform(-PI, PI, 2))
            if detector(spec, k) < 1e-2:
                continue  # too close to the ring
            r = classify_point(lieb_bloch(spec, k), 0.0, policy)
            assert r.alpha == 1 and r.label == "nondegenerate"
            checked += 1

    def test_requires_equal_angles(self, policy):
        with pytest.raises(ValueError):
            trace_ring(LiebSpec("reciprocal", phi=0.3, psi=0.9), 16, policy)

    def test_requires_reciprocal_variant(self, policy):
        with pytest.raises(ValueError):
            trace_ring(LiebSpec("hermitian"), 16, policy)

    def test_odd_sample_count(self, policy):
        spec = LiebSpec("reciprocal", phi=PI / 4, psi=PI / 4)
        samples = trace_ring(spec, 33, policy)
        assert len(samples) == 33

    def test_ring_wrapping_through_zone_corner(self, policy):
        # cos phi < 0 rings the zone corner; the kx domain wraps through pi
        spec = LiebSpec("reciprocal", phi=3 * PI / 4, psi=3 * PI / 4)
        samples = trace_ring(spec, 64, policy)
        assert len(samples) == 64
        assert all(s.report.alpha == 3 for s in samples)
        feps = sorted(s.k for s in samples if s.report.label == "FEP")
        assert len(feps) == 2
        for got, want in zip(feps, [(-3 * PI / 4, -3 * PI / 4), (3 * PI / 4, 3 * PI / 4)]):
            assert k_distance(got, want) <= 1e-8


class TestHelpers:
    def test_canonical_range(self):
        assert canonical_k((-PI,))[0] == pytest.approx(PI)
        assert canonical_k((3 * PI,))[0] == pytest.approx(PI)
        assert canonical_k((0.3,))[0] == pytest.approx(0.3)

    def test_min_abs_energy_skips_flat_band(self):
        spec = LiebSpec("hermitian")
        # at the zone center the dispersive gap is 2 sqrt(2)
        assert min_abs_energy(spec, (0.0, 0.0)) == pytest.approx(2 * math.sqrt(2))
        assert min_abs_energy(HodsmSpec(0), (0.0, 0.0, PI / 2)) <= 1e-12
