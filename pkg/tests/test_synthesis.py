from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramnet.errors import DegenerateGain, DomainError, UnsolvableLimit
from paramnet.network import ScatteringMatrix, check_paraunitary
from paramnet.synthesis import (
    CANDIDATE_BASES,
    Feasibility,
    GeneralFamilyParams,
    basis_feasibility,
    closed_form_noise,
    constrained_theta6,
    constraint_residual,
    derive_alpha2,
    general_family_S,
    minimal_S,
    noise_figures_general,
)


def family_params(family, G1, G2, a1, rng=None):
    if rng is None:
        return GeneralFamilyParams(family, G1, G2, a1)
    th = list(rng.uniform(-math.pi, math.pi, 6))
    ph = tuple(rng.uniform(-math.pi, math.pi, 2))
    th[5] = constrained_theta6(th, ph)
    return GeneralFamilyParams(family, G1, G2, a1, tuple(th), ph)


class TestAlpha2:
    def test_T_limit(self):
        assert derive_alpha2(GeneralFamilyParams("T", 5.0, 0.0, 0.0)) == 5.0

    def test_C_zero(self):
        assert derive_alpha2(GeneralFamilyParams("C", 5.0, 0.0, 0.0)) == 0.0

    def test_T_worked_example(self):
        p = GeneralFamilyParams("T", 4.0, 1.0, 2.0)
        a2 = derive_alpha2(p)
        assert a2 == pytest.approx(12.0)
        assert (2 + 4) * (a2 - 8) == pytest.approx(2 * a2)

    def test_T_unsolvable(self):
        with pytest.raises(UnsolvableLimit):
            derive_alpha2(GeneralFamilyParams("T", 4.0, 0.0, 1.0))

    @pytest.mark.parametrize("family", ["T", "C"])
    def test_constraint_residual_random(self, family):
        rng = np.random.default_rng(3)
        for _ in range(200):
            G1, G2, a1 = rng.uniform([1, 0.1, 0], [10, 5, 5])
            p = GeneralFamilyParams(family, G1, G2, a1)
            assert constraint_residual(p, derive_alpha2(p)) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            GeneralFamilyParams("T", 0.5)
        with pytest.raises(DomainError):
            GeneralFamilyParams("X", 2.0)


class TestGeneralFamily:
    def test_T_minimal_limit_rows(self):
        G1 = 7.0
        E = general_family_S(GeneralFamilyParams("T", G1)).entries
        a, b = math.sqrt(G1), math.sqrt(G1 - 1)
        expected = [[0, 0, 1, 0], [a, 0, 0, b], [0, 1, 0, 0], [b, 0, 0, a]]
        np.testing.assert_allclose(E, expected, atol=1e-15)

    def test_C_minimal_limit_matches_minimal(self):
        G = 9.0
        E = general_family_S(GeneralFamilyParams("C", G)).entries
        np.testing.assert_allclose(E, minimal_S("C", G).entries, atol=1e-15)

    def test_signatures(self):
        assert general_family_S(GeneralFamilyParams("T", 2.0)).signature == (1, 1, 1, -1)
        assert general_family_S(GeneralFamilyParams("C", 2.0)).signature == (1, -1, 1, -1)

    @pytest.mark.parametrize("family", ["T", "C"])
    @pytest.mark.parametrize("phased", [False, True])
    def test_paraunitary_random(self, family, phased):
        rng = np.random.default_rng(11)
        for _ in range(200):
            G1, G2, a1 = rng.uniform([1, 0.1, 0], [10, 5, 5])
            p = family_params(family, G1, G2, a1, rng if phased else None)
            assert check_paraunitary(general_family_S(p)) < 1e-10

    def test_theta6_must_satisfy_constraint(self):
        p = GeneralFamilyParams("T", 3.0, 1.0, 0.5, thetas=(0.0, 0.3, 0.0, 0.0, 0.0, 0.0))
        with pytest.raises(DomainError):
            general_family_S(p)

    @pytest.mark.parametrize("G", [1.0, 40.0])
    def test_minimal_is_limit(self, G):
        # S34 = sqrt(G1 * G2) sets the rate, so the gap closes like sqrt(eps)
        errs = []
        for eps in (1e-4, 1e-6, 1e-8):
            approx = general_family_S(GeneralFamilyParams("T", G + 1, eps, 0.0)).entries
            errs.append(np.max(np.abs(approx - minimal_S("T", G).entries)))
            assert errs[-1] <= 1.001 * math.sqrt((G + 1) * eps)
        assert errs[-1] < 1e-3


class TestMinimal:
    def test_C_zero_gain_routes(self):
        S = minimal_S("C", 0.0)
        assert S.element(2, 1) == 0
        assert S.element(2, 4) == 1

    def test_T_99(self):
        S = minimal_S("T", 99.0)
        assert S.power(2, 1) == pytest.approx(100.0)
        assert S.power(2, 4) == pytest.approx(99.0)

    @pytest.mark.parametrize("family", ["T", "C"])
    @pytest.mark.parametrize("G", [0.0, 1.0, 10.0, 1e5])
    def test_paraunitary(self, family, G):
        assert check_paraunitary(minimal_S(family, G)) < 1e-12 * max(1.0, G)

    @pytest.mark.parametrize("family, offset", [("T", -1.0), ("C", 1.0)])
    def test_aux_port_sums(self, family, offset):
        S = minimal_S(family, 30.0)
        fwd = S.power(2, 1)
        assert S.power(1, 3) + S.power(1, 4) == pytest.approx(1.0)
        assert S.power(2, 3) + S.power(2, 4) == pytest.approx(fwd + offset)


class TestFeasibility:
    def test_six_bases(self):
        verdicts = {sig: basis_feasibility(sig) for sig in CANDIDATE_BASES}
        status = {sig: v.status for sig, v in verdicts.items()}
        assert status == {
            (1, 1, 1, 1): Feasibility.CIRCULATOR_ONLY,
            (1, 1, 1, -1): Feasibility.FEASIBLE,
            (1, -1, 1, 1): Feasibility.INFEASIBLE,
            (1, 1, -1, -1): Feasibility.INFEASIBLE,
            (1, -1, 1, -1): Feasibility.FEASIBLE,
            (1, -1, -1, -1): Feasibility.INFEASIBLE,
        }
        assert verdicts[(1, -1, 1, 1)].witness == "|S32|^2 + |S42|^2 = -1"
        for v in verdicts.values():
            if v.status is Feasibility.FEASIBLE:
                assert v.residual < 1e-10

    def test_port_swapped_bases(self):
        assert basis_feasibility((1, 1, -1, 1)).status is Feasibility.FEASIBLE
        assert basis_feasibility((1, -1, -1, 1)).status is Feasibility.FEASIBLE

    def test_rejects_bad_signature(self):
        with pytest.raises(DomainError):
            basis_feasibility((-1, 1, 1, 1))


class TestNoise:
    @pytest.mark.parametrize("G", [1.0, 9.0, 99.0])
    def test_minimal_T(self, G):
        rep = noise_figures_general(minimal_S("T", G))
        G1 = G + 1
        assert rep.n_ba == 0.5
        assert rep.n_add == pytest.approx(0.5 * (G1 - 1) / G1, abs=1e-12)

    def test_minimal_C(self):
        rep = noise_figures_general(minimal_S("C", 100.0))
        assert rep.n_ba == 0.5
        assert rep.n_add == pytest.approx(0.505, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateGain):
            noise_figures_general(minimal_S("C", 0.0))

    def test_needs_four_ports(self):
        with pytest.raises(DomainError):
            noise_figures_general(ScatteringMatrix(np.eye(2), (1, 1)))

    @pytest.mark.parametrize("family", ["T", "C"])
    def test_closed_form_matches_matrix(self, family):
        rng = np.random.default_rng(5)
        for _ in range(50):
            G1, G2, a1 = rng.uniform([1.5, 0.1, 0], [10, 5, 5])
            p = family_params(family, G1, G2, a1, rng)
            a, b = noise_figures_general(general_family_S(p)), closed_form_noise(p)
            assert a.n_ba == pytest.approx(b.n_ba, abs=1e-12)
            assert a.n_add == pytest.approx(b.n_add, abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        st.sampled_from(["T", "C"]),
        st.floats(1.5, 50.0),
        st.floats(0.1, 5.0),
    )
    def test_minimum_at_alpha1_zero(self, family, G1, G2):
        alphas = np.linspace(0.0, 5.0, 20)
        reps = [noise_figures_general(general_family_S(GeneralFamilyParams(family, G1, G2, a))) for a in alphas]
        n_ba = np.array([r.n_ba for r in reps])
        n_add = np.array([r.n_add for r in reps])
        assert np.all(np.diff(n_ba) >= -1e-12)
        assert np.all(np.diff(n_add) >= -1e-12)
