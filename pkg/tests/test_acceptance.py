"""Acceptance criteria 1-11, each reported as one PASS/FAIL line."""
from __future__ import annotations

import math

import numpy as np
import pytest

from paramnet.analysis import (
    BandwidthCriteria,
    _den_C_reference,
    _den_T,
    bandwidth,
    characteristic_polynomial,
    closed_form_C,
    closed_form_C_corrected,
    closed_form_T,
    noise_report,
    sweep,
    to_db,
)
from paramnet.catalog import (
    AmpParams,
    build_C,
    build_T,
    build_circulator3,
    build_squeezer,
    forward_gain,
    per_coupling_gain_for,
)
from paramnet.composition import PortTermination, circulator_amp_equivalent, stability_margin, terminate
from paramnet.network import (
    check_paraunitary,
    check_symplectic,
    damping_matrix,
    dynamical_matrix,
    generalized_scattering,
    network_from_coupling_matrix,
    random_network,
    scattering,
    synthesize_couplings,
)
from paramnet.synthesis import (
    CANDIDATE_BASES,
    Feasibility,
    GeneralFamilyParams,
    basis_feasibility,
    general_family_S,
    minimal_S,
    noise_figures_general,
)

UNIFORM = (1.0, 1.0, 1.0, 1.0)
DELTAS = np.linspace(-2.0, 2.0, 801)


@pytest.fixture
def report(record_property):
    def emit(n, ok, detail):
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        record_property("acceptance", line)
        assert ok, line

    return emit


def amp(family, g_fwd, conv=1.0):
    # per-coupling gain for a forward gain g_fwd at perfect conversion
    if family == "T":
        return build_T(AmpParams(g_fwd, conv, UNIFORM))
    return build_C(AmpParams(g_fwd + 1.0, conv, UNIFORM))


def test_criterion_1_minimal_matrices(report):
    worst_zero = worst_13 = worst_pu = 0.0
    for family in ("T", "C"):
        for g in (10.0, 100.0, 1000.0):
            S = scattering(amp(family, g), 0.0)
            worst_zero = max(worst_zero, *(abs(S.element(*ij)) for ij in ((1, 1), (2, 2), (1, 2))))
            worst_13 = max(worst_13, abs(abs(S.element(1, 3)) - 1.0))
            expected = 1.0 if family == "T" else -1.0
            worst_pu = max(worst_pu, abs(S.power(2, 1) - S.power(2, 4) - expected))
    ok = worst_zero < 1e-10 and worst_13 < 1e-10 and worst_pu < 1e-9
    report(1, ok, f"max |S11|,|S22|,|S12| = {worst_zero:.2e}; max ||S13|-1| = {worst_13:.2e}; "
                  f"max |S21|^2-|S24|^2 error = {worst_pu:.2e}")


def test_criterion_2_commutators(report):
    rng = np.random.default_rng(2024)
    worst_pu = worst_sym = 0.0
    for _ in range(100):
        net = random_network(rng, int(rng.integers(2, 7)))
        for d in np.linspace(-2.0, 2.0, 11):
            worst_pu = max(worst_pu, check_paraunitary(scattering(net, d * net.kappa_bar)))
        worst_sym = max(worst_sym, check_symplectic(generalized_scattering(scattering(net, 0.0))))
    ok = worst_pu < 1e-10 and worst_sym < 1e-10
    report(2, ok, f"max ||SKS^+ - K|| = {worst_pu:.2e}; max ||S~^T J S~ - J|| = {worst_sym:.2e} (100 networks x 11 detunings)")


def _reference_MT(G):
    r = math.sqrt(G - 1) / (math.sqrt(G) + 1)
    return 0.5 * np.array([[0, 1, -1, -r], [-1, 0, 1, -r], [1, -1, 0, r], [-r, -r, r, 0]])


def _reference_MC(G):
    q = (math.sqrt(G) + 1) / math.sqrt(G - 1)
    return 0.5 * np.array([[0, q, -1, -q], [q, 0, -q, 1], [1, -q, 0, q], [-q, -1, q, 0]])


def test_criterion_3_coupling_goldens(report):
    worst = 0.0
    for G in (4.0, 10.0, 101.0, 1001.0):
        MT = dynamical_matrix(build_T(AmpParams(G, kappas=UNIFORM)), 0.0).entries
        MC = dynamical_matrix(build_C(AmpParams(G, kappas=UNIFORM)), 0.0).entries
        worst = max(worst, np.max(np.abs(MT - _reference_MT(G))), np.max(np.abs(MC - _reference_MC(G))))
    report(3, worst < 1e-12, f"max entry deviation from reference T/C coupling matrices = {worst:.2e}")


def _den_spread(den, net, G):
    r = den(DELTAS, math.sqrt(G)) / characteristic_polynomial(net, DELTAS)
    return float(np.ptp(np.abs(r)) / np.mean(np.abs(r)))


def test_criterion_4_closed_forms(report):
    worst_T = 0.0
    for G in (10.0, 100.0):
        res = sweep(build_T(AmpParams(G, kappas=UNIFORM)), -2.0, 2.0, 801)
        s11, s12, s21 = closed_form_T(DELTAS, G)
        for (i, j), ref in (((1, 1), s11), ((1, 2), s12), ((2, 1), s21)):
            worst_T = max(worst_T, np.max(np.abs(np.abs(res.element(i, j)) - np.abs(ref))))

    # the reference C elements share one denominator; it is consistent only if it
    # is a constant multiple of det(Sigma + M - i delta)
    spreads = [_den_spread(_den_C_reference, build_C(AmpParams(G, kappas=UNIFORM)), G) for G in (10.0, 100.0)]
    t_spread = max(_den_spread(_den_T, build_T(AmpParams(G, kappas=UNIFORM)), G) for G in (10.0, 100.0))
    reference_consistent = max(spreads) < 1e-9
    res21 = max(abs(abs(closed_form_C(0.0, G)[2]) ** 2 - (G - 1)) / (G - 1) for G in (10.0, 100.0, 1000.0))

    worst_C = 0.0
    for G in (10.0, 100.0):
        res = sweep(build_C(AmpParams(G, kappas=UNIFORM)), -2.0, 2.0, 801)
        forms = closed_form_C(DELTAS, G) if reference_consistent else closed_form_C_corrected(DELTAS, G)
        for (i, j), ref in zip(((1, 1), (1, 2), (2, 1)), forms):
            worst_C = max(worst_C, np.max(np.abs(np.abs(res.element(i, j)) - np.abs(ref))))

    ok = worst_T < 1e-9 and res21 < 1e-12 and worst_C < 1e-9
    report(4, ok, f"T max |dev| = {worst_T:.2e}; reference C denominator inconsistent (spread {max(spreads):.2e} vs "
                  f"T {t_spread:.1e}), so reference C S11/S12/S21 excluded; reference |S21C(0)|^2 = G-1 to {res21:.1e}; "
                  f"corrected C forms max |dev| = {worst_C:.2e}")


def test_criterion_5_noise(report):
    worst_ba = worst_add = 0.0
    for G in (10.0, 100.0, 1000.0):
        rT = noise_report(build_T(AmpParams(G, kappas=UNIFORM)), 0.0)
        rC = noise_report(build_C(AmpParams(G + 1, kappas=UNIFORM)), 0.0)
        worst_ba = max(worst_ba, abs(rT.n_ba - 0.5), abs(rC.n_ba - 0.5))
        worst_add = max(worst_add, abs(rT.n_add - (G - 1) / (2 * G)))
    violations = 0
    for family in ("T", "C"):
        for G1, G2 in ((2.0, 0.5), (10.0, 1.0), (100.0, 3.0)):
            reps = [noise_figures_general(general_family_S(GeneralFamilyParams(family, G1, G2, a)))
                    for a in np.linspace(0.0, 5.0, 20)]
            for seq in ([r.n_ba for r in reps], [r.n_add for r in reps]):
                violations += int(np.sum(np.diff(seq) < -1e-12))
    ok = worst_ba < 1e-9 and worst_add < 1e-9 and violations == 0
    report(5, ok, f"max |n_ba-0.5| = {worst_ba:.2e}; max T n_add error = {worst_add:.2e}; "
                  f"alpha1-scan monotonicity violations = {violations}")


def test_criterion_6_imperfect_conversion(report):
    net_T = build_T(AmpParams(10 ** 1.7, 0.99, UNIFORM))
    S = scattering(net_T, 0.0)
    t21, t11, t22 = to_db(S.power(2, 1)), to_db(S.power(1, 1)), to_db(S.power(2, 2))
    ok_T = abs(t21 - 20.0) <= 1.5 and t11 <= -20.0 and t22 <= -20.0

    g = per_coupling_gain_for("C", 100.0, 0.99, UNIFORM)
    SC = scattering(build_C(AmpParams(g, 0.99, UNIFORM)), 0.0)
    c21, c11 = to_db(SC.power(2, 1)), to_db(SC.power(1, 1))
    ok_C = abs(c21 - 20.0) <= 0.5 and abs(c11 + 15.0) <= 2.0
    report(6, ok_T and ok_C,
           f"T @17 dB: S21 {t21:.3f} dB, S11 {t11:.3f} dB, S22 {t22:.3f} dB ({'ok' if ok_T else 'out of band'}); "
           f"C @{to_db(g):.3f} dB per coupling: S21 {c21:.3f} dB, S11 {c11:.3f} dB vs -15 +/- 2 "
           f"({'ok' if ok_C else 'out of band'})")


def test_criterion_7_bandwidth(report):
    crit = BandwidthCriteria(100.0)
    t = bandwidth(build_T(AmpParams(100.0, kappas=UNIFORM)), crit)
    c = bandwidth(build_C(AmpParams(101.0, kappas=UNIFORM)), crit)
    sq = bandwidth(build_squeezer(101.0, (1.0, 1.0)), BandwidthCriteria(100.0, conditions=("S21",)))
    b_sq = sq.condition_width("S21")
    r_T, r_C = t.condition_width("S21") / b_sq, c.condition_width("S21") / b_sq
    ok_ratio = 1.6 <= r_T <= 2.4 or 1.6 <= r_C <= 2.4

    limited = c.overall == c.per_condition["S11"]
    gm = c.condition_width("S21") / c.condition_width("S11")
    ok_C = limited and 5.0 <= gm <= 15.0

    gbps = []
    for g_fwd in (100.0, 1000.0, 1e4):
        rep = bandwidth(build_squeezer(g_fwd + 1.0, (1.0, 1.0)), BandwidthCriteria(g_fwd, conditions=("S21",)))
        gbps.append(rep.gbp)
    ok_gbp = all(abs(v - 1.0) <= 0.2 for v in gbps)
    report(7, ok_ratio and ok_C and ok_gbp,
           f"gain-bandwidth ratio T/sq = {r_T:.3f}, C/sq = {r_C:.3f}; C matching-limited = {limited}, "
           f"gain/match width ratio = {gm:.2f} vs [5, 15]; squeezer gbp = {', '.join(f'{v:.3f}' for v in gbps)}")


def test_criterion_8_feasibility(report):
    expected = {
        (1, 1, 1, -1): Feasibility.FEASIBLE,
        (1, -1, 1, -1): Feasibility.FEASIBLE,
        (1, -1, 1, 1): Feasibility.INFEASIBLE,
        (1, 1, -1, -1): Feasibility.INFEASIBLE,
        (1, -1, -1, -1): Feasibility.INFEASIBLE,
        (1, 1, 1, 1): Feasibility.CIRCULATOR_ONLY,
    }
    verdicts = {sig: basis_feasibility(sig) for sig in CANDIDATE_BASES}
    got = {sig: v.status for sig, v in verdicts.items()}
    witness = verdicts[(1, -1, 1, 1)].witness
    ok = got == expected and witness == "|S32|^2 + |S42|^2 = -1"
    report(8, ok, f"verdicts match = {got == expected}; witness for (+,-,+,+): {witness!r}")


def test_criterion_9_stability(report):
    net = build_T(AmpParams(100.0, kappas=UNIFORM))
    g_fwd = forward_gain(net)
    r_hi = 0.9 / math.sqrt(g_fwd)
    m_hi = stability_margin(net, [PortTermination(3, r_hi), PortTermination(4, r_hi)])
    m_zero = stability_margin(net, [PortTermination(3, 0.0), PortTermination(4, 0.0)])
    r_mid = 0.5 / math.sqrt(g_fwd)
    raised = None
    try:
        for d in np.linspace(-10.0, 10.0, 401):
            terminate(scattering(net, d), [PortTermination(3, r_mid), PortTermination(4, r_mid)])
    except Exception as exc:  # any failure counts against the criterion
        raised = exc
    ok = m_hi < 1 and m_zero == 0 and raised is None
    report(9, ok, f"margin(r=0.9/sqrt(G)) = {m_hi:.4f}; margin(r=0) = {m_zero}; "
                  f"terminate at r=0.5/sqrt(G) over 401 detunings: {'no error' if raised is None else raised!r}")


def test_criterion_10_synthesis_round_trip(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        net = random_network(rng, int(rng.integers(2, 7)))
        d = float(rng.uniform(-1.0, 1.0))
        S = scattering(net, d * net.kappa_bar)
        sigma = damping_matrix(net)
        rebuilt = network_from_coupling_matrix(synthesize_couplings(S, sigma), sigma, net.signature)
        worst = max(worst, np.max(np.abs(scattering(rebuilt, S.delta).entries - S.entries)))
    perm = np.zeros((3, 3), dtype=complex)
    perm[1, 0] = perm[2, 1] = perm[0, 2] = 1.0
    circ_err = np.max(np.abs(scattering(build_circulator3(kappas=(1.0, 1.0, 1.0)), 0.0).entries - perm))
    ok = worst < 1e-9 and circ_err < 1e-10
    report(10, ok, f"max round-trip deviation over 100 networks = {worst:.2e}; circulator3 deviation = {circ_err:.2e}")


def test_criterion_11_composition(report):
    worst = 0.0
    for G in (1.0, 9.0, 99.0, 999.0):
        S = circulator_amp_equivalent(G, 0.0)
        worst = max(worst, np.max(np.abs(S.entries[:2, :2] - minimal_S("T", G).entries[:2, :2])))
    report(11, worst < 1e-9, f"max deviation of circulator + 2PA block from minimal T-amp = {worst:.2e}")
