"""Concrete mode networks: the T-amp and C-amp, and the simple devices they are
compared against or built from (squeezer, converter, circulator, 2-port amp).

Coupling strengths are given as dimensionless ``beta`` values, with the edge
magnitude ``beta * sqrt(kappa_m kappa_n) / 2``.  ``beta = 1`` on a conversion
edge is perfect conversion; a gain edge with ``beta_from_gain(G)`` gives a
standalone reflection photon gain G.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NearSingular
from .network import (
    CONVERSION,
    GAIN,
    CouplingEdge,
    DampingMatrix,
    ModeNetwork,
    ModeSpec,
    ScatteringMatrix,
    network_from_coupling_matrix,
    scattering,
    synthesize_couplings,
)

TWO_PI = 2.0 * math.pi
DEFAULT_OMEGAS = tuple(TWO_PI * f * 1e9 for f in (4.0, 6.0, 8.0, 10.0))
DEFAULT_KAPPA = TWO_PI * 100e6
DEFAULT_KAPPAS = (DEFAULT_KAPPA,) * 4

HALF_PI = math.pi / 2

# (m, n, strength class, phase) with 0-based mode indices.  "c" edges carry the
# conversion beta, "g" edges the gain beta ("T") or its reciprocal ("C").
_T_EDGES = (
    (0, 1, "c", HALF_PI),
    (0, 2, "c", -HALF_PI),
    (1, 2, "c", HALF_PI),
    (0, 3, "g", -HALF_PI),
    (1, 3, "g", -HALF_PI),
    (2, 3, "g", HALF_PI),
)
# Phases of (1,2) and (1,3) follow the C-amp coupling matrix; the reference
# coupling table has these two signs swapped, which breaks the amplifier.
_C_EDGES = (
    (0, 1, "g", HALF_PI),
    (0, 2, "c", -HALF_PI),
    (0, 3, "g", -HALF_PI),
    (1, 2, "g", -HALF_PI),
    (1, 3, "c", HALF_PI),
    (2, 3, "g", HALF_PI),
)
T_SIGNS = (1, 1, 1, -1)
C_SIGNS = (1, -1, 1, -1)


@dataclass(frozen=True)
class AmpParams:
    """Per-coupling calibration of a 4-mode amplifier.

    ``g_refl`` is the reflection photon gain each gain coupling would give on
    its own; ``conv_eff`` the efficiency each conversion coupling would give
    on its own.  Neither is the forward gain of the assembled amplifier.
    """

    g_refl: float
    conv_eff: float = 1.0
    kappas: tuple[float, ...] = DEFAULT_KAPPAS
    omegas: tuple[float, ...] = DEFAULT_OMEGAS

    def __post_init__(self):
        object.__setattr__(self, "kappas", tuple(float(k) for k in self.kappas))
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        if not self.g_refl >= 1:
            raise DomainError(f"per-coupling gain must be >= 1 (got {self.g_refl})")
        if not 0 < self.conv_eff <= 1:
            raise DomainError(f"conversion efficiency must be in (0, 1] (got {self.conv_eff})")
        if len(self.kappas) != 4 or len(self.omegas) != 4:
            raise DomainError("need four linewidths and four mode frequencies")
        if any(not k > 0 for k in self.kappas):
            raise DomainError("linewidths must be positive")


@dataclass(frozen=True)
class PumpLine:
    pair: tuple[str, str]
    kind: str
    magnitude: float
    phase: float
    pump_frequency: float


def beta_from_gain(G: float) -> float:
    """Normalized squeezing strength giving standalone reflection photon gain G."""
    if not G >= 1:
        raise DomainError(f"gain must be >= 1 (got {G})")
    if math.isinf(G):
        return 1.0
    s = math.sqrt(G)
    return math.sqrt((s - 1.0) / (s + 1.0))


def beta_from_conversion(C: float) -> float:
    """Normalized conversion strength giving standalone efficiency C (beta <= 1 branch)."""
    if not 0 < C <= 1:
        raise DomainError(f"conversion efficiency must be in (0, 1] (got {C})")
    return (1.0 - math.sqrt(1.0 - C)) / math.sqrt(C)


def _modes(names: Sequence[str], omegas, kappas, signs) -> tuple[ModeSpec, ...]:
    return tuple(
        ModeSpec(name, float(w), float(k), s < 0) for name, w, k, s in zip(names, omegas, kappas, signs)
    )


def _edge(modes, m, n, beta, phase) -> CouplingEdge:
    a, b = modes[m], modes[n]
    kind = CONVERSION if a.sign == b.sign else GAIN
    return CouplingEdge(a.name, b.name, kind, beta * math.sqrt(a.kappa * b.kappa) / 2.0, phase)


def _four_mode(params: AmpParams, table, signs, gain_beta: float) -> ModeNetwork:
    modes = _modes(("a1", "a2", "a3", "a4"), params.omegas, params.kappas, signs)
    c = beta_from_conversion(params.conv_eff)
    edges = tuple(_edge(modes, m, n, c if cls == "c" else gain_beta, ph) for m, n, cls, ph in table)
    return ModeNetwork(modes, edges)


def build_T(params: AmpParams) -> ModeNetwork:
    """T-amp: conversion triangle on modes 1-3, each squeezed against mode 4."""
    return _four_mode(params, _T_EDGES, T_SIGNS, beta_from_gain(params.g_refl))


def build_C(params: AmpParams) -> ModeNetwork:
    """C-amp: conversions (1,3), (2,4) and four gain couplings.

    Gain edges use the reciprocal of the standalone calibration, which is
    above the standalone oscillation threshold; at ``g_refl = 1`` the gain
    couplings would be infinite, so that point is rejected.
    """
    if params.g_refl <= 1:
        raise DomainError("C-amp needs per-coupling gain > 1")
    return _four_mode(params, _C_EDGES, C_SIGNS, 1.0 / beta_from_gain(params.g_refl))


def build_amp(family: str, params: AmpParams) -> ModeNetwork:
    family = family.upper()
    if family == "T":
        return build_T(params)
    if family == "C":
        return build_C(params)
    raise DomainError(f"unknown family {family!r}")


def _two_mode(kind, beta, kappas, omegas, phase) -> ModeNetwork:
    if len(kappas) != 2 or any(not k > 0 for k in kappas):
        raise DomainError("need two positive linewidths")
    signs = (1, -1) if kind == GAIN else (1, 1)
    modes = _modes(("a1", "a2"), omegas, kappas, signs)
    return ModeNetwork(modes, (_edge(modes, 0, 1, beta, phase),))


def build_squeezer(
    G: float,
    kappas: Sequence[float] = (DEFAULT_KAPPA, DEFAULT_KAPPA),
    omegas: Sequence[float] = DEFAULT_OMEGAS[:2],
    phase: float = 0.0,
) -> ModeNetwork:
    """Two-mode squeezer with reflection photon gain G (G - 1 in transmission)."""
    return _two_mode(GAIN, beta_from_gain(G), kappas, omegas, phase)


def build_converter(
    C: float,
    kappas: Sequence[float] = (DEFAULT_KAPPA, DEFAULT_KAPPA),
    omegas: Sequence[float] = DEFAULT_OMEGAS[:2],
    phase: float = 0.0,
) -> ModeNetwork:
    """Two-mode frequency converter with transmission efficiency C."""
    return _two_mode(CONVERSION, beta_from_conversion(C), kappas, omegas, phase)


def build_2pa(
    G: float,
    kappas: Sequence[float] = (DEFAULT_KAPPA, DEFAULT_KAPPA),
    omegas: Sequence[float] = DEFAULT_OMEGAS[:2],
) -> ModeNetwork:
    """2-port amplifier with amplitude gain sqrt(G+1) in reflection, sqrt(G) in transmission."""
    if not G >= 0:
        raise DomainError(f"G must be >= 0 (got {G})")
    return build_squeezer(G + 1.0, kappas, omegas)


CIRCULATOR_PERMUTATION = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=complex)


def build_circulator3(
    kappas: Sequence[float] = DEFAULT_KAPPAS[:3],
    omegas: Sequence[float] = DEFAULT_OMEGAS[:3],
) -> ModeNetwork:
    """Ideal 3-port circulator (1 -> 2 -> 3 -> 1), synthesized from its S matrix."""
    if len(kappas) != 3 or any(not k > 0 for k in kappas):
        raise DomainError("need three positive linewidths")
    sigma = DampingMatrix(np.asarray(kappas, dtype=float) / 2.0)
    target = ScatteringMatrix(CIRCULATOR_PERMUTATION, (1, 1, 1))
    M = synthesize_couplings(target, sigma)
    return network_from_coupling_matrix(M, sigma, (1, 1, 1), omegas=omegas)


def pump_schedule(net: ModeNetwork) -> list[PumpLine]:
    """One pump per edge: difference frequency for conversion, sum for gain."""
    lines = []
    for e in net.edges:
        wm = net.modes[net.index(e.m)].omega
        wn = net.modes[net.index(e.n)].omega
        freq = abs(wm - wn) if e.kind == CONVERSION else wm + wn
        lines.append(PumpLine((e.m, e.n), e.kind, e.magnitude, e.phase, freq))
    return lines


def forward_gain(net: ModeNetwork) -> float:
    """|S21|^2 at resonance."""
    return scattering(net, 0.0).power(2, 1)


def per_coupling_gain_for(
    family: str,
    target_forward_gain: float,
    conv_eff: float = 1.0,
    kappas: Sequence[float] = DEFAULT_KAPPAS,
    max_db: float = 80.0,
) -> float:
    """Smallest per-coupling gain whose amplifier reaches ``target_forward_gain``.

    At perfect conversion the answer is exact (G for T, G + 1 for C); otherwise
    the lowest root on a dB scan is refined with brentq.
    """
    family = family.upper()
    if not target_forward_gain > 0:
        raise DomainError("target forward gain must be positive")
    if conv_eff == 1.0:
        if family == "T":
            return max(float(target_forward_gain), 1.0)
        if family == "C":
            return float(target_forward_gain) + 1.0
    target_db = 10.0 * math.log10(target_forward_gain)

    def excess(g_db: float) -> float:
        params = AmpParams(10.0 ** (g_db / 10.0), conv_eff, tuple(kappas))
        return 10.0 * math.log10(max(forward_gain(build_amp(family, params)), 1e-300)) - target_db

    grid = np.linspace(1e-3, max_db, int(max_db * 20) + 1)
    prev_x, prev_v = None, None
    for x in grid:
        try:
            v = excess(float(x))
        except NearSingular:
            prev_x, prev_v = None, None
            continue
        if prev_v is not None and prev_v * v <= 0:
            root = brentq(excess, prev_x, float(x), xtol=1e-12)
            return 10.0 ** (root / 10.0)
        prev_x, prev_v = float(x), v
    raise DomainError(
        f"no per-coupling gain up to {max_db} dB gives {target_db:.3g} dB forward gain "
        f"for the {family}-amp at conversion {conv_eff}"
    )
