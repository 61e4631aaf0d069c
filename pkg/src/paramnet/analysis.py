"""Frequency sweeps, closed-form references, noise, gain sweeps and bandwidths.

All detunings in this module are normalized: ``delta = Delta / kappa_bar``
with ``kappa_bar`` the geometric-mean linewidth of the network.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .catalog import AmpParams, build_amp, DEFAULT_KAPPAS
from .errors import ConditionFailsAtResonance, DomainError, NearSingular
from .network import (
    ModeNetwork,
    ScatteringMatrix,
    check_network,
    damping_matrix,
    dynamical_matrix,
    scattering,
)
from .synthesis import NoiseReport, noise_figures_general


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    matrices: tuple[ScatteringMatrix, ...]
    near_singular: tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.grid) == len(self.matrices) == len(self.near_singular)):
            raise ValueError("grid, matrices and flags must have equal length")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be strictly increasing")

    def element(self, i: int, j: int) -> np.ndarray:
        """S_ij (1-based) along the grid."""
        return np.array([m.entries[i - 1, j - 1] for m in self.matrices])

    def power(self, i: int, j: int) -> np.ndarray:
        return np.abs(self.element(i, j)) ** 2


def _evaluate(net: ModeNetwork, delta: float) -> tuple[ScatteringMatrix, bool]:
    try:
        return scattering(net, delta * net.kappa_bar), False
    except NearSingular:
        n = net.n_modes
        nan = np.full((n, n), np.nan, dtype=complex)
        return ScatteringMatrix(nan, net.signature, delta * net.kappa_bar), True


def sweep_grid(net: ModeNetwork, grid: Sequence[float], workers: int | None = None) -> SweepResult:
    check_network(net)
    grid = tuple(float(d) for d in grid)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda d: _evaluate(net, d), grid))
    else:
        results = [_evaluate(net, d) for d in grid]
    return SweepResult(grid, tuple(r[0] for r in results), tuple(r[1] for r in results))


def sweep(
    net: ModeNetwork,
    delta_min: float,
    delta_max: float,
    points: int,
    workers: int | None = None,
) -> SweepResult:
    """Evaluate S on an even grid of normalized detunings.

    Points where Sigma + M is near singular are flagged and filled with NaN.
    """
    if points < 2:
        raise DomainError("a sweep needs at least two points")
    if not delta_max > delta_min:
        raise DomainError("delta_max must exceed delta_min")
    return sweep_grid(net, np.linspace(delta_min, delta_max, points), workers)


# Closed-form T-amp and C-amp responses for uniform linewidths and perfect
# conversion; G is the per-coupling gain.


def _den_T(d, g):
    return 1 - 1j * (4 + g) * d - 3 * (2 + g) * d**2 + 4j * (1 + g) * d**3 + 2 * (1 + g) * d**4


def _den_C_reference(d, g):
    return 1 - 4j * d - 2 * (g - 3) * d**2 - 4j * (g - 1) * d**3 - 2 * (g - 1) * d**4


def _den_C(d, g):
    return 1 - 4j * d + 2 * (g - 3) * d**2 - 4j * (g - 1) * d**3 - 2 * (g - 1) * d**4


def _num_C_refl(d, g):
    return d * (1j * (g + 1) + (g + 3) * d + 2j * (g - 1) * d**2 + 2 * (g - 1) * d**3)


def closed_form_T(delta, G):
    """(S11, S12, S21) of the T-amp; S22 equals S11."""
    d = np.asarray(delta, dtype=float)
    g = math.sqrt(G)
    den = _den_T(d, g)
    s11 = (1j * d + 3 * d**2 - 2j * (1 + g) * d**3 - 2 * (1 + g) * d**4) / den
    s12 = d * (1j + d + g * d) / den
    s21 = -(1j + d) * (1j * g + d + g * d) / den
    return s11, s12, s21


def closed_form_C(delta, G):
    """(S11, S12, S21) of the C-amp exactly as the reference expressions read.

    These do not match the C-amp coupling matrix: the denominator has the
    wrong sign on its delta^2 term, S12 and S21 have the wrong overall sign,
    and S21 carries the T-amp denominator.  See
    :func:`closed_form_C_corrected`.
    """
    d = np.asarray(delta, dtype=float)
    g = math.sqrt(G)
    den = _den_C_reference(d, g)
    s11 = _num_C_refl(d, g) / den
    s12 = math.sqrt(G - 1) * d**2 / den
    s21 = math.sqrt(G - 1) * (1j + d) ** 2 / _den_T(d, g)
    return s11, s12, s21


def closed_form_C_corrected(delta, G):
    """(S11, S12, S21) of the C-amp, rederived from its coupling matrix."""
    d = np.asarray(delta, dtype=float)
    g = math.sqrt(G)
    den = _den_C(d, g)
    s11 = _num_C_refl(d, g) / den
    s12 = -math.sqrt(G - 1) * d**2 / den
    s21 = -math.sqrt(G - 1) * (1j + d) ** 2 / den
    return s11, s12, s21


def characteristic_polynomial(net: ModeNetwork, delta) -> np.ndarray:
    """det(Sigma + M(delta)) / det(Sigma) at normalized detunings."""
    sigma = np.diag(damping_matrix(net).diag)
    norm = np.linalg.det(sigma)
    out = [np.linalg.det(sigma + dynamical_matrix(net, d * net.kappa_bar).entries) / norm for d in np.atleast_1d(delta)]
    return np.array(out)


def dynamic_eigenvalues(net: ModeNetwork) -> np.ndarray:
    """Eigenvalues of Sigma + M at zero detuning, in units of kappa_bar.

    Mode amplitudes evolve as exp(-lambda t); any eigenvalue with a negative
    real part means the network self-oscillates even with matched ports.
    """
    A = np.diag(damping_matrix(net).diag) + dynamical_matrix(net, 0.0).entries
    return np.linalg.eigvals(A) / net.kappa_bar


def is_dynamically_stable(net: ModeNetwork) -> bool:
    return bool(np.all(dynamic_eigenvalues(net).real > 0))


def noise_report(net: ModeNetwork, delta: float = 0.0) -> NoiseReport:
    S = scattering(net, delta * net.kappa_bar)
    rep = noise_figures_general(S)
    return NoiseReport(rep.n_ba, rep.n_add, float(delta))


# Bandwidth

CONDITIONS = ("S11", "S22", "S12", "S21")


@dataclass(frozen=True)
class BandwidthCriteria:
    """Thresholds for the usable band.

    ``isolation_max`` and ``gain_floor`` default to 1/G_fwd and G_fwd/2.
    ``conditions`` selects which of S11, S22 (matching), S12 (isolation) and
    S21 (gain) take part; a bare 2-port gain stage uses ``("S21",)``.
    """

    G_fwd: float
    match_max: float = 0.01
    isolation_max: float | None = None
    gain_floor: float | None = None
    conditions: tuple[str, ...] = CONDITIONS

    def __post_init__(self):
        if not self.G_fwd > 0:
            raise DomainError("G_fwd must be positive")
        if self.isolation_max is None:
            object.__setattr__(self, "isolation_max", 1.0 / self.G_fwd)
        if self.gain_floor is None:
            object.__setattr__(self, "gain_floor", self.G_fwd / 2.0)
        if not (self.match_max > 0 and self.isolation_max > 0 and self.gain_floor > 0):
            raise DomainError("bandwidth thresholds must be positive")
        unknown = set(self.conditions) - set(CONDITIONS)
        if unknown or not self.conditions:
            raise DomainError(f"unknown bandwidth conditions {sorted(unknown)}")

    def margin(self, name: str, S: np.ndarray) -> float:
        """Nonnegative when the condition holds."""
        i, j = int(name[1]) - 1, int(name[2]) - 1
        p = abs(S[i, j]) ** 2
        if name in ("S11", "S22"):
            return self.match_max - p
        if name == "S12":
            return self.isolation_max - p
        return p - self.gain_floor


@dataclass(frozen=True)
class BandwidthReport:
    per_condition: dict[str, tuple[float, float]]
    overall: tuple[float, float]
    gbp: float
    G_fwd: float
    other_regions: dict[str, tuple[tuple[float, float], ...]] = field(default_factory=dict)
    truncated: tuple[str, ...] = ()

    @property
    def width(self) -> float:
        return self.overall[1] - self.overall[0]

    def condition_width(self, name: str) -> float:
        lo, hi = self.per_condition[name]
        return hi - lo


def _bisect(f: Callable[[float], float], inside: float, outside: float, tol: float) -> float:
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if f(mid) >= 0:
            inside = mid
        else:
            outside = mid
    return inside


def bandwidth(
    net: ModeNetwork,
    criteria: BandwidthCriteria,
    span: float = 2.0,
    points: int = 801,
    tol: float = 1e-6,
    gain_tolerance: float = 0.01,
) -> BandwidthReport:
    """Band around resonance where every selected condition holds.

    Each condition gets the maximal contiguous interval containing 0, located
    on a dense grid over [-span, span] and refined by bisection to ``tol``.
    An interval that reaches the grid edge is clipped there and listed in
    ``truncated``.
    """
    if points < 3:
        raise DomainError("bandwidth grid needs at least three points")
    if points % 2 == 0:
        points += 1  # keep 0 on the grid
    S0 = scattering(net, 0.0).entries
    g0 = abs(S0[1, 0]) ** 2
    if abs(g0 - criteria.G_fwd) > gain_tolerance * criteria.G_fwd:
        raise DomainError(f"criteria.G_fwd = {criteria.G_fwd:.6g} but |S21(0)|^2 = {g0:.6g}")
    failed = [c for c in criteria.conditions if criteria.margin(c, S0) < 0]
    if failed:
        raise ConditionFailsAtResonance(f"conditions {failed} already fail at resonance")

    grid = np.linspace(-span, span, points)
    kb = net.kappa_bar

    def S_at(d: float) -> np.ndarray:
        try:
            return scattering(net, d * kb).entries
        except NearSingular:
            return None

    mats = [S_at(float(d)) for d in grid]
    center = points // 2
    per, others, truncated = {}, {}, []
    for name in criteria.conditions:

        def f(d: float, name=name) -> float:
            S = S_at(d)
            return -1.0 if S is None else criteria.margin(name, S)

        ok = np.array([m is not None and criteria.margin(name, m) >= 0 for m in mats])
        hi_idx = center
        while hi_idx + 1 < points and ok[hi_idx + 1]:
            hi_idx += 1
        lo_idx = center
        while lo_idx - 1 >= 0 and ok[lo_idx - 1]:
            lo_idx -= 1
        if hi_idx + 1 < points:
            hi = _bisect(f, float(grid[hi_idx]), float(grid[hi_idx + 1]), tol)
        else:
            hi = float(grid[-1])
            truncated.append(name)
        if lo_idx > 0:
            lo = _bisect(f, float(grid[lo_idx]), float(grid[lo_idx - 1]), tol)
        else:
            lo = float(grid[0])
            if name not in truncated:
                truncated.append(name)
        per[name] = (lo, hi)

        regions = []
        k = 0
        while k < points:
            if ok[k] and not (lo_idx <= k <= hi_idx):
                start = k
                while k + 1 < points and ok[k + 1] and not (lo_idx <= k + 1 <= hi_idx):
                    k += 1
                regions.append((float(grid[start]), float(grid[k])))
            k += 1
        others[name] = tuple(regions)

    overall = (max(v[0] for v in per.values()), min(v[1] for v in per.values()))
    gain_iv = per.get("S21", overall)
    gbp = (gain_iv[1] - gain_iv[0]) * math.sqrt(criteria.G_fwd)
    return BandwidthReport(per, overall, gbp, criteria.G_fwd, others, tuple(truncated))


# Gain sweeps at resonance


@dataclass(frozen=True)
class GainRow:
    G: float
    s11: float
    s22: float
    s12: float
    s21: float
    near_singular: bool = False


def amp_powers(net: ModeNetwork) -> tuple[float, float, float, float]:
    S = scattering(net, 0.0)
    return S.power(1, 1), S.power(2, 2), S.power(1, 2), S.power(2, 1)


def gain_sweep(
    family: str,
    G_list: Sequence[float],
    conv_eff: float = 1.0,
    kappas: Sequence[float] = DEFAULT_KAPPAS,
) -> list[GainRow]:
    """Resonant |S11|^2, |S22|^2, |S12|^2, |S21|^2 versus per-coupling gain G."""
    rows = []
    for G in G_list:
        if not 1 <= G <= 1e6:
            raise DomainError(f"per-coupling gain {G} outside [1, 1e6]")
        net = build_amp(family, AmpParams(float(G), conv_eff, tuple(kappas)))
        try:
            rows.append(GainRow(float(G), *amp_powers(net)))
        except NearSingular:
            nan = float("nan")
            rows.append(GainRow(float(G), nan, nan, nan, nan, True))
    return rows


def to_db(p) -> np.ndarray | float:
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(p)
    return float(out) if np.ndim(out) == 0 else out
