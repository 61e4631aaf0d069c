"""Solution families for 4-port fully directional amplifiers.

Two conjugation signatures admit a directional, para-unitary 4x4 scattering
matrix with gain from port 1 to port 2:

* T family, basis (a1, a2, a3, a4^dagger)
* C family, basis (a1, a2^dagger, a3, a4^dagger)

Each family is parameterized by (G1, G2, alpha1) plus phases; alpha2 follows
from the remaining bilinear constraint.  The minimal-noise members sit at
alpha1 = 0, G2 = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DegenerateGain, DomainError, UnsolvableLimit
from .network import STRUCT_TOL, ScatteringMatrix, check_paraunitary

T_SIGNATURE = (1, 1, 1, -1)
C_SIGNATURE = (1, -1, 1, -1)

# the six candidate bases for ports (in, out, aux, aux), mode 1 unconjugated
CANDIDATE_BASES = (
    (1, 1, 1, 1),
    (1, 1, 1, -1),
    (1, -1, 1, 1),
    (1, 1, -1, -1),
    (1, -1, 1, -1),
    (1, -1, -1, -1),
)

_RADICAND_TOL = 1e-12


def family_signature(family: str) -> tuple[int, ...]:
    family = family.upper()
    if family == "T":
        return T_SIGNATURE
    if family == "C":
        return C_SIGNATURE
    raise DomainError(f"unknown family {family!r}; expected 'T' or 'C'")


@dataclass(frozen=True)
class GeneralFamilyParams:
    family: str
    G1: float
    G2: float = 0.0
    alpha1: float = 0.0
    thetas: tuple[float, ...] = (0.0,) * 6
    phis: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "family", self.family.upper())
        family_signature(self.family)
        if not self.G1 >= 1:
            raise DomainError(f"G1 must be >= 1 (got {self.G1})")
        if not self.G2 >= 0:
            raise DomainError(f"G2 must be >= 0 (got {self.G2})")
        if not self.alpha1 >= 0:
            raise DomainError(f"alpha1 must be >= 0 (got {self.alpha1})")
        if len(self.thetas) != 6 or len(self.phis) != 2:
            raise DomainError("need six thetas and two phis")
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "phis", tuple(float(p) for p in self.phis))


def constrained_theta6(thetas: Sequence[float], phis: Sequence[float]) -> float:
    """The theta6 that satisfies the phase half of the alpha2 constraint."""
    t = thetas
    return t[4] - (t[1] - t[2] + phis[0] - phis[1])


def _aux_ratio(p: GeneralFamilyParams) -> float:
    """alpha1 / (G1 G2) for T, alpha1 / (G1 (G2 + 1)) for C; 0 when alpha1 = 0."""
    if p.alpha1 == 0:
        return 0.0
    if p.family == "T":
        if p.G2 == 0:
            raise UnsolvableLimit("T family with G2 = 0 requires alpha1 = 0")
        return p.alpha1 / (p.G1 * p.G2)
    return p.alpha1 / (p.G1 * (p.G2 + 1))


def derive_alpha2(p: GeneralFamilyParams) -> float:
    """Solve the family constraint for alpha2.

    T: (alpha1 + G1 G2)(alpha2 - G1 (G2 + 1)) = alpha1 alpha2
    C: (alpha1 + G1 (G2 + 1))(alpha2 - G1 G2) = alpha1 alpha2
    """
    G1, G2, a1 = p.G1, p.G2, p.alpha1
    if p.family == "T":
        if G2 == 0:
            if a1 > 0:
                raise UnsolvableLimit("T family with G2 = 0 requires alpha1 = 0")
            return G1
        return (a1 + G1 * G2) * G1 * (G2 + 1) / (G1 * G2)
    return a1 * G2 / (G2 + 1) + G1 * G2


def constraint_residual(p: GeneralFamilyParams, alpha2: float) -> float:
    """Relative residual of the squared constraint."""
    G1, G2, a1 = p.G1, p.G2, p.alpha1
    if p.family == "T":
        lhs = (a1 + G1 * G2) * (alpha2 - G1 * (G2 + 1))
    else:
        lhs = (a1 + G1 * (G2 + 1)) * (alpha2 - G1 * G2)
    rhs = a1 * alpha2
    scale = max(abs(lhs), abs(rhs), 1.0)
    return abs(lhs - rhs) / scale


def _root(x: float, what: str) -> float:
    if x < -_RADICAND_TOL:
        raise DomainError(f"negative radicand for {what}: {x}")
    return math.sqrt(max(x, 0.0))


def general_family_S(p: GeneralFamilyParams) -> ScatteringMatrix:
    G1, G2, a1 = p.G1, p.G2, p.alpha1
    a2 = derive_alpha2(p)
    r = _aux_ratio(p)
    t1, t2, t3, t4, t5, t6 = p.thetas
    p1, p2 = p.phis
    if a1 > 0:
        mismatch = (t6 - constrained_theta6(p.thetas, p.phis) + math.pi) % (2 * math.pi) - math.pi
        if abs(mismatch) > 1e-12:
            raise DomainError("theta6 violates the phase constraint; see constrained_theta6")

    # ratios written so the G2 -> 0 limits stay finite
    if p.family == "T":
        mags = {
            (0, 2): _root(r + 1, "S13"),
            (0, 3): _root(r, "S14"),
            (1, 0): _root(G1, "S21"),
            (1, 2): _root(r * (G1 - 1), "S23"),
            (1, 3): _root((G1 - 1) * (1 + r), "S24"),
            (2, 0): _root(G2 * (G1 - 1), "S31"),
            (2, 1): _root(G2 + 1, "S32"),
            (2, 2): _root(a1, "S33"),
            (2, 3): _root(a1 + G1 * G2, "S34"),
            (3, 0): _root((G1 - 1) * (G2 + 1), "S41"),
            (3, 1): _root(G2, "S42"),
            (3, 2): _root(r * G1 * (G2 + 1), "S43"),
            (3, 3): _root(a2, "S44"),
        }
    else:
        mags = {
            (0, 2): _root(r + 1, "S13"),
            (0, 3): _root(r, "S14"),
            (1, 0): _root(G1, "S21"),
            (1, 2): _root(r * (G1 + 1), "S23"),
            (1, 3): _root((G1 + 1) * (1 + r), "S24"),
            (2, 0): _root((G1 + 1) * (G2 + 1), "S31"),
            (2, 1): _root(G2, "S32"),
            (2, 2): _root(a1, "S33"),
            (2, 3): _root(a1 + G1 * (G2 + 1), "S34"),
            (3, 0): _root(G2 * (G1 + 1), "S41"),
            (3, 1): _root(G2 + 1, "S42"),
            (3, 2): _root(r * G1 * G2, "S43"),
            (3, 3): _root(a2, "S44"),
        }
    phases = {
        (0, 2): t5,
        (0, 3): t6,
        (1, 0): t1,
        (1, 2): t1 + t2 - t3 - t4 + p1,
        (1, 3): t1 - t4 + p2,
        (2, 0): t3 - t2 + t4,
        (2, 1): t3,
        (2, 2): p1,
        (2, 3): t3 - t2 + p2,
        (3, 0): t4,
        (3, 1): t2,
        (3, 2): t2 - t3 + p1,
        (3, 3): p2,
    }
    S = np.zeros((4, 4), dtype=complex)
    for ij, mag in mags.items():
        S[ij] = mag * np.exp(1j * phases[ij])
    return ScatteringMatrix(S, family_signature(p.family), 0.0)


def minimal_S(family: str, G: float) -> ScatteringMatrix:
    """The minimal-noise matrices with real, nonnegative entries.

    ``G`` is the bookkeeping parameter of the reference matrices (G >= 0); the
    forward photon gain |S21|^2 is G for the C family and G + 1 for T.
    """
    sig = family_signature(family)
    if not G >= 0:
        raise DomainError(f"G must be >= 0 (got {G})")
    a, b = math.sqrt(G), math.sqrt(G + 1)
    if sig == C_SIGNATURE:
        rows = [[0, 0, 1, 0], [a, 0, 0, b], [b, 0, 0, a], [0, 1, 0, 0]]
    else:
        rows = [[0, 0, 1, 0], [b, 0, 0, a], [0, 1, 0, 0], [a, 0, 0, b]]
    return ScatteringMatrix(np.array(rows, dtype=complex), sig, 0.0)


class Feasibility(str, Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    CIRCULATOR_ONLY = "CIRCULATOR_ONLY"


@dataclass(frozen=True)
class FeasibilityVerdict:
    basis: tuple[int, ...]
    status: Feasibility
    witness: str
    residual: float | None = field(default=None, compare=False)


def _relation(col: int, rows: Sequence[int], sig: Sequence[int]) -> str | None:
    """Witness string if sum_i s_i |S_i,col|^2 = s_col has no solution."""
    coeffs = [sig[i - 1] for i in rows]
    rhs = sig[col - 1]
    if all(c == coeffs[0] for c in coeffs) and coeffs[0] * rhs < 0:
        terms = " + ".join(f"|S{i}{col}|^2" for i in rows)
        return f"{terms} = {coeffs[0] * rhs}"
    return None


def basis_feasibility(sig: Sequence[int]) -> FeasibilityVerdict:
    """Decide whether a 4-port basis supports fully directional gain 1 -> 2.

    Uses the diagonal para-unitarity relations of columns 1 and 2 with
    S11 = S12 = S22 = 0.  Feasible bases are certified by constructing a
    member of the matching solution family (with ports 3, 4 swapped if needed).
    """
    sig = tuple(int(s) for s in sig)
    if len(sig) != 4 or sig[0] != 1 or any(s not in (1, -1) for s in sig):
        raise DomainError(f"expected a 4-port signature starting with +1, got {sig}")
    if all(s == 1 for s in sig):
        return FeasibilityVerdict(sig, Feasibility.CIRCULATOR_ONLY, "S unitary forces |S21|^2 <= 1")

    for witness in (_relation(2, (3, 4), sig), _relation(1, (2, 3, 4), sig)):
        if witness is not None:
            return FeasibilityVerdict(sig, Feasibility.INFEASIBLE, witness)

    swap = (0, 1, 3, 2)
    for family in ("T", "C"):
        fsig = family_signature(family)
        for perm in ((0, 1, 2, 3), swap):
            if tuple(fsig[k] for k in perm) != sig:
                continue
            S = general_family_S(GeneralFamilyParams(family, G1=4.0, G2=1.0, alpha1=0.5)).entries
            S = S[np.ix_(perm, perm)]
            cert = ScatteringMatrix(S, sig)
            res = check_paraunitary(cert)
            if res < STRUCT_TOL:
                return FeasibilityVerdict(
                    sig, Feasibility.FEASIBLE, f"{family} family, para-unitarity residual {res:.2e}", res
                )
    # not reached for 4-port signatures; kept so an unexpected case is loud
    raise DomainError(f"no verdict for basis {sig}")


@dataclass(frozen=True)
class NoiseReport:
    n_ba: float
    n_add: float
    delta: float = 0.0


def noise_figures_general(S: ScatteringMatrix, tol: float = 1e-9) -> NoiseReport:
    """Back-action and input-referred added noise, with vacuum on ports 2-4."""
    if S.n_ports != 4:
        raise DomainError("noise figures are defined for 4-port amplifiers")
    E = S.entries
    s21 = abs(E[1, 0])
    if s21 < tol:
        raise DegenerateGain(f"|S21| = {s21:.3g} is too small to refer noise to the input")
    n_ba = 0.5 * float(np.sum(np.abs(E[0, 2:]) ** 2))
    n_add = 0.5 * float(np.sum(np.abs(E[1, 2:]) ** 2)) / float(s21) ** 2
    return NoiseReport(n_ba, n_add, S.delta)


def closed_form_noise(p: GeneralFamilyParams) -> NoiseReport:
    """Noise figures of a family member from its parameters alone."""
    r = _aux_ratio(p)
    n_ba = 0.5 * (1 + 2 * r)
    if p.family == "T":
        n_add = 0.5 * (p.G1 - 1) / p.G1 * (1 + 2 * r)
    else:
        n_add = 0.5 * (p.G1 + 1) / p.G1 * (1 + 2 * r)
    return NoiseReport(n_ba, n_add, 0.0)
