"""Network reduction: port terminations, interconnection, loop stability.

Port numbers in this module are 1-based, as in S_ij notation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, SignatureMismatch, UnstableLoop
from .network import COND_LIMIT, ModeNetwork, ScatteringMatrix, scattering


@dataclass(frozen=True)
class PortTermination:
    port: int
    r: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r", complex(self.r))
        if self.port < 1:
            raise DomainError(f"ports are numbered from 1 (got {self.port})")
        if abs(self.r) > 1 + 1e-12:
            raise DomainError(f"passive load needs |r| <= 1 (got {abs(self.r):.6g})")


@dataclass(frozen=True, eq=False)
class PartitionedScattering:
    """S split into kept ports A and reduced ports B (0-based index lists)."""

    S_AA: np.ndarray
    S_AB: np.ndarray
    S_BA: np.ndarray
    S_BB: np.ndarray
    kept: tuple[int, ...]
    reduced: tuple[int, ...]

    @classmethod
    def split(cls, S: np.ndarray, reduced: Sequence[int]) -> "PartitionedScattering":
        n = S.shape[0]
        reduced = tuple(reduced)
        if len(set(reduced)) != len(reduced) or any(not 0 <= p < n for p in reduced):
            raise DomainError(f"invalid port selection {[p + 1 for p in reduced]} for {n} ports")
        kept = tuple(p for p in range(n) if p not in reduced)
        A, B = list(kept), list(reduced)
        return cls(S[np.ix_(A, A)], S[np.ix_(A, B)], S[np.ix_(B, A)], S[np.ix_(B, B)], kept, reduced)


def _reduce(part: PartitionedScattering, G: np.ndarray, cond_limit: float) -> np.ndarray:
    """S_AA + S_AB (I - G S_BB)^-1 G S_BA for a load or wiring matrix G."""
    nb = len(part.reduced)
    if nb == 0:
        return part.S_AA.copy()
    loop = np.eye(nb) - G @ part.S_BB
    cond = np.linalg.cond(loop)
    if not cond < cond_limit:
        raise UnstableLoop(
            f"I - Gamma S_BB is near singular (condition {cond:.3g}); the loaded loop oscillates",
            condition=cond,
        )
    return part.S_AA + part.S_AB @ np.linalg.solve(loop, G @ part.S_BA)


def terminate(
    S: ScatteringMatrix,
    terms: Sequence[PortTermination],
    cond_limit: float = COND_LIMIT,
) -> ScatteringMatrix:
    """Load the given ports with reflection coefficients and drop them.

    With every r = 0 this is exactly the kept-port block of S.
    """
    ports = [t.port - 1 for t in terms]
    part = PartitionedScattering.split(S.entries, ports)
    R = np.diag([t.r for t in terms]).astype(complex)
    if np.all(R == 0):
        reduced = part.S_AA.copy()
    else:
        reduced = _reduce(part, R, cond_limit)
    sig = tuple(S.signature[p] for p in part.kept)
    return ScatteringMatrix(reduced, sig, S.delta)


def connect(
    S: ScatteringMatrix,
    pairs: Sequence[tuple[int, int]],
    cond_limit: float = COND_LIMIT,
) -> ScatteringMatrix:
    """Wire pairs of ports of one network to each other.

    Each pair (p, q) sends the wave leaving p into q and vice versa.  The
    remaining ports keep their relative order.
    """
    n = S.n_ports
    flat = [p - 1 for pq in pairs for p in pq]
    if len(set(flat)) != len(flat) or any(not 0 <= p < n for p in flat):
        raise DomainError("each port may be connected at most once")
    for p, q in pairs:
        if S.signature[p - 1] != S.signature[q - 1]:
            raise SignatureMismatch(
                f"ports {p} and {q} carry opposite conjugation; a and a^dagger lines cannot be joined"
            )
    part = PartitionedScattering.split(S.entries, flat)
    nb = len(flat)
    Gamma = np.zeros((nb, nb))
    for k in range(0, nb, 2):
        Gamma[k, k + 1] = Gamma[k + 1, k] = 1.0
    reduced = _reduce(part, Gamma, cond_limit)
    return ScatteringMatrix(reduced, tuple(S.signature[p] for p in part.kept), S.delta)


def juxtapose(S1: ScatteringMatrix, S2: ScatteringMatrix) -> ScatteringMatrix:
    """Block-diagonal union; S2's ports are numbered after S1's."""
    n1, n2 = S1.n_ports, S2.n_ports
    E = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    E[:n1, :n1] = S1.entries
    E[n1:, n1:] = S2.entries
    return ScatteringMatrix(E, S1.signature + S2.signature, S1.delta)


def cascade(
    S1: ScatteringMatrix,
    ports1: Sequence[int],
    S2: ScatteringMatrix,
    ports2: Sequence[int],
    cond_limit: float = COND_LIMIT,
) -> ScatteringMatrix:
    """Join port ``ports1[k]`` of S1 to port ``ports2[k]`` of S2.

    The result lists S1's unconnected ports first, then S2's, each in their
    original order.
    """
    if len(ports1) != len(ports2):
        raise DomainError("connection lists must have equal length")
    n1 = S1.n_ports
    pairs = [(p, n1 + q) for p, q in zip(ports1, ports2)]
    return connect(juxtapose(S1, S2), pairs, cond_limit)


def stability_margin(
    net: ModeNetwork,
    terms: Sequence[PortTermination],
    delta_grid: Sequence[float] | None = None,
) -> float:
    """Largest spectral radius of S_BB(delta) R over the grid.

    The loaded loop is stable when this stays below 1.  Detunings are
    normalized by the network's geometric-mean linewidth; the default grid is
    4001 points over [-10, 10].
    """
    if delta_grid is None:
        delta_grid = np.linspace(-10.0, 10.0, 4001)
    ports = [t.port - 1 for t in terms]
    R = np.diag([t.r for t in terms]).astype(complex)
    if not ports or np.all(R == 0):
        return 0.0
    worst = 0.0
    for d in delta_grid:
        S = scattering(net, float(d) * net.kappa_bar)
        S_BB = S.entries[np.ix_(ports, ports)]
        worst = max(worst, float(np.max(np.abs(np.linalg.eigvals(S_BB @ R)))))
    return worst


def circulator_amp_equivalent(G: float, delta: float = 0.0) -> ScatteringMatrix:
    """Two circulators around a 2-port amplifier, reduced to its external ports.

    Circulator A routes port 1 -> amplifier -> circulator B; circulator B
    delivers the amplified wave to port 2.  External ports come out ordered
    (input, output, B's spare port, amplifier idler).
    """
    from .catalog import build_2pa, build_circulator3

    circ = scattering(build_circulator3(kappas=(1.0, 1.0, 1.0)), delta)
    amp = scattering(build_2pa(G, kappas=(1.0, 1.0)), delta)
    # circulator A ports 1..3, amplifier 4..5, circulator B 6..8
    S = juxtapose(juxtapose(circ, amp), circ)
    wired = connect(S, [(2, 4), (3, 6)])
    # remaining order: A1, amp2, B2, B3 -> input, idler, output, spare
    order = [0, 2, 3, 1]
    E = wired.entries[np.ix_(order, order)]
    return ScatteringMatrix(E, tuple(wired.signature[k] for k in order), wired.delta)
