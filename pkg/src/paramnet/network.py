"""Parametrically coupled mode networks and their scattering matrices.

A network is a set of port-coupled modes joined by conversion (beam-splitter)
and gain (two-mode squeezing) edges.  In the reduced mode basis each mode
enters either as ``a`` or as ``a^dagger``; that choice is the conjugation
signature, and it fixes which edge kinds are allowed between two modes.

All frequencies are angular (rad/s).  The scattering matrix at signal detuning
``delta`` is ``S = (Sigma + M)^-1 (Sigma - M)`` with ``Sigma = diag(kappa/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InconsistentSymmetry, NearSingular, NetworkValidationError

CONVERSION = "conversion"
GAIN = "gain"
EDGE_KINDS = (CONVERSION, GAIN)

COND_LIMIT = 1e12
STRUCT_TOL = 1e-10
ROUND_TRIP_TOL = 1e-9


@dataclass(frozen=True)
class ModeSpec:
    name: str
    omega: float
    kappa: float
    conjugated: bool = False

    @property
    def sign(self) -> int:
        return -1 if self.conjugated else 1


@dataclass(frozen=True)
class CouplingEdge:
    """Coupling between modes ``m`` and ``n``.

    ``magnitude * exp(1j * phase)`` is the complex strength as seen from
    ``m`` (the coefficient of ``a_m^dagger a_n`` for conversion, of
    ``a_m^dagger a_n^dagger`` for gain).
    """

    m: str
    n: str
    kind: str
    magnitude: float
    phase: float = 0.0

    @property
    def strength(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))

    @property
    def pair(self) -> frozenset:
        return frozenset((self.m, self.n))


@dataclass(frozen=True)
class ModeNetwork:
    modes: tuple[ModeSpec, ...]
    edges: tuple[CouplingEdge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.modes)

    @property
    def signature(self) -> tuple[int, ...]:
        return tuple(m.sign for m in self.modes)

    @property
    def kappas(self) -> np.ndarray:
        return np.array([m.kappa for m in self.modes], dtype=float)

    @property
    def kappa_bar(self) -> float:
        """Geometric mean linewidth; the unit of normalized detuning."""
        if not self.modes:
            return 1.0
        return float(np.exp(np.mean(np.log(self.kappas))))

    def index(self, name: str) -> int:
        for i, mode in enumerate(self.modes):
            if mode.name == name:
                return i
        raise KeyError(name)

    def edge(self, m: str, n: str) -> CouplingEdge | None:
        pair = frozenset((m, n))
        for e in self.edges:
            if e.pair == pair:
                return e
        return None


def validate_network(net: ModeNetwork) -> list[str]:
    """List every invariant violation in ``net``; empty means valid."""
    problems = []
    names = [m.name for m in net.modes]
    if len(set(names)) != len(names):
        problems.append("duplicate mode names")
    for mode in net.modes:
        if not mode.kappa > 0:
            problems.append(f"mode {mode.name}: kappa must be positive (got {mode.kappa})")
        if not mode.omega > 0:
            problems.append(f"mode {mode.name}: omega must be positive (got {mode.omega})")
    if net.modes and net.modes[0].conjugated:
        problems.append("first mode must be unconjugated")

    sign = {m.name: m.sign for m in net.modes}
    seen = set()
    for e in net.edges:
        label = f"edge ({e.m},{e.n})"
        if e.m == e.n:
            problems.append(f"{label}: self-coupling")
            continue
        if e.m not in sign or e.n not in sign:
            problems.append(f"{label}: unknown mode")
            continue
        if e.pair in seen:
            problems.append(f"{label}: duplicate edge")
        seen.add(e.pair)
        if e.kind not in EDGE_KINDS:
            problems.append(f"{label}: unknown kind {e.kind!r}")
            continue
        if e.magnitude < 0:
            problems.append(f"{label}: negative magnitude")
        product = sign[e.m] * sign[e.n]
        if e.kind == GAIN and product != -1:
            problems.append(f"{label}: gain edge requires opposite signatures")
        if e.kind == CONVERSION and product != 1:
            problems.append(f"{label}: conversion edge requires equal signatures")
    return problems


def check_network(net: ModeNetwork) -> None:
    problems = validate_network(net)
    if problems:
        raise NetworkValidationError(problems)


@dataclass(frozen=True, eq=False)
class DampingMatrix:
    diag: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.diag(self.diag).astype(complex)


@dataclass(frozen=True, eq=False)
class DynamicalMatrix:
    entries: np.ndarray
    delta: float = 0.0


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    entries: np.ndarray
    signature: tuple[int, ...]
    delta: float = 0.0

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("scattering matrix must be square")
        if len(self.signature) != entries.shape[0]:
            raise ValueError("signature length does not match matrix size")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "signature", tuple(int(s) for s in self.signature))

    @property
    def n_ports(self) -> int:
        return self.entries.shape[0]

    def element(self, i: int, j: int) -> complex:
        """``S_ij`` with 1-based port numbers, as in S_ij notation."""
        return complex(self.entries[i - 1, j - 1])

    def power(self, i: int, j: int) -> float:
        return abs(self.element(i, j)) ** 2


@dataclass(frozen=True, eq=False)
class GeneralizedScattering:
    """``diag(S, S*)`` on the proper basis ``(A, A^dagger)``.

    ``order[k]`` gives the position of proper-basis operator ``k`` in the
    interleaved basis ``(a_1, a_1^dagger, ..., a_N, a_N^dagger)``.
    """

    entries: np.ndarray
    order: tuple[int, ...]
    J: np.ndarray = field(repr=False)

    def interleaved(self) -> np.ndarray:
        n2 = self.entries.shape[0]
        out = np.zeros((n2, n2), dtype=complex)
        idx = np.array(self.order)
        out[np.ix_(idx, idx)] = self.entries
        return out


def damping_matrix(net: ModeNetwork) -> DampingMatrix:
    return DampingMatrix(net.kappas / 2.0)


def _coupling_block(net: ModeNetwork) -> np.ndarray:
    """Off-diagonal part of M (no detuning)."""
    n = net.n_modes
    kap = net.kappas
    sign = net.signature
    M = np.zeros((n, n), dtype=complex)
    for e in net.edges:
        i, j = net.index(e.m), net.index(e.n)
        M[i, j] = -1j * math.sqrt(kap[i] / kap[j]) * e.strength
        if sign[i] * sign[j] > 0:
            M[j, i] = -(kap[j] / kap[i]) * np.conj(M[i, j])
        else:
            M[j, i] = (kap[j] / kap[i]) * np.conj(M[i, j])
    return M


def dynamical_matrix(net: ModeNetwork, delta: float = 0.0) -> DynamicalMatrix:
    """Coupling matrix M at signal detuning ``delta`` (rad/s).

    Every diagonal entry is ``-1j * delta``: a conjugated mode sees the mirrored
    detuning, and conjugation flips it back, so all modes share one sign.
    """
    check_network(net)
    M = _coupling_block(net)
    M[np.diag_indices(net.n_modes)] = -1j * delta
    return DynamicalMatrix(M, float(delta))


def _solve(sigma: np.ndarray, M: np.ndarray, cond_limit: float) -> np.ndarray:
    A = np.diag(sigma) + M
    cond = np.linalg.cond(A)
    if not cond < cond_limit:
        raise NearSingular(
            f"Sigma + M is near singular (condition {cond:.3g}); "
            "the network is at or beyond its oscillation threshold",
            condition=cond,
        )
    return np.linalg.solve(A, np.diag(sigma) - M)


def scattering_from_matrices(
    sigma: DampingMatrix,
    M: DynamicalMatrix,
    signature: Sequence[int],
    cond_limit: float = COND_LIMIT,
) -> ScatteringMatrix:
    S = _solve(np.asarray(sigma.diag, dtype=float), M.entries, cond_limit)
    return ScatteringMatrix(S, tuple(signature), M.delta)


def scattering(net: ModeNetwork, delta: float = 0.0, cond_limit: float = COND_LIMIT) -> ScatteringMatrix:
    """Scattering matrix of ``net`` at detuning ``delta`` (rad/s)."""
    M = dynamical_matrix(net, delta)
    if net.n_modes == 0:
        return ScatteringMatrix(np.zeros((0, 0)), (), float(delta))
    return scattering_from_matrices(damping_matrix(net), M, net.signature, cond_limit)


def synthesize_couplings(
    S: ScatteringMatrix, sigma: DampingMatrix, cond_limit: float = COND_LIMIT
) -> DynamicalMatrix:
    """Invert the scattering map: ``M = Sigma (I - S)(I + S)^-1``."""
    n = S.n_ports
    eye = np.eye(n)
    A = eye + S.entries
    cond = np.linalg.cond(A)
    if not cond < cond_limit:
        raise NearSingular(
            f"I + S is near singular (condition {cond:.3g}); "
            "S has an eigenvalue at -1 and needs infinite coupling",
            condition=cond,
        )
    # (I - S)(I + S)^-1 == ((I + S)^-T (I - S)^T)^T
    X = np.linalg.solve(A.T, (eye - S.entries).T).T
    M = np.diag(sigma.diag) @ X
    return DynamicalMatrix(M, S.delta)


def network_from_coupling_matrix(
    M: DynamicalMatrix,
    sigma: DampingMatrix,
    signature: Sequence[int],
    names: Sequence[str] | None = None,
    omegas: Sequence[float] | None = None,
    tol: float = ROUND_TRIP_TOL,
) -> ModeNetwork:
    """Recover modes and edges from a coupling matrix.

    Edge kinds follow from the signature.  Raises InconsistentSymmetry when a
    pair's entries do not obey the conjugate-partner relation for that kind,
    or when the diagonal is not the uniform detuning term.
    """
    entries = np.asarray(M.entries, dtype=complex)
    n = entries.shape[0]
    signature = tuple(int(s) for s in signature)
    kap = 2.0 * np.asarray(sigma.diag, dtype=float)
    if len(signature) != n or len(kap) != n:
        raise ValueError("matrix, damping and signature sizes disagree")
    names = list(names) if names is not None else [f"a{k + 1}" for k in range(n)]
    omegas = list(omegas) if omegas is not None else [1.0] * n
    scale = max(float(np.max(np.abs(entries))) if n else 0.0, float(np.max(kap)) if n else 0.0, 1e-300)
    atol = tol * scale

    diag = np.diag(entries)
    if n and np.max(np.abs(diag + 1j * M.delta)) > atol:
        raise InconsistentSymmetry("diagonal is not the uniform detuning term -1j*delta")

    modes = [ModeSpec(names[k], omegas[k], float(kap[k]), signature[k] < 0) for k in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            mij, mji = entries[i, j], entries[j, i]
            if abs(mij) <= atol and abs(mji) <= atol:
                continue
            same = signature[i] * signature[j] > 0
            expected = (-1.0 if same else 1.0) * (kap[j] / kap[i]) * np.conj(mij)
            if abs(mji - expected) > atol:
                kind = "conversion" if same else "gain"
                raise InconsistentSymmetry(
                    f"pair ({names[i]},{names[j]}) violates the {kind} symmetry relation"
                )
            g = 1j * math.sqrt(kap[j] / kap[i]) * mij
            edges.append(
                CouplingEdge(
                    names[i],
                    names[j],
                    CONVERSION if same else GAIN,
                    float(abs(g)),
                    float(np.angle(g)),
                )
            )
    return ModeNetwork(tuple(modes), tuple(edges))


def symplectic_form(n_modes: int) -> np.ndarray:
    """J for the interleaved basis (a_1, a_1^dagger, ..., a_N, a_N^dagger)."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def generalized_scattering(S: ScatteringMatrix) -> GeneralizedScattering:
    n = S.n_ports
    block = np.zeros((2 * n, 2 * n), dtype=complex)
    block[:n, :n] = S.entries
    block[n:, n:] = np.conj(S.entries)
    # proper basis: A_k = a_k (s=+1) or a_k^dagger (s=-1), then A^dagger
    order = [2 * k + (0 if s > 0 else 1) for k, s in enumerate(S.signature)]
    order += [2 * k + (1 if s > 0 else 0) for k, s in enumerate(S.signature)]
    return GeneralizedScattering(block, tuple(order), symplectic_form(n))


def check_symplectic(gs: GeneralizedScattering) -> float:
    St = gs.interleaved()
    if St.size == 0:
        return 0.0
    return float(np.max(np.abs(St.T @ gs.J @ St - gs.J)))


def check_paraunitary(S: ScatteringMatrix) -> float:
    if S.n_ports == 0:
        return 0.0
    K = np.diag(np.array(S.signature, dtype=float))
    E = S.entries
    return float(np.max(np.abs(E @ K @ E.conj().T - K)))


def random_network(
    rng: np.random.Generator,
    n_modes: int,
    max_beta: float = 0.45,
    edge_probability: float = 0.7,
) -> ModeNetwork:
    """A random valid network with mode 1 unconjugated.

    Edge strengths are drawn as ``beta * sqrt(kappa_m kappa_n) / 2`` with
    ``beta <= max_beta`` so the result stays comfortably below threshold.
    """
    signs = [1] + [int(s) for s in rng.choice([1, -1], size=n_modes - 1)]
    kappas = rng.uniform(0.5, 2.0, size=n_modes)
    modes = tuple(
        ModeSpec(f"a{k + 1}", float(1.0 + k), float(kappas[k]), signs[k] < 0) for k in range(n_modes)
    )
    edges = []
    for i in range(n_modes):
        for j in range(i + 1, n_modes):
            if rng.random() >= edge_probability:
                continue
            beta = rng.uniform(0.0, max_beta)
            edges.append(
                CouplingEdge(
                    modes[i].name,
                    modes[j].name,
                    CONVERSION if signs[i] == signs[j] else GAIN,
                    float(beta * math.sqrt(kappas[i] * kappas[j]) / 2.0),
                    float(rng.uniform(-math.pi, math.pi)),
                )
            )
    return ModeNetwork(modes, tuple(edges))
