"""Reading and writing sweeps (CSV, JSON, Touchstone) and network spec files."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from typing import Literal, Sequence, TextIO

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .analysis import SweepResult
from .errors import DomainError
from .network import (
    CONVERSION,
    GAIN,
    CouplingEdge,
    ModeNetwork,
    ModeSpec,
    ScatteringMatrix,
    check_network,
)

TWO_PI = 2.0 * math.pi


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _power_db(z: complex) -> float:
    p = abs(z) ** 2
    return -math.inf if p == 0 else 10.0 * math.log10(p)


def _label(i: int, j: int, n: int) -> str:
    return f"S{i}{j}" if n < 10 else f"S{i}_{j}"


def csv_header(n: int) -> list[str]:
    cols = ["delta"]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            lab = _label(i, j, n)
            cols += [f"{lab}_re", f"{lab}_im", f"{lab}_db"]
    return cols


def write_csv(grid: Sequence[float], matrices: Sequence[np.ndarray], out: TextIO) -> None:
    """One row per detuning: delta, then re, im, dB of every S_ij in row-major order."""
    n = np.asarray(matrices[0]).shape[0] if len(matrices) else 0
    w = csv.writer(out, lineterminator="\n")
    w.writerow(csv_header(n))
    for d, S in zip(grid, matrices):
        row = [fmt(d)]
        for z in np.asarray(S, dtype=complex).ravel():
            row += [fmt(z.real), fmt(z.imag), fmt(_power_db(z))]
        w.writerow(row)


def read_csv(src: TextIO) -> tuple[list[float], list[np.ndarray]]:
    rows = list(csv.reader(src))
    if not rows or rows[0][0] != "delta":
        raise DomainError("not a sweep CSV: first column must be 'delta'")
    n2 = (len(rows[0]) - 1) // 3
    n = int(round(math.sqrt(n2)))
    if n * n != n2 or rows[0] != csv_header(n):
        raise DomainError("sweep CSV header does not describe a square S matrix")
    grid, mats = [], []
    for row in rows[1:]:
        vals = [float(v) for v in row]
        grid.append(vals[0])
        re_ = np.array(vals[1::3])
        im_ = np.array(vals[2::3])
        mats.append((re_ + 1j * im_).reshape(n, n))
    return grid, mats


def sweep_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    write_csv(result.grid, [m.entries for m in result.matrices], buf)
    return buf.getvalue()


def sweep_to_json(result: SweepResult) -> str:
    sig = result.matrices[0].signature if result.matrices else ()
    doc = {
        "signature": list(sig),
        "points": [
            {
                "delta": d,
                "near_singular": flag,
                "re": m.entries.real.tolist(),
                "im": m.entries.imag.tolist(),
            }
            for d, m, flag in zip(result.grid, result.matrices, result.near_singular)
        ],
    }
    return json.dumps(doc, indent=1)


def sweep_from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    sig = tuple(doc["signature"])
    grid, mats, flags = [], [], []
    for p in doc["points"]:
        grid.append(float(p["delta"]))
        mats.append(ScatteringMatrix(np.array(p["re"]) + 1j * np.array(p["im"]), sig))
        flags.append(bool(p.get("near_singular", False)))
    return SweepResult(tuple(grid), tuple(mats), tuple(flags))


# Touchstone

TOUCHSTONE_OPTIONS = "# GHz S RI R 50"


def write_touchstone(
    freqs_ghz: Sequence[float],
    matrices: Sequence[np.ndarray],
    out: TextIO,
    comments: Sequence[str] = (),
) -> None:
    """Touchstone 1.x with real/imaginary pairs.

    2-port data use the 11 21 12 22 order on one line; larger networks are
    written row by row with at most four pairs per line.
    """
    for c in comments:
        out.write(f"! {c}\n")
    out.write(TOUCHSTONE_OPTIONS + "\n")
    for f, S in zip(freqs_ghz, matrices):
        S = np.asarray(S, dtype=complex)
        n = S.shape[0]
        pair = lambda z: f"{fmt(z.real)} {fmt(z.imag)}"
        if n <= 2:
            vals = S.T.ravel() if n == 2 else S.ravel()
            out.write(" ".join([fmt(f)] + [pair(z) for z in vals]) + "\n")
            continue
        for i in range(n):
            row = [pair(z) for z in S[i]]
            for k in range(0, n, 4):
                lead = fmt(f) if (i == 0 and k == 0) else " "
                out.write(" ".join([lead] + row[k : k + 4]) + "\n")


def read_touchstone(src: TextIO, n_ports: int) -> tuple[list[float], list[np.ndarray]]:
    tokens = []
    for line in src:
        line = line.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            opts = line[1:].upper().split()
            if not {"GHZ", "S", "RI"} <= set(opts):
                raise DomainError(f"unsupported Touchstone options line: {line!r}")
            continue
        tokens += [float(t) for t in line.split()]
    per_point = 1 + 2 * n_ports * n_ports
    if len(tokens) % per_point:
        raise DomainError(f"Touchstone data length does not fit {n_ports} ports")
    freqs, mats = [], []
    for k in range(0, len(tokens), per_point):
        chunk = tokens[k : k + per_point]
        freqs.append(chunk[0])
        z = np.array(chunk[1::2]) + 1j * np.array(chunk[2::2])
        S = z.reshape(n_ports, n_ports)
        mats.append(S.T if n_ports == 2 else S)
    return freqs, mats


def touchstone_ports(path: str) -> int:
    m = re.search(r"\.s(\d+)p$", path, re.IGNORECASE)
    if not m:
        raise DomainError(f"cannot infer port count from {path!r}; expected .sNp")
    return int(m.group(1))


# Network spec files


class ModeEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str
    omega_ghz: float = Field(gt=0)
    kappa_mhz: float = Field(gt=0)
    conjugated: bool = False


class CouplingEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")
    a: str
    b: str
    kind: Literal["gain", "conversion"]
    magnitude_mhz: float = Field(ge=0)
    phase_rad: float = 0.0


class NetworkSpecFile(BaseModel):
    model_config = ConfigDict(extra="forbid")
    modes: list[ModeEntry]
    couplings: list[CouplingEntry] = []

    def to_network(self) -> ModeNetwork:
        modes = tuple(
            ModeSpec(m.name, TWO_PI * m.omega_ghz * 1e9, TWO_PI * m.kappa_mhz * 1e6, m.conjugated)
            for m in self.modes
        )
        edges = tuple(
            CouplingEdge(c.a, c.b, GAIN if c.kind == "gain" else CONVERSION, TWO_PI * c.magnitude_mhz * 1e6, c.phase_rad)
            for c in self.couplings
        )
        net = ModeNetwork(modes, edges)
        check_network(net)
        return net

    @classmethod
    def from_network(cls, net: ModeNetwork) -> "NetworkSpecFile":
        return cls(
            modes=[
                ModeEntry(name=m.name, omega_ghz=m.omega / TWO_PI / 1e9, kappa_mhz=m.kappa / TWO_PI / 1e6, conjugated=m.conjugated)
                for m in net.modes
            ],
            couplings=[
                CouplingEntry(a=e.m, b=e.n, kind=e.kind, magnitude_mhz=e.magnitude / TWO_PI / 1e6, phase_rad=e.phase)
                for e in net.edges
            ],
        )


def load_network(text: str) -> ModeNetwork:
    return NetworkSpecFile.model_validate_json(text).to_network()


def dump_network(net: ModeNetwork) -> str:
    return NetworkSpecFile.from_network(net).model_dump_json(indent=1)


class SMatrixFile(BaseModel):
    """Target scattering matrix for synthesis; linewidths default to 100 MHz."""

    model_config = ConfigDict(extra="forbid")
    re: list[list[float]]
    im: list[list[float]] | None = None
    signature: list[int]
    kappa_mhz: list[float] | None = None

    def matrix(self) -> ScatteringMatrix:
        re_ = np.array(self.re, dtype=float)
        im_ = np.zeros_like(re_) if self.im is None else np.array(self.im, dtype=float)
        if re_.shape != im_.shape or re_.ndim != 2 or re_.shape[0] != re_.shape[1]:
            raise DomainError("re and im must be equal square matrices")
        if len(self.signature) != re_.shape[0] or any(s not in (1, -1) for s in self.signature):
            raise DomainError("signature must list +1/-1 per port")
        return ScatteringMatrix(re_ + 1j * im_, tuple(self.signature))

    def kappas(self) -> np.ndarray:
        n = len(self.signature)
        vals = [100.0] * n if self.kappa_mhz is None else self.kappa_mhz
        if len(vals) != n or any(v <= 0 for v in vals):
            raise DomainError("kappa_mhz needs one positive value per port")
        return TWO_PI * np.array(vals, dtype=float) * 1e6
