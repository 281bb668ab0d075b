"""Binary and text serialization: frames, coefficient files, vectors,
experiment CSV.

Everything binary is little-endian with float64 payloads.  Frame files
(magic ``KFRM``) store either the dense matrix row-major or the sorted
row-index set of a Fourier row selection; coefficient files (magic
``KCOF``) store the certified level, input norm and residual bound next
to the coefficients, and readers re-check the level bound so a corrupt
file cannot smuggle an invalid certificate.  Measured tightness and the
iteration count are recomputable/diagnostic and are not serialized.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import frames
from .conversion import KashinRepresentation
from .errors import FormatError

FRAME_MAGIC = b"KFRM"
COEFF_MAGIC = b"KCOF"
FORMAT_VERSION = 1

_FRAME_HEADER = struct.Struct("<4sHBII")
_COEFF_HEADER = struct.Struct("<4sHIddd")

_KIND_CODES = {frames.DENSE: 0, frames.PARTIAL_FOURIER: 1}
_KIND_NAMES = {0: frames.DENSE, 1: frames.PARTIAL_FOURIER}

ASCII = "ascii"
BINARY = "bin"

CSV_HEADER = [
    "family", "n", "N", "up_eta", "up_delta", "K", "L", "model",
    "damage_fraction", "seed", "l2_error", "bound", "bound_ok",
]


def frame_to_bytes(frame: frames.FrameMatrix) -> bytes:
    """Serialize a frame; dense matrices row-major as (re, im) float64
    pairs, row selections as sorted u32 indices."""
    header = _FRAME_HEADER.pack(
        FRAME_MAGIC, FORMAT_VERSION, _KIND_CODES[frame.kind], frame.n, frame.N
    )
    if frame.kind == frames.DENSE:
        payload = np.ascontiguousarray(frame.matrix, dtype="<c16").tobytes()
    else:
        payload = frame.omega.astype("<u4").tobytes()
    return header + payload


def frame_from_bytes(blob: bytes) -> frames.FrameMatrix:
    """Parse a frame file; the tightness defect is re-measured since the
    format does not carry it."""
    if len(blob) < _FRAME_HEADER.size:
        raise FormatError("frame file shorter than its header")
    magic, version, kind_code, n, N = _FRAME_HEADER.unpack_from(blob)
    if magic != FRAME_MAGIC:
        raise FormatError(f"bad magic {magic!r}; expected {FRAME_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported frame format version {version}")
    if kind_code not in _KIND_NAMES:
        raise FormatError(f"unknown frame kind code {kind_code}")
    if not 1 <= n <= N:
        raise FormatError(f"inconsistent header dimensions n={n} N={N}")
    payload = blob[_FRAME_HEADER.size:]
    kind = _KIND_NAMES[kind_code]
    if kind == frames.DENSE:
        if len(payload) != 16 * n * N:
            raise FormatError(
                f"dense payload holds {len(payload)} bytes; expected {16 * n * N}"
            )
        matrix = np.frombuffer(payload, dtype="<c16").reshape(n, N).astype(
            np.complex128
        )
        frame = frames.FrameMatrix(n=n, N=N, kind=kind, matrix=matrix)
    else:
        if len(payload) != 4 * n:
            raise FormatError(
                f"index payload holds {len(payload)} bytes; expected {4 * n}"
            )
        omega = np.frombuffer(payload, dtype="<u4").astype(np.int64)
        if np.any(omega >= N) or np.any(np.diff(omega) <= 0):
            raise FormatError("row indices must be sorted, distinct, and in [0, N)")
        frame = frames.FrameMatrix(n=n, N=N, kind=kind, omega=omega)
    return frames.with_tightness(frame, frames.measure_tightness(frame))


def representation_to_bytes(rep: KashinRepresentation) -> bytes:
    """Serialize coefficients with their certificate (level, input norm,
    residual bound); the iteration count is diagnostic and dropped."""
    header = _COEFF_HEADER.pack(
        COEFF_MAGIC,
        FORMAT_VERSION,
        rep.coefficients.size,
        rep.level_K,
        rep.input_norm,
        rep.residual_bound,
    )
    return header + np.ascontiguousarray(
        rep.coefficients, dtype="<c16"
    ).tobytes()


def representation_from_bytes(blob: bytes) -> KashinRepresentation:
    """Parse a coefficient file, re-validating the level certificate."""
    if len(blob) < _COEFF_HEADER.size:
        raise FormatError("coefficient file shorter than its header")
    magic, version, N, level_K, input_norm, residual_bound = (
        _COEFF_HEADER.unpack_from(blob)
    )
    if magic != COEFF_MAGIC:
        raise FormatError(f"bad magic {magic!r}; expected {COEFF_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported coefficient format version {version}")
    if N < 1:
        raise FormatError(f"coefficient count must be positive, got {N}")
    for name, value in (
        ("level_K", level_K),
        ("input_norm", input_norm),
        ("residual_bound", residual_bound),
    ):
        if not (math.isfinite(value) and value >= 0.0):
            raise FormatError(f"{name} must be finite and >= 0, got {value}")
    payload = blob[_COEFF_HEADER.size:]
    if len(payload) != 16 * N:
        raise FormatError(
            f"coefficient payload holds {len(payload)} bytes; expected {16 * N}"
        )
    a = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    cap = level_K / math.sqrt(N) * input_norm
    if float(np.max(np.abs(a))) > cap * (1.0 + 1e-10) + 1e-12:
        raise FormatError("coefficients exceed the certified level bound")
    return KashinRepresentation(
        coefficients=a,
        level_K=level_K,
        input_norm=input_norm,
        residual_bound=residual_bound,
        iterations_used=0,
    )


def write_frame(path, frame: frames.FrameMatrix) -> None:
    Path(path).write_bytes(frame_to_bytes(frame))


def read_frame(path) -> frames.FrameMatrix:
    return frame_from_bytes(Path(path).read_bytes())


def write_representation(path, rep: KashinRepresentation) -> None:
    Path(path).write_bytes(representation_to_bytes(rep))


def read_representation(path) -> KashinRepresentation:
    return representation_from_bytes(Path(path).read_bytes())


def write_vector(path, v: np.ndarray, fmt: str = ASCII) -> None:
    """Write a complex vector: one ``re im`` pair per line (ascii, 17
    significant digits) or raw little-endian float64 pairs (bin)."""
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    if fmt == ASCII:
        lines = [f"{z.real:.17g} {z.imag:.17g}" for z in arr]
        Path(path).write_text("\n".join(lines) + "\n")
    elif fmt == BINARY:
        Path(path).write_bytes(arr.astype("<c16").tobytes())
    else:
        raise FormatError(f"unknown vector format {fmt!r}")


def read_vector(path, fmt: str = ASCII) -> np.ndarray:
    """Read a complex vector written by :func:`write_vector`."""
    if fmt == ASCII:
        entries = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(
                    f"line {lineno}: expected `re im`, got {line!r}"
                )
            try:
                entries.append(complex(float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from exc
        if not entries:
            raise FormatError("vector file holds no entries")
        return np.asarray(entries, dtype=np.complex128)
    if fmt == BINARY:
        blob = Path(path).read_bytes()
        if len(blob) == 0 or len(blob) % 16:
            raise FormatError(
                f"binary vector length {len(blob)} is not a positive multiple of 16"
            )
        return np.frombuffer(blob, dtype="<c16").astype(np.complex128)
    raise FormatError(f"unknown vector format {fmt!r}")


@dataclass(frozen=True)
class ExperimentRow:
    """One CSV row of an experiment sweep."""

    family: str
    n: int
    N: int
    up_eta: float
    up_delta: float
    K: float
    L: int
    model: str
    damage_fraction: float
    seed: int
    l2_error: float
    bound: float
    bound_ok: bool


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_experiment_csv(path, rows) -> None:
    """Write rows with the fixed header; floats keep 17 significant
    digits so they parse back exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [_format_cell(getattr(row, name)) for name in CSV_HEADER]
            )


def read_experiment_csv(path) -> list[ExperimentRow]:
    """Read back an experiment CSV, validating the header."""
    types = {f.name: f.type for f in dataclasses.fields(ExperimentRow)}
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise FormatError(f"unexpected CSV header {header}")
        for record in reader:
            if len(record) != len(CSV_HEADER):
                raise FormatError(f"row has {len(record)} cells: {record}")
            kwargs = {}
            try:
                for name, cell in zip(CSV_HEADER, record):
                    kind = types[name]
                    if kind == "bool":
                        if cell not in ("true", "false"):
                            raise ValueError(f"bad boolean {cell!r}")
                        kwargs[name] = cell == "true"
                    elif kind == "int":
                        kwargs[name] = int(cell)
                    elif kind == "float":
                        kwargs[name] = float(cell)
                    else:
                        kwargs[name] = cell
            except ValueError as exc:
                raise FormatError(f"malformed row {record}: {exc}") from exc
            rows.append(ExperimentRow(**kwargs))
    return rows
