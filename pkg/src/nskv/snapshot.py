"""Durable I/O: the NSKV1 binary snapshot format and the CSV emitters.

Snapshot layout (little-endian):

    bytes 0..4    magic "NSKV1"
    byte  5       format version (1)
    byte  6       seed-kind tag (0 none, 1 antisymmetric, 2 complex)
    byte  7       flags: bit0 antisymmetric, bit1 solenoidal
    bytes 8..15   f64 lattice step
    bytes 16..27  u32 x3 half-extents
    bytes 28..35  f64 time in tau units
    bytes 36..39  CRC-32 over bytes 0..35
    bytes 40..    payload: float64 triplets, k1 slowest (C order)

Read validates magic, version, CRC, and payload size.  The payload itself is
not checksummed: a flipped payload byte reads back as a different field.
Round trips are bit-identical.  CSV columns use 17-significant-digit
scientific notation, lossless for 64-bit floats and diff-able.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import IntegrityError, UnsupportedVersionError
from .lattice import KLattice, VecField

MAGIC = b"NSKV1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<5sBBBd3Id")

SEED_TAGS = {"none": 0, "antisymmetric": 1, "complex": 2}
SEED_NAMES = {v: k for k, v in SEED_TAGS.items()}

FLOAT_FMT = "{:.16e}"


def write_snapshot(field: VecField, t_tau: float, path, seed_kind: str = "none") -> None:
    flags = (1 if field.antisymmetric else 0) | (2 if field.solenoidal else 0)
    head = _HEADER.pack(
        MAGIC, FORMAT_VERSION, SEED_TAGS[seed_kind], flags,
        field.lattice.step, *field.lattice.half_extents, float(t_tau),
    )
    crc = zlib.crc32(head) & 0xFFFFFFFF
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(struct.pack("<I", crc))
        fh.write(payload)


def read_snapshot(path) -> tuple[VecField, float]:
    field, t_tau, _ = read_snapshot_tagged(path)
    return field, t_tau


def read_snapshot_tagged(path) -> tuple[VecField, float, str]:
    """Like :func:`read_snapshot` but also returns the seed-kind tag."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size + 4:
        raise IntegrityError(f"{path}: truncated header ({len(raw)} bytes)")
    head = raw[: _HEADER.size]
    magic, version, seed_tag, flags, step, n1, n2, n3, t_tau = _HEADER.unpack(head)
    if magic != MAGIC:
        raise IntegrityError(f"{path}: bad magic {magic!r}")
    (crc_stored,) = struct.unpack_from("<I", raw, _HEADER.size)
    if (zlib.crc32(head) & 0xFFFFFFFF) != crc_stored:
        raise IntegrityError(f"{path}: header CRC mismatch")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"{path}: format version {version} unsupported (this build reads {FORMAT_VERSION})"
        )
    lattice = KLattice(step, (n1, n2, n3))
    expected = lattice.node_count * 3 * 8
    payload = raw[_HEADER.size + 4 :]
    if len(payload) != expected:
        raise IntegrityError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<f8").reshape(lattice.shape + (3,)).copy()
    field = VecField(lattice, values,
                     antisymmetric=bool(flags & 1), solenoidal=bool(flags & 2))
    return field, float(t_tau), SEED_NAMES.get(seed_tag, "none")


def _fmt_row(values) -> str:
    return ",".join(FLOAT_FMT.format(float(v)) for v in values)


def write_diagnostics_csv(path, diag) -> None:
    lines = ["t_tau,energy,enstrophy,max_speed,align_cos,boundary_frac"]
    for i in range(len(diag)):
        lines.append(_fmt_row([
            diag.t_tau[i], diag.energy[i], diag.enstrophy[i],
            diag.max_speed[i], diag.align_cos[i], diag.boundary_frac[i],
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_marginal_csv(path, marginal) -> None:
    """One row per recorded time; first column the time, then the density.

    The header documents that densities carry the full (2*pi)^3 Parseval
    constants, so row sums times the coordinate step match the global
    totals.
    """
    lines = [
        f"# marginal {marginal.kind}; includes (2*pi)^3 normalization; "
        "row_sum * coord_step = total",
        "t_tau," + _fmt_row(marginal.coords),
    ]
    for t, row, flag in zip(marginal.times, marginal.rows, marginal.flags):
        prefix = "" if not flag else "# boundary-decay flag on next row\n"
        lines.append(prefix + _fmt_row([t, *row]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_run_metadata(path, result, code_version: str) -> None:
    """Reproducibility record: config echo, amplitude, lattice, statuses."""
    cfg = result.config
    meta = {
        "code_version": code_version,
        "status": result.status,
        "t_star_tau": result.t_star_tau,
        "amplitude": result.amplitude,
        "lattice": {"step": cfg.delta, "half_extents": [cfg.n1, cfg.n2, cfg.n3]},
        "config": {k: v for k, v in vars(cfg).items()},
        "records": len(result.diagnostics),
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def write_gp_table(table, out_dir) -> None:
    """Export every stored order/time field as a snapshot, plus an index."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = {"seed_kind": table.seed_kind, "amplitude": table.amplitude,
             "times": [float(s) for s in table.times], "orders": sorted(table.terms),
             "files": {}}
    for p, fields in sorted(table.terms.items()):
        for i, fld in enumerate(fields):
            name = f"gp_p{p:02d}_t{i:04d}.nskv"
            write_snapshot(fld, float(table.times[i]), out / name, seed_kind=table.seed_kind)
            index["files"][f"{p},{i}"] = name
    (out / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
