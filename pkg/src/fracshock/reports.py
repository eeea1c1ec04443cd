"""Deterministic result files: CSV field tables, JSON reports, binary dumps.

All numeric text output uses round-trip decimal formatting (17 significant
digits) so repeated runs with the same seed produce byte-identical files.

Binary field dump layout (little endian):

    bytes 0..3    magic  b"FRSH"
    uint32        format version (1)
    uint32        n_cells
    uint32        n_snapshots
    float64 x n_snapshots   snapshot times
    float64 x (n_snapshots * n_cells)   fields, row-major (time major)
"""

import json
import struct

import numpy as np

MAGIC = b"FRSH"
BIN_VERSION = 1


def fmt(x):
    return "%.17g" % float(x)


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table_csv(path, header, rows):
    """Generic numeric table; every value rendered at full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row) + "\n")


def write_fields_csv(path, times, snapshots, x_centers):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,u\n")
        for t, row in zip(times, snapshots):
            ts = fmt(t)
            for xi, ui in zip(x_centers, row):
                fh.write(f"{ts},{fmt(xi)},{fmt(ui)}\n")


def write_fields_binary(path, times, snapshots):
    snapshots = np.ascontiguousarray(snapshots, dtype="<f8")
    times = np.ascontiguousarray(times, dtype="<f8")
    n_snapshots, n_cells = snapshots.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", BIN_VERSION, n_cells, n_snapshots))
        fh.write(times.tobytes())
        fh.write(snapshots.tobytes())


def read_fields_binary(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a field dump (magic {magic!r})")
        version, n_cells, n_snapshots = struct.unpack("<III", fh.read(12))
        if version != BIN_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        times = np.frombuffer(fh.read(8 * n_snapshots), dtype="<f8")
        data = np.frombuffer(fh.read(8 * n_snapshots * n_cells), dtype="<f8")
    return times.copy(), data.reshape(n_snapshots, n_cells).copy()
