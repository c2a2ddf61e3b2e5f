"""Writer for the literal embedding binary format (LEB1).

Layout: magic ``LEB1``; little-endian u32 version (=1), u32 dim,
u64 record count; then per record: u8 kind (0=entity, 1=relation),
u32 name byte-length, UTF-8 name bytes, dim float32 values.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"LEB1"
VERSION = 1

KIND_CODES = {"entity": 0, "relation": 1}


def write_records(path, records, dim: int) -> None:
    """Write [(kind, name, vector), ...] with kind in {"entity", "relation"}."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIQ", VERSION, dim, len(records)))
        for kind, name, vec in records:
            vec = np.asarray(vec, dtype="<f4")
            if vec.size != dim:
                raise ValueError(f"record {name!r}: dim {vec.size} != {dim}")
            raw = name.encode("utf-8")
            f.write(struct.pack("<BI", KIND_CODES[kind], len(raw)))
            f.write(raw)
            f.write(vec.tobytes())
