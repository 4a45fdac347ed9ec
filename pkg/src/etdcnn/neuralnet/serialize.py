"""Binary model files.

Layout: 8-byte magic, little-endian uint32 format version, uint32 header
length, a UTF-8 JSON header (layer specs, input length, seed, parameter
shapes), then every parameter as little-endian float64 in layer order with
weights before biases.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import Model, spec_from_dict, spec_to_dict

MAGIC = b"ETDCNN\x00M"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def dumps_model(model: Model) -> bytes:
    header = {
        "input_length": model.input_length,
        "seed": model.seed,
        "specs": [spec_to_dict(s) for s in model.specs],
        "shapes": [{k: list(v.shape) for k, v in p.items()} for p in model.params],
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in model.parameter_arrays())
    return MAGIC + struct.pack("<II", FORMAT_VERSION, len(head)) + head + body


def loads_model(blob: bytes) -> Model:
    if blob[: len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    off = len(MAGIC)
    version, head_len = struct.unpack_from("<II", blob, off)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")
    off += 8
    header = json.loads(blob[off : off + head_len].decode("utf-8"))
    off += head_len
    params = []
    for shapes in header["shapes"]:
        layer = {}
        for name in ("w", "b"):
            if name not in shapes:
                continue
            shape = tuple(shapes[name])
            n = int(np.prod(shape))
            if off + 8 * n > len(blob):
                raise ModelFormatError("model file truncated")
            layer[name] = np.frombuffer(blob, dtype="<f8", count=n, offset=off).astype(np.float64).reshape(shape)
            off += 8 * n
        params.append(layer)
    if off != len(blob):
        raise ModelFormatError(f"{len(blob) - off} trailing bytes in model file")
    specs = [spec_from_dict(d) for d in header["specs"]]
    return Model(specs, header["input_length"], header["seed"], params=params)


def save_model(model: Model, path) -> None:
    Path(path).write_bytes(dumps_model(model))


def load_model(path) -> Model:
    return loads_model(Path(path).read_bytes())
