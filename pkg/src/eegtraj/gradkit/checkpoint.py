"""Single-file network checkpoints.

Layout: one line of JSON (layer specs, caller metadata, array shapes),
then the raw little-endian float32 payload of every parameter and buffer
in declaration order. Weights train in float64 but persist as float32;
loading reproduces the float32 values exactly.
"""
import json
from pathlib import Path

import numpy as np

from ..errors import CorruptModel, ShapeError
from .layers import Network, network_from_specs

FORMAT_NAME = "net-checkpoint"
FORMAT_VERSION = 1


def save_checkpoint(path, net: Network, meta: dict | None = None) -> None:
    arrays = net.state_arrays()
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "layers": net.specs(),
        "meta": meta or {},
        "shapes": [list(a.shape) for a in arrays],
    }
    blob = b"".join(np.ascontiguousarray(a, dtype="<f4").tobytes() for a in arrays)
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(blob)


def load_checkpoint(path):
    """Returns (network, meta). The file must match its own header exactly."""
    p = Path(path)
    if not p.is_file():
        raise CorruptModel(f"checkpoint {p} not found")
    raw = p.read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise CorruptModel("checkpoint has no header line")
    try:
        header = json.loads(raw[:nl].decode())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"unreadable checkpoint header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise CorruptModel("not a network checkpoint")
    if header.get("version") != FORMAT_VERSION:
        raise CorruptModel(f"unsupported checkpoint version {header.get('version')!r}")
    for key in ("layers", "shapes", "meta"):
        if key not in header:
            raise CorruptModel(f"checkpoint header missing {key!r}")

    try:
        net = network_from_specs(header["layers"])
    except (ShapeError, KeyError, TypeError) as exc:
        raise CorruptModel(f"cannot rebuild architecture: {exc}") from exc

    arrays = net.state_arrays()
    shapes = [tuple(s) for s in header["shapes"]]
    if [a.shape for a in arrays] != shapes:
        raise CorruptModel("header shapes do not match the declared architecture")

    blob = raw[nl + 1:]
    total = sum(int(np.prod(s)) for s in shapes)
    if len(blob) != 4 * total:
        raise CorruptModel(f"payload holds {len(blob)} bytes, header implies {4 * total}")

    values = np.frombuffer(blob, dtype="<f4").astype(np.float64)
    offset = 0
    for a in arrays:
        n = a.size
        np.copyto(a, values[offset:offset + n].reshape(a.shape))
        offset += n
    return net, header["meta"]
