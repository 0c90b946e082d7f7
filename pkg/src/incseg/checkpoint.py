"""Self-describing binary checkpoint container.

Layout: an 8-byte magic, a little-endian uint32 format version, a
little-endian uint64 header length, a UTF-8 JSON header, then the raw
payload. The header lists every array (name, kind, shape) in payload
order together with the full configuration, the vocabulary, the optimizer
step counter, and the seed. Arrays are row-major float64 little-endian,
so a save/load round trip is bit-exact.
"""

import json
import struct

import numpy as np

from .config import TrainConfig
from .data import Vocab
from .params import ParamStore

MAGIC = b"INCSEGCK"
VERSION = 1

_KINDS = ("param", "adam_m", "adam_v")


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, store: ParamStore, config: TrainConfig, vocab: Vocab):
    arrays = []
    buffers = []
    for name in store.names():
        for kind, source in (
            ("param", store.params[name].data),
            ("adam_m", store.adam_m[name]),
            ("adam_v", store.adam_v[name]),
        ):
            arrays.append({"name": name, "kind": kind, "shape": list(source.shape)})
            buffers.append(np.ascontiguousarray(source, dtype="<f8").tobytes())
    header = {
        "format": "incseg-checkpoint",
        "config": config.to_dict(),
        "vocab": {"tokens": vocab.tokens, "chars": vocab.chars, "labels": vocab.labels},
        "step": store.step,
        "seed": store.seed,
        "arrays": arrays,
    }
    header_bytes = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<I", VERSION))
        handle.write(struct.pack("<Q", len(header_bytes)))
        handle.write(header_bytes)
        for buf in buffers:
            handle.write(buf)


def read_header(path) -> dict:
    """Header JSON only; cheap metadata inspection."""
    with open(path, "rb") as handle:
        magic = handle.read(8)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint (bad magic {magic!r})")
        (version,) = struct.unpack("<I", handle.read(4))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        (header_len,) = struct.unpack("<Q", handle.read(8))
        header = json.loads(handle.read(header_len).decode("utf-8"))
    return header


def load_checkpoint(path):
    """Returns (store, config, vocab) reconstructed bit-exactly."""
    with open(path, "rb") as handle:
        blob = handle.read()
    if blob[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic {blob[:8]!r})")
    (version,) = struct.unpack("<I", blob[8:12])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    (header_len,) = struct.unpack("<Q", blob[12:20])
    header = json.loads(blob[20 : 20 + header_len].decode("utf-8"))
    config = TrainConfig.from_dict(header["config"])
    vocab = Vocab(header["vocab"]["tokens"], header["vocab"]["chars"], header["vocab"]["labels"])
    store = ParamStore(seed=header["seed"])
    store.step = header["step"]
    offset = 20 + header_len
    for entry in header["arrays"]:
        if entry["kind"] not in _KINDS:
            raise CheckpointError(f"{path}: unknown array kind {entry['kind']!r}")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        raw = blob[offset : offset + nbytes]
        if len(raw) != nbytes:
            raise CheckpointError(f"{path}: truncated payload at {entry['name']!r}")
        arr = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        offset += nbytes
        name = entry["name"]
        if entry["kind"] == "param":
            store.add(name, arr)
        elif entry["kind"] == "adam_m":
            store.adam_m[name] = arr
        else:
            store.adam_v[name] = arr
    if offset != len(blob):
        raise CheckpointError(f"{path}: {len(blob) - offset} trailing bytes")
    return store, config, vocab
