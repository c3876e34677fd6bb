"""Binary checkpoint format for trained scorer parameters.

Layout, all integers little-endian:

* magic ``RUBR`` (4 bytes)
* format version, u16
* config block: u32 byte length + that many bytes of UTF-8 JSON
  (embedding dim plus every :class:`TrainConfig` field, sorted keys)
* vocabulary hash, u64: FNV-1a over each token's UTF-8 bytes followed by
  a newline, in id order
* every scorer tensor in declaration order: u32 rank, u32 per dimension,
  then the values as IEEE-754 float32, row-major

Tensors are quantized to float32 on save and come back as float64 with
exactly the stored float32 values, so save/load/save round trips are
byte-stable.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import CheckpointFormatError, CompatibilityError
from ..vocabulary import Vocabulary
from .config import TrainConfig
from .scorer import ScorerParams, zero_scorer_params

MAGIC = b"RUBR"
FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64_MASK = 0xFFFFFFFFFFFFFFFF


def vocab_content_hash(vocab: Vocabulary) -> int:
    """64-bit FNV-1a over the token sequence, newline-terminated per token."""
    h = _FNV_OFFSET
    for token in vocab.tokens:
        for byte in token.encode("utf-8") + b"\n":
            h = ((h ^ byte) * _FNV_PRIME) & _U64_MASK
    return h


@dataclass
class Checkpoint:
    params: ScorerParams
    config: TrainConfig
    embed_dim: int
    vocab_hash: int


def save_checkpoint(
    params: ScorerParams,
    config: TrainConfig,
    vocab_hash: int,
    path,
) -> None:
    """Write ``params`` and its training configuration to ``path``."""
    blob = dict(asdict(config), embed_dim=params.embed_dim)
    encoded = json.dumps(blob, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(encoded)))
        fh.write(encoded)
        fh.write(struct.pack("<Q", vocab_hash))
        for _, arr in params.tensors():
            # asarray keeps 0-d tensors 0-d (ascontiguousarray would not)
            quantized = np.asarray(arr, dtype="<f4", order="C")
            fh.write(struct.pack("<I", quantized.ndim))
            for dim in quantized.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(quantized.tobytes())


def load_checkpoint(
    path,
    expected_vocab_hash: int | None = None,
    allow_vocab_mismatch: bool = False,
) -> Checkpoint:
    """Read a checkpoint back.

    When ``expected_vocab_hash`` is given it must equal the stored hash,
    unless ``allow_vocab_mismatch`` overrides the refusal; a mismatch
    raises :class:`~ruber.errors.CompatibilityError`.  Structural damage
    raises :class:`~ruber.errors.CheckpointFormatError`.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    reader = _Reader(path, data)

    if reader.take(4) != MAGIC:
        raise CheckpointFormatError(f"{path}: not a scorer checkpoint (bad magic)")
    (version,) = struct.unpack("<H", reader.take(2))
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{path}: unsupported format version {version} (expected {FORMAT_VERSION})"
        )
    (blob_len,) = struct.unpack("<I", reader.take(4))
    try:
        blob = json.loads(reader.take(blob_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointFormatError(f"{path}: corrupt config block") from exc
    try:
        embed_dim = int(blob.pop("embed_dim"))
        config = TrainConfig(**blob)
    except (KeyError, TypeError) as exc:
        raise CheckpointFormatError(f"{path}: config block missing fields") from exc

    (vocab_hash,) = struct.unpack("<Q", reader.take(8))

    params = zero_scorer_params(embed_dim, config.hidden, config.mlp_hidden)
    for name, arr in params.tensors():
        (rank,) = struct.unpack("<I", reader.take(4))
        if rank != arr.ndim:
            raise CheckpointFormatError(
                f"{path}: tensor {name} has rank {rank}, expected {arr.ndim}"
            )
        shape = tuple(
            struct.unpack("<I", reader.take(4))[0] for _ in range(rank)
        )
        if shape != arr.shape:
            raise CheckpointFormatError(
                f"{path}: tensor {name} has shape {shape}, expected {arr.shape}"
            )
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        raw = reader.take(4 * count)
        arr[...] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(float)
    if reader.remaining():
        raise CheckpointFormatError(f"{path}: {reader.remaining()} trailing byte(s)")

    if (
        expected_vocab_hash is not None
        and expected_vocab_hash != vocab_hash
        and not allow_vocab_mismatch
    ):
        raise CompatibilityError(
            f"{path}: checkpoint was trained against a different vocabulary "
            f"(stored hash {vocab_hash:#018x}, supplied {expected_vocab_hash:#018x}); "
            "pass the override flag to load anyway"
        )
    return Checkpoint(params=params, config=config, embed_dim=embed_dim, vocab_hash=vocab_hash)


class _Reader:
    """Bounds-checked cursor over the checkpoint bytes."""

    def __init__(self, path, data: bytes):
        self.path = path
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointFormatError(
                f"{self.path}: truncated (wanted {n} byte(s) at offset {self.pos})"
            )
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def remaining(self) -> int:
        return len(self.data) - self.pos
