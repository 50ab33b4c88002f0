"""
Checkpoint Repository
LPNW checkpoint files holding network parameters, batch-norm statistics and the mask.

Layout (little-endian):
    magic "LPNW" (4 bytes), version u32
    depth u32, base_channels u32, leaky_slope f64
    metadata length u32, UTF-8 JSON metadata
    tensor count u32
    per tensor: name length u32, UTF-8 name, ndim u32, dims u32 * ndim, f64 values (row-major)

Tensors follow the network state_dict() order, then the mask tensor
("mask.weights" for LOUPE runs, "mask.binary" for fixed-mask runs).
"""
import json
import logging
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import torch
from pydantic import ValidationError
from torch import Tensor

from app.schemas.config import NetworkConfig
from app.services.recon_net import ReconUNet

logger = logging.getLogger(__name__)

MAGIC = b"LPNW"
FORMAT_VERSION = 1
MASK_WEIGHTS = "mask.weights"
MASK_BINARY = "mask.binary"
MASK_PREFIX = "mask."
MAX_ELEMENTS = 2 ** 31
VALUE_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


class CheckpointFormatError(Exception):
    """Raised when an LPNW file cannot be decoded"""
    pass


class CheckpointBadMagicError(CheckpointFormatError):
    """Raised when the file does not start with the LPNW magic"""
    pass


class CheckpointVersionError(CheckpointFormatError):
    """Raised for an unknown checkpoint version"""
    pass


class CheckpointTruncatedError(CheckpointFormatError):
    """Raised when the file ends before a declared field"""
    pass


class CheckpointOverflowError(CheckpointFormatError):
    """Raised when a declared tensor is larger than supported"""
    pass


@dataclass
class Checkpoint:
    """Decoded checkpoint contents"""
    net_config: NetworkConfig
    metadata: Dict[str, Any] = field(default_factory=dict)
    tensors: "OrderedDict[str, Tensor]" = field(default_factory=OrderedDict)

    def network_state(self) -> "OrderedDict[str, Tensor]":
        return OrderedDict((k, v) for k, v in self.tensors.items() if not k.startswith(MASK_PREFIX))

    @property
    def mask_weights(self) -> Optional[Tensor]:
        return self.tensors.get(MASK_WEIGHTS)

    @property
    def mask_binary(self) -> Optional[Tensor]:
        return self.tensors.get(MASK_BINARY)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.offset = 0

    def take(self, fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.blob):
            raise CheckpointTruncatedError(f"file ends at byte {len(self.blob)}, needed {self.offset + size}")
        values = struct.unpack_from(fmt, self.blob, self.offset)
        self.offset += size
        return values

    def take_bytes(self, n: int) -> bytes:
        if self.offset + n > len(self.blob):
            raise CheckpointTruncatedError(f"file ends at byte {len(self.blob)}, needed {self.offset + n}")
        chunk = self.blob[self.offset:self.offset + n]
        self.offset += n
        return chunk


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    """Serialise a checkpoint to LPNW bytes."""
    cfg = ckpt.net_config
    meta = json.dumps(ckpt.metadata, sort_keys=True).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<IId", cfg.depth, cfg.base_channels, cfg.leaky_slope),
        struct.pack("<I", len(meta)),
        meta,
        struct.pack("<I", len(ckpt.tensors)),
    ]
    for name, tensor in ckpt.tensors.items():
        encoded = name.encode("utf-8")
        values = tensor.detach().cpu().to(torch.float64).numpy()
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack(f"<I{values.ndim}I", values.ndim, *values.shape))
        parts.append(np.ascontiguousarray(values, dtype=VALUE_DTYPE).tobytes())
    return b"".join(parts)


def decode_checkpoint(blob: bytes) -> Checkpoint:
    """
    Parse LPNW bytes.

    Raises:
        CheckpointBadMagicError, CheckpointVersionError, CheckpointTruncatedError, CheckpointOverflowError
    """
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise CheckpointBadMagicError("bad magic: not an LPNW checkpoint")
    reader = _Reader(blob)
    reader.offset = 4
    (version,) = reader.take("<I")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"unsupported LPNW version {version}")

    depth, base_channels, leaky_slope = reader.take("<IId")
    try:
        net_config = NetworkConfig(depth=depth, base_channels=base_channels, leaky_slope=leaky_slope)
    except ValidationError as e:
        raise CheckpointFormatError(f"invalid network header: {e}")
    (meta_len,) = reader.take("<I")
    try:
        metadata = json.loads(reader.take_bytes(meta_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"unreadable metadata: {e}")

    (count,) = reader.take("<I")
    tensors: "OrderedDict[str, Tensor]" = OrderedDict()
    for _ in range(count):
        (name_len,) = reader.take("<I")
        try:
            name = reader.take_bytes(name_len).decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointFormatError(f"unreadable tensor name: {e}")
        (ndim,) = reader.take("<I")
        shape = reader.take(f"<{ndim}I")
        n_values = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        if n_values > MAX_ELEMENTS:
            raise CheckpointOverflowError(f"tensor {name} declares {n_values} values")
        raw = reader.take_bytes(n_values * VALUE_DTYPE.itemsize)
        values = np.frombuffer(raw, dtype=VALUE_DTYPE).reshape(shape).copy()
        tensors[name] = torch.from_numpy(values)

    if reader.offset != len(blob):
        raise CheckpointFormatError(f"{len(blob) - reader.offset} trailing bytes after the last tensor")
    return Checkpoint(net_config=net_config, metadata=metadata, tensors=tensors)


def build_checkpoint(
    net: ReconUNet,
    metadata: Dict[str, Any],
    mask_tensors: Optional[Dict[str, Tensor]] = None,
) -> Checkpoint:
    """Collect a network's state dict and mask tensors into a Checkpoint."""
    tensors: "OrderedDict[str, Tensor]" = OrderedDict(net.state_dict())
    for name, tensor in (mask_tensors or {}).items():
        tensors[name] = tensor.detach()
    return Checkpoint(net_config=net.cfg, metadata=dict(metadata), tensors=tensors)


def save_checkpoint(ckpt: Checkpoint, path: PathLike) -> Path:
    """Write a checkpoint to disk."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(ckpt))
    logger.info("wrote checkpoint %s (%d tensors)", path, len(ckpt.tensors))
    return path


def load_checkpoint(path: PathLike) -> Checkpoint:
    """Read a checkpoint from disk."""
    return decode_checkpoint(Path(path).read_bytes())


def restore_network(ckpt: Checkpoint, dtype: torch.dtype = torch.float32) -> ReconUNet:
    """
    Rebuild the network in inference mode from a checkpoint.

    Args:
        ckpt: Decoded checkpoint
        dtype: Parameter dtype

    Returns:
        ReconUNet with loaded parameters and batch-norm statistics

    Raises:
        CheckpointFormatError: If the stored tensors do not fit the declared network
    """
    net = ReconUNet(ckpt.net_config).to(dtype)
    try:
        net.load_state_dict(ckpt.network_state())
    except RuntimeError as e:
        raise CheckpointFormatError(f"tensors do not match the declared network: {e}")
    net.eval()
    return net
