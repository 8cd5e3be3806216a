"""
File formats.

Dense tensor container (".dt"), all little-endian:
    4 bytes   magic "DTEN"
    uint32    version (1)
    uint32    N
    N uint64  dims
    float64   prod(dims) entries in first-index-fastest order

Models are stored as .npz archives with a `kind` entry ("cp" or "tr") and one
array per factor/core named factor_<j> / core_<j>.
"""

import logging
import math
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..settings import check_dense_budget
from .dense import DenseTensor
from .models import CpModel, TrModel

logger = logging.getLogger(__name__)

MAGIC = b"DTEN"
VERSION = 1


def write_dt(path: str | Path, tensor: DenseTensor) -> None:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.array([VERSION, tensor.order], dtype="<u4").tobytes())
        f.write(np.array(tensor.dims, dtype="<u8").tobytes())
        f.write(tensor.flat.astype("<f8").tobytes())
    logger.debug("Wrote %s (dims=%s)", path, tensor.dims)


def read_dt(path: str | Path) -> DenseTensor:
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise FormatError(f"{path} is not a .dt file (magic {magic!r})")
        header = np.frombuffer(f.read(8), dtype="<u4")
        if header.size != 2:
            raise FormatError(f"{path}: truncated header")
        version, order = int(header[0]), int(header[1])
        if version != VERSION:
            raise FormatError(f"{path}: unsupported .dt version {version}")
        dims_raw = np.frombuffer(f.read(8 * order), dtype="<u8")
        if dims_raw.size != order or order == 0:
            raise FormatError(f"{path}: truncated dims")
        dims = tuple(int(d) for d in dims_raw)
        count = math.prod(dims)
        check_dense_budget(count, f"tensor in {path}")
        data = np.frombuffer(f.read(8 * count), dtype="<f8")
        if data.size != count:
            raise FormatError(f"{path}: expected {count} entries, found {data.size}")
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after tensor data")
    return DenseTensor.from_flat(data.astype(np.float64), dims)


def save_model(path: str | Path, model: CpModel | TrModel) -> None:
    if isinstance(model, CpModel):
        arrays = {f"factor_{j}": f for j, f in enumerate(model.factors)}
        kind = "cp"
    else:
        arrays = {f"core_{j}": c for j, c in enumerate(model.cores)}
        kind = "tr"
    np.savez(Path(path), kind=np.array(kind), **arrays)


def load_model(path: str | Path) -> CpModel | TrModel:
    with np.load(Path(path), allow_pickle=False) as archive:
        if "kind" not in archive:
            raise FormatError(f"{path}: missing model kind")
        kind = str(archive["kind"])
        prefix = {"cp": "factor_", "tr": "core_"}.get(kind)
        if prefix is None:
            raise FormatError(f"{path}: unknown model kind {kind!r}")
        count = sum(1 for name in archive.files if name.startswith(prefix))
        parts = [archive[f"{prefix}{j}"] for j in range(count)]
    return CpModel(parts) if kind == "cp" else TrModel(parts)
