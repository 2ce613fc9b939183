r"""Binary file formats for tensors, network models and masks, plus PNG helpers.

All integers are unsigned 32-bit little-endian, all scalars are IEEE-754
float64 little-endian.  Tensor values are stored flat in little-endian
multi-index order (first mode fastest).

``.dnt``  dense tensor:   magic ``DNT1`` | N | dims[N] | values[prod(dims)]
``.tnc``  one component:  magic ``TNC1`` | N | t | bond matrix (N*N, row-major)
                          | N factor tensors, each a full ``.dnt`` payload
``.mtnr`` model:          magic ``MTNR`` | component count | ``.tnc`` payloads
``.msk``  mask:           magic ``MSK1`` | N | dims[N] | packed observed bits
                          (flat little-endian entry order, 8 per byte, LSB
                          first; 1 = observed)

Readers validate magic bytes and sizes and raise :class:`FormatError` on
anything malformed or truncated.
"""

import io as _stdio
import math

import numpy as np

_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


class FormatError(ValueError):
    """Raised for corrupt or truncated files."""


def _read_exact(f, n, what):
    buf = f.read(n)
    if len(buf) != n:
        raise FormatError(f"truncated file while reading {what}")
    return buf


def _read_u32(f, count, what):
    buf = _read_exact(f, 4 * count, what)
    return np.frombuffer(buf, dtype=_U32).astype(np.int64)


def _expect_magic(f, magic):
    got = f.read(len(magic))
    if got != magic:
        raise FormatError(f"bad magic {got!r}, expected {magic!r}")


def _open(path_or_file, mode):
    if hasattr(path_or_file, "read" if "r" in mode else "write"):
        return path_or_file, False
    return open(path_or_file, mode), True


# ---------------------------------------------------------------------------
# .dnt - dense tensors
# ---------------------------------------------------------------------------

def write_dnt(dst, tensor):
    """Write a dense tensor to a ``.dnt`` file (path or binary file object)."""
    t = np.asarray(tensor, dtype=float)
    if t.ndim < 1:
        raise ValueError("tensors of order 0 are not representable")
    f, own = _open(dst, "wb")
    try:
        f.write(b"DNT1")
        f.write(np.asarray([t.ndim] + list(t.shape), dtype=_U32).tobytes())
        f.write(np.ascontiguousarray(t.reshape(-1, order="F"), dtype=_F64).tobytes())
    finally:
        if own:
            f.close()


def read_dnt(src):
    """Read a dense tensor from a ``.dnt`` file (path or binary file object)."""
    f, own = _open(src, "rb")
    try:
        _expect_magic(f, b"DNT1")
        n = int(_read_u32(f, 1, "order")[0])
        if n < 1:
            raise FormatError(f"invalid tensor order {n}")
        dims = tuple(int(d) for d in _read_u32(f, n, "dims"))
        if any(d < 1 for d in dims):
            raise FormatError(f"invalid dims {dims}")
        total = math.prod(dims)
        buf = _read_exact(f, 8 * total, "tensor values")
        flat = np.frombuffer(buf, dtype=_F64).astype(float)
        return flat.reshape(dims, order="F")
    finally:
        if own:
            f.close()


# ---------------------------------------------------------------------------
# .tnc / .mtnr - network components and models
# ---------------------------------------------------------------------------

def write_tnc(dst, component):
    """Write one network component to a ``.tnc`` file."""
    f, own = _open(dst, "wb")
    try:
        n = component.order
        f.write(b"TNC1")
        f.write(np.asarray([n, component.max_connections], dtype=_U32).tobytes())
        f.write(np.asarray(component.ranks.table, dtype=_U32).tobytes())
        for factor in component.factors:
            write_dnt(f, factor)
    finally:
        if own:
            f.close()


def read_tnc(src):
    """Read one network component from a ``.tnc`` file."""
    from .network import RankMatrix, TnComponent

    f, own = _open(src, "rb")
    try:
        _expect_magic(f, b"TNC1")
        n, t = (int(v) for v in _read_u32(f, 2, "header"))
        if n < 1 or t < 1:
            raise FormatError(f"invalid component header (order {n}, cap {t})")
        table = _read_u32(f, n * n, "bond matrix").reshape(n, n)
        factors = [read_dnt(f) for _ in range(n)]
        try:
            ranks = RankMatrix(n, table)
            return TnComponent(factors, ranks, max_connections=t)
        except ValueError as exc:
            raise FormatError(f"inconsistent component: {exc}") from exc
    finally:
        if own:
            f.close()


def write_mtnr(dst, model):
    """Write a multi-component model to a ``.mtnr`` file."""
    f, own = _open(dst, "wb")
    try:
        f.write(b"MTNR")
        f.write(np.asarray([len(model.components)], dtype=_U32).tobytes())
        f.write(np.asarray([model.order] + list(model.target_dims), dtype=_U32).tobytes())
        for c in model.components:
            write_tnc(f, c)
    finally:
        if own:
            f.close()


def read_mtnr(src):
    """Read a multi-component model from a ``.mtnr`` file."""
    from .network import MtnrModel

    f, own = _open(src, "rb")
    try:
        _expect_magic(f, b"MTNR")
        count = int(_read_u32(f, 1, "component count")[0])
        n = int(_read_u32(f, 1, "order")[0])
        dims = tuple(int(d) for d in _read_u32(f, n, "target dims"))
        components = [read_tnc(f) for _ in range(count)]
        try:
            return MtnrModel(components, target_dims=dims)
        except ValueError as exc:
            raise FormatError(f"inconsistent model: {exc}") from exc
    finally:
        if own:
            f.close()


# ---------------------------------------------------------------------------
# .msk - observation masks
# ---------------------------------------------------------------------------

def write_msk(dst, mask):
    """Write a boolean observation mask (True = observed) to a ``.msk`` file."""
    m = np.asarray(mask)
    if m.dtype != bool:
        raise ValueError("mask must be a boolean array")
    f, own = _open(dst, "wb")
    try:
        f.write(b"MSK1")
        f.write(np.asarray([m.ndim] + list(m.shape), dtype=_U32).tobytes())
        bits = np.packbits(m.reshape(-1, order="F"), bitorder="little")
        f.write(bits.tobytes())
    finally:
        if own:
            f.close()


def read_msk(src):
    """Read a boolean observation mask from a ``.msk`` file."""
    f, own = _open(src, "rb")
    try:
        _expect_magic(f, b"MSK1")
        n = int(_read_u32(f, 1, "order")[0])
        if n < 1:
            raise FormatError(f"invalid mask order {n}")
        dims = tuple(int(d) for d in _read_u32(f, n, "dims"))
        total = math.prod(dims)
        buf = _read_exact(f, (total + 7) // 8, "mask bits")
        bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8),
                             count=total, bitorder="little")
        return bits.astype(bool).reshape(dims, order="F")
    finally:
        if own:
            f.close()


# ---------------------------------------------------------------------------
# PNG images
# ---------------------------------------------------------------------------

def read_png(path):
    """Load an 8-bit RGB PNG as an (H, W, 3) float array scaled to [0, 1]."""
    from PIL import Image

    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=float)
    return arr / 255.0


def write_png(path, image):
    """Write an (H, W, 3) float array in [0, 1] as an 8-bit RGB PNG."""
    from PIL import Image

    arr = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got {arr.shape}")
    Image.fromarray(np.rint(arr * 255.0).astype(np.uint8), mode="RGB").save(path)


def roundtrip_bytes(write_fn, obj):
    """Serialize ``obj`` with ``write_fn`` into bytes (testing convenience)."""
    buf = _stdio.BytesIO()
    write_fn(buf, obj)
    return buf.getvalue()
