"""Binary greyscale PGM (P5, 8-bit) reader and writer."""
import numpy as np


class PgmError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _tokens(buf):
    """Yield ``(token, start_offset)`` for the header, then the data offset."""
    pos = 0
    n = len(buf)
    count = 0
    while count < 4:
        while pos < n and (buf[pos:pos + 1].isspace() or buf[pos:pos + 1] == b"#"):
            if buf[pos:pos + 1] == b"#":
                while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                pos += 1
        if pos >= n:
            raise PgmError("truncated header", pos)
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        yield buf[start:pos], start
        count += 1
    if pos >= n or not buf[pos:pos + 1].isspace():
        raise PgmError("missing whitespace before pixel data", pos)
    yield None, pos + 1


def parse_pgm(buf):
    tok = _tokens(buf)
    magic, off = next(tok)
    if magic != b"P5":
        raise PgmError(f"bad magic {magic!r}, expected b'P5'", off)
    dims = []
    for what in ("width", "height", "maxval"):
        raw, off = next(tok)
        if not raw.isdigit():
            raise PgmError(f"{what} is not a positive integer: {raw!r}", off)
        dims.append((int(raw), off))
    (width, w_off), (height, h_off), (maxval, m_off) = dims
    if width < 1:
        raise PgmError("width must be positive", w_off)
    if height < 1:
        raise PgmError("height must be positive", h_off)
    if maxval != 255:
        raise PgmError(f"only maxval 255 is supported, got {maxval}", m_off)
    _, data_off = next(tok)
    need = width * height
    have = len(buf) - data_off
    if have < need:
        raise PgmError(f"expected {need} pixel bytes, found {have}", data_off + max(have, 0))
    pixels = np.frombuffer(buf, dtype=np.uint8, count=need, offset=data_off)
    return pixels.reshape(height, width).astype(np.float64) / 255.0


def image_read(path):
    """Load a P5 PGM as a float matrix in [0, 1]."""
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def encode_pgm(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("image must be 2-D")
    q = np.rint(np.clip(X, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P5\n{X.shape[1]} {X.shape[0]}\n255\n".encode("ascii")
    return header + q.tobytes()


def image_write(path, X):
    """Write a matrix in [0, 1] as an 8-bit P5 PGM (values clipped, rounded to v/255)."""
    with open(path, "wb") as fh:
        fh.write(encode_pgm(X))
