"""Binary PPM (P6) image input/output.

Images are float64 arrays of shape (height, width, 3) with channels in
[0, 1]; quantization to 8 bits happens only at write time.
"""

import os
import tempfile

import numpy as np


def write_ppm(image, path):
    """Write a float image as binary P6, maxval 255, atomically.

    Channels are clamped to [0, 1] and rounded to the nearest 8-bit level.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) image, got shape {image.shape}")
    height, width = image.shape[:2]
    data = np.rint(255.0 * np.clip(image, 0.0, 1.0)).astype(np.uint8)
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".ppm.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(data.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_token(fh):
    # PPM tokens are whitespace separated; '#' starts a comment to EOL.
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            break
        if ch == b"#":
            while ch and ch != b"\n":
                ch = fh.read(1)
            continue
        if ch.isspace():
            if token:
                break
            continue
        token += ch
    if not token:
        raise ValueError("truncated PPM header")
    return token


def read_ppm(path):
    """Read a binary P6 file into a float image in [0, 1]."""
    with open(path, "rb") as fh:
        magic = _read_token(fh)
        if magic != b"P6":
            raise ValueError(f"{path}: not a binary PPM (magic {magic!r})")
        width = int(_read_token(fh))
        height = int(_read_token(fh))
        maxval = int(_read_token(fh))
        if maxval != 255:
            raise ValueError(f"{path}: unsupported maxval {maxval}")
        raw = fh.read(width * height * 3)
    if len(raw) != width * height * 3:
        raise ValueError(f"{path}: truncated pixel data")
    data = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
    return data.astype(float) / 255.0
