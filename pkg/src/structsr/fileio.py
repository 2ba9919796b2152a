"""8-bit image files: PNG through Pillow, binary PPM/PGM without dependencies."""

from pathlib import Path

import numpy as np

from .imagecore import ImageBuf, ImageError

IMAGE_SUFFIXES = (".png", ".ppm", ".pgm")


def to_uint8(img):
    return np.round(np.clip(img.to_hwc(), 0.0, 1.0) * 255.0).astype(np.uint8)


def from_uint8(arr):
    return ImageBuf.from_hwc(arr.astype(np.float64) / 255.0)


def _read_token(buf, pos):
    while True:
        while buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while buf[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        break
    start = pos
    while pos < len(buf) and not buf[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ImageError("truncated PNM header")
    return buf[start:pos], pos


def read_pnm(path):
    buf = Path(path).read_bytes()
    magic, pos = _read_token(buf, 0)
    if magic not in (b"P5", b"P6"):
        raise ImageError(f"{path}: unsupported PNM magic {magic!r}")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise ImageError(f"{path}: only 8-bit PNM supported (maxval {maxval})")
    channels = 3 if magic == b"P6" else 1
    n = width * height * channels
    raw = np.frombuffer(buf, dtype=np.uint8, count=n, offset=pos + 1)
    shape = (height, width, channels) if channels == 3 else (height, width)
    return from_uint8(raw.reshape(shape))


def write_pnm(img, path):
    arr = to_uint8(img)
    magic = b"P6" if img.channels == 3 else b"P5"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    Path(path).write_bytes(header + arr.tobytes())


def read_image(path):
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pgm"):
        return read_pnm(path)
    from PIL import Image

    try:
        with Image.open(path) as im:
            im = im.convert("L" if im.mode in ("L", "I", "I;16", "1") else "RGB")
            return from_uint8(np.asarray(im))
    except (OSError, SyntaxError) as exc:
        raise ImageError(f"{path}: {exc}") from exc


def write_image(img, path):
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pgm"):
        write_pnm(img, path)
        return
    from PIL import Image

    Image.fromarray(to_uint8(img)).save(path)
