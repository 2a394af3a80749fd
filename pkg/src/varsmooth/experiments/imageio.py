"""PGM and CSV readers/writers for images and labelled datasets."""

from __future__ import annotations

import csv
import os

import numpy as np

__all__ = [
    "read_pgm",
    "write_pgm",
    "read_csv_image",
    "write_csv_image",
    "read_image",
    "write_two_column",
    "read_dataset_csv",
    "write_dataset_csv",
]


def _pgm_tokens(data: bytes):
    # header tokens, skipping '#' comments; yields (token, end_offset)
    i, n = 0, len(data)
    while i < n:
        c = data[i:i + 1]
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) or ASCII (P2) PGM; returns floats in ``[0, 1]``."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
    except StopIteration:
        raise ValueError(f"{path}: truncated PGM header") from None
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: not a PGM file (magic {magic!r})")
    w, h, maxval = int(width), int(height), int(maxval)
    if not 0 < maxval < 65536:
        raise ValueError(f"{path}: invalid maxval {maxval}")
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.uint8
        raw = np.frombuffer(data, dtype=dtype, count=w * h, offset=end + 1)
    else:
        raw = np.array([int(t) for t, _ in tokens][: w * h])
    if raw.size != w * h:
        raise ValueError(f"{path}: expected {w * h} pixels, found {raw.size}")
    return raw.reshape(h, w).astype(float) / maxval


def write_pgm(path, image, binary=True):
    """Write a ``[0, 1]`` image as 8-bit PGM (values are clipped)."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("write_pgm expects a 2-D image")
    q = np.round(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(q.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode("ascii"))
            for row in q:
                fh.write((" ".join(map(str, row)) + "\n").encode("ascii"))


def read_csv_image(path) -> np.ndarray:
    img = np.loadtxt(path, delimiter=",", ndmin=2)
    return img.astype(float)


def write_csv_image(path, image):
    np.savetxt(path, np.asarray(image, dtype=float), delimiter=",", fmt="%.17g")


def read_image(path) -> np.ndarray:
    """Dispatch on extension: ``.pgm`` or ``.csv``."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".pgm":
        return read_pgm(path)
    if ext == ".csv":
        return read_csv_image(path)
    raise ValueError(f"unsupported image format {ext!r}; use .pgm or .csv")


def write_two_column(path, xs, ys):
    """Whitespace-separated data file readable by gnuplot."""
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{x} {y!r}\n")


def read_dataset_csv(path):
    """Rows ``label,feature1,...,featureD``; an optional non-numeric header is skipped."""
    labels, rows = [], []
    with open(path, newline="") as fh:
        for i, rec in enumerate(csv.reader(fh)):
            if not rec:
                continue
            try:
                vals = [float(v) for v in rec]
            except ValueError:
                if i == 0:
                    continue
                raise
            labels.append(vals[0])
            rows.append(vals[1:])
    X = np.array(rows, dtype=float)
    y = np.array(labels, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"{path}: no data rows")
    return X, y


def write_dataset_csv(path, X, y):
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label"] + [f"feature{j + 1}" for j in range(X.shape[1])])
        for lab, row in zip(y, X):
            w.writerow([int(lab)] + [repr(float(v)) for v in row])
