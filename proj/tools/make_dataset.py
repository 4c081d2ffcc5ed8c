#!/usr/bin/env python3
"""Builds the bundled digit dataset as IDX files.

The sklearn 8x8 digits are upscaled to size x size with bilinear
interpolation, contrast-scaled, and split into a train part (first 797
originals, each with 8 baked-in augmentations) and a test part (last
1000). The low contrast keeps input-space class margins small enough
that a 16/255 perturbation budget is meaningful on these easy images.
"""

import argparse
import struct
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits


def bilinear_resize(imgs: np.ndarray, size: int) -> np.ndarray:
    n, h, w = imgs.shape
    ys = np.linspace(0, h - 1, size)
    xs = np.linspace(0, w - 1, size)
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 2)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 2)
    fy = (ys - y0)[None, :, None]
    fx = (xs - x0)[None, None, :]
    a = imgs[:, y0][:, :, x0]
    b = imgs[:, y0][:, :, x0 + 1]
    c = imgs[:, y0 + 1][:, :, x0]
    d = imgs[:, y0 + 1][:, :, x0 + 1]
    return (a * (1 - fy) * (1 - fx) + b * (1 - fy) * fx + c * fy * (1 - fx) + d * fy * fx)


def shift(imgs: np.ndarray, dx: int, dy: int) -> np.ndarray:
    out = np.zeros_like(imgs)
    h, w = imgs.shape[-2:]
    out[..., max(0, dy):h + min(0, dy), max(0, dx):w + min(0, dx)] = \
        imgs[..., max(0, -dy):h + min(0, -dy), max(0, -dx):w + min(0, -dx)]
    return out


def rotate(imgs: np.ndarray, deg: float) -> np.ndarray:
    n, h, w = imgs.shape
    th = np.deg2rad(deg)
    yy, xx = np.meshgrid(np.linspace(-1, 1, h), np.linspace(-1, 1, w), indexing="ij")
    sx = np.cos(th) * xx - np.sin(th) * yy
    sy = np.sin(th) * xx + np.cos(th) * yy
    px = (sx + 1) * (w - 1) / 2
    py = (sy + 1) * (h - 1) / 2
    x0 = np.floor(px).astype(int)
    y0 = np.floor(py).astype(int)
    fx = px - x0
    fy = py - y0
    out = np.zeros_like(imgs)
    for oy in (0, 1):
        for ox in (0, 1):
            xi = x0 + ox
            yi = y0 + oy
            ok = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            wgt = (fx if ox else 1 - fx) * (fy if oy else 1 - fy)
            out += np.where(ok, imgs[:, np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)], 0) * wgt
    return out


def write_idx_images(path: Path, imgs: np.ndarray) -> None:
    q = np.clip(np.rint(imgs * 255), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, *q.shape))
        f.write(q.tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path("data"))
    ap.add_argument("--size", type=int, default=16)
    ap.add_argument("--contrast", type=float, default=0.35)
    ap.add_argument("--test-count", type=int, default=1000)
    ap.add_argument("--target-from", type=int, default=400,
                    help="first original used for the disjoint target-train split")
    args = ap.parse_args()

    d = load_digits()
    imgs = bilinear_resize(d.images.astype(np.float64) / 16.0, args.size) * args.contrast
    labels = d.target.astype(np.int64)

    n_train = len(imgs) - args.test_count
    xtr, ytr = imgs[:n_train], labels[:n_train]
    xte, yte = imgs[n_train:], labels[n_train:]

    augs = [
        lambda t: t,
        lambda t: shift(t, 1, 0),
        lambda t: shift(t, -1, 0),
        lambda t: shift(t, 0, 1),
        lambda t: shift(t, 0, -1),
        lambda t: rotate(t, 10),
        lambda t: rotate(t, -10),
        lambda t: shift(t, 1, 1),
    ]
    xtr_a = np.concatenate([a(xtr) for a in augs])
    ytr_a = np.tile(ytr, len(augs))

    # Disjoint-originals split for a transfer-target model, so source
    # and target never train on the same digit instance.
    xtg = xtr[args.target_from:]
    xtg_a = np.concatenate([a(xtg) for a in augs])
    ytg_a = np.tile(ytr[args.target_from:], len(augs))

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx_images(args.out_dir / "train-images.idx", xtr_a)
    write_idx_labels(args.out_dir / "train-labels.idx", ytr_a)
    write_idx_images(args.out_dir / "target-train-images.idx", xtg_a)
    write_idx_labels(args.out_dir / "target-train-labels.idx", ytg_a)
    write_idx_images(args.out_dir / "test-images.idx", xte)
    write_idx_labels(args.out_dir / "test-labels.idx", yte)
    print(f"train:        {len(xtr_a)} images ({n_train} originals x {len(augs)} augmentations)")
    print(f"target-train: {len(xtg_a)} images (originals {args.target_from}..{n_train - 1})")
    print(f"test:         {len(xte)} images")


if __name__ == "__main__":
    main()
