#!/usr/bin/env python3
"""Regenerate data/corpus from the sample images bundled with scikit-image.

Images are downscaled 2x with a box filter. Test crops never overlap the
training crops taken from the same source image.
"""
import argparse
import pathlib

import numpy as np
import skimage.data
from PIL import Image


def load(name):
    im = getattr(skimage.data, name)()
    if isinstance(im, tuple):
        im = im[0]
    im = im[..., :3].astype(np.float64) / 255.0
    h, w = im.shape[0] // 2 * 2, im.shape[1] // 2 * 2
    im = im[:h, :w]
    return 0.25 * (im[0::2, 0::2] + im[1::2, 0::2] + im[0::2, 1::2] + im[1::2, 1::2])


def crop(im, y, x, h, w):
    h = min(h, im.shape[0] - y) // 2 * 2
    w = min(w, im.shape[1] - x) // 2 * 2
    return im[y:y + h, x:x + w]


TEST = [
    ("astronaut", 40, 60, 128, 128),
    ("coffee", 60, 100, 128, 128),
    ("chelsea", 10, 80, 128, 128),
    ("rocket", 80, 150, 128, 128),
    ("stereo_motorcycle", 60, 150, 128, 128),
]

TRAIN = [
    ("astronaut", 0, 190, 256, 66),
    ("astronaut", 170, 0, 86, 256),
    ("coffee", 0, 0, 200, 100),
    ("coffee", 190, 0, 10, 300),
    ("coffee", 0, 230, 200, 70),
    ("chelsea", 0, 0, 150, 80),
    ("chelsea", 0, 210, 150, 15),
    ("rocket", 0, 0, 213, 150),
    ("rocket", 0, 150, 80, 170),
    ("stereo_motorcycle", 0, 0, 250, 150),
    ("stereo_motorcycle", 190, 150, 60, 220),
    ("immunohistochemistry", 0, 0, 256, 256),
    ("retina", 200, 200, 256, 256),
]


def save(im, path):
    Image.fromarray(np.clip(np.round(im * 255.0), 0, 255).astype(np.uint8)).save(path)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    for split, table in (("test", TEST), ("train", TRAIN)):
        (out / split).mkdir(parents=True, exist_ok=True)
        for i, (name, y, x, h, w) in enumerate(table):
            im = crop(load(name), y, x, h, w)
            if im.shape[0] < 16 or im.shape[1] < 16:
                continue
            save(im, out / split / f"{i:02d}_{name}.png")


if __name__ == "__main__":
    main()
