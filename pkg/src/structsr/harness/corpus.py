"""Seeded synthetic HR images: smooth shading, hard-edged shapes, stripes."""

import numpy as np

from ..imagecore import ImageBuf, blur_array


def synthetic_image(size=64, seed=0):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = np.empty((3, size, size))
    for c in range(3):
        gx, gy, off = rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(0.3, 0.7)
        img[c] = off + gx * (xx - 0.5) + gy * (yy - 0.5)

    for _ in range(rng.integers(3, 7)):
        color = rng.uniform(0.05, 0.95, size=3)[:, None, None]
        cx, cy = rng.uniform(0.1, 0.9, size=2)
        if rng.random() < 0.5:
            r = rng.uniform(0.08, 0.25)
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 < r * r
        else:
            hw, hh = rng.uniform(0.06, 0.25, size=2)
            mask = (np.abs(xx - cx) < hw) & (np.abs(yy - cy) < hh)
        img = np.where(mask[None], color, img)

    freq = rng.uniform(4, 10)
    theta = rng.uniform(0, np.pi)
    stripes = 0.5 + 0.5 * np.sin(2 * np.pi * freq * (np.cos(theta) * xx + np.sin(theta) * yy))
    band = (yy > 0.75) | (xx < 0.15)
    img = np.where(band[None], 0.3 * img + 0.6 * stripes[None], img)

    img = blur_array(img, 0.5)
    return ImageBuf(np.clip(img, 0.0, 1.0))


def synthetic_corpus(n=10, size=64, seed=0):
    """``n`` images with ids ``img000 ..``, each from its own derived seed."""
    seeds = np.random.SeedSequence(seed).generate_state(n)
    return [(f"img{i:03d}", synthetic_image(size, int(s))) for i, s in enumerate(seeds)]
