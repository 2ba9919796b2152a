"""Slow, loop-based reference implementations used only by the tests.

Each one is written from the defining formula with no code shared with the
package, so agreement is evidence rather than tautology.
"""

import math

import numpy as np


def catmull_rom(x, a=-0.5):
    x = abs(x)
    if x <= 1:
        return (a + 2) * x ** 3 - (a + 3) * x ** 2 + 1
    if x < 2:
        return a * x ** 3 - 5 * a * x ** 2 + 8 * a * x - 4 * a
    return 0.0


def bicubic_direct(plane, new_w, new_h):
    """Each output pixel from the 4x4 neighbourhood, coordinates clamped."""
    h, w = plane.shape
    sx, sy = w / new_w, h / new_h
    out = np.zeros((new_h, new_w))
    for i in range(new_h):
        y = (i + 0.5) * sy - 0.5
        y0 = math.floor(y)
        for j in range(new_w):
            x = (j + 0.5) * sx - 0.5
            x0 = math.floor(x)
            acc = 0.0
            for m in range(y0 - 1, y0 + 3):
                wy = catmull_rom(y - m)
                for n in range(x0 - 1, x0 + 3):
                    acc += wy * catmull_rom(x - n) * plane[min(max(m, 0), h - 1), min(max(n, 0), w - 1)]
            out[i, j] = acc
    return out


def gaussian_kernel_2d(sigma):
    r = math.ceil(3 * sigma)
    k = np.array([[math.exp(-(u * u + v * v) / (2 * sigma * sigma)) for v in range(-r, r + 1)]
                  for u in range(-r, r + 1)])
    return k / k.sum()


def convolve_clamped(plane, kernel):
    """Direct 2-D correlation with clamp-to-edge sampling."""
    h, w = plane.shape
    r = kernel.shape[0] // 2
    out = np.zeros_like(plane, dtype=float)
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for u in range(-r, r + 1):
                for v in range(-r, r + 1):
                    acc += kernel[u + r, v + r] * plane[min(max(i + u, 0), h - 1), min(max(j + v, 0), w - 1)]
            out[i, j] = acc
    return out


def ssim_windows(x, y, size=11, sigma=1.5, c1=1e-4, c2=9e-4):
    """Per-window SSIM with two-pass weighted moments, averaged over valid positions."""
    h, w = x.shape
    size = min(size, h, w)
    if size % 2 == 0:
        size -= 1
    c = size // 2
    if sigma is None:
        win = np.full((size, size), 1.0 / size ** 2)
    else:
        win = np.array([[math.exp(-((u - c) ** 2 + (v - c) ** 2) / (2 * sigma ** 2)) for v in range(size)]
                        for u in range(size)])
        win /= win.sum()
    vals = []
    for i in range(h - size + 1):
        for j in range(w - size + 1):
            px = x[i:i + size, j:j + size]
            py = y[i:i + size, j:j + size]
            mx = float(np.sum(win * px))
            my = float(np.sum(win * py))
            vx = float(np.sum(win * (px - mx) ** 2))
            vy = float(np.sum(win * (py - my) ** 2))
            cxy = float(np.sum(win * (px - mx) * (py - my)))
            vals.append(((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


def alpha_bar_logsum(T, beta_start, beta_end):
    betas = [beta_start + (beta_end - beta_start) * k / (T - 1) for k in range(T)]
    return math.exp(math.fsum(math.log1p(-b) for b in betas))


def dct_basis(n=8):
    """Orthonormal DCT-II rows from the textbook cosine definition."""
    m = np.zeros((n, n))
    for k in range(n):
        scale = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        for i in range(n):
            m[k, i] = scale * math.cos(math.pi * (2 * i + 1) * k / (2 * n))
    return m


def jpeg_block_roundtrip(plane, qtable):
    """Level-shifted 8x8 DCT, quantize, dequantize, inverse; edge-padded then cropped."""
    h, w = plane.shape
    ph, pw = -(-h // 8) * 8, -(-w // 8) * 8
    padded = np.pad(plane * 255.0, ((0, ph - h), (0, pw - w)), mode="edge")
    d = dct_basis()
    out = np.empty_like(padded)
    for i in range(0, ph, 8):
        for j in range(0, pw, 8):
            block = padded[i:i + 8, j:j + 8] - 128.0
            coef = d @ block @ d.T
            coef = np.round(coef / qtable) * qtable
            out[i:i + 8, j:j + 8] = d.T @ coef @ d + 128.0
    return out[:h, :w] / 255.0
