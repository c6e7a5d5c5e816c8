"""Regenerates the SSIM reference pairs and values used by test_metrics.

Requires numpy, Pillow and scikit-image. Output is deterministic.
"""
import pathlib

import numpy as np
from PIL import Image
from skimage.metrics import structural_similarity

here = pathlib.Path(__file__).parent
rng = np.random.default_rng(20261016)
sizes = [(16, 16), (24, 20), (32, 32), (20, 28), (40, 24), (11, 11), (33, 17), (48, 48), (12, 30), (27, 27)]
lines = ["pair,height,width,ssim"]
for i, (h, w) in enumerate(sizes):
    a = rng.integers(0, 256, size=(h, w, 3)).astype(np.float64)
    # Smooth the first image a little so the pair has structure to compare.
    a = (a + np.roll(a, 1, 0) + np.roll(a, 1, 1)) / 3.0
    noise = rng.normal(0.0, 10.0 + 8.0 * i, size=a.shape)
    b = np.clip(a + noise, 0, 255)
    a8 = np.round(a).astype(np.uint8)
    b8 = np.round(b).astype(np.uint8)
    Image.fromarray(a8).save(here / f"ssim_{i}_a.png")
    Image.fromarray(b8).save(here / f"ssim_{i}_b.png")
    s = structural_similarity(a8 / 255.0, b8 / 255.0, channel_axis=2, data_range=1.0,
                              gaussian_weights=True, sigma=1.5, use_sample_covariance=False)
    lines.append(f"{i},{h},{w},{s:.12f}")
(here / "ssim_reference.csv").write_text("\n".join(lines) + "\n")
