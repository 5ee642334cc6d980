"""Peak counting and the Uni/Bi/Multi label.

Builds one-, two-, and three-component brightness mixtures, smooths them,
and shows how the detected peaks turn into modality labels and pair types.
"""

import numpy as np

from lumibal.datamodel import BrightnessDistribution
from lumibal.modality import (
    ModalityConfig,
    classify,
    detect_peaks,
    pair_type,
    smooth,
)

rng = np.random.default_rng(21)


def mixture(mus, sigma=8.0, n_per=4000):
    samples = np.concatenate([rng.normal(mu, sigma, size=n_per) for mu in mus])
    vals = np.clip(np.rint(samples), 0, 255).astype(np.int64)
    return BrightnessDistribution(np.bincount(vals, minlength=256))


cfg = ModalityConfig(sw=4, rt=0.5)
print("config:", cfg)

for mus in ([120], [70, 180], [50, 120, 200]):
    d = mixture(mus)
    curve = smooth(d, cfg.sw)
    peaks = detect_peaks(curve, cfg.rt)
    label = classify(d, cfg)
    print(f"means {mus}: peaks at {list(peaks.peaks)} -> {label.value}")

# the label depends only on histogram shape, not on pixel count; scaling
# all counts leaves it unchanged
d = mixture([70, 180])
for k in (1, 10):
    dk = BrightnessDistribution(np.asarray(d.counts) * k)
    print(f"x{k}: total={dk.total} label={classify(dk, cfg).value}")

# pair types are unordered combinations of the two images' labels
a = classify(mixture([120]), cfg)
b = classify(mixture([70, 180]), cfg)
print("pair of", a.value, "+", b.value, "->", pair_type(a, b).value)
print("symmetric:", pair_type(b, a).value)
