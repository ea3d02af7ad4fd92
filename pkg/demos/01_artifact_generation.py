#!/usr/bin/env python3
"""Walkthrough: coding-artifact generation with a closed measurement loop.

Builds a synthetic stereo item, injects quantization noise (QN) at each
quality level and re-measures the achieved noise-to-mask ratio, then punches
spectral holes (SH) and counts the realized hole rate. Writes the degraded
stereo files and a masked-threshold dump next to this script.
"""

from pathlib import Path

import numpy as np

from stereoqa import (
    ArtifactSpec,
    AudioBuffer,
    QN_NMR_DB,
    SH_HOLE_PROB,
    apply_qn_mono,
    apply_sh_mono,
    masking_threshold,
    measure_nmr,
    process_stereo,
    stft_mono,
    write_wav,
)
from stereoqa.masking import export_threshold_matrix

OUT = Path(__file__).parent / "output" / "01_artifacts"
OUT.mkdir(parents=True, exist_ok=True)
FS = 48000

# --- a small stereo test item: harmonic left, percussive-ish right ---------
t = np.arange(int(1.5 * FS)) / FS
left = sum(0.15 * np.sin(2 * np.pi * f * t + i) for i, f in enumerate((330, 660, 990, 1650)))
rng = np.random.default_rng(7)
right = np.zeros_like(t)
for start in range(0, len(t), FS // 3):
    burst = rng.standard_normal(600) * np.exp(-np.arange(600) / 90.0)
    right[start:start + 600] += 0.4 * burst[: max(0, min(600, len(t) - start))]
item = AudioBuffer(FS, np.vstack([left, right]))
write_wav(item, OUT / "item_ref.wav")

# --- the QN control loop: target in, measured NMR out -----------------------
print("QN control loop (left channel):")
print("  quality  target[dB]  measured[dB]")
clean = item.mono_channel(0)
ref_spec = stft_mono(clean.channel(0), FS)
for quality, target in QN_NMR_DB.items():
    degraded = apply_qn_mono(clean, target, seed=1000 + int(target))
    result = measure_nmr(ref_spec, stft_mono(degraded.channel(0), FS))
    print(f"  {quality}       {target:5.1f}       {result.mean_db:6.2f}")

# --- spectral holes: Bernoulli per band per frame ---------------------------
print("\nSH hole rates (left channel):")
print("  quality  prob   realized")
for quality, prob in SH_HOLE_PROB.items():
    _, mask = apply_sh_mono(clean, prob, seed=2000 + int(prob * 100), return_mask=True)
    print(f"  {quality}      {prob:.2f}   {mask.mean():.3f}   ({mask.size} cells)")

# --- full stereo chains ------------------------------------------------------
for kind, quality in (("QN", "Q3"), ("SH", "Q3")):
    for mode in ("LR", "MS"):
        spec = ArtifactSpec(kind, quality, rng_seed=42)
        out = process_stereo(item, spec, mode)
        name = f"item_{kind}_{quality}_{mode}.wav"
        write_wav(out, OUT / name)
        print(f"wrote {name}  (parameter {spec.parameter})")

# --- masked-threshold dump for inspection -----------------------------------
thresholds = masking_threshold(ref_spec)
export_threshold_matrix(thresholds, OUT / "thresholds_left.txt")
print(f"\nthreshold matrix: {thresholds.num_frames} frames x {thresholds.num_bands} bands "
      f"-> {OUT / 'thresholds_left.txt'}")
