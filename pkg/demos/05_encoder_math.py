"""Feature-encoder geometry and the quantization/loss building blocks.

Everything here is desk-scale math with explicit seeds: frame
arithmetic for the 7-layer conv stack, Gumbel-Softmax codeword
selection, span masking, and the contrastive/diversity losses.
"""

import numpy as np

from asrkit.xlsr_math import (
    ContrastiveBatch,
    EncoderConfig,
    Quantizer,
    QuantizerConfig,
    apply_mask,
    contrastive_loss,
    diversity_loss,
    frame_count,
    gumbel_softmax,
)

cfg = EncoderConfig()
print("== encoder geometry ==")
print(f"strides {cfg.strides}, kernels {cfg.kernels}")
print(f"hop {cfg.hop_samples} samples (20 ms), receptive field "
      f"{cfg.receptive_field_samples} samples (25 ms)")
for seconds in (0.025, 0.5, 1.0, 2.0):
    n = int(seconds * cfg.sample_rate_hz)
    print(f"  {seconds:5.3f} s ({n:6d} samples) -> {frame_count(n, cfg):4d} frames")

print("\n== gumbel-softmax ==")
logits = np.array([2.0, 1.0, 0.0, -1.0])
for tau in (5.0, 1.0, 0.1):
    probs, _ = gumbel_softmax(logits, tau=tau, rng=0)
    print(f"  tau={tau:4.1f} -> {np.round(probs, 3)}")

qcfg = QuantizerConfig(groups=2, entries_per_group=320, temperature=0.5, codeword_dim=8)
print(f"\nproduct quantizer: {qcfg.groups} groups x {qcfg.entries_per_group} entries "
      f"= {qcfg.num_speech_units} possible speech units")
quantizer = Quantizer.random_init(qcfg, latent_dim=16, rng=1)
latent = np.random.default_rng(2).normal(size=16)
q, probs, idx = quantizer.quantize(latent, rng=3)
print(f"selected codewords {tuple(idx)}, quantized vector dim {q.shape[0]}")

print("\n== span masking ==")
latents = np.random.default_rng(4).normal(size=(200, 8))
masked, mask = apply_mask(latents, fill=np.zeros(8), rng=5)
print(f"masked {mask.sum()} of {mask.size} frames ({mask.mean():.0%}; target ~50%)")

print("\n== contrastive loss ==")
rng = np.random.default_rng(6)
context = rng.normal(size=8)
negatives = rng.normal(size=(100, 8))
for label, positive in (("positive = context", context.copy()),
                        ("positive = random", rng.normal(size=8))):
    loss, grad = contrastive_loss(ContrastiveBatch(context, positive, negatives, 0.1))
    print(f"  {label:20} loss {loss:7.3f}   |grad| {np.linalg.norm(grad):6.3f}")

print("\n== diversity loss ==")
uniform = np.full((2, 320), 1 / 320)
collapsed = np.zeros((2, 320))
collapsed[:, 0] = 1.0
print(f"  uniform usage  -> {diversity_loss(uniform):.3f}")
print(f"  collapsed usage-> {diversity_loss(collapsed):.3f} (= number of groups)")
