"""Desk-scale math of the wav2vec2/XLSR building blocks.

Covers the convolutional feature-encoder geometry (frame arithmetic,
receptive field), Gumbel-Softmax product quantization, span masking,
and the contrastive/diversity losses, all as deterministic numpy
functions with explicit seeds. No training and no learned weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotNormalized, TooShort, ZeroVector


@dataclass(frozen=True)
class EncoderConfig:
    """Geometry of the 7-layer feature encoder (16 kHz input).

    Defaults give a 320-sample hop (20 ms) and a 400-sample receptive
    field (25 ms); context_dim is 768 for the BASE stack and 1024 for
    LARGE.
    """

    channels: int = 512
    strides: tuple[int, ...] = (5, 2, 2, 2, 2, 2, 2)
    kernels: tuple[int, ...] = (10, 3, 3, 3, 3, 2, 2)
    sample_rate_hz: int = 16000
    context_dim: int = 768
    latent_dim: int = 512

    def __post_init__(self):
        if len(self.strides) != len(self.kernels):
            raise ValueError("strides and kernels must have equal length")
        if self.hop_samples != 320:
            raise ValueError("stride product must be 320 samples (20 ms at 16 kHz)")
        if self.receptive_field_samples != 400:
            raise ValueError("receptive field must be 400 samples (25 ms)")

    @property
    def hop_samples(self) -> int:
        prod = 1
        for s in self.strides:
            prod *= s
        return prod

    @property
    def receptive_field_samples(self) -> int:
        rf, jump = 1, 1
        for k, s in zip(self.kernels, self.strides):
            rf += (k - 1) * jump
            jump *= s
        return rf

    @classmethod
    def large(cls) -> "EncoderConfig":
        return cls(context_dim=1024)


def frame_count(samples: int, cfg: EncoderConfig | None = None) -> int:
    """Output frames for a waveform of `samples` samples.

    Chains floor((L - kernel)/stride) + 1 across the conv layers.
    Raises TooShort below the 400-sample receptive field.
    """
    cfg = cfg or EncoderConfig()
    if samples < cfg.receptive_field_samples:
        raise TooShort(
            f"waveform of {samples} samples is shorter than the "
            f"{cfg.receptive_field_samples}-sample receptive field"
        )
    length = samples
    for k, s in zip(cfg.kernels, cfg.strides):
        length = (length - k) // s + 1
    return length


@dataclass(frozen=True)
class QuantizerConfig:
    """Product-quantizer shape: G codebooks of V entries each."""

    groups: int = 2
    entries_per_group: int = 320
    temperature: float = 2.0
    codeword_dim: int = 256

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.codeword_dim % self.groups:
            raise ValueError("codeword_dim must divide evenly across groups")

    @property
    def num_speech_units(self) -> int:
        return self.entries_per_group**self.groups


def _as_rng(rng: np.random.Generator | int) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def gumbel_softmax(
    logits: np.ndarray,
    tau: float,
    rng: np.random.Generator | int,
    hard: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Sample from the Gumbel-Softmax distribution over `logits`.

    Returns (probs, onehot): probs is the temperature-softened sample
    p_j = softmax((l_j + g_j)/tau) with g = -log(-log(u)); onehot is
    the argmax indicator when hard=True, else None.
    """
    if tau <= 0:
        raise ValueError("temperature must be positive")
    rng = _as_rng(rng)
    logits = np.asarray(logits, dtype=np.float64)
    u = rng.uniform(size=logits.shape)
    gumbel = -np.log(-np.log(u))
    scaled = (logits + gumbel) / tau
    scaled -= scaled.max(axis=-1, keepdims=True)
    expd = np.exp(scaled)
    probs = expd / expd.sum(axis=-1, keepdims=True)
    if not hard:
        return probs, None
    onehot = np.zeros_like(probs)
    idx = probs.argmax(axis=-1)
    np.put_along_axis(onehot, np.expand_dims(idx, -1), 1.0, axis=-1)
    return probs, onehot


@dataclass
class Quantizer:
    """Linear logit map plus codebooks; one codeword per group, concatenated."""

    config: QuantizerConfig
    codebooks: np.ndarray  # (G, V, codeword_dim/G)
    weight: np.ndarray  # (G, V, latent_dim)
    bias: np.ndarray | None = None  # (G, V)

    def __post_init__(self):
        g, v = self.config.groups, self.config.entries_per_group
        sub = self.config.codeword_dim // g
        if self.codebooks.shape != (g, v, sub):
            raise DimensionMismatch(
                f"codebooks shape {self.codebooks.shape}, expected {(g, v, sub)}"
            )
        if self.weight.shape[:2] != (g, v):
            raise DimensionMismatch(f"weight shape {self.weight.shape} not ({g}, {v}, latent)")
        if self.bias is not None and self.bias.shape != (g, v):
            raise DimensionMismatch(f"bias shape {self.bias.shape}, expected {(g, v)}")

    @classmethod
    def random_init(
        cls, config: QuantizerConfig, latent_dim: int, rng: np.random.Generator | int
    ) -> "Quantizer":
        rng = _as_rng(rng)
        g, v = config.groups, config.entries_per_group
        sub = config.codeword_dim // g
        return cls(
            config=config,
            codebooks=rng.normal(size=(g, v, sub)),
            weight=rng.normal(size=(g, v, latent_dim)) / np.sqrt(latent_dim),
            bias=np.zeros((g, v)),
        )

    def logits(self, latent: np.ndarray) -> np.ndarray:
        latent = np.asarray(latent, dtype=np.float64)
        if latent.shape != (self.weight.shape[2],):
            raise DimensionMismatch(
                f"latent dim {latent.shape} does not match weight {self.weight.shape[2]}"
            )
        out = np.einsum("gvd,d->gv", self.weight, latent)
        if self.bias is not None:
            out = out + self.bias
        return out

    def quantize(
        self, latent: np.ndarray, rng: np.random.Generator | int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Select one codeword per group via hard Gumbel-Softmax.

        Returns (quantized vector, per-group soft probs (G, V),
        selected indices (G,)).
        """
        rng = _as_rng(rng)
        logits = self.logits(latent)
        probs, onehot = gumbel_softmax(logits, self.config.temperature, rng, hard=True)
        indices = onehot.argmax(axis=-1)
        parts = [self.codebooks[g, indices[g]] for g in range(self.config.groups)]
        return np.concatenate(parts), probs, indices


def coverage_to_start_probability(coverage: float, span: int) -> float:
    """Per-frame mask-start probability so 1-(1-p)^span hits `coverage`."""
    if not 0 < coverage < 1:
        raise ValueError("coverage must be in (0, 1)")
    return 1.0 - (1.0 - coverage) ** (1.0 / span)


DEFAULT_MASK_SPAN = 10
DEFAULT_MASK_START_P = coverage_to_start_probability(0.5, DEFAULT_MASK_SPAN)


def apply_mask(
    latents: np.ndarray,
    fill: np.ndarray,
    rng: np.random.Generator | int,
    start_probability: float = DEFAULT_MASK_START_P,
    span: int = DEFAULT_MASK_SPAN,
) -> tuple[np.ndarray, np.ndarray]:
    """Replace random spans of rows with the trained fill vector.

    Each frame starts a mask of `span` frames with probability
    `start_probability`; overlapping spans union. Expected interior
    coverage is 1 - (1-p)^span. Returns (masked copy, bool indicator).
    """
    if span < 1:
        raise ValueError("span must be >= 1")
    if not 0 < start_probability < 1:
        raise ValueError("start_probability must be in (0, 1)")
    rng = _as_rng(rng)
    latents = np.asarray(latents, dtype=np.float64)
    fill = np.asarray(fill, dtype=np.float64)
    if latents.ndim != 2 or fill.shape != (latents.shape[1],):
        raise DimensionMismatch(
            f"latents {latents.shape} and fill {fill.shape} are inconsistent"
        )
    t = latents.shape[0]
    starts = rng.uniform(size=t) < start_probability
    mask = np.zeros(t, dtype=bool)
    for i in np.flatnonzero(starts):
        mask[i : i + span] = True
    masked = latents.copy()
    masked[mask] = fill
    return masked, mask


@dataclass
class ContrastiveBatch:
    """One masked position: context vector, true target, K distractors.

    `mask_fill` carries the learned replacement vector used at masked
    positions; it is bookkeeping only and does not enter the loss.
    """

    context: np.ndarray
    positive: np.ndarray
    negatives: np.ndarray  # (K, dim)
    temperature: float = 0.1
    mask_fill: np.ndarray | None = None

    def __post_init__(self):
        self.context = np.asarray(self.context, dtype=np.float64)
        self.positive = np.asarray(self.positive, dtype=np.float64)
        self.negatives = np.atleast_2d(np.asarray(self.negatives, dtype=np.float64))
        dim = self.context.shape[0]
        if self.positive.shape != (dim,) or self.negatives.shape[1] != dim:
            raise DimensionMismatch("context, positive, and negatives must share one dimension")
        if self.negatives.shape[0] < 1:
            raise ValueError("need at least one distractor")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


def _cosine_and_grad(c: np.ndarray, q: np.ndarray) -> tuple[float, np.ndarray]:
    nc = np.linalg.norm(c)
    nq = np.linalg.norm(q)
    if nc == 0.0 or nq == 0.0:
        raise ZeroVector("cosine similarity of a zero-norm vector")
    cos = float(c @ q / (nc * nq))
    grad = q / (nc * nq) - cos * c / (nc * nc)
    return cos, grad


def contrastive_loss(batch: ContrastiveBatch) -> tuple[float, np.ndarray]:
    """InfoNCE-style loss over cosine similarities, with d(loss)/d(context).

    loss = -log( exp(cos(c,q_p)/k) / sum_j exp(cos(c,q_j)/k) ) where j
    ranges over the positive and all distractors.
    """
    c = batch.context
    kappa = batch.temperature
    sims = []
    grads = []
    for q in [batch.positive, *batch.negatives]:
        cos, grad = _cosine_and_grad(c, q)
        sims.append(cos)
        grads.append(grad)
    sims = np.array(sims) / kappa
    shifted = sims - sims.max()
    soft = np.exp(shifted)
    soft /= soft.sum()
    loss = float(-shifted[0] + np.log(np.exp(shifted).sum()))
    grad = np.zeros_like(c)
    for j, g in enumerate(grads):
        weight = soft[j] - (1.0 if j == 0 else 0.0)
        grad += weight * g / kappa
    return loss, grad


def diversity_loss(avg_probs: np.ndarray) -> float:
    """Normalized-entropy deficit summed over groups.

    Input is the batch-averaged soft codeword distribution, shape
    (G, V) or (batch, G, V) (averaged over axis 0 first). Zero when
    every group is uniform, G when every group collapses to one entry.
    """
    p = np.asarray(avg_probs, dtype=np.float64)
    if p.ndim == 3:
        p = p.mean(axis=0)
    if p.ndim != 2:
        raise DimensionMismatch("expected (G, V) or (batch, G, V) probabilities")
    sums = p.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > 1e-6) or np.any(p < 0):
        raise NotNormalized("per-group probabilities must sum to 1")
    v = p.shape[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.where(p > 0, np.log(p), 0.0)
    entropy = -(p * logp).sum(axis=-1)
    return float((1.0 - entropy / np.log(v)).sum())


def self_check(seed: int = 53) -> list[tuple[str, bool, str]]:
    """Deterministic verification battery for the quantizer/loss math.

    Returns (name, passed, detail) rows; the CLI renders them as a
    pass/fail table.
    """
    rng = np.random.default_rng(seed)
    rows: list[tuple[str, bool, str]] = []

    devs = []
    for _ in range(200):
        probs, _ = gumbel_softmax(rng.normal(size=7), tau=0.7, rng=rng)
        devs.append(abs(probs.sum() - 1.0))
    worst = max(devs)
    rows.append(("gumbel softmax normalization", worst <= 1e-9, f"max |sum-1| = {worst:.2e}"))

    hits = 0
    for draw in range(1000):
        _, onehot = gumbel_softmax(np.array([10.0, 0.0, 0.0]), tau=0.01,
                                   rng=seed * 1000 + draw, hard=True)
        hits += int(onehot.argmax() == 0)
    rows.append(("low-temperature one-hot limit", hits >= 995, f"{hits}/1000 draws at argmax"))

    v = 5
    draws = 100_000
    counts = np.zeros(v)
    probs, onehot = gumbel_softmax(np.zeros((draws, v)), tau=1.0, rng=rng, hard=True)
    counts = onehot.sum(axis=0)
    sigma = np.sqrt(draws * (1 / v) * (1 - 1 / v))
    dev = np.abs(counts - draws / v).max()
    rows.append(("equal-logit uniformity (3 sigma)", dev <= 3 * sigma,
                 f"max |count-E| = {dev:.0f}, 3 sigma = {3 * sigma:.0f}"))

    logits = rng.normal(size=9)
    maxima = []
    for tau in (2.0, 1.0, 0.5, 0.1, 0.02):
        probs, _ = gumbel_softmax(logits, tau=tau, rng=seed)  # same noise every call
        maxima.append(probs.max())
    monotone = all(b >= a - 1e-12 for a, b in zip(maxima, maxima[1:]))
    rows.append(("sharpening as temperature drops", monotone,
                 "max prob " + " -> ".join(f"{m:.3f}" for m in maxima)))

    c = np.zeros(8)
    c[0] = 1.0
    same = np.full(8, 0.25)
    batch = ContrastiveBatch(context=c, positive=same, negatives=np.tile(same, (100, 1)),
                             temperature=0.3)
    loss, _ = contrastive_loss(batch)
    dev = abs(loss - np.log(101.0))
    rows.append(("equal-similarity loss = ln(101)", dev <= 1e-9, f"|loss-ln 101| = {dev:.2e}"))

    negs = np.zeros((100, 8))
    negs[:, 1:] = rng.normal(size=(100, 7))
    batch = ContrastiveBatch(context=c, positive=c.copy(), negatives=negs, temperature=1.0)
    loss, _ = contrastive_loss(batch)
    expected = float(np.log(np.e + 100.0) - 1.0)
    dev = abs(loss - expected)
    rows.append(("orthogonal-distractor closed form", dev <= 1e-9, f"|loss-expected| = {dev:.2e}"))

    worst_rel = 0.0
    h = 1e-5
    for _ in range(50):
        dim = 8
        batch = ContrastiveBatch(
            context=rng.normal(size=dim),
            positive=rng.normal(size=dim),
            negatives=rng.normal(size=(20, dim)),
            temperature=float(rng.uniform(0.1, 1.0)),
        )
        _, grad = contrastive_loss(batch)
        fd = np.zeros(dim)
        for j in range(dim):
            delta = np.zeros(dim)
            delta[j] = h
            lo, _ = contrastive_loss(ContrastiveBatch(batch.context - delta, batch.positive,
                                                      batch.negatives, batch.temperature))
            hi, _ = contrastive_loss(ContrastiveBatch(batch.context + delta, batch.positive,
                                                      batch.negatives, batch.temperature))
            fd[j] = (hi - lo) / (2 * h)
        rel = np.abs(grad - fd).max() / max(np.abs(fd).max(), 1e-12)
        worst_rel = max(worst_rel, rel)
    rows.append(("contrastive gradient vs finite differences", worst_rel < 1e-4,
                 f"max relative error = {worst_rel:.2e}"))

    uniform = np.full((2, 4), 0.25)
    onehot_p = np.zeros((2, 4))
    onehot_p[:, 0] = 1.0
    half = np.array([[0.5, 0.5, 0.0, 0.0]])
    ok = (
        abs(diversity_loss(uniform)) <= 1e-12
        and abs(diversity_loss(onehot_p) - 2.0) <= 1e-12
        and abs(diversity_loss(half) - 0.5) <= 1e-12
    )
    rows.append(("diversity loss anchors (0 / G / 0.5)", ok,
                 f"uniform={diversity_loss(uniform):.3f} onehot={diversity_loss(onehot_p):.3f}"))

    masked_total = 0
    frames_total = 0
    for run in range(200):
        latents = np.zeros((1000, 4))
        _, mask = apply_mask(latents, np.ones(4), rng=seed * 7 + run)
        masked_total += int(mask.sum())
        frames_total += mask.size
    coverage = masked_total / frames_total
    rows.append(("mask coverage near 50%", 0.45 <= coverage <= 0.55,
                 f"pooled coverage = {coverage:.3f}"))

    cfg = EncoderConfig()
    ok = frame_count(400, cfg) == 1 and frame_count(16000, cfg) == 49
    detail = f"400 -> {frame_count(400, cfg)}, 16000 -> {frame_count(16000, cfg)}"
    if ok:
        for n in range(400, 2001):
            length = n
            for k, s in zip(cfg.kernels, cfg.strides):
                length = len(range(0, length - k + 1, s))
            if frame_count(n, cfg) != length:
                ok = False
                detail = f"mismatch at N={n}"
                break
    rows.append(("frame arithmetic matches layer simulation", ok, detail))

    return rows
