"""Experiment harness: payload injection, FGSM, extraction and the metrics.

Per image the harness records four stages in fixed order: the clean image,
the payload-injected image, FGSM applied to the clean image and FGSM applied
to the injected image. Aggregates are percentages rounded half-up to two
decimals; the accuracy delta is taken between the rounded values, so the
emitted numbers satisfy ``delta == baseline - post`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .attack import AttackConfig, fgsm, linf_distance
from .diffnet import Network, loss, predict
from .errors import CapacityError, DimensionError, StegoError
from .image import Image8
from .stego import StegoConfig, extract, inject

STAGES = ("clean", "injected", "fgsm_clean", "fgsm_injected")
_TWO_PLACES = Decimal("0.01")


def percent(count: int, total: int) -> float:
    """``count / total * 100`` rounded half-up to two decimals."""
    if total <= 0:
        raise ValueError("total must be positive")
    value = (Decimal(count) * 100 / Decimal(total)).quantize(_TWO_PLACES, rounding=ROUND_HALF_UP)
    return float(value)


def _sub2(a: float, b: float) -> float:
    return float(Decimal(repr(a)) - Decimal(repr(b)))


@dataclass(frozen=True)
class StageRecord:
    stage: str
    label: int
    confidence: float
    probabilities: tuple[float, ...]
    loss_value: float

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "label": self.label,
            "confidence": self.confidence,
            "probabilities": list(self.probabilities),
            "loss_value": self.loss_value,
        }


@dataclass
class ImageResult:
    image_id: str
    true_label: int | None
    stages: list[StageRecord]
    payload_injected: bool
    extraction_ok_pre_attack: bool
    extraction_ok_post_attack: bool
    linf_clean_vs_adv: int

    def stage(self, name: str) -> StageRecord:
        return self.stages[STAGES.index(name)]

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "true_label": self.true_label,
            "stages": [s.to_dict() for s in self.stages],
            "payload_injected": self.payload_injected,
            "extraction_ok_pre_attack": self.extraction_ok_pre_attack,
            "extraction_ok_post_attack": self.extraction_ok_post_attack,
            "linf_clean_vs_adv": self.linf_clean_vs_adv,
        }


@dataclass
class ExperimentReport:
    n_images: int
    correct_clean: int | None
    correct_fgsm: int | None
    correct_fgsm_injected: int | None
    baseline_accuracy_pct: float | None
    post_fgsm_accuracy_pct: float | None
    post_fgsm_injected_accuracy_pct: float | None
    delta_accuracy_pct: float | None
    payload_success_count: int
    payload_success_rate_pct: float
    payload_post_attack_success_count: int
    payload_post_attack_success_rate_pct: float
    confidence_increase_fraction_clean_pct: float
    confidence_increase_fraction_injected_pct: float
    label_changes_clean_pct: float
    label_changes_injected_pct: float
    epsilon: int
    bits_per_channel: int
    seed: int
    results: list[ImageResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "results"}
        out["results"] = [r.to_dict() for r in self.results]
        return out

    def summary_lines(self) -> list[str]:
        def fmt(v):
            return "n/a" if v is None else f"{v:.2f}%"

        return [
            f"Baseline Accuracy: {fmt(self.baseline_accuracy_pct)}",
            f"Post-FGSM Accuracy: {fmt(self.post_fgsm_accuracy_pct)}",
            f"Post-FGSM Accuracy on Payload-Injected Images: {fmt(self.post_fgsm_injected_accuracy_pct)}",
            f"Accuracy Delta: {fmt(self.delta_accuracy_pct)}",
            f"Confidence Increase after FGSM (Original Images): {fmt(self.confidence_increase_fraction_clean_pct)}",
            f"Confidence Increase after FGSM (Payload-Injected Images): {fmt(self.confidence_increase_fraction_injected_pct)}",
            f"Payload Injection Success Rate: {fmt(self.payload_success_rate_pct)}",
            f"Payload Extraction after FGSM: {fmt(self.payload_post_attack_success_rate_pct)}",
        ]


_SOURCES = {"clean": ("clean", "fgsm_clean"), "injected": ("injected", "fgsm_injected")}


def confidence_increase_fraction(results: Sequence[ImageResult], variant: str) -> float:
    """Share of images whose top-1 confidence strictly rose under FGSM."""
    if not results:
        raise ValueError("no results")
    before, after = _SOURCES[variant]
    n_up = sum(r.stage(after).confidence > r.stage(before).confidence for r in results)
    return percent(n_up, len(results))


def _label_change_fraction(results, variant):
    before, after = _SOURCES[variant]
    return percent(sum(r.stage(after).label != r.stage(before).label for r in results), len(results))


def summarize(results: Sequence[ImageResult], epsilon: int, bits_per_channel: int = 1,
              seed: int = 42) -> ExperimentReport:
    """Fold per-image results into the aggregate report.

    Accuracy fields are ``None`` unless every image carries a ground-truth
    label.
    """
    results = list(results)
    n = len(results)
    if n == 0:
        raise ValueError("cannot summarize an empty result set")

    labelled = all(r.true_label is not None for r in results)
    correct_clean = correct_fgsm = correct_fgsm_inj = None
    baseline = post = post_inj = delta = None
    if labelled:
        correct_clean = sum(r.stage("clean").label == r.true_label for r in results)
        correct_fgsm = sum(r.stage("fgsm_clean").label == r.true_label for r in results)
        correct_fgsm_inj = sum(r.stage("fgsm_injected").label == r.true_label for r in results)
        baseline = percent(correct_clean, n)
        post = percent(correct_fgsm, n)
        post_inj = percent(correct_fgsm_inj, n)
        delta = _sub2(baseline, post)

    ok_pre = sum(r.extraction_ok_pre_attack for r in results)
    ok_post = sum(r.extraction_ok_post_attack for r in results)
    return ExperimentReport(
        n_images=n,
        correct_clean=correct_clean,
        correct_fgsm=correct_fgsm,
        correct_fgsm_injected=correct_fgsm_inj,
        baseline_accuracy_pct=baseline,
        post_fgsm_accuracy_pct=post,
        post_fgsm_injected_accuracy_pct=post_inj,
        delta_accuracy_pct=delta,
        payload_success_count=ok_pre,
        payload_success_rate_pct=percent(ok_pre, n),
        payload_post_attack_success_count=ok_post,
        payload_post_attack_success_rate_pct=percent(ok_post, n),
        confidence_increase_fraction_clean_pct=confidence_increase_fraction(results, "clean"),
        confidence_increase_fraction_injected_pct=confidence_increase_fraction(results, "injected"),
        label_changes_clean_pct=_label_change_fraction(results, "clean"),
        label_changes_injected_pct=_label_change_fraction(results, "injected"),
        epsilon=int(epsilon),
        bits_per_channel=int(bits_per_channel),
        seed=int(seed),
        results=results,
    )


def _record(net: Network, stage: str, img: Image8, y_ref: int) -> StageRecord:
    x = img.to_unit()
    pred = predict(net, x)
    return StageRecord(stage, pred.label, pred.confidence,
                       tuple(float(p) for p in pred.probabilities), loss(net, x, y_ref))


def _extracts(img: Image8, payload: bytes, cfg: StegoConfig) -> bool:
    try:
        return extract(img, cfg) == payload
    except StegoError:
        return False


def process_image(net: Network, image_id: str, img: Image8, true_label: int | None,
                  payload: bytes, attack_cfg: AttackConfig, stego_cfg: StegoConfig,
                  use_true_label: bool = False) -> ImageResult:
    """Run every stage on one image.

    The attack label is the model's clean prediction unless
    ``use_true_label`` is set and a ground-truth label exists. Stage losses
    are taken against that same label.
    """
    if img.size != net.input_dim:
        raise DimensionError(f"{image_id}: {img.size} pixels, network expects {net.input_dim}")
    clean_pred = predict(net, img.to_unit())
    y_attack = true_label if (use_true_label and true_label is not None) else clean_pred.label

    try:
        injected = inject(img, payload, stego_cfg)
        payload_injected = True
    except CapacityError:
        injected = img
        payload_injected = False

    adv_clean = fgsm(net, img, y_attack, attack_cfg)
    adv_injected = fgsm(net, injected, y_attack, attack_cfg)

    stages = [
        _record(net, "clean", img, y_attack),
        _record(net, "injected", injected, y_attack),
        _record(net, "fgsm_clean", adv_clean, y_attack),
        _record(net, "fgsm_injected", adv_injected, y_attack),
    ]
    return ImageResult(
        image_id=image_id,
        true_label=true_label,
        stages=stages,
        payload_injected=payload_injected,
        extraction_ok_pre_attack=payload_injected and _extracts(injected, payload, stego_cfg),
        extraction_ok_post_attack=payload_injected and _extracts(adv_injected, payload, stego_cfg),
        linf_clean_vs_adv=linf_distance(img, adv_clean),
    )


def run_experiment(net: Network, images: Sequence[Image8], labels: Sequence[int] | None,
                   payload: bytes, attack_cfg: AttackConfig = AttackConfig(),
                   stego_cfg: StegoConfig = StegoConfig(), *, image_ids: Sequence[str] | None = None,
                   use_true_label: bool = False, seed: int = 42) -> ExperimentReport:
    if labels is not None and len(labels) != len(images):
        raise ValueError(f"{len(images)} images but {len(labels)} labels")
    if image_ids is None:
        image_ids = [f"{i:05d}" for i in range(len(images))]
    results = [
        process_image(net, image_ids[i], img, None if labels is None else int(labels[i]),
                      bytes(payload), attack_cfg, stego_cfg, use_true_label)
        for i, img in enumerate(images)
    ]
    return summarize(results, attack_cfg.epsilon, stego_cfg.bits_per_channel, seed)


def mean_stage_loss(report: ExperimentReport, stage: str) -> float:
    return float(np.mean([r.stage(stage).loss_value for r in report.results]))
