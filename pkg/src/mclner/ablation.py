"""Ablation suites: train model variants on shared splits, tabulate F1.

Variant names compose feature switches onto the plain baseline, e.g.
``nn``, ``nn+root``, ``nn+root+tag``, ``nn+root+tensor``,
``nn+root+tag+tensor+feat``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evaluator import EvalReport
from .synth import ENTITY_TYPES
from .tagger import NeuralTagger

DEFAULT_VARIANTS = ("nn", "nn+root", "nn+root+tag", "nn+root+tensor")

_SWITCHES = {
    "root": {"use_root": True},
    "tag": {"use_tag_embedding": True},
    "tensor": {"architecture": "tensor"},
    "feat": {"use_features": True},
}


def variant_params(variant: str) -> dict:
    """Estimator keyword overrides encoded by a variant name."""
    parts = variant.lower().split("+")
    if parts[0] != "nn":
        raise ValueError(f"variant {variant!r} must start with 'nn'")
    params: dict = {}
    for part in parts[1:]:
        if part not in _SWITCHES:
            raise ValueError(f"unknown variant component {part!r} in {variant!r}")
        overrides = _SWITCHES[part]
        if any(params.get(k, None) == v for k, v in overrides.items()):
            raise ValueError(f"duplicate component {part!r} in {variant!r}")
        params.update(overrides)
    return params


@dataclass
class AblationRow:
    variant: str
    per_type: dict[str, float] = field(default_factory=dict)
    overall: float = 0.0
    dev_overall: float = 0.0
    seed_overall: list[float] = field(default_factory=list)


def _mean_f1(reports: list[EvalReport], etype: str | None) -> float:
    if etype is None:
        return float(np.mean([r.f1 for r in reports]))
    return float(np.mean([r.per_type[etype].f1 if etype in r.per_type else 0.0
                          for r in reports]))


def run_ablation(train_split, dev_split, test_split,
                 variants=DEFAULT_VARIANTS, seeds=(0,),
                 base_params: dict | None = None, log_fn=None) -> list[AblationRow]:
    """Train every variant with every seed on the same splits."""
    base_params = dict(base_params or {})
    rows = []
    for variant in variants:
        params = dict(base_params)
        params.update(variant_params(variant))
        test_reports, dev_reports = [], []
        for seed in seeds:
            params["seed"] = seed
            est = NeuralTagger(**params)
            est.fit(train_split, dev=dev_split)
            test_reports.append(est.evaluate(test_split))
            dev_reports.append(est.evaluate(dev_split))
            if log_fn is not None:
                log_fn(f"{variant} seed={seed} "
                       f"dev_f1={dev_reports[-1].f1:.2f} "
                       f"test_f1={test_reports[-1].f1:.2f}")
        row = AblationRow(
            variant=variant,
            per_type={t: _mean_f1(test_reports, t) for t in ENTITY_TYPES},
            overall=_mean_f1(test_reports, None),
            dev_overall=_mean_f1(dev_reports, None),
            seed_overall=[r.f1 for r in test_reports])
        rows.append(row)
    return rows


def format_table(rows: list[AblationRow]) -> str:
    """Fixed-width grid: one variant per row, per-type and overall F1."""
    width = max(len("variant"), *(len(r.variant) for r in rows)) + 2
    header = "variant".ljust(width) + "".join(f"{t:>8}" for t in ENTITY_TYPES)
    header += f"{'Ov':>8}{'dev':>8}"
    lines = [header]
    for row in rows:
        cells = "".join(f"{row.per_type.get(t, 0.0):8.2f}" for t in ENTITY_TYPES)
        lines.append(f"{row.variant.ljust(width)}{cells}"
                     f"{row.overall:8.2f}{row.dev_overall:8.2f}")
    return "\n".join(lines)
