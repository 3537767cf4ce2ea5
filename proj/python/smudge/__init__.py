"""Grounding-aware scoring for document VQA predictions."""

import json as _json

from ._core import (
    Error,
    ValidationError,
    anls,
    classify_answer_type,
    composite,
    decay,
    nls,
)

__all__ = [
    "Error",
    "ValidationError",
    "anls",
    "classify_answer_type",
    "composite",
    "decay",
    "nls",
    "score_sample",
    "score_dataset",
]


def _dump(obj):
    if obj is None:
        return ""
    return obj if isinstance(obj, str) else _json.dumps(obj)


def score_sample(sample, prediction, ocr, config=None):
    """Score one prediction against a ground-truth sample on its OCR document.

    sample and ocr are dicts in the on-disk JSON layout; prediction may be None.
    """
    return _json.loads(_core_score_sample(_dump(sample), prediction, _dump(ocr), _dump(config)))


def score_dataset(gt_path, ocr_dir, pred_path, config=None, threads=0):
    """Score a prediction file; returns the report document as a dict."""
    return _json.loads(
        _core_score_dataset(str(gt_path), str(ocr_dir), str(pred_path), _dump(config), threads)
    )


from ._core import _score_dataset as _core_score_dataset  # noqa: E402
from ._core import _score_sample as _core_score_sample  # noqa: E402
