"""Input coercion shared by the estimator and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .measures import DistortionMeasure, PrivacyMeasure
from .probability import Channel, JointPmf, channel_from_dict, joint_from_dict


def check_joint(data, ndim: int = 2) -> JointPmf:
    """Accept a JointPmf, its JSON dict, or an array of probabilities."""
    if isinstance(data, JointPmf):
        joint = data
    elif isinstance(data, dict):
        joint = joint_from_dict(data)
    else:
        arr = np.asarray(data, dtype=float)
        joint = JointPmf.from_array(arr)
    if joint.ndim != ndim:
        raise ValueError(f"expected a {ndim}-axis joint, got {joint.ndim} axes")
    return joint


def check_channel(ch) -> Channel:
    if isinstance(ch, Channel):
        return ch
    if isinstance(ch, dict):
        return channel_from_dict(ch)
    raise TypeError(f"cannot interpret {type(ch).__name__} as a channel")


def check_delta(delta) -> float:
    if not isinstance(delta, numbers.Real) or not np.isfinite(delta) or delta < 0:
        raise ValueError(f"distortion level must be a finite nonnegative number, got {delta!r}")
    return float(delta)


def check_privacy(privacy) -> PrivacyMeasure:
    if isinstance(privacy, PrivacyMeasure):
        return privacy
    return PrivacyMeasure(str(privacy))


def check_distortion(dist) -> DistortionMeasure:
    if isinstance(dist, DistortionMeasure):
        return dist
    if isinstance(dist, str):
        return DistortionMeasure(dist)
    return DistortionMeasure.expected(dist)


def parse_grid(spec: str) -> list[float]:
    """``a:b:step`` inclusive of b, or a comma-separated list."""
    if ":" not in spec:
        vals = [float(v) for v in spec.split(",") if v.strip()]
    else:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be a:b:step, got {spec!r}")
        a, b, step = (float(v) for v in parts)
        if step <= 0 or b < a:
            raise ValueError(f"grid must be ascending with a positive step, got {spec!r}")
        n = int(np.floor((b - a) / step + 1e-9)) + 1
        vals = [round(a + i * step, 12) for i in range(n)]
    if any(v < 0 for v in vals) or vals != sorted(vals):
        raise ValueError(f"grid must be nonnegative and ascending, got {spec!r}")
    return vals
