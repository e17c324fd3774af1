"""Cubic Bezier separators: evaluation, uniform sampling, least-squares fitting
and the index-aligned separator distance.

Points are ``(x, y)`` in image pixels. A control quad is a ``(4, 2)`` array
``[P0, P1, P2, P3]``; sample points are a ``(T, 2)`` array in curve order.
"""

from dataclasses import dataclass
from enum import Enum
from math import comb
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, DomainError, UnderdeterminedError

DEFAULT_T = 15
RIDGE = 1e-12


class SepClass(str, Enum):
    EXPLICIT = "explicit"
    IMPLICIT = "implicit"
    BACKGROUND = "background"


# column order of a 3-way class score vector
CLASS_ORDER = (SepClass.EXPLICIT, SepClass.IMPLICIT, SepClass.BACKGROUND)


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_control(ctrl):
    c = np.asarray(ctrl, dtype=float)
    if c.shape != (4, 2):
        raise DomainError(f"control quad must have shape (4, 2), got {c.shape}")
    if not np.all(np.isfinite(c)):
        raise DomainError("control points must be finite")
    return c


def as_points(points):
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise DomainError(f"sample points must have shape (T, 2), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise DomainError("sample points must be finite")
    return p


def bernstein_matrix(t):
    """Rows ``[b03(t), b13(t), b23(t), b33(t)]`` for each parameter value."""
    t = np.asarray(t, dtype=float)[:, None]
    i = np.arange(4)[None, :]
    coeff = np.array([comb(3, k) for k in range(4)], dtype=float)[None, :]
    return coeff * t**i * (1.0 - t) ** (3 - i)


def uniform_params(T):
    return np.arange(T, dtype=float) / (T - 1)


def evaluate_bezier(ctrl, t):
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    c = as_control(ctrl)
    return bernstein_matrix([t])[0] @ c


def sample_uniform(ctrl, T=DEFAULT_T):
    """``B(i / (T - 1))`` for ``i = 0..T-1``; the endpoints are exactly P0 and P3."""
    if T < 2:
        raise DomainError(f"T must be >= 2, got {T}")
    c = as_control(ctrl)
    return bernstein_matrix(uniform_params(T)) @ c


def fit_least_squares(points):
    """Fit control points to ``T >= 4`` samples taken at uniform parameters.

    Returns ``(control, residual)`` where residual is the RMS point error of
    the fitted curve resampled at the same parameters.
    """
    s = as_points(points)
    T = len(s)
    if T < 4:
        raise UnderdeterminedError(f"least-squares cubic fit needs at least 4 points, got {T}")
    if np.all(s == s[0]):
        raise DegenerateInputError("all sample points coincide")
    A = bernstein_matrix(uniform_params(T))
    normal = A.T @ A + RIDGE * np.eye(4)
    ctrl = np.linalg.solve(normal, A.T @ s)
    err = A @ ctrl - s
    residual = float(np.sqrt(np.mean(np.sum(err**2, axis=1))))
    return ctrl, residual


def separator_distance(a, b):
    """Mean Euclidean distance between index-aligned sample points."""
    a = np.asarray(a.samples if isinstance(a, Separator) else a, dtype=float)
    b = np.asarray(b.samples if isinstance(b, Separator) else b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"sample count mismatch: {a.shape} vs {b.shape}")
    return float(np.mean(np.hypot(a[:, 0] - b[:, 0], a[:, 1] - b[:, 1])))


@dataclass(frozen=True, eq=False)
class Separator:
    """A scored separator proposal.

    ``class_probs`` optionally holds the 3-way (explicit, implicit,
    background) class distribution; when present, matching credits the
    probability of the ground-truth class instead of ``score``.
    """

    samples: np.ndarray
    cls: SepClass = SepClass.EXPLICIT
    score: float = 1.0
    control: Optional[np.ndarray] = None
    class_probs: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _readonly(as_points(self.samples)))
        object.__setattr__(self, "cls", SepClass(self.cls))
        if not 0.0 <= self.score <= 1.0:
            raise DomainError(f"score must lie in [0, 1], got {self.score}")
        object.__setattr__(self, "score", float(self.score))
        if self.control is not None:
            object.__setattr__(self, "control", _readonly(as_control(self.control)))
        if self.class_probs is not None:
            p = _readonly(self.class_probs)
            if p.shape != (3,) or np.any(p < 0):
                raise DomainError("class_probs must be 3 non-negative values")
            object.__setattr__(self, "class_probs", p)

    @classmethod
    def from_class_probs(cls, samples, probs, control=None):
        """Build from a 3-way class distribution.

        The class is the argmax; the ranking score is the larger of the
        explicit and implicit probabilities, so suppression stays
        class-agnostic.
        """
        p = np.asarray(probs, dtype=float)
        label = CLASS_ORDER[int(np.argmax(p))]
        return cls(samples, label, float(max(p[0], p[1])), control, p)

    @classmethod
    def from_control(cls, ctrl, T=DEFAULT_T, **kw):
        c = as_control(ctrl)
        return cls(sample_uniform(c, T), control=c, **kw)

    @property
    def T(self):
        return len(self.samples)

    def credit(self, gt_cls):
        """Confidence this proposal assigns to ``gt_cls``."""
        if self.class_probs is None:
            return self.score
        return float(self.class_probs[CLASS_ORDER.index(SepClass(gt_cls))])

    def refit(self):
        """Copy with fitted control points and samples resampled from them."""
        ctrl, _ = fit_least_squares(self.samples)
        return Separator(sample_uniform(ctrl, self.T), self.cls, self.score, ctrl, self.class_probs)

    def replace(self, **changes):
        fields = dict(samples=self.samples, cls=self.cls, score=self.score,
                      control=self.control, class_probs=self.class_probs)
        fields.update(changes)
        return Separator(**fields)

    def same_as(self, other):
        def eq_opt(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (
            np.array_equal(self.samples, other.samples)
            and self.cls == other.cls
            and self.score == other.score
            and eq_opt(self.control, other.control)
            and eq_opt(self.class_probs, other.class_probs)
        )
