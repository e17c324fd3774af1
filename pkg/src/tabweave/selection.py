"""Separator NMS and order regularization."""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .bezier import SepClass, Separator, separator_distance
from .errors import DegenerateSeparatorError, DomainError

DEFAULT_SIGMA = 5.0


@dataclass(frozen=True, eq=False)
class OrderedSeparatorSet:
    """Horizontals sorted by mean y, then verticals sorted by mean x.

    Index ``k < n_h`` is horizontal, ``k >= n_h`` vertical.
    """

    separators: List[Separator] = field(default_factory=list)
    n_h: int = 0

    def __post_init__(self):
        object.__setattr__(self, "separators", list(self.separators))
        if not 0 <= self.n_h <= len(self.separators):
            raise DomainError(f"n_h={self.n_h} out of range for {len(self.separators)} separators")
        if any(s.cls == SepClass.BACKGROUND for s in self.separators):
            raise DomainError("ordered set cannot hold background separators")

    def __len__(self):
        return len(self.separators)

    def __getitem__(self, k):
        return self.separators[k]

    def __iter__(self):
        return iter(self.separators)

    @property
    def n_v(self):
        return len(self.separators) - self.n_h

    @property
    def horizontals(self):
        return self.separators[: self.n_h]

    @property
    def verticals(self):
        return self.separators[self.n_h :]

    def is_horizontal(self, k):
        return 0 <= k < self.n_h

    def same_as(self, other):
        return (
            self.n_h == other.n_h
            and len(self) == len(other)
            and all(a.same_as(b) for a, b in zip(self, other))
        )


def _check_T(seps):
    lengths = {s.T for s in seps}
    if len(lengths) > 1:
        raise DomainError(f"separators have mixed sample counts {sorted(lengths)}")


def separator_nms(candidates, sigma=DEFAULT_SIGMA):
    """Greedy suppression by separator distance.

    Background proposals are dropped first. Remaining candidates are visited
    by descending score (stable on ties); a candidate closer than ``sigma`` to
    an already-kept one is removed, regardless of class.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    _check_T(candidates)
    pool = [s for s in candidates if s.cls != SepClass.BACKGROUND]
    order = sorted(range(len(pool)), key=lambda i: -pool[i].score)
    kept = []
    for i in order:
        cand = pool[i]
        if all(separator_distance(k, cand) >= sigma for k in kept):
            kept.append(cand)
    return kept


def is_horizontal(sep):
    """Chord test; a 45 degree chord counts as horizontal."""
    d = sep.samples[-1] - sep.samples[0]
    if d[0] == 0 and d[1] == 0:
        raise DegenerateSeparatorError("separator start and end points coincide")
    return abs(d[1]) <= abs(d[0])


def order_regularize(selected):
    """Group by chord slope, sort horizontals by mean y and verticals by mean x."""
    seps = list(selected)
    if any(s.cls == SepClass.BACKGROUND for s in seps):
        raise DomainError("background separators must be removed before ordering")
    flags = [is_horizontal(s) for s in seps]
    hs = [s for s, h in zip(seps, flags) if h]
    vs = [s for s, h in zip(seps, flags) if not h]
    # sorted() is stable, so equal keys keep input order
    hs = sorted(hs, key=lambda s: float(np.mean(s.samples[:, 1])))
    vs = sorted(vs, key=lambda s: float(np.mean(s.samples[:, 0])))
    return OrderedSeparatorSet(hs + vs, len(hs))
