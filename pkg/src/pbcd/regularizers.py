"""Separable regularizers and their exact proximal maps in the weighted norm.

Each block i carries one regularizer; the prox of the full vector therefore
splits into independent per-block (in fact per-coordinate) problems

    min_u  psi(u) + w/2 * (u - v)^2,

all solved in closed form.  Every kind here is a special case of
"l1 weight plus box": soft-threshold at lam/w, then clamp to [lb, ub].
That composition is exact for separable one-dimensional problems: the
unconstrained minimizer of the convex function psi(u) + w/2 (u-v)^2 is the
soft-threshold value, and clipping a one-dimensional convex function's
minimizer into an interval yields the constrained minimizer because the
function is nonincreasing left of the minimizer and nondecreasing right of
it.  Ties at the threshold boundary (|v| == lam/w) map to 0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Zero:
    """No regularization on this block."""


@dataclass(frozen=True)
class L1:
    """lam * ||x||_1 on this block."""

    lam: float

    def __post_init__(self):
        if not (self.lam >= 0.0):
            raise InputError("l1 weight must be >= 0")


@dataclass(frozen=True)
class Box:
    """Indicator of {lb <= x <= ub} (componentwise, scalars broadcast)."""

    lb: object
    ub: object

    def __post_init__(self):
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        if np.any(lb > ub):
            raise InputError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)


@dataclass(frozen=True)
class NonnegOrthant:
    """Indicator of {x >= 0}."""


@dataclass(frozen=True)
class L1Box:
    """lam * ||x||_1 plus the indicator of a box."""

    lam: float
    lb: object
    ub: object

    def __post_init__(self):
        if not (self.lam >= 0.0):
            raise InputError("l1 weight must be >= 0")
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        if np.any(lb > ub):
            raise InputError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)


def soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def prox_block(spec, v, weight):
    """argmin_u psi_i(u) + weight/2 * ||u - v||^2 for one block."""
    if weight <= 0.0:
        raise InputError("prox weight must be > 0")
    v = np.asarray(v, dtype=float)
    if isinstance(spec, Zero):
        return v.copy()
    if isinstance(spec, L1):
        return soft_threshold(v, spec.lam / weight)
    if isinstance(spec, Box):
        return np.clip(v, spec.lb, spec.ub)
    if isinstance(spec, NonnegOrthant):
        return np.maximum(v, 0.0)
    if isinstance(spec, L1Box):
        return np.clip(soft_threshold(v, spec.lam / weight), spec.lb, spec.ub)
    raise InputError(f"unknown regularizer type {type(spec).__name__}")


def value_block(spec, x):
    """psi_i(x) for one block; +inf when an indicator is violated."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Zero):
        return 0.0
    if isinstance(spec, L1):
        return spec.lam * float(np.sum(np.abs(x)))
    if isinstance(spec, Box):
        return 0.0 if np.all(x >= spec.lb) and np.all(x <= spec.ub) else np.inf
    if isinstance(spec, NonnegOrthant):
        return 0.0 if np.all(x >= 0.0) else np.inf
    if isinstance(spec, L1Box):
        if np.all(x >= spec.lb) and np.all(x <= spec.ub):
            return spec.lam * float(np.sum(np.abs(x)))
        return np.inf
    raise InputError(f"unknown regularizer type {type(spec).__name__}")


def project_block(spec, x):
    """Euclidean projection of one block onto dom psi_i."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, (Zero, L1)):
        return x.copy()
    if isinstance(spec, Box):
        return np.clip(x, spec.lb, spec.ub)
    if isinstance(spec, NonnegOrthant):
        return np.maximum(x, 0.0)
    if isinstance(spec, L1Box):
        return np.clip(x, spec.lb, spec.ub)
    raise InputError(f"unknown regularizer type {type(spec).__name__}")


def coordinate_params(spec, size):
    """(lam, lb, ub) arrays of length `size` describing the block.

    Every kind is representable as l1-plus-box; the solver uses this to
    vectorize full-vector proximal steps.
    """
    lam = np.zeros(size)
    lb = np.full(size, -np.inf)
    ub = np.full(size, np.inf)
    if isinstance(spec, Zero):
        pass
    elif isinstance(spec, L1):
        lam[:] = spec.lam
    elif isinstance(spec, Box):
        lb[:] = spec.lb
        ub[:] = spec.ub
    elif isinstance(spec, NonnegOrthant):
        lb[:] = 0.0
    elif isinstance(spec, L1Box):
        lam[:] = spec.lam
        lb[:] = spec.lb
        ub[:] = spec.ub
    else:
        raise InputError(f"unknown regularizer type {type(spec).__name__}")
    return lam, lb, ub
