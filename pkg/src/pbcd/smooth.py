"""Smooth component families with exact gradients and Lipschitz constants.

Three families are provided:

* QuadraticResidual -- 0.5 * (a'x - b)^2 for one sparse data row a,
  constant ||a||^2.  The building block of (constrained) lasso problems.
* LogisticLoss -- log(1 + exp(-label * a'x)) / num_samples for one sample,
  constant ||a||^2 / (4 * num_samples).  The 1/num_samples averaging is
  applied to both the value and the constant so the aggregated step
  weights stay consistent with the descent inequality.
* QuadraticConjugateDual -- one summand of the (sign-flipped) dual of a
  linearly constrained strongly convex primal with quadratic terms
  g_j(u) = sigma/2 * ||u - center||^2, whose conjugate is closed form:
  f_j(x) = ||z||^2/(2 sigma) - <center, z> + <x, rhs_part>  with z = A'x.
  Constant ||A||_2^2 / sigma (spectral norm).

Every component evaluates through a small linear cache ("state"): the
residual a'x - b, the inner product a'x, or (z, <x, rhs_part>).  States are
linear in x, so block updates translate into exact additive state deltas;
the solver exploits this for incremental bookkeeping.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import InputError

# Spectral norms are needed to machine accuracy: the descent inequality is
# asserted with slack 1e-9 in the property suite, so an estimate that is low
# by more than ~1e-12 relative would surface as a spurious violation.
_POWER_TOL = 1e-14
_POWER_MAXITER = 1000


def spectral_norm_sq(mat):
    """Largest squared singular value via power iteration on the Gram matrix.

    Deterministic all-ones start; iterates until the Rayleigh quotient is
    stationary to relative 1e-14 (or 1000 iterations).
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim == 1:
        mat = mat[:, None]
    if mat.shape[0] >= mat.shape[1]:
        gram = mat.T @ mat
    else:
        gram = mat @ mat.T
    v = np.ones(gram.shape[0])
    lam = 0.0
    for _ in range(_POWER_MAXITER):
        gv = gram @ v
        nrm = np.linalg.norm(gv)
        if nrm == 0.0:
            return 0.0
        v = gv / nrm
        new_lam = float(v @ (gram @ v))
        if abs(new_lam - lam) <= _POWER_TOL * max(1.0, abs(new_lam)):
            return new_lam
        lam = new_lam
    return lam


def _as_block_parts(blocks, parts, name):
    blocks = np.asarray(blocks, dtype=np.int64)
    if blocks.ndim != 1 or blocks.size == 0:
        raise InputError(f"{name}: need at least one block index")
    if np.any(np.diff(blocks) <= 0):
        raise InputError(f"{name}: block indices must be sorted and unique")
    if len(parts) != blocks.size:
        raise InputError(f"{name}: one coefficient part per block required")
    return blocks, [np.atleast_1d(np.asarray(p, dtype=float)) for p in parts]


@dataclass(frozen=True)
class QuadraticResidual:
    """f(x) = 0.5 * (a'x - b)^2 restricted to the blocks where a is nonzero."""

    blocks: np.ndarray
    coeffs: list
    rhs: float
    lipschitz: float = field(init=False)

    def __post_init__(self):
        blocks, coeffs = _as_block_parts(self.blocks, self.coeffs, "quadratic residual")
        norm_sq = sum(float(c @ c) for c in coeffs)
        if norm_sq <= 0.0:
            raise InputError("quadratic residual built from an all-zero row")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", float(self.rhs))
        object.__setattr__(self, "lipschitz", norm_sq)

    state_size = 1

    def init_state(self, parts):
        r = -self.rhs
        for c, p in zip(self.coeffs, parts):
            r += float(c @ p)
        return np.array([r])

    def value_from_state(self, state):
        return 0.5 * state[0] * state[0]

    def grad_block_from_state(self, state, t):
        return self.coeffs[t] * state[0]

    def state_delta(self, t, dx):
        return np.array([float(self.coeffs[t] @ dx)])

    def value(self, parts):
        return self.value_from_state(self.init_state(parts))


def make_quadratic_residual(blocks, coeffs, rhs):
    """Component for one data row of a least-squares / lasso objective."""
    return QuadraticResidual(blocks=blocks, coeffs=coeffs, rhs=rhs)


@dataclass(frozen=True)
class LogisticLoss:
    """Averaged logistic loss of one labelled sample."""

    blocks: np.ndarray
    coeffs: list
    label: int
    num_samples: int
    lipschitz: float = field(init=False)

    def __post_init__(self):
        blocks, coeffs = _as_block_parts(self.blocks, self.coeffs, "logistic loss")
        if self.label not in (-1, 1):
            raise InputError("logistic label must be -1 or +1")
        if self.num_samples < 1:
            raise InputError("sample count must be >= 1")
        norm_sq = sum(float(c @ c) for c in coeffs)
        if norm_sq <= 0.0:
            raise InputError("logistic sample with all-zero features")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "lipschitz", norm_sq / (4.0 * self.num_samples))

    state_size = 1

    def init_state(self, parts):
        z = 0.0
        for c, p in zip(self.coeffs, parts):
            z += float(c @ p)
        return np.array([z])

    def value_from_state(self, state):
        return float(np.logaddexp(0.0, -self.label * state[0])) / self.num_samples

    def grad_block_from_state(self, state, t):
        s = float(expit(-self.label * state[0]))
        return self.coeffs[t] * (-self.label * s / self.num_samples)

    def state_delta(self, t, dx):
        return np.array([float(self.coeffs[t] @ dx)])

    def value(self, parts):
        return self.value_from_state(self.init_state(parts))


def make_logistic(blocks, coeffs, label, num_samples):
    """Component for one sample of an averaged logistic regression loss."""
    return LogisticLoss(blocks=blocks, coeffs=coeffs, label=label,
                        num_samples=num_samples)


@dataclass(frozen=True)
class QuadraticConjugateDual:
    """Dual summand of a strongly convex quadratic primal term.

    Minimization form of one term of the dual of
        min sum_j sigma_j/2 ||u_j - center_j||^2  s.t.  A u <= rhs:
    with z = A'x restricted to this component's blocks,

        f(x) = ||z||^2 / (2 sigma) - <center, z> + <x, rhs_part>.

    `mats[t]` is the (block_size x inner_dim) slice of this component's
    column block of A for blocks[t]; `rhs_parts[t]` is that block's share of
    the constraint right-hand side (shares must tile the full vector so the
    linear terms add up to <x, rhs> across components).
    """

    blocks: np.ndarray
    mats: list
    sigma: float
    center: np.ndarray
    rhs_parts: list
    lipschitz: float = field(init=False)
    inner_dim: int = field(init=False)

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise InputError("strong convexity parameter sigma must be > 0")
        blocks = np.asarray(self.blocks, dtype=np.int64)
        if blocks.ndim != 1 or blocks.size == 0:
            raise InputError("dual component: need at least one block index")
        if np.any(np.diff(blocks) <= 0):
            raise InputError("dual component: block indices must be sorted and unique")
        mats = [np.atleast_2d(np.asarray(m, dtype=float)) for m in self.mats]
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        rhs_parts = [np.atleast_1d(np.asarray(r, dtype=float)) for r in self.rhs_parts]
        if len(mats) != blocks.size or len(rhs_parts) != blocks.size:
            raise InputError("one matrix slice and rhs share per block required")
        inner = center.size
        for m in mats:
            if m.shape[1] != inner:
                raise InputError("matrix slices must share the conjugate dimension")
        stacked = np.vstack(mats)
        norm_sq = spectral_norm_sq(stacked)
        if norm_sq <= 0.0:
            raise InputError("dual component built from an all-zero column block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "rhs_parts", rhs_parts)
        object.__setattr__(self, "lipschitz", norm_sq / self.sigma)
        object.__setattr__(self, "inner_dim", inner)

    @property
    def state_size(self):
        return self.inner_dim + 1

    def init_state(self, parts):
        z = np.zeros(self.inner_dim)
        lin = 0.0
        for m, r, p in zip(self.mats, self.rhs_parts, parts):
            z += m.T @ p
            lin += float(r @ p)
        return np.concatenate([z, [lin]])

    def value_from_state(self, state):
        z = state[:-1]
        return float(z @ z) / (2.0 * self.sigma) - float(self.center @ z) + state[-1]

    def grad_block_from_state(self, state, t):
        z = state[:-1]
        return self.mats[t] @ (z / self.sigma - self.center) + self.rhs_parts[t]

    def state_delta(self, t, dx):
        return np.concatenate([self.mats[t].T @ dx, [float(self.rhs_parts[t] @ dx)]])

    def value(self, parts):
        return self.value_from_state(self.init_state(parts))


def make_quadratic_conjugate_dual(blocks, mats, sigma, center, rhs_parts):
    """Dual component with a closed-form quadratic conjugate."""
    return QuadraticConjugateDual(blocks=blocks, mats=mats, sigma=sigma,
                                  center=center, rhs_parts=rhs_parts)


def coordinatewise_constants(problem):
    """Per-block coordinate-wise gradient Lipschitz constants.

    Used by the reference stepsize rule that scales per-block constants
    instead of aggregating per-component ones.  Per family:
    quadratic residuals contribute the largest eigenvalue of the stacked
    row Gram on each block (the squared spectral norm of the block column
    of the data matrix); logistic and dual components contribute additive
    per-block terms ||a_i||^2/(4 m) and ||A_ij||^2 / sigma_j.
    """
    part = problem.partition
    scalar = np.zeros(part.num_blocks)
    grams = {}
    for comp in problem.smooth:
        if isinstance(comp, QuadraticResidual):
            for t, i in enumerate(comp.blocks):
                g = grams.get(int(i))
                if g is None:
                    g = np.zeros((part.block_sizes[i], part.block_sizes[i]))
                    grams[int(i)] = g
                g += np.outer(comp.coeffs[t], comp.coeffs[t])
        elif isinstance(comp, LogisticLoss):
            for t, i in enumerate(comp.blocks):
                c = comp.coeffs[t]
                scalar[i] += float(c @ c) / (4.0 * comp.num_samples)
        elif isinstance(comp, QuadraticConjugateDual):
            for t, i in enumerate(comp.blocks):
                scalar[i] += spectral_norm_sq(comp.mats[t]) / comp.sigma
        else:
            raise InputError(f"unknown smooth component type {type(comp).__name__}")
    out = scalar.copy()
    for i, g in grams.items():
        out[i] += float(np.linalg.eigvalsh(g)[-1])
    return out
