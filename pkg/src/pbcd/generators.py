"""Problem generation and ingestion for the benchmark harness.

Generators produce reproducible random instances of the three supported
problem shapes (constrained lasso, sparse logistic regression, and the dual
of a linearly constrained strongly convex quadratic primal) together with
the realized separability measures.  Builders turn coordinate-format data
into assembled problems, so generated and loaded instances share one path.
"""

from dataclasses import dataclass

import numpy as np

from .blocks import BlockPartition
from .errors import InputError
from .matrixio import MatrixFile
from .problem import assemble_problem
from .regularizers import L1, L1Box, NonnegOrthant, Zero
from .smooth import (make_logistic, make_quadratic_conjugate_dual,
                     make_quadratic_residual)


@dataclass
class GeneratedProblem:
    problem: object
    max_blocks_per_component: int
    max_components_per_block: int
    matrix: MatrixFile
    rhs: np.ndarray
    extras: dict


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def _blocks_for_columns(partition, cols):
    """Map sorted column indices to (block ids, per-block coefficient slots)."""
    ids = np.searchsorted(partition.offsets, cols, side="right") - 1
    return ids


def _row_support(rng, n, sparsity):
    while True:
        nnz = int(rng.binomial(n, sparsity))
        if nnz >= 1:
            return np.sort(rng.choice(n, nnz, replace=False))


def _touch_isolated_columns(rng, rows, cols, vals, m, n):
    """Give every untouched column one entry in a random row.

    A column no row reads would carry zero curvature and zero step weight;
    such variables cannot participate in the iteration, so the generators
    keep the incidence structure connected instead of producing instances
    the model rejects.
    """
    touched = np.zeros(n, dtype=bool)
    touched[np.asarray(cols, dtype=np.int64)] = True
    for c in np.nonzero(~touched)[0]:
        rows.append(int(rng.integers(m)))
        cols.append(int(c))
        vals.append(float(rng.normal()))


def lasso_from_matrix(mat, rhs, lam, box=None, block_size=1):
    """Constrained lasso problem from a data matrix and observation vector.

    Rows with no nonzero entry are rejected; drop them during ingestion.
    box is None or a (lb, ub) pair applied to every block.
    """
    rhs = np.asarray(rhs, float)
    if rhs.shape != (mat.rows,):
        raise InputError(f"need one observation per row ({mat.rows}), "
                         f"got {rhs.shape}")
    partition = BlockPartition.uniform(mat.cols, block_size)
    smooth = []
    for j, entries in enumerate(mat.row_entries()):
        if not entries:
            raise InputError(f"row {j + 1} of the data matrix is all zero; "
                             "drop empty rows before building the problem")
        cols = np.array([c for c, _ in entries])
        vals = np.array([v for _, v in entries])
        ids = _blocks_for_columns(partition, cols)
        blocks = np.unique(ids)
        coeffs = []
        for b in blocks:
            coef = np.zeros(int(partition.block_sizes[b]))
            sel = ids == b
            coef[cols[sel] - partition.offsets[b]] = vals[sel]
            coeffs.append(coef)
        smooth.append(make_quadratic_residual(blocks, coeffs, rhs[j]))
    if box is None:
        regs = [L1(lam) if lam > 0 else Zero()] * partition.num_blocks
    else:
        lb, ub = box
        regs = [L1Box(lam, lb, ub)] * partition.num_blocks
    return assemble_problem(partition, smooth, regs)


def generate_lasso(m, n, sparsity, lam=1.0, box=None, seed=0, block_size=1,
                   noise=0.01, plant_density=0.1):
    """Random sparse lasso instance with a planted sparse signal.

    Each row draws a Binomial(n, sparsity) support (redrawn while empty) with
    standard normal values; observations are the planted signal's image plus
    Gaussian noise.  Reports the realized separability measures.
    """
    if m < 1 or n < 1:
        raise InputError("dimensions must be >= 1")
    if not 0.0 < sparsity <= 1.0:
        raise InputError("sparsity must lie in (0, 1]")
    if n * sparsity < 1.0:
        raise InputError(f"expected nonzeros per row n*sparsity = {n * sparsity} "
                         "< 1; no nonempty rows can be drawn reliably")
    rng = _rng(seed)
    rows, cols, vals = [], [], []
    for j in range(m):
        support = _row_support(rng, n, sparsity)
        rows.extend([j] * support.size)
        cols.extend(support.tolist())
        vals.extend(rng.normal(size=support.size).tolist())
    _touch_isolated_columns(rng, rows, cols, vals, m, n)
    mat = MatrixFile(rows=m, cols=n, row_idx=rows, col_idx=cols, values=vals)
    planted = np.zeros(n)
    support = rng.choice(n, max(1, int(round(plant_density * n))), replace=False)
    planted[support] = rng.normal(size=support.size)
    rhs = np.zeros(m)
    np.add.at(rhs, np.asarray(rows), np.asarray(vals) * planted[np.asarray(cols)])
    rhs += noise * rng.normal(size=m)
    problem = lasso_from_matrix(mat, rhs, lam, box=box, block_size=block_size)
    return GeneratedProblem(
        problem=problem,
        max_blocks_per_component=problem.structure.max_blocks_per_component,
        max_components_per_block=problem.structure.max_components_per_block,
        matrix=mat, rhs=rhs, extras={"planted": planted})


def logistic_from_matrix(mat, labels, lam, num_samples=None, block_size=1):
    """Sparse logistic regression from a sample matrix and +/-1 labels."""
    labels = np.asarray(labels)
    if labels.shape != (mat.rows,):
        raise InputError("need one label per sample row")
    partition = BlockPartition.uniform(mat.cols, block_size)
    nbar = num_samples or mat.rows
    smooth = []
    for j, entries in enumerate(mat.row_entries()):
        if not entries:
            raise InputError(f"sample row {j + 1} is all zero; drop it first")
        cols = np.array([c for c, _ in entries])
        vals = np.array([v for _, v in entries])
        ids = _blocks_for_columns(partition, cols)
        blocks = np.unique(ids)
        coeffs = []
        for b in blocks:
            coef = np.zeros(int(partition.block_sizes[b]))
            sel = ids == b
            coef[cols[sel] - partition.offsets[b]] = vals[sel]
            coeffs.append(coef)
        smooth.append(make_logistic(blocks, coeffs, int(labels[j]), nbar))
    regs = [L1(lam) if lam > 0 else Zero()] * partition.num_blocks
    return assemble_problem(partition, smooth, regs)


def generate_logistic(num_samples, n, sparsity, lam=0.1, seed=0, block_size=1,
                      flip=0.05):
    """Random sparse logistic instance: labels from a planted separator with
    a small flip probability."""
    if num_samples < 1 or n < 1:
        raise InputError("dimensions must be >= 1")
    if not 0.0 < sparsity <= 1.0:
        raise InputError("sparsity must lie in (0, 1]")
    if n * sparsity < 1.0:
        raise InputError("expected nonzeros per sample below 1")
    rng = _rng(seed)
    rows, cols, vals = [], [], []
    for j in range(num_samples):
        support = _row_support(rng, n, sparsity)
        rows.extend([j] * support.size)
        cols.extend(support.tolist())
        vals.extend(rng.normal(size=support.size).tolist())
    _touch_isolated_columns(rng, rows, cols, vals, num_samples, n)
    mat = MatrixFile(rows=num_samples, cols=n, row_idx=rows, col_idx=cols,
                     values=vals)
    separator = rng.normal(size=n)
    scores = mat.to_dense() @ separator if n * num_samples <= 10 ** 6 else None
    if scores is None:
        scores = np.zeros(num_samples)
        np.add.at(scores, np.asarray(rows),
                  np.asarray(vals) * separator[np.asarray(cols)])
    labels = np.where(scores >= 0.0, 1, -1)
    flips = rng.random(num_samples) < flip
    labels[flips] *= -1
    problem = logistic_from_matrix(mat, labels, lam, block_size=block_size)
    return GeneratedProblem(
        problem=problem,
        max_blocks_per_component=problem.structure.max_blocks_per_component,
        max_components_per_block=problem.structure.max_components_per_block,
        matrix=mat, rhs=labels.astype(float), extras={"separator": separator})


def dual_from_data(mat, rhs, sigmas, centers, block_size=1):
    """Dual of  min sum_j sigma_j/2 ||u_j - c_j||^2  s.t.  A u <= rhs.

    `mat` is the constraint matrix A in coordinate form; its columns are
    grouped into one column block per primal part, with widths given by the
    center vectors.  The dual variable (the multiplier) lives in the
    nonnegative orthant, partitioned into blocks of `block_size`.  Each
    dual block's share of the constraint right-hand side is carried by the
    first component touching it, so the per-component linear terms tile
    <x, rhs> exactly.
    """
    sigmas = np.asarray(sigmas, float)
    centers = [np.atleast_1d(np.asarray(c, float)) for c in centers]
    rhs = np.asarray(rhs, float)
    if rhs.shape != (mat.rows,):
        raise InputError("need one rhs value per constraint row")
    if sigmas.size != len(centers):
        raise InputError("need one strong convexity parameter per primal part")
    widths = [c.size for c in centers]
    if sum(widths) != mat.cols:
        raise InputError("primal part widths must tile the matrix columns")
    partition = BlockPartition.uniform(mat.rows, block_size)
    dense = mat.to_dense()
    col0 = 0
    smooth = []
    # rhs shares: each block's rhs is carried by the first component that
    # touches it, so the linear terms tile <x, rhs> exactly
    rhs_owner = {}
    specs = []
    for j, width in enumerate(widths):
        colblock = dense[:, col0:col0 + width]
        col0 += width
        touched = []
        for i in range(partition.num_blocks):
            sl = partition.slice(i)
            if np.any(colblock[sl] != 0.0):
                touched.append(i)
        if not touched:
            raise InputError(f"primal part {j} has an all-zero column block; "
                             "drop it before building the dual")
        specs.append((j, touched, colblock))
        for i in touched:
            rhs_owner.setdefault(i, j)
    unowned = [i for i in range(partition.num_blocks) if i not in rhs_owner]
    if unowned:
        raise InputError(f"constraint block {unowned[0]} touches no primal part")
    for j, touched, colblock in specs:
        mats, shares = [], []
        for i in touched:
            sl = partition.slice(i)
            mats.append(colblock[sl])
            shares.append(rhs[sl] if rhs_owner[i] == j
                          else np.zeros(sl.stop - sl.start))
        smooth.append(make_quadratic_conjugate_dual(
            touched, mats, float(sigmas[j]), centers[j], shares))
    regs = [NonnegOrthant()] * partition.num_blocks
    return assemble_problem(partition, smooth, regs)


def generate_dual(num_parts, seed=0, block_size=1, coupling_scale=1.0,
                  sigma_range=(0.5, 2.0), slack=0.1):
    """Column-linked block-angular dual instance.

    The constraint matrix has one dense leading column (its primal variable
    appears in every constraint row) and one diagonal column per remaining
    part, so each dual block is touched by at most two components while the
    leading component touches all of them.  The right-hand side is drawn
    with a strictly feasible primal point, which keeps the dual optimal set
    compact.
    """
    if num_parts < 2:
        raise InputError("need at least two primal parts")
    rng = _rng(seed)
    n = num_parts * block_size
    partition = BlockPartition.uniform(n, block_size)
    rows, cols, vals = [], [], []
    # entries are kept away from zero so block-level incidence is stable
    lead = coupling_scale * rng.normal(size=n)
    small = np.abs(lead) < 1e-3
    lead[small] = np.where(lead[small] >= 0.0, 1.0, -1.0)
    for i in range(n):
        rows.append(i)
        cols.append(0)
        vals.append(float(lead[i]))
    for j in range(1, num_parts):
        sl = partition.slice(j)
        for i in range(sl.start, sl.stop):
            v = float(rng.normal())
            if abs(v) < 1e-3:
                v = 1.0
            rows.append(i)
            cols.append(j)
            vals.append(v)
    mat = MatrixFile(rows=n, cols=num_parts, row_idx=rows, col_idx=cols,
                     values=vals)
    sigmas = rng.uniform(*sigma_range, size=num_parts)
    centers = [np.array([float(rng.normal())]) for _ in range(num_parts)]
    feasible = np.array([c[0] for c in centers]) + 0.5 * rng.normal(size=num_parts)
    rhs = mat.to_dense() @ feasible + slack * rng.uniform(0.2, 1.0, size=n)
    problem = dual_from_data(mat, rhs, sigmas, centers, block_size=block_size)
    return GeneratedProblem(
        problem=problem,
        max_blocks_per_component=problem.structure.max_blocks_per_component,
        max_components_per_block=problem.structure.max_components_per_block,
        matrix=mat, rhs=rhs,
        extras={"sigmas": sigmas, "centers": centers})
