"""Randomized block-coordinate descent with incremental state maintenance.

One iteration draws an index set of blocks, forms each selected block's
proximal update from the iteration-start snapshot (synchronous model: no
block reads another's fresh value within an iteration), and applies all
updates plus the induced component-cache deltas in a deterministic order.
Workers write disjoint blocks; their per-component deltas are merged by an
ordered reduction, so results are reproducible bit-for-bit for a fixed
worker count and agree across worker counts up to floating-point summation
order.

Modes
-----
* "rcd"            sampled blocks, aggregated per-block weights (the rule
                   whose descent inequality guarantees monotone progress)
* "rcd-coordwise"  same sampling, reference stepsize rule: coordinate-wise
                   constants scaled by min(max blocks per component, batch)
* "full"           deterministic full pass (every block, every iteration)
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import regularizers as reg
from .errors import (CacheConsistencyError, DescentViolationError, InputError)
from .sampling import BlockSampler, SamplerConfig
from .smooth import coordinatewise_constants

MODES = ("rcd", "rcd-coordwise", "full")

# Tolerances for the solver's own self-checks.
DESCENT_TOL = 1e-10
CACHE_RTOL = 1e-8


@dataclass
class SolverConfig:
    mode: str = "rcd"
    sampler: SamplerConfig = None
    max_iters: int = 1000
    eps_mapping: float = None
    eps_gap: float = None
    fstar: float = None
    workers: int = 1
    trace_stride: int = 1
    trace_mapping_norm: bool = False
    check_stride: int = None
    recompute_stride: int = 1000


class Trace:
    """Append-only per-iteration record (k, F, mapping norm, |S|, elapsed)."""

    def __init__(self):
        self.ks = []
        self.objectives = []
        self.mapping_norms = []
        self.batch_sizes = []
        self.elapsed = []

    def record(self, k, objective, mapping_norm, batch_size, elapsed):
        if self.ks and k <= self.ks[-1]:
            return
        self.ks.append(int(k))
        self.objectives.append(float(objective))
        self.mapping_norms.append(float(mapping_norm))
        self.batch_sizes.append(int(batch_size))
        self.elapsed.append(float(elapsed))

    def __len__(self):
        return len(self.ks)


@dataclass
class SolverState:
    """Mutable iterate plus incremental caches.

    comp_states[j] caches the linear inner state of smooth component j
    (residual / inner product / conjugate argument); f_value caches F(x).
    """

    x: np.ndarray
    comp_states: list
    f_value: float
    k: int = 0
    coordinate_updates: int = 0


@dataclass
class SolveResult:
    x: np.ndarray
    objective: float
    trace: Trace
    converged: bool
    status: str
    iterations: int
    coordinate_updates: int
    state: SolverState = field(repr=False, default=None)


def init_solver_state(problem, x0):
    """Build caches for a feasible starting point."""
    x = np.asarray(x0, dtype=float).copy()
    states = [c.init_state([problem.partition.block(x, i) for i in c.blocks])
              for c in problem.smooth]
    f = sum(c.value_from_state(s) for c, s in zip(problem.smooth, states))
    psi = problem.reg_value(x)
    if psi == np.inf:
        raise InputError("starting point violates an indicator constraint")
    return SolverState(x=x, comp_states=states, f_value=float(f + psi))


def coordwise_weights(problem, batch_size):
    """Reference per-block weights: min(max blocks per component, batch) * L_i."""
    beta = min(problem.structure.max_blocks_per_component, int(batch_size))
    return float(beta) * coordinatewise_constants(problem)


def _process_blocks(problem, x, comp_states, idx_chunk, wdiag):
    """Proximal updates for a chunk of blocks, all read from the snapshot."""
    part = problem.partition
    touch = problem.block_touch
    smooth = problem.smooth
    regs = problem.regs
    out = []
    for i in idx_chunk:
        i = int(i)
        sl = part.slice(i)
        xi = x[sl]
        g = np.zeros(sl.stop - sl.start)
        for j, t in touch[i]:
            g += smooth[j].grad_block_from_state(comp_states[j], t)
        w = wdiag[i]
        new = reg.prox_block(regs[i], xi - g / w, w)
        dx = new - xi
        deltas = [(j, smooth[j].state_delta(t, dx)) for j, t in touch[i]]
        out.append((i, new, deltas))
    return out


def _apply_updates(problem, state, ordered_results):
    """Ordered reduction: write blocks, merge component deltas, update F."""
    part = problem.partition
    regs = problem.regs
    smooth = problem.smooth
    x = state.x
    psi_delta = 0.0
    acc = {}
    for batch in ordered_results:
        for i, new, deltas in batch:
            sl = part.slice(i)
            psi_delta += (reg.value_block(regs[i], new)
                          - reg.value_block(regs[i], x[sl]))
            x[sl] = new
            for j, d in deltas:
                prev = acc.get(j)
                if prev is None:
                    acc[j] = d.copy()
                else:
                    prev += d
    f_delta = 0.0
    for j in sorted(acc):
        st = state.comp_states[j]
        old = smooth[j].value_from_state(st)
        st += acc[j]
        f_delta += smooth[j].value_from_state(st) - old
    return f_delta + psi_delta


def step(problem, state, idx, weights=None, workers=1, pool=None,
         enforce_descent=True):
    """One iteration over the index set `idx` (updates `state` in place).

    Blocks outside `idx` are untouched; gradients are evaluated from the
    pre-step cache snapshot, so the result does not depend on processing
    order beyond floating-point summation.
    """
    idx = np.asarray(idx, dtype=np.int64).ravel()
    if idx.size:
        if int(idx.min()) < 0 or int(idx.max()) >= problem.num_blocks:
            raise InputError("block index out of range in update set")
    wdiag = problem.weights.diag if weights is None else weights
    f_old = state.f_value
    if idx.size == 0:
        return state
    nworkers = min(int(workers), idx.size)
    if nworkers > 1:
        chunks = np.array_split(idx, nworkers)
        own_pool = pool is None
        if own_pool:
            pool = ThreadPoolExecutor(max_workers=nworkers)
        try:
            futures = [pool.submit(_process_blocks, problem, state.x,
                                   state.comp_states, ch, wdiag)
                       for ch in chunks]
            results = [f.result() for f in futures]
        finally:
            if own_pool:
                pool.shutdown()
    else:
        results = [_process_blocks(problem, state.x, state.comp_states, idx, wdiag)]
    state.f_value = f_old + _apply_updates(problem, state, results)
    if enforce_descent and not (state.f_value
                                <= f_old + DESCENT_TOL * (1.0 + abs(f_old))):
        raise DescentViolationError(
            f"objective rose from {f_old!r} to {state.f_value!r} in a "
            "descent-guaranteed mode")
    return state


def verify_and_refresh_caches(problem, state, rtol=CACHE_RTOL):
    """Recompute all caches from x; raise on drift beyond `rtol` relative."""
    worst = (0.0, None)
    fresh_states = []
    for j, comp in enumerate(problem.smooth):
        parts = [problem.partition.block(state.x, i) for i in comp.blocks]
        fresh = comp.init_state(parts)
        err = float(np.max(np.abs(state.comp_states[j] - fresh)
                           / (1.0 + np.abs(fresh))))
        if err > worst[0]:
            worst = (err, j)
        fresh_states.append(fresh)
    fresh_f = sum(c.value_from_state(s)
                  for c, s in zip(problem.smooth, fresh_states))
    fresh_f += problem.reg_value(state.x)
    f_err = abs(state.f_value - fresh_f) / (1.0 + abs(fresh_f))
    if worst[0] > rtol or f_err > rtol:
        raise CacheConsistencyError(
            "incremental caches drifted beyond tolerance",
            diagnostics={
                "iteration": state.k,
                "worst_component": worst[1],
                "worst_state_rel_err": worst[0],
                "objective_rel_err": f_err,
                "cached_objective": state.f_value,
                "recomputed_objective": fresh_f,
            })
    state.comp_states = fresh_states
    state.f_value = float(fresh_f)
    return state


def run(problem, config, x0):
    """Iterate draw/update until a stop rule fires or max_iters is reached.

    The starting point is projected blockwise onto the regularizer domains
    so the initial objective is finite.  Non-convergence within max_iters is
    reported through the returned status, not raised.
    """
    if config.mode not in MODES:
        raise InputError(f"unknown solver mode {config.mode!r}")
    if config.workers < 1:
        raise InputError("workers must be >= 1")
    if config.eps_mapping is not None and config.eps_gap is not None:
        raise InputError("choose a single primary stop rule (mapping or gap)")
    if config.eps_gap is not None and config.fstar is None:
        raise InputError("gap stop rule needs the reference optimal value")
    if config.mode != "full" and config.sampler is None:
        raise InputError(f"mode {config.mode!r} needs a sampler config")

    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.n,) or not np.all(np.isfinite(x0)):
        raise InputError("starting point must be a finite vector of length n")
    state = init_solver_state(problem, problem.project_domain(x0))

    num_blocks = problem.num_blocks
    full_set = np.arange(num_blocks, dtype=np.int64)
    if config.mode == "full":
        sampler = None
        batch = num_blocks
    else:
        sampler = BlockSampler(config.sampler, num_blocks)
        batch = config.sampler.batch_size
    if config.mode == "rcd-coordwise":
        weights = coordwise_weights(problem, batch)
        enforce = False
    else:
        weights = problem.weights.diag
        enforce = True
    check_stride = config.check_stride
    if check_stride is None:
        check_stride = max(1, int(np.ceil(10.0 * num_blocks / batch)))

    trace = Trace()
    start = time.perf_counter()

    def mapping_norm():
        return problem.prox_grad_mapping(state.x)[1]

    def record(k, s_size):
        g = mapping_norm() if config.trace_mapping_norm else np.nan
        trace.record(k, state.f_value, g, s_size, time.perf_counter() - start)

    record(0, 0)
    converged = False
    status = "max-iters"
    pool = ThreadPoolExecutor(max_workers=config.workers) \
        if config.workers > 1 else None
    try:
        while state.k < config.max_iters:
            idx = full_set if sampler is None else sampler.draw()
            step(problem, state, idx, weights=weights,
                 workers=config.workers, pool=pool, enforce_descent=enforce)
            state.k += 1
            state.coordinate_updates += int(idx.size)
            if state.k % config.recompute_stride == 0:
                verify_and_refresh_caches(problem, state)
            if state.k % config.trace_stride == 0 or state.k == config.max_iters:
                record(state.k, idx.size)
            if config.eps_gap is not None \
                    and state.f_value - config.fstar <= config.eps_gap:
                converged, status = True, "converged:gap"
                break
            if config.eps_mapping is not None \
                    and state.k % check_stride == 0 \
                    and mapping_norm() <= config.eps_mapping:
                converged, status = True, "converged:mapping-norm"
                break
    finally:
        if pool is not None:
            pool.shutdown()
    record(state.k, batch if state.k else 0)
    return SolveResult(x=state.x.copy(), objective=state.f_value, trace=trace,
                       converged=converged, status=status,
                       iterations=state.k,
                       coordinate_updates=state.coordinate_updates,
                       state=state)
