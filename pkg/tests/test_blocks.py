import numpy as np
import pytest

from pbcd.blocks import (BlockPartition, build_structure, compute_block_weights,
                         weighted_norm, weighted_norm_inv)
from pbcd.errors import InputError, StructureError


def test_partition_from_sizes():
    part = BlockPartition.from_sizes([2, 3, 1])
    assert part.n == 6
    assert part.num_blocks == 3
    assert np.array_equal(part.offsets, [0, 2, 5, 6])
    x = np.arange(6.0)
    assert np.array_equal(part.block(x, 1), [2.0, 3.0, 4.0])
    assert np.all(np.diff(part.offsets) > 0)


def test_partition_uniform_remainder():
    part = BlockPartition.uniform(7, 3)
    assert np.array_equal(part.block_sizes, [3, 3, 1])


def test_partition_rejects_bad_sizes():
    with pytest.raises(InputError):
        BlockPartition.from_sizes([])
    with pytest.raises(InputError):
        BlockPartition.from_sizes([2, 0])


def test_structure_diagonal():
    s = build_structure([(0, 0), (1, 1)], num_blocks=2, num_components=2)
    assert s.max_blocks_per_component == 1
    assert s.max_components_per_block == 1


def test_structure_single_wide_component():
    # one component reading both blocks: hand count |blocks_of[0]| = 2
    s = build_structure([(0, 0), (0, 1)], num_blocks=2, num_components=1)
    assert s.max_blocks_per_component == 2
    assert s.max_components_per_block == 1


def test_structure_column_linked_block_angular():
    # component 0 reads every block, component j >= 1 only block j
    nbar = 5
    pairs = [(0, i) for i in range(nbar)] + [(j, j) for j in range(1, nbar)]
    s = build_structure(pairs, num_blocks=nbar, num_components=nbar)
    assert s.max_components_per_block == 2
    assert s.max_blocks_per_component == 5


def test_structure_errors():
    with pytest.raises(StructureError, match="component 1"):
        build_structure([(0, 0)], num_blocks=1, num_components=2)
    with pytest.raises(InputError):
        build_structure([(0, 5)], num_blocks=2, num_components=1)
    with pytest.raises(InputError):
        build_structure([(0, 0), (0, 0)], num_blocks=1, num_components=1)


def test_structure_views_are_transposes():
    rng = np.random.default_rng(7)
    for _ in range(20):
        nb, nc = rng.integers(2, 9, size=2)
        pairs = {(int(j), int(rng.integers(nb))) for j in range(nc)}
        for _ in range(10):
            pairs.add((int(rng.integers(nc)), int(rng.integers(nb))))
        s = build_structure(sorted(pairs), nb, nc)
        for j in range(nc):
            for i in s.blocks_of[j]:
                assert j in s.components_of[i]
        for i in range(nb):
            for j in s.components_of[i]:
                assert i in s.blocks_of[j]
        assert 1 <= s.max_blocks_per_component <= nb
        assert 1 <= s.max_components_per_block <= nc


def test_weights_diagonal():
    s = build_structure([(0, 0), (1, 1)], 2, 2)
    w = compute_block_weights(s, [4.0, 9.0])
    assert np.array_equal(w.diag, [4.0, 9.0])


def test_weights_shared_component():
    s = build_structure([(0, 0), (0, 1)], 2, 1)
    w = compute_block_weights(s, [2.0])
    assert np.array_equal(w.diag, [2.0, 2.0])


def test_weights_sum_on_shared_block():
    s = build_structure([(0, 0), (1, 0), (2, 0), (1, 1), (2, 2)], 3, 3)
    w = compute_block_weights(s, [1.0, 1.0, 1.0])
    assert w.diag[0] == 3.0


def test_weights_reject_nonpositive():
    s = build_structure([(0, 0), (1, 1)], 2, 2)
    with pytest.raises(InputError, match="component 1"):
        compute_block_weights(s, [1.0, 0.0])
    with pytest.raises(InputError):
        compute_block_weights(s, [1.0, -2.0])


def test_weights_reject_untouched_block():
    s = build_structure([(0, 0)], 2, 1)
    with pytest.raises(StructureError, match="block 1"):
        compute_block_weights(s, [1.0])


def test_weight_bound_by_block_degree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        nb, nc = int(rng.integers(2, 8)), int(rng.integers(2, 10))
        pairs = {(j, int(rng.integers(nb))) for j in range(nc)}
        for i in range(nb):
            pairs.add((int(rng.integers(nc)), i))
        s = build_structure(sorted(pairs), nb, nc)
        lips = rng.uniform(0.1, 5.0, size=nc)
        w = compute_block_weights(s, lips)
        bound = s.max_components_per_block * lips.max()
        assert np.all(w.diag <= bound + 1e-12)


def test_weighted_norms():
    part = BlockPartition.from_sizes([1, 2])
    cw = part.expand([4.0, 9.0])
    x = np.array([1.0, 2.0, -1.0])
    assert weighted_norm(x, cw) == pytest.approx(np.sqrt(4 + 36 + 9), rel=1e-15)
    assert weighted_norm_inv(x, cw) == pytest.approx(
        np.sqrt(1 / 4 + 4 / 9 + 1 / 9), rel=1e-15)
