import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clipcpd.bound import EstimatorConfig
from clipcpd.delay import DelayQuery, delay_bound, delay_rhs, heatmap, undetectable, write_heatmap_csv

from oracle import delay_ref


@pytest.mark.parametrize(
    "n, jump",
    [(1000, 10.0), (1000, 5.0), (2000, 0.5), (500, 1.0), (100, 2.0), (5000, 0.3)],
)
def test_delay_matches_linear_scan_oracle(n, jump):
    got = delay_bound(DelayQuery(n=n, delta_jump=jump))
    ref = delay_ref(n, jump, 0.1, 0.1, d_max=3000)
    assert ref is not None
    assert got == ref


def test_large_jump_gives_small_delay():
    d = delay_bound(DelayQuery(n=1000, delta_jump=10.0))
    assert d == 1


def test_tiny_jump_is_undetectable():
    q = DelayQuery(n=1000, delta_jump=1e-3)
    assert delay_bound(q) == math.inf
    assert undetectable(q)
    assert undetectable(DelayQuery(n=100, delta_jump=0.5))


def test_rejects_bad_queries():
    with pytest.raises(ValueError):
        DelayQuery(n=1, delta_jump=1.0)
    with pytest.raises(ValueError):
        DelayQuery(n=10, delta_jump=0.0)
    with pytest.raises(ValueError):
        DelayQuery(n=10, delta_jump=1.0, delta_prime=1.5)


def test_rhs_is_vectorised():
    q = DelayQuery(n=300, delta_jump=1.0)
    ds = np.arange(1, 20)
    vec = delay_rhs(q, ds)
    for d, v in zip(ds, vec):
        assert v == delay_rhs(q, d)


def test_d_max_caps_search():
    q = DelayQuery(n=2000, delta_jump=0.5, d_max=100)
    assert delay_bound(q) == math.inf
    assert delay_bound(DelayQuery(n=2000, delta_jump=0.5)) > 100


@settings(max_examples=40, deadline=None)
@given(st.integers(50, 5000), st.floats(0.2, 5.0), st.floats(1.01, 3.0))
def test_larger_jump_never_slower(n, jump, factor):
    a = delay_bound(DelayQuery(n=n, delta_jump=jump, d_max=20000))
    b = delay_bound(DelayQuery(n=n, delta_jump=jump * factor, d_max=20000))
    assert b <= a


def test_heatmap_single_cell():
    tmpl = DelayQuery(n=2, delta_jump=1.0)
    grid = heatmap([1000], [10.0], tmpl)
    assert grid == [[1]]
    with pytest.raises(ValueError):
        heatmap([], [1.0], tmpl)


def test_heatmap_rows_monotone_in_jump():
    jumps = [0.5, 1.0, 2.0, 5.0, 10.0]
    grid = heatmap([100, 500, 2000], jumps, DelayQuery(n=2, delta_jump=1.0))
    for row in grid:
        assert all(b <= a for a, b in zip(row, row[1:]))
    # more pre-change data never hurts in the corner cells
    assert grid[-1][0] <= grid[0][0]


def test_heatmap_respects_template():
    est = EstimatorConfig(g_diam=2.0)
    tmpl = DelayQuery(n=2, delta_jump=1.0, cfg=est, delta_prime=0.05)
    assert heatmap([800], [3.0], tmpl)[0][0] == delay_bound(
        DelayQuery(n=800, delta_jump=3.0, cfg=est, delta_prime=0.05)
    )


def test_heatmap_csv_format():
    buf = io.StringIO()
    write_heatmap_csv(buf, [100, 1000], [0.5, 10.0], [[math.inf, 3], [math.inf, 1]], comment="x")
    assert buf.getvalue().splitlines() == ["# x", "n,0.5,10.0", "100,,3", "1000,,1"]
