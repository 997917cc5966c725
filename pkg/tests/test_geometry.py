"""Torus geometry, PPP sampling, user placement, and path loss."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fountaincell.geometry as geometry
from fountaincell import (DomainError, RejectionBudgetError, Window,
                          build_pathloss, dump_realization_csv,
                          make_realization, place_users, sample_ppp,
                          torus_distance)
from fountaincell.geometry import _dist_matrix

W20 = Window(20.0)
W60 = Window(60.0)


def test_window_validation():
    with pytest.raises(DomainError):
        Window(0.0)
    with pytest.raises(DomainError):
        Window(-5.0)
    assert Window(10.0).wraparound is True


def test_torus_wrap_examples():
    assert torus_distance(np.array([0.0, 0.0]), np.array([59.0, 0.0]),
                          W60) == pytest.approx(1.0)
    assert torus_distance(np.array([0.0, 0.0]), np.array([30.0, 30.0]),
                          W60) == pytest.approx(30.0 * math.sqrt(2))


def test_torus_no_wrap():
    w = Window(60.0, wraparound=False)
    assert torus_distance(np.array([0.0, 0.0]), np.array([59.0, 0.0]),
                          w) == pytest.approx(59.0)


@settings(max_examples=100, deadline=None)
@given(px=st.floats(0, 60), py=st.floats(0, 60),
       qx=st.floats(0, 60), qy=st.floats(0, 60))
def test_torus_properties(px, py, qx, qy):
    p, q = np.array([px, py]), np.array([qx, qy])
    d = torus_distance(p, q, W60)
    assert d == pytest.approx(torus_distance(q, p, W60))       # symmetry
    assert d <= 60.0 / math.sqrt(2) + 1e-9                     # torus diameter
    assert d >= 0.0
    # wrapped distance never exceeds the direct one
    assert d <= np.hypot(*(p - q)) + 1e-9


def test_ppp_mean_count():
    rng = np.random.default_rng(7)
    counts = [sample_ppp(1.0, W20, rng).shape[0] for _ in range(24)]
    assert abs(np.mean(counts) - 400.0) <= 3.0 * math.sqrt(400.0 / 24)


def test_ppp_needs_positive_intensity():
    with pytest.raises(DomainError):
        sample_ppp(0.0, W20, np.random.default_rng(1))


def test_ppp_resamples_below_two_points():
    # mean count 0.2: most draws have < 2 BSs and must be rejected
    pts = sample_ppp(0.002, Window(10.0), np.random.default_rng(3))
    assert pts.shape[0] >= 2


def test_ppp_budget_exhaustion():
    with pytest.raises(RejectionBudgetError):
        sample_ppp(1e-6, Window(1.0), np.random.default_rng(1))


def test_place_users_two_bs_symmetric():
    bs = np.array([[5.0, 10.0], [15.0, 10.0]])
    users = place_users(bs, W20, np.random.default_rng(3))
    d = _dist_matrix(users, bs, W20)
    assert np.array_equal(d.argmin(axis=1), np.array([0, 1]))


def test_place_users_budget_diagnostic(monkeypatch):
    # a sliver cell: the middle of three near-collinear BSs is almost
    # never hit by uniform draws, so a tiny budget must trip with a
    # diagnostic naming the starved cell
    bs = np.array([[5.0 - 5e-10, 10.0], [5.0, 10.0], [5.0 + 5e-10, 10.0]])
    monkeypatch.setattr(geometry, "_REJECTION_BUDGET", 10_000)
    with pytest.raises(RejectionBudgetError, match="cell"):
        place_users(bs, W20, np.random.default_rng(11))


def test_place_users_requires_two_bs():
    with pytest.raises(DomainError):
        place_users(np.array([[1.0, 1.0]]), W20, np.random.default_rng(1))


def test_rayleigh_dominance_direction():
    """Link distances are stochastically dominated by the Rayleigh law
    with sigma = 1/sqrt(2*pi*intensity): F_D >= F_Rayleigh pointwise."""
    ds = []
    for s in (100, 101, 102):
        net = make_realization(1.0, W60, 3.0,
                               np.random.default_rng(np.random.SeedSequence(s)))
        ds.append(net.link_distance)
    d = np.sort(np.concatenate(ds))
    sigma = 1.0 / math.sqrt(2.0 * math.pi)
    f_ray = 1.0 - np.exp(-d * d / (2.0 * sigma * sigma))
    f_emp = np.arange(1, d.size + 1) / d.size
    # one-sided violation statistic; 0.01 covers sampling noise at ~10^4
    assert np.max(f_ray - f_emp) < 0.01
    # and dominance is strict: the other side is far from zero
    assert np.max(f_emp - f_ray) > 0.05


def test_build_pathloss_values():
    win = Window(10.0)
    bs = np.array([[0.0, 0.0], [3.0, 0.0]])
    users = np.array([[1.0, 0.0], [3.0, 2.0]])
    pl = build_pathloss(bs, users, 4.0, win)
    assert pl.shape == (2, 2)
    assert pl[0, 0] == pytest.approx(1.0)          # distance 1
    assert pl[0, 1] == pytest.approx(1.0 / 16.0)   # distance 2
    assert pl[1, 1] == pytest.approx(1.0 / 16.0)
    with pytest.raises(DomainError):
        build_pathloss(bs, users, 2.0, win)
    with pytest.raises(DomainError, match="coincident"):
        build_pathloss(bs, np.array([[0.0, 0.0]]), 4.0, win)


class TestRealization:
    def test_deterministic(self):
        a = make_realization(1.0, W20, 3.0,
                             np.random.default_rng(np.random.SeedSequence(42)))
        b = make_realization(1.0, W20, 3.0,
                             np.random.default_rng(np.random.SeedSequence(42)))
        assert np.array_equal(a.bs_points, b.bs_points)
        assert np.array_equal(a.user_points, b.user_points)
        assert np.array_equal(a.pathloss_matrix, b.pathloss_matrix)

    def test_nearest_bs_invariant(self):
        net = make_realization(1.0, W20, 3.5,
                               np.random.default_rng(np.random.SeedSequence(5)))
        d = _dist_matrix(net.user_points, net.bs_points, net.window)
        assert np.array_equal(d.argmin(axis=1), np.arange(net.n_pairs))
        np.testing.assert_allclose(np.diag(net.pathloss_matrix),
                                   net.link_distance ** -3.5, rtol=1e-12)

    def test_alpha_validation(self):
        with pytest.raises(DomainError):
            make_realization(1.0, W20, 1.9, np.random.default_rng(1))


def test_dump_realization_csv(tmp_path):
    net = make_realization(1.0, Window(8.0), 3.0,
                           np.random.default_rng(np.random.SeedSequence(2)))
    path = tmp_path / "net.csv"
    dump_realization_csv(net, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "bs_id,bs_x,bs_y,user_x,user_y,D"
    assert len(lines) == net.n_pairs + 1
    first = lines[1].split(",")
    assert int(first[0]) == 0
    assert float(first[5]) == pytest.approx(net.link_distance[0], rel=1e-8)
