import numpy as np
import pytest

from kerrh.errors import AxisOrHorizonProximity, GridInvalid
from kerrh.kerr_background import (
    FRAME_METRIC,
    Background,
    BLPoint,
    KerrParams,
    check_points,
    frame,
    metric,
    riemann,
)


def test_metric_schwarzschild_g_rr():
    g = metric(KerrParams(1.0, 0.0), BLPoint(4.0, np.pi / 2)).value[..., 0].real
    assert g[1, 1] == pytest.approx(2.0, rel=1e-14)
    assert g[0, 0] == pytest.approx(-0.5, rel=1e-14)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_g_tt_vanishes_on_the_horizon():
    # g_rr is singular there; only the literal g_tt entry is meaningful
    bg = Background(1.0, 0.0, 2.0, np.pi / 2, horizon_guard=False)
    assert bg.metric.value[0, 0, 0] == pytest.approx(0.0, abs=1e-15)


def test_metric_inverse(bg):
    g, gi = bg.metric.value, bg.metric_inv.value
    prod = np.einsum("abz,bcz->acz", g, gi)
    assert np.max(np.abs(prod - np.eye(4)[..., None])) < 1e-12


def test_schwarzschild_frame_vectors():
    f = frame(KerrParams(1.0, 0.0), BLPoint(4.0, 1.0))
    assert f.e4 == pytest.approx([2.0, 1.0, 0.0, 0.0])
    assert f.e3 == pytest.approx([1.0, -0.5, 0.0, 0.0])


def test_frame_normalisation(bg):
    gram = bg.geometry.frame_gram
    assert np.max(np.abs(gram - FRAME_METRIC[..., None])) < 1e-12
    assert FRAME_METRIC[2, 3] == -2.0


def test_horizontal_frame_orthogonal_at_generic_point():
    bg = Background(1.0, 0.5, 3.0, np.pi / 3)
    assert abs(bg.geometry.frame_gram[0, 1, 0]) < 1e-14


def test_lambda_connection_entries():
    bg = Background(1.0, 0.6, np.array([3.0, 5.0]), np.array([0.7, 2.0]))
    conn = bg.geometry.conn.value
    r, th, a = bg.r0, bg.th0, 0.6
    q3 = (r * r + a * a * np.cos(th) ** 2) ** 1.5
    assert conn[1, 0, 1] == pytest.approx((r * r + a * a) / np.tan(th) / q3, rel=1e-12)
    assert np.max(np.abs(conn[0, 0, 1])) < 1e-14


def test_flat_limit_christoffels_are_spherical():
    bg = Background(1e-12, 0.0, 5.0, 1.1)
    G = bg.christoffel.value[..., 0].real
    r, th = 5.0, 1.1
    assert G[1, 2, 2] == pytest.approx(-r, rel=1e-9)
    assert G[2, 1, 2] == pytest.approx(1 / r, rel=1e-9)
    assert G[3, 2, 3] == pytest.approx(np.cos(th) / np.sin(th), rel=1e-9)
    assert G[2, 3, 3] == pytest.approx(-np.sin(th) * np.cos(th), rel=1e-9)


def test_weyl_components_on_schwarzschild():
    w = riemann(KerrParams(1.0, 0.0), BLPoint(3.0, 1.0))
    assert w["rho"] == pytest.approx(-2 / 27, rel=1e-10)
    for k in ("alpha", "beta", "betab", "alphab"):
        assert np.max(np.abs(w[k])) < 1e-12
    assert abs(w["rho_dual"]) < 1e-12


@pytest.mark.parametrize("r, th", [(1.9, 1.0), (2.0, 1.0), (4.0, 0.0), (4.0, np.pi), (4.0, 1e-7)])
def test_guard_band_rejects(r, th):
    with pytest.raises(AxisOrHorizonProximity):
        Background(1.0, 0.0, r, th)


def test_empty_points_rejected():
    with pytest.raises(GridInvalid):
        check_points(np.array([]), np.array([]), np.array([]), np.array([]))


def test_params_validation():
    with pytest.raises(ValueError):
        KerrParams(1.0, 1.0)
    with pytest.raises(ValueError):
        KerrParams(-1.0, 0.0)
    assert KerrParams(1.0, 0.6).r_plus == pytest.approx(1.8)
