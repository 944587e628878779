import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from su2vol.metrics import (
    DecoupledMetric, InvalidParameters, MetricTensor, NotSPD, canonicalize,
    decoupled_to_json, extract_milnor_su2, from_parameters, lift_vectors,
    metric_from_flat, metric_to_json, reduce_to_decoupled, skewed_basis,
)

PARAM_TOL = 1e-8


def _random_spd(dim, rng, cond=10.0):
    f = rng.normal(size=(dim, dim))
    g = f @ f.T + np.eye(dim) / cond
    return 0.5 * (g + g.T)


def test_from_parameters_invariants():
    rng = np.random.default_rng(10)
    for _ in range(50):
        a = np.sort(rng.uniform(0.2, 5.0, 3))
        d = rng.uniform(0.0, 4.0)
        m = from_parameters(*a, d)
        g, V, F = m.gram, m.V, m.F
        npt.assert_allclose(V.T @ g @ V, np.diag(a ** 2), atol=1e-10)
        npt.assert_allclose(V.T @ g @ F, np.zeros((3, 3)), atol=1e-10)
        npt.assert_allclose(F.T @ g @ F, np.eye(3), atol=1e-10)
        # the u_i = v_i - d f_i pick up the tilt in their norms
        U = m.u_columns()
        npt.assert_allclose(np.diag(U.T @ g @ U), a ** 2 + d ** 2,
                            rtol=PARAM_TOL)
        res = m.invariant_residuals()
        assert max(res.values()) < 1e-10


def test_round_trip_parameters():
    m = from_parameters(1.0, 2.0, 3.0, 5.0)
    dec = canonicalize(reduce_to_decoupled(MetricTensor(m.gram)))
    npt.assert_allclose(dec.a, [1.0, 2.0, 3.0], atol=PARAM_TOL)
    assert dec.d == pytest.approx(5.0, abs=PARAM_TOL)


def test_diagonal_gram_n0():
    m = MetricTensor(np.diag([4.0, 1.0, 9.0]))
    dec = canonicalize(reduce_to_decoupled(m))
    npt.assert_allclose(dec.a, [1.0, 2.0, 3.0], atol=PARAM_TOL)
    assert dec.d == pytest.approx(0.0, abs=PARAM_TOL)


def test_skewed_construction_recovers_d():
    # build the gram from a basis v_i = u_i + h_i with known h rows;
    # d must come out as the square root of the top eigenvalue of h^T h
    a = np.array([1.5, 2.0, 2.5])
    h = np.array([[1.0, 0.0, 0.0],
                  [1.0, 0.0, 0.0],
                  [1.0, 0.0, 0.0]])          # columns h_i: h_1 = (1,1,1)
    W = np.block([[np.eye(3), np.zeros((3, 3))],
                  [h, np.eye(3)]])           # columns: v_1 v_2 v_3, e_j
    gram_w = np.diag(np.concatenate([a ** 2, np.ones(3)]))
    wi = np.linalg.inv(W)
    g = wi.T @ gram_w @ wi
    dec = canonicalize(reduce_to_decoupled(MetricTensor(g)))
    assert dec.d == pytest.approx(math.sqrt(3.0), abs=PARAM_TOL)
    npt.assert_allclose(dec.a, np.sort(a), atol=PARAM_TOL)


def test_reduce_random_spd_invariants():
    # small version of the acceptance sweep over center dimensions
    rng = np.random.default_rng(11)
    for n in (0, 1, 3):
        for _ in range(40):
            g = MetricTensor(_random_spd(3 + n, rng))
            dec = reduce_to_decoupled(g)
            a = np.asarray(dec.a)
            assert np.all(a > 0.0) and np.all(np.diff(a) >= -1e-12)
            assert dec.d >= 0.0
            assert max(dec.invariant_residuals().values()) < 1e-10
            # round trip: rebuild a 6x6 gram from the parameters alone
            back = reduce_to_decoupled(
                MetricTensor(from_parameters(*a, dec.d).gram))
            npt.assert_allclose(back.a, a, atol=PARAM_TOL)
            assert back.d == pytest.approx(dec.d, abs=PARAM_TOL)


def test_skewed_basis_orthogonality():
    rng = np.random.default_rng(12)
    for n in (1, 3):
        g = MetricTensor(_random_spd(3 + n, rng))
        V, R, a = skewed_basis(g)
        gram_v = V.T @ g.gram @ V
        npt.assert_allclose(gram_v, np.diag(a ** 2), atol=1e-10)
        # v_i project onto the quotient Milnor triple
        npt.assert_allclose(V[:3], R, atol=1e-12)
        # the triple closes under the cross product
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            npt.assert_allclose(np.cross(R[:, i], R[:, j]), R[:, k],
                                atol=1e-10)


def test_lift_vectors_top_eigenvalue():
    h = np.array([[2.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0]])          # h_i as columns, n = 2
    f, d = lift_vectors(h)
    assert d == pytest.approx(2.0, rel=1e-12)
    npt.assert_allclose(f.T @ f, np.eye(3), atol=1e-12)
    # projection onto the first n coordinates recovers the h_i
    npt.assert_allclose(d * f[:2, :], h, atol=1e-12)


def test_lift_vectors_zero_input():
    f, d = lift_vectors(np.zeros((2, 3)))
    assert d == 0.0
    npt.assert_allclose(f.T @ f, np.eye(3), atol=1e-15)


def test_not_spd_raises():
    with pytest.raises(NotSPD):
        MetricTensor(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(NotSPD):
        MetricTensor(np.array([[1.0, 2.0], [2.0, 1.0]]))   # too small too


def test_invalid_parameters():
    with pytest.raises(InvalidParameters):
        from_parameters(0.0, 1.0, 1.0, 0.0)
    with pytest.raises(InvalidParameters):
        from_parameters(3.0, 2.0, 1.0, 0.0)
    with pytest.raises(InvalidParameters):
        from_parameters(1.0, 1.0, 1.0, -0.5)


def test_canonicalize_sorts_ascending():
    m = from_parameters(1.0, 2.0, 3.0, 0.5)
    cyc = [2, 0, 1]
    scrambled = DecoupledMetric(gram=m.gram, V=m.V[:, cyc], F=m.F[:, cyc],
                                a=m.a[cyc], d=m.d)
    dec = canonicalize(scrambled)
    npt.assert_allclose(dec.a, [1.0, 2.0, 3.0], atol=0.0)
    assert max(dec.invariant_residuals().values()) < 1e-12
    # canonical form is a fixed point
    again = canonicalize(dec)
    npt.assert_allclose(again.V, dec.V, atol=0.0)


def test_metric_json_round_trip():
    g = MetricTensor(_random_spd(5, np.random.default_rng(14)))
    m2 = metric_from_flat(json.loads(metric_to_json(g)))
    npt.assert_allclose(m2.gram, g.gram, atol=1e-14)
    with pytest.raises(ValueError):
        metric_from_flat([1.0, 2.0, 3.0])


def test_decoupled_json_fields():
    dec = from_parameters(1.0, 2.0, 3.0, 0.7)
    doc = json.loads(decoupled_to_json(dec))
    npt.assert_allclose(doc["a"], [1.0, 2.0, 3.0], atol=PARAM_TOL)
    assert doc["d"] == pytest.approx(0.7, abs=PARAM_TOL)
    assert np.asarray(doc["basis"]).shape == (6, 6)


def test_extract_milnor_orientation():
    # eigh can hand back a reflection; the triple must still close
    g3 = np.diag([9.0, 1.0, 4.0])
    U, a = extract_milnor_su2(g3)
    npt.assert_allclose(a, [1.0, 2.0, 3.0], atol=1e-12)
    assert np.linalg.det(U) == pytest.approx(1.0, abs=1e-12)


def test_rotation_invariance_of_parameters():
    # an orthogonal change of the center coordinates is an isometry
    rng = np.random.default_rng(13)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    base = from_parameters(1.0, 2.0, 3.0, 1.3)
    rot = np.block([[np.eye(3), np.zeros((3, 3))],
                    [np.zeros((3, 3)), q]])
    g2 = MetricTensor(rot.T @ base.gram @ rot)
    dec = canonicalize(reduce_to_decoupled(g2))
    npt.assert_allclose(dec.a, [1.0, 2.0, 3.0], atol=PARAM_TOL)
    assert dec.d == pytest.approx(1.3, abs=PARAM_TOL)
