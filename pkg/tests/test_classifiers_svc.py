import numpy as np
import pytest

from histostack.classifiers import (
    model_from_dict,
    model_to_dict,
    svc_decision,
    svc_fit,
    svc_predict,
)
from histostack.classifiers.svc import _smo, kernel_matrix
from histostack.errors import BadKernelParams, DegenerateLabels, ShapeError

XOR_X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_Y = np.array([0, 1, 1, 0])


def test_two_point_linear_machine():
    X = np.array([[-1.0], [1.0]])
    y = np.array([0, 1])
    model = svc_fit(X, y, kernel="linear", c=10.0, tol=1e-4)
    machine = model.machines[0]
    assert len(machine.dual_coef) == 2  # both points are support vectors
    w = float(machine.dual_coef @ machine.support_vectors[:, 0])
    assert abs(w - 1.0) < 1e-6
    assert abs(machine.bias) < 1e-6
    assert abs(svc_decision(model, np.array([[0.5]]))[0] - 0.5) < 1e-6
    assert svc_predict(model, np.array([[0.5]]))[0] == 1


def test_xor_linear_capped_rbf_perfect():
    lin = svc_fit(XOR_X, XOR_Y, kernel="linear", c=10.0)
    assert (svc_predict(lin, XOR_X) == XOR_Y).mean() <= 0.75
    rbf = svc_fit(XOR_X, XOR_Y, kernel="rbf", gamma=1.0, c=10.0)
    assert (svc_predict(rbf, XOR_X) == XOR_Y).mean() == 1.0


def test_dual_constraints_hold(rng):
    X = np.concatenate([rng.standard_normal((15, 3)) - 1, rng.standard_normal((15, 3)) + 1])
    y01 = np.array([0] * 15 + [1] * 15)
    c, tol = 5.0, 1e-3
    K = kernel_matrix(X, X, "rbf", 0.5, 3)
    alpha, _ = _smo(K, np.where(y01 == 1, 1.0, -1.0), c, tol, 100_000)
    assert alpha.min() >= -1e-12 and alpha.max() <= c + 1e-12
    assert abs(np.sum(alpha * np.where(y01 == 1, 1.0, -1.0))) <= tol


def test_kkt_conditions_at_tolerance(rng):
    X = np.concatenate([rng.standard_normal((20, 2)) - 1.2, rng.standard_normal((20, 2)) + 1.2])
    ybin = np.array([-1.0] * 20 + [1.0] * 20)
    c, tol = 2.0, 1e-3
    K = kernel_matrix(X, X, "rbf", 0.7, 3)
    alpha, bias = _smo(K, ybin, c, tol, 100_000)
    f = K @ (alpha * ybin) + bias
    margins = ybin * f
    for a, m in zip(alpha, margins):
        if a <= 1e-9:
            assert m >= 1 - tol
        elif a >= c - 1e-9:
            assert m <= 1 + tol
        else:
            assert abs(m - 1) <= tol


def test_dual_objective_beats_random_feasible(rng):
    model = svc_fit(XOR_X, XOR_Y, kernel="rbf", gamma=1.0, c=10.0, tol=1e-4)
    machine = model.machines[0]
    ybin = np.where(XOR_Y == 1, 1.0, -1.0)
    K = kernel_matrix(XOR_X, XOR_X, "rbf", 1.0, 3)
    alpha = np.zeros(4)
    alpha[machine.support_indices] = machine.dual_coef * ybin[machine.support_indices]

    def dual(a):
        return a.sum() - 0.5 * float(a * ybin @ K @ (a * ybin))

    ours = dual(alpha)
    c = 10.0
    pos = ybin > 0
    for _ in range(1000):
        draw = rng.uniform(0, c, size=4)
        # rescale one side so the equality constraint holds inside the box
        sp, sn = draw[pos].sum(), draw[~pos].sum()
        if sp > sn:
            draw[pos] *= sn / sp if sp > 0 else 0.0
        else:
            draw[~pos] *= sp / sn if sn > 0 else 0.0
        assert dual(draw) <= ours + 1e-6


def test_rbf_self_similarity_is_one(rng):
    U = rng.standard_normal((5, 4))
    K = kernel_matrix(U, U, "rbf", 0.3, 3)
    assert np.allclose(np.diag(K), 1.0)


def test_poly_degree_one_matches_shifted_linear(rng):
    U = rng.standard_normal((6, 3))
    V = rng.standard_normal((4, 3))
    poly = kernel_matrix(U, V, "poly", 1.0, 1)
    lin = kernel_matrix(U, V, "linear", 1.0, 1)
    assert np.allclose(poly, lin + 1.0)


def test_multiclass_ovr_decision_shape(rng):
    X = np.concatenate(
        [rng.standard_normal((12, 2)) + mu for mu in ([-4, 0], [4, 0], [0, 5])]
    )
    y = np.repeat([0, 1, 2], 12)
    model = svc_fit(X, y, kernel="rbf", gamma="scale", c=10.0)
    scores = svc_decision(model, X)
    assert scores.shape == (36, 3)
    assert (svc_predict(model, X) == y).mean() >= 0.95


def test_kernel_param_validation():
    X = np.array([[-1.0], [1.0]])
    y = np.array([0, 1])
    with pytest.raises(BadKernelParams):
        svc_fit(X, y, kernel="rbf", gamma=-0.5)
    with pytest.raises(BadKernelParams):
        svc_fit(X, y, kernel="poly", gamma=1.0, degree=0)
    with pytest.raises(BadKernelParams):
        svc_fit(X, y, kernel="sigmoid")
    with pytest.raises(DegenerateLabels):
        svc_fit(X, np.zeros(2, dtype=int))
    model = svc_fit(X, y, kernel="linear")
    with pytest.raises(ShapeError):
        svc_decision(model, np.zeros((2, 3)))


def test_gamma_scale_resolves_to_inverse_width(rng):
    X = rng.standard_normal((10, 8))
    y = (rng.random(10) < 0.5).astype(int)
    y[:2] = [0, 1]
    model = svc_fit(X, y, kernel="rbf", gamma="scale")
    assert model.gamma == pytest.approx(1.0 / 8)


def test_serialization_round_trip(rng):
    X = np.concatenate([rng.standard_normal((10, 2)) - 2, rng.standard_normal((10, 2)) + 2])
    y = np.array([0] * 10 + [1] * 10)
    model = svc_fit(X, y, kernel="poly", gamma=0.5, degree=2, c=3.0)
    again = model_from_dict(model_to_dict(model))
    assert np.allclose(svc_decision(again, X), svc_decision(model, X))
    assert np.array_equal(svc_predict(again, X), svc_predict(model, X))
