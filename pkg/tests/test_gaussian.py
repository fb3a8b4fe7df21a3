import numpy as np
import pytest

from cvsense import gaussian as g

from conftest import random_gaussian_state


def test_vacuum_state():
    vac = g.vacuum_state(1)
    assert np.allclose(vac.mean, 0.0)
    assert np.allclose(vac.cov, np.diag([0.25, 0.25]))
    vac3 = g.vacuum_state(3)
    assert vac3.num_modes == 3
    assert np.allclose(vac3.cov, 0.25 * np.eye(6))


def test_vacuum_rejects_zero_modes():
    with pytest.raises(ValueError):
        g.vacuum_state(0)


def test_vacuum_is_loss_fixed_point():
    vac = g.vacuum_state(1)
    out = g.apply_loss(vac, g.LossChannel(np.array([0.5])))
    assert np.allclose(out.cov, vac.cov)
    assert np.allclose(out.mean, 0.0)


def test_squeezed_vacuum_values():
    s = g.squeezed_vacuum(10.0, "x")
    # (sqrt(11)+sqrt(10))^2 = 41.97617
    assert s.cov[0, 0] == pytest.approx(5.9558e-3, abs=1e-7)
    assert s.cov[0, 0] * s.cov[1, 1] == pytest.approx(1.0 / 16.0, rel=1e-12)  # purity
    assert s.mean_photon_number() == pytest.approx(10.0, abs=1e-12)

    s1 = g.squeezed_vacuum(1.0, "x")
    e2r = (np.sqrt(2.0) + 1.0) ** 2
    assert s1.cov[0, 0] == pytest.approx(1.0 / (4.0 * e2r), rel=1e-12)
    assert e2r == pytest.approx(5.8284, abs=1e-4)

    p = g.squeezed_vacuum(1.0, "p")
    assert p.cov[0, 0] == pytest.approx(s1.cov[1, 1])
    assert p.cov[1, 1] == pytest.approx(s1.cov[0, 0])


def test_squeezed_vacuum_zero_photons_is_vacuum():
    assert np.allclose(g.squeezed_vacuum(0.0).cov, 0.25 * np.eye(2))


def test_squeezed_vacuum_rejects_negative():
    with pytest.raises(ValueError):
        g.squeezed_vacuum(-0.1)


def test_balanced_splitter_small():
    t1 = g.balanced_splitter(1)
    assert np.allclose(t1.matrix, np.eye(2))
    o2 = g.complete_orthogonal(np.ones(2))
    expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert np.allclose(o2, expected)


def test_balanced_splitter_m4_covariance():
    s = g.squeezed_vacuum(4.0, "x")
    state = g.tensor(s, g.vacuum_state(3))
    out = g.apply_symplectic(state, g.balanced_splitter(4))
    e2r = 1.0 / (np.sqrt(5.0) + 2.0) ** 2
    cov_x = out.cov_block("x")
    assert np.allclose(np.diag(cov_x), (e2r + 3.0) / 16.0, atol=1e-14)
    off = cov_x[~np.eye(4, dtype=bool)]
    assert np.allclose(off, (e2r - 1.0) / 16.0, atol=1e-14)


def test_unbalanced_splitter():
    o = g.complete_orthogonal(np.array([1.0, 1.0]))
    assert np.allclose(o, g.complete_orthogonal(np.array([5.0, 5.0])))

    o = g.complete_orthogonal(np.array([1.0, 0.0, 0.0]))
    assert np.allclose(o[0], [1, 0, 0])
    assert np.allclose(o @ o.T, np.eye(3), atol=1e-14)

    o = g.complete_orthogonal(np.array([0.8, 0.6]))
    assert np.allclose(o[0], [0.8, 0.6])
    assert np.allclose(np.abs(o[1]), [0.6, 0.8])
    assert np.allclose(o @ o.T, np.eye(2), atol=1e-14)

    with pytest.raises(ValueError):
        g.unbalanced_splitter(np.zeros(3))


def test_symplectic_invariant_random_transforms(rng):
    for m in (1, 2, 5):
        ortho = np.linalg.qr(rng.standard_normal((m, m)))[0]
        t = g.transform_from_mode_matrix(ortho)
        omega = g.symplectic_form(m)
        assert np.abs(t.matrix @ omega @ t.matrix.T - omega).max() < 1e-10


def test_apply_symplectic_examples():
    vac = g.vacuum_state(1)
    ident = g.SymplecticTransform(np.eye(2), np.zeros(2))
    assert np.allclose(g.apply_symplectic(vac, ident).cov, vac.cov)

    disp = g.displacement_transform(np.array([0.7, 0.0]))
    coh = g.apply_symplectic(vac, disp)
    assert np.allclose(coh.mean, [0.7, 0.0])
    assert np.allclose(coh.cov, 0.25 * np.eye(2))

    s = g.squeezed_vacuum(1.0, "x")
    state = g.tensor(s, g.vacuum_state(1))
    out = g.apply_symplectic(state, g.balanced_splitter(2))
    e2r = 1.0 / (np.sqrt(2.0) + 1.0) ** 2
    expected = np.array([[e2r + 1, e2r - 1], [e2r - 1, e2r + 1]]) / 8.0
    assert np.allclose(out.cov_block("x"), expected, atol=1e-14)


def test_apply_symplectic_dimension_mismatch():
    with pytest.raises(ValueError):
        g.apply_symplectic(g.vacuum_state(2), g.balanced_splitter(3))


def test_loss_examples():
    s = g.squeezed_vacuum(10.0)
    out = g.apply_loss(s, g.LossChannel(np.array([0.9])))
    assert out.cov[0, 0] == pytest.approx(3.0360e-2, abs=1e-6)

    same = g.apply_loss(s, g.LossChannel(np.array([1.0])))
    assert np.allclose(same.cov, s.cov)

    with pytest.raises(ValueError):
        g.LossChannel(np.array([0.0]))
    with pytest.raises(ValueError):
        g.LossChannel(np.array([1.1]))
    with pytest.raises(ValueError):
        g.apply_loss(g.vacuum_state(2), g.LossChannel(np.array([0.5, 0.5, 0.5])))


def test_loss_composition(rng):
    state = random_gaussian_state(rng, 3)
    eta1 = rng.uniform(0.3, 1.0, size=3)
    eta2 = rng.uniform(0.3, 1.0, size=3)
    seq = g.apply_loss(g.apply_loss(state, g.LossChannel(eta1)), g.LossChannel(eta2))
    once = g.apply_loss(state, g.LossChannel(eta1 * eta2))
    assert np.abs(seq.cov - once.cov).max() < 1e-12
    assert np.abs(seq.mean - once.mean).max() < 1e-12


def test_purity_preserved_by_lossless_transforms(rng):
    state = random_gaussian_state(rng, 2)
    det_before = np.linalg.det(state.cov)
    ortho = np.linalg.qr(rng.standard_normal((2, 2)))[0]
    out = g.apply_symplectic(state, g.transform_from_mode_matrix(ortho))
    assert np.linalg.det(out.cov) == pytest.approx(det_before, rel=1e-10)


def test_photon_number_bookkeeping():
    s = g.squeezed_vacuum(3.0)
    state = g.tensor(s, g.vacuum_state(3))
    before = state.mean_photon_number()
    after = g.apply_symplectic(state, g.balanced_splitter(4)).mean_photon_number()
    assert after == pytest.approx(before, abs=1e-12)

    lossy = g.apply_loss(state, g.LossChannel(np.full(4, 0.6)))
    assert lossy.mean_photon_number() == pytest.approx(0.6 * before, abs=1e-12)


def test_displace_all_and_ordering():
    vac = g.vacuum_state(2)
    assert np.allclose(g.displace_all(vac, 0.0).mean, vac.mean)
    out = g.displace_all(vac, 0.3)
    assert np.allclose(out.mean, [0.3, 0.3, 0.0, 0.0])
    assert np.allclose(out.cov, vac.cov)

    # Loss-then-displace leaves the displacement unattenuated.
    coh = g.apply_symplectic(g.vacuum_state(1), g.displacement_transform(np.array([1.0, 0.0])))
    eta = 0.49
    loss_then_disp = g.displace_all(g.apply_loss(coh, g.LossChannel(np.array([eta]))), 0.3)
    assert loss_then_disp.mean[0] == pytest.approx(np.sqrt(eta) * 1.0 + 0.3)
    disp_then_loss = g.apply_loss(g.displace_all(coh, 0.3), g.LossChannel(np.array([eta])))
    assert disp_then_loss.mean[0] == pytest.approx(np.sqrt(eta) * 1.3)


def test_homodyne_sampling_statistics():
    rng = np.random.default_rng(42)
    vac = g.vacuum_state(1)
    draws = g.homodyne_samples(vac, "x", 1_000_000, rng)
    assert abs(draws.mean()) < 3.0 * 0.5 / 1e3
    assert draws.var() == pytest.approx(0.25, rel=0.01)


def test_homodyne_entangled_mean_variance():
    from cvsense.protocols import build_entangled_input

    rng = np.random.default_rng(7)
    state = build_entangled_input(4, 4.0)
    draws = g.homodyne_samples(state, "x", 1_000_000, rng)
    est = draws.mean(axis=1)
    target = 1.0 / (16.0 * (np.sqrt(5.0) + 2.0) ** 2)  # 3.4826e-3
    assert est.var() == pytest.approx(target, rel=0.01)


def test_homodyne_covariance_consistency(rng):
    state = random_gaussian_state(rng, 3)
    n = 100_000
    draws = g.homodyne_samples(state, "x", n, np.random.default_rng(5))
    emp = np.cov(draws.T)
    ana = state.cov_block("x")
    # Standard error of each covariance entry for Gaussian data.
    se = np.sqrt((np.outer(np.diag(ana), np.diag(ana)) + ana**2) / n)
    assert np.all(np.abs(emp - ana) < 5.0 * se)


def test_homodyne_reproducible():
    state = g.vacuum_state(2)
    a = g.homodyne_sample(state, "x", np.random.default_rng(9))
    b = g.homodyne_sample(state, "x", np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_state_validation():
    with pytest.raises(ValueError):
        g.GaussianState(np.zeros(2), np.array([[0.25, 0.1], [0.3, 0.25]]))  # asymmetric
    with pytest.raises(ValueError):
        g.GaussianState(np.zeros(2), 0.1 * np.eye(2))  # below vacuum noise


def test_serialization_roundtrip(rng):
    state = random_gaussian_state(rng, 2)
    again = g.GaussianState.from_dict(state.to_dict())
    assert np.allclose(again.mean, state.mean)
    assert np.allclose(again.cov, state.cov)
