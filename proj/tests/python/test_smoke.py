import numpy as np
import pytest

import asymcs


def test_transforms_are_unitary():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    for y in (asymcs.dft(x), asymcs.fwht(x), asymcs.dwt(x, asymcs.WaveletSpec(4, 2))):
        assert y.shape == x.shape
        assert np.linalg.norm(y) == pytest.approx(np.linalg.norm(x), rel=1e-12)
    assert np.allclose(asymcs.dft(x), np.fft.fft2(x, norm="ortho"))
    v = rng.standard_normal(64)
    w = asymcs.WaveletSpec(3, 3, "boundary-corrected")
    assert np.allclose(asymcs.dwt(asymcs.dwt(v, w), w, inverse=True), v)


def test_operator_matrix_and_coherence():
    n = 32
    u = asymcs.compose([asymcs.dft_operator(n), asymcs.dwt_operator(n, 1, asymcs.WaveletSpec(1, 5)).adjoint()])
    a = u.matrix()
    assert np.allclose(a.conj().T @ a, np.eye(n))
    assert asymcs.global_coherence(u) == pytest.approx(np.max(np.abs(a) ** 2))
    tail = asymcs.tail_coherence(asymcs.frequency_magnitude_order(n) @ u, [0, 8, 16])
    assert tail["row"][0] >= tail["row"][1] >= tail["row"][2]
    levels = asymcs.LevelStructure.dyadic(n, 3)
    assert asymcs.local_coherence(u, levels, levels).shape == (3, 3)


def test_sparsity_curve_rows_per_epsilon():
    image = asymcs.phantom("geometric", 64)
    prof = asymcs.sparsity_curve(image, asymcs.WaveletSpec(4, 3), [0.5, 0.9])
    assert prof["relative"].shape == (2, 4)
    assert np.all(prof["relative"][0] <= prof["relative"][1])


def test_maps_and_recovery():
    n = 32
    image = asymcs.phantom("geometric", n)
    m = asymcs.build_map("dft", n, "allround", 0.25, seed=3)
    assert m.mask.shape == (n, n)
    assert m.mask.sum() == m.m == len(m.indices)
    out = asymcs.recover_image(image, "dft", m, controls=asymcs.SolverControls(300, 1e-4))
    assert out["image"].shape == (n, n)
    assert out["error"] < 60
    again = asymcs.recover_image(image, "dft", m, controls=asymcs.SolverControls(300, 1e-4))
    assert np.array_equal(out["image"], again["image"])


def test_dense_l1_recovers_sparse_vector():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((24, 48))
    x = np.zeros(48)
    x[[3, 17, 40]] = [1.0, -2.0, 0.5]
    r = asymcs.solve_l1_dense(a.astype(complex), (a @ x).astype(complex), controls=asymcs.SolverControls(20000, 1e-9))
    assert np.linalg.norm(r.estimate - x) < 1e-3 * np.linalg.norm(x)


def test_flip_test_runs():
    n = 32
    m = asymcs.build_map("dft", n, "allround", 0.25, seed=1)
    r = asymcs.flip_test(asymcs.phantom("geometric", n), "dft", m, controls=asymcs.SolverControls(300, 1e-4))
    assert r["error_flipped"] > r["error_direct"]


def test_fm_forward_and_recover():
    n = 32
    x = asymcs.phantom("geometric", n)
    m = asymcs.build_map("hadamard", n, "allround", 0.25, seed=2)
    meas = asymcs.fm_forward(x, 1.4, m, 1e6, noise_seed=2)
    assert len(meas.counts) == m.m
    out = asymcs.fm_recover(meas, 1.4, asymcs.WaveletSpec(4, 2), truth=x, controls=asymcs.SolverControls(500, 1e-4))
    assert out["error"] < 50


def test_infdim_pipeline():
    target = asymcs.target("expcos2")
    w = asymcs.half_integer_frequencies(32, list(range(64)))
    y = asymcs.fourier_samples(target, w)
    spec = asymcs.SliceSpec(asymcs.WaveletSpec(2, 3, "boundary-corrected"), 32, 8)
    s = asymcs.synthesis_slice(spec, w)
    assert s.entries.shape == (64, 32)
    out = asymcs.solve_infdim(s, y, 0.0, asymcs.SolverControls(500, 1e-4), asymcs.unit_grid(32), target)
    assert out["values"].shape == (32,)
    assert out["error"] < 20


def test_errors_carry_code_and_field():
    with pytest.raises(asymcs.Error) as info:
        asymcs.dft(np.zeros(12))
    assert info.value.code == "invalid_shape"
    with pytest.raises(ValueError):
        asymcs.build_map("dft", 32, "nonsense", 0.25)
