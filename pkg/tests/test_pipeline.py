import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lingen.linalg import DegenerateCoordinateError
from lingen.models import Dataset
from lingen.pipeline import (
    ContainerError,
    FourierCorpus,
    dft2,
    fourier_powerlaw_images,
    fourier_spectrum_report,
    frequency_index,
    qstar_on_corpora,
    radial_powerlaw_amplitudes,
    read_container,
    to_fourier,
    write_container,
)
from lingen.theory import mp_law


class TestContainer:
    def test_round_trip(self, tmp_path, rng):
        x = rng.standard_normal((3, 4))
        path = tmp_path / "a.mgdm"
        write_container(x, 2, 2, path)
        ds = read_container(path)
        assert ds.samples.tobytes() == x.tobytes()
        assert (ds.provenance["h"], ds.provenance["w"]) == (2, 2)

    def test_header_layout(self, tmp_path):
        path = tmp_path / "b.mgdm"
        payload = np.arange(32, dtype="<f8")
        path.write_bytes(b"MGDM1 2 4 4\n" + payload.tobytes())
        ds = read_container(path)
        assert (ds.n, ds.d) == (2, 16)
        np.testing.assert_array_equal(ds.samples.ravel(), payload)

    def test_truncated(self, tmp_path, rng):
        path = tmp_path / "c.mgdm"
        write_container(rng.standard_normal((3, 4)), 2, 2, path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ContainerError, match="size mismatch"):
            read_container(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "d.mgdm"
        path.write_bytes(b"NOPE1 1 1 1\n" + bytes(8))
        with pytest.raises(ContainerError, match="magic"):
            read_container(path)

    def test_non_finite(self, tmp_path):
        path = tmp_path / "e.mgdm"
        path.write_bytes(b"MGDM1 1 1 2\n" + np.array([1.0, np.nan]).tobytes())
        with pytest.raises(ContainerError, match="non-finite"):
            read_container(path)

    def test_shape_mismatch(self, tmp_path, rng):
        with pytest.raises(ValueError):
            write_container(rng.standard_normal((2, 5)), 2, 2, tmp_path / "f.mgdm")

    @given(arrays(np.float64, st.tuples(st.integers(1, 5), st.just(6)), elements=st.floats(allow_nan=False, allow_infinity=False)))
    def test_round_trip_property(self, tmp_path_factory, x):
        path = tmp_path_factory.mktemp("rt") / "x.mgdm"
        write_container(x, 2, 3, path)
        assert read_container(path).samples.tobytes() == np.ascontiguousarray(x, dtype="<f8").tobytes()


class TestFourier:
    def test_constant_image(self):
        f = to_fourier(np.full((1, 12), 3.0), 3, 4)
        energy = np.abs(f.coefficients[0]) ** 2
        assert energy[0] == pytest.approx(energy.sum())
        assert np.all(f.freq_index[0] == 0)

    def test_parseval_and_inverse(self, rng):
        x = rng.standard_normal((4, 35))
        f = to_fourier(x, 5, 7)
        np.testing.assert_allclose(np.sum(np.abs(f.coefficients) ** 2, axis=1), np.sum(x**2, axis=1), rtol=1e-10)
        np.testing.assert_allclose(f.inverse(), x, atol=1e-10)

    @given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5))
    def test_linear(self, seed, a, b):
        g = np.random.default_rng(seed)
        x, y = g.standard_normal((2, 24)), g.standard_normal((2, 24))
        np.testing.assert_allclose(dft2(a * x + b * y, 4, 6), a * dft2(x, 4, 6) + b * dft2(y, 4, 6), atol=1e-10)

    def test_shape_error(self, rng):
        with pytest.raises(ValueError):
            dft2(rng.standard_normal((2, 10)), 3, 3)

    def test_frequency_index(self):
        idx = frequency_index(4, 3)
        assert idx.shape == (12, 2)
        assert sorted(set(idx[:, 0])) == [-2, -1, 0, 1]
        assert sorted(set(idx[:, 1])) == [-1, 0, 1]


class TestSpectrum:
    def test_isotropic_in_mp_bulk(self, rng):
        h = w = 8
        d = h * w
        x = rng.standard_normal((4 * d, d))
        report = fourier_spectrum_report(to_fourier(x, h, w))
        law = mp_law(4.0)
        assert report.eigenvalues[0] <= law.lambda_plus * 1.05
        assert report.eigenvalues[-1] >= law.lambda_minus * 0.95
        assert np.all(np.diff(report.eigenvalues) <= 1e-12)

    def test_spike_outlier(self):
        h = w = 16
        ds = fourier_powerlaw_images(4 * h * w, h, w, alpha=1.0, beta=2.0, seed=1)
        report = fourier_spectrum_report(to_fourier(ds, h, w))
        edge = mp_law(4.0).lambda_plus
        assert report.eigenvalues[0] > 1.1 * edge

    def test_duplicated_coordinate(self, rng):
        z = rng.standard_normal((500, 1))
        coeffs = np.hstack([z, z]).astype(complex)
        corpus = FourierCorpus(coeffs, np.array([[0, 0], [0, 1]]), 1, 2)
        assert fourier_spectrum_report(corpus).eigenvalues[0] == pytest.approx(2.0, abs=1e-12)

    def test_dc_after_centering(self, rng):
        # images with zero spatial mean have no DC variance; centering needs the DC column dropped
        x = rng.standard_normal((50, 16))
        x -= x.mean(axis=1, keepdims=True)
        corpus = to_fourier(x, 4, 4)
        with pytest.raises(DegenerateCoordinateError):
            fourier_spectrum_report(corpus, center=True, drop_dc=False)
        report = fourier_spectrum_report(corpus, center=True)
        assert report.eigenvalues.size == 15 and report.dropped.tolist() == [0]

    def test_csv(self, tmp_path, rng):
        report = fourier_spectrum_report(to_fourier(rng.standard_normal((20, 4)), 2, 2))
        report.write_csv(tmp_path / "s.csv", width=2)
        report.write_variances_csv(tmp_path / "v.csv")
        lines = (tmp_path / "s.csv").read_text().splitlines()
        assert lines[0] == "rank,eigenvalue,eigenvalue_over_w" and len(lines) == 5
        assert (tmp_path / "v.csv").read_text().splitlines()[0] == "k1,k2,variance"


class TestSynthetic:
    def test_real_images(self):
        ds = fourier_powerlaw_images(8, 6, 5, alpha=1.0, beta=3.0, seed=0)
        assert ds.samples.dtype == float and ds.samples.shape == (8, 30)

    def test_amplitude_symmetry(self):
        s = radial_powerlaw_amplitudes(6, 6, 1.0)
        idx = frequency_index(6, 6)
        lookup = {tuple(k): v for k, v in zip(idx.tolist(), s)}
        for (k1, k2), v in lookup.items():
            neg = ((-k1 + 3) % 6 - 3, (-k2 + 3) % 6 - 3)
            assert lookup[neg] == pytest.approx(v)
        assert np.sum(s**2) == pytest.approx(1.0)

    def test_spike_is_rank_one(self):
        # with beta > 0, the population second moment in Fourier space is D (I + beta u u^H) D
        h = w = 4
        n = 200_000
        ds0 = fourier_powerlaw_images(n, h, w, 1.0, 0.0, seed=1, spike_seed=5)
        ds1 = fourier_powerlaw_images(n, h, w, 1.0, 3.0, seed=1, spike_seed=5)
        c0 = to_fourier(ds0, h, w).coefficients
        c1 = to_fourier(ds1, h, w).coefficients
        diff = (c1.T @ c1.conj() - c0.T @ c0.conj()) / n
        sv = np.linalg.svd(diff, compute_uv=False)
        assert sv[1] < 0.05 * sv[0]


@pytest.fixture(scope="module")
def image_corpora():
    h = w = 16
    n = 16 * h * w
    out = {}
    for beta in (0.0, 1.0):
        out[beta] = [fourier_powerlaw_images(n, h, w, 1.0, beta, seed=s, spike_seed=99) for s in (1, 2)]
    return h, w, out


class TestQstar:
    def test_identical(self, image_corpora):
        h, w, c = image_corpora
        a = c[1.0][0]
        assert qstar_on_corpora(a, a, h, w).mean == pytest.approx(1.0, abs=1e-12)

    def test_transition_and_control(self, image_corpora):
        h, w, c = image_corpora
        a, b = c[1.0]
        assert qstar_on_corpora(a, b, h, w).mean > 0.7
        assert qstar_on_corpora(a, b, h, w, phase_randomize=True, seed=3).mean < 0.15

    def test_no_spike(self):
        h = w = 16
        n = 4 * h * w
        a = fourier_powerlaw_images(n, h, w, 1.0, 0.0, seed=1)
        b = fourier_powerlaw_images(n, h, w, 1.0, 0.0, seed=2)
        assert qstar_on_corpora(a, b, h, w).mean < 0.1

    def test_randomised_matches_null(self):
        h = w = 8
        n = 4 * h * w
        rand, null = [], []
        for s in range(5):
            a = fourier_powerlaw_images(n, h, w, 1.0, 1.0, seed=(s, 1), spike_seed=7)
            b = fourier_powerlaw_images(n, h, w, 1.0, 1.0, seed=(s, 2), spike_seed=7)
            rand.append(qstar_on_corpora(a, b, h, w, phase_randomize=True, seed=(s, 3)).mean)
            a0 = fourier_powerlaw_images(n, h, w, 1.0, 0.0, seed=(s, 4))
            b0 = fourier_powerlaw_images(n, h, w, 1.0, 0.0, seed=(s, 5))
            null.append(qstar_on_corpora(a0, b0, h, w).mean)
        se = math.hypot(np.std(rand, ddof=1), np.std(null, ddof=1)) / math.sqrt(5)
        assert abs(np.mean(rand) - np.mean(null)) < 3 * se

    def test_power_spectrum_preserved(self, image_corpora):
        from lingen.models import phase_randomize

        h, w, c = image_corpora
        coeffs = to_fourier(c[1.0][0], h, w).coefficients[:50]
        np.testing.assert_allclose(np.abs(phase_randomize(coeffs, 1)), np.abs(coeffs), rtol=1e-15, atol=1e-15)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            qstar_on_corpora(rng.standard_normal((5, 4)), rng.standard_normal((5, 9)), 2, 2)


def test_dataset_input(rng):
    ds = Dataset(rng.standard_normal((3, 4)))
    assert to_fourier(ds, 2, 2).n == 3
