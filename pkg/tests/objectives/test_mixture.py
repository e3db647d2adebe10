import numpy as np
import pytest
from derivative_checks import check_derivatives
from pydantic import ValidationError

from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.mixture import (
    FLAT_COMPONENT,
    SHARP_COMPONENT,
    MixtureSpec,
    gaussian_mixture_landscape,
)


def two_component(weights=(1.0, 1e-300), cov=((1.0, 0.0), (0.0, 1.0))):
    return MixtureSpec(weights=list(weights), means=[(0.5, -1.0), (50.0, 50.0)], covariances=[cov, cov])


class TestMixtureSpec:

    def test_canonical(self):
        spec = MixtureSpec.canonical()
        assert spec.weights == [0.7, 0.5]
        assert spec.means[SHARP_COMPONENT] == (2.0, 0.0)
        assert spec.means[FLAT_COMPONENT] == (-2.0, 0.0)

    def test_needs_two_components(self):
        with pytest.raises(ValidationError):
            MixtureSpec(weights=[1.0], means=[(0.0, 0.0)], covariances=[((1.0, 0.0), (0.0, 1.0))])

    def test_positive_weights(self):
        with pytest.raises(ValidationError):
            two_component(weights=(1.0, 0.0))

    def test_positive_definite_covariance(self):
        with pytest.raises(ValidationError):
            two_component(cov=((1.0, 2.0), (2.0, 1.0)))

    def test_lengths_must_agree(self):
        with pytest.raises(ValidationError):
            MixtureSpec(weights=[1.0, 1.0], means=[(0.0, 0.0)], covariances=[((1.0, 0.0), (0.0, 1.0))] * 2)


class TestGaussianMixtureLandscape:

    def test_gradient_vanishes_at_isolated_mean(self):
        landscape = gaussian_mixture_landscape(two_component())
        np.testing.assert_allclose(landscape.grad([0.5, -1.0]), [0.0, 0.0], atol=1e-15)

    def test_value_at_mean_is_negative_peak_density(self):
        landscape = gaussian_mixture_landscape(two_component())
        assert landscape.value([0.5, -1.0]) == pytest.approx(-1.0 / (2.0 * np.pi))

    def test_sharp_basin_has_larger_trace(self):
        landscape = gaussian_mixture_landscape(MixtureSpec.canonical())
        assert landscape.trace_at_mean(SHARP_COMPONENT) > landscape.trace_at_mean(FLAT_COMPONENT) > 0.0

    def test_sharp_basin_is_deeper(self):
        landscape = gaussian_mixture_landscape(MixtureSpec.canonical())
        assert landscape.value([2.0, 0.0]) < landscape.value([-2.0, 0.0])

    def test_nearest_component(self):
        landscape = gaussian_mixture_landscape(MixtureSpec.canonical())
        assert landscape.nearest_component([1.5, 0.3]) == SHARP_COMPONENT
        assert landscape.nearest_component([-0.5, 3.0]) == FLAT_COMPONENT

    def test_hessian_symmetric(self):
        landscape = gaussian_mixture_landscape(MixtureSpec.canonical())
        h = landscape.hessian([0.3, -0.7])
        np.testing.assert_array_equal(h, h.T)

    def test_derivatives(self):
        rng = RngStream(8)
        landscape = gaussian_mixture_landscape(MixtureSpec.canonical())
        points = [rng.uniform(-3.0, 3.0, 2) for _ in range(20)]
        check_derivatives(landscape, points, rng, h=1e-6)
