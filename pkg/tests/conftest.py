import numpy as np
import pytest

from livsic import build_map, compute_invariant_density, find_horseshoe


@pytest.fixture(scope="session")
def doubling():
    pmap = build_map("doubling", ell=2)
    find_horseshoe(pmap, (0.0, 1.0), (0.0, 0.5), (0.5, 1.0))
    return pmap


@pytest.fixture(scope="session")
def doubling_density(doubling):
    return compute_invariant_density(doubling, 4096)


@pytest.fixture(scope="session")
def tent():
    pmap = build_map("tent")
    find_horseshoe(pmap, (0.0, 1.0), (0.0, 0.5), (0.5, 1.0))
    return pmap


@pytest.fixture(scope="session")
def tent_density(tent):
    return compute_invariant_density(tent, 4096)


@pytest.fixture(scope="session")
def golden_beta():
    return build_map("beta", beta=(1.0 + np.sqrt(5.0)) / 2.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
