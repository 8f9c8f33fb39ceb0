import numpy as np
import pytest

from core import settings
from apps.fock.models import SubspaceSpec, WaveFunction


@pytest.fixture
def rng():
    return np.random.default_rng(settings.SEED)


@pytest.fixture
def random_state(rng):
    """Factory for normalized random wave functions in a given subspace."""

    def make(s2, s3):
        spec = SubspaceSpec(s2, s3)
        z = rng.normal(size=spec.d) + 1j * rng.normal(size=spec.d)
        return WaveFunction.from_amplitudes(spec, z, normalize=True)

    return make


@pytest.fixture
def tmp_out(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    return out
