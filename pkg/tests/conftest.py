from __future__ import annotations

import numpy as np
import pytest


def make_blobs(n_a: int = 30, n_b: int = 12, d: int = 4, gap: float = 3.0,
               seed: int = 0, labels: tuple[str, str] = ("a", "b")):
    """Two well-separated Gaussian blobs; second blob is the minority."""
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0.0, 0.5, (n_a, d)),
                   rng.normal(gap, 0.5, (n_b, d))])
    y = np.array([labels[0]] * n_a + [labels[1]] * n_b, dtype=object)
    return X, y


@pytest.fixture(scope="session")
def tiny_synth_dir(tmp_path_factory):
    """One small synthetic run shared by CSV-level tests (1 day, 1 plant, 2 Hz)."""
    from phytosense.synth import SynthSpec, generate_synthetic

    out = tmp_path_factory.mktemp("tiny_synth")
    spec = SynthSpec(days=1, plants=1, native_rate_hz=2.0)
    manifest = generate_synthetic(spec, seed=11, out_dir=out)
    return out, manifest
