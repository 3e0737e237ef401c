from __future__ import annotations

import numpy as np
import pytest

from hwr import features, imaging, synth


@pytest.fixture(scope="session")
def small_synth(tmp_path_factory):
    """Small synthetic dataset shared by non-acceptance tests."""
    out = tmp_path_factory.mktemp("synth-small")
    spec = synth.SynthSpec(per_class=6, seed=1234)
    manifest = synth.synth_generate(spec, out)
    return manifest


@pytest.fixture(scope="session")
def small_features(small_synth):
    """HOG features and labels for the small synthetic dataset."""
    X = np.array([
        features.extract_word_features(imaging.read_pgm(p)) for p in small_synth.paths()
    ])
    return X, small_synth.labels()
