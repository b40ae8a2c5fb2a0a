import os

import numpy as np
import pytest

from mfadvlab import dataio, nets

# Heavy statistical checks use every core available.
WORKERS = max(1, os.cpu_count() or 1)


def small_config(**kw):
    base = dict(d=6, K=3, L=3, N=10, sigma_w2=1.5, sigma_b2=0.2, u=1.0, v=0.1,
                arch=nets.VANILLA)
    base.update(kw)
    return nets.NetworkConfig(**base)


@pytest.fixture(scope="session")
def synth_dataset():
    """28x28 10-class stand-in dataset, round-tripped through the IDX container."""
    return dataio.make_synthetic(n=8192, side=28, classes=10, seed=42)


@pytest.fixture(scope="session")
def synth_idx_paths(tmp_path_factory, synth_dataset):
    root = tmp_path_factory.mktemp("idx")
    img, lab = root / "images-idx3-ubyte", root / "labels-idx1-ubyte"
    dataio.write_idx(synth_dataset.images, synth_dataset.labels, img, lab)
    return img, lab


def rand_unit_sphere_input(d, seed):
    rng = np.random.default_rng(seed)
    return dataio.normalize_sqrt_d(rng.standard_normal(d))
