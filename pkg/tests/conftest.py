import numpy as np
import pytest

from sf_lens.bundle.io import InferenceBundle, RunData
from sf_lens.bundle.manifest import BundleManifest, MetaTagSpec


def make_run(ids, labels, logits, latents=None, mcd=None, dg=None, ext=None, meta=None):
    n = len(ids)
    logits = np.asarray(logits, dtype=np.float32)
    if latents is None:
        latents = np.zeros((n, 2), dtype=np.float32)
    return RunData(
        ids=np.array([str(i) for i in ids], dtype=object),
        labels=np.asarray(labels, dtype=np.int64),
        logits=logits,
        latents=np.asarray(latents, dtype=np.float32),
        mcd=np.asarray(mcd, dtype=np.float32) if mcd is not None else None,
        dg_logits=np.asarray(dg, dtype=np.float32) if dg is not None else None,
        ext={k: np.asarray(v, dtype=np.float32) for k, v in (ext or {}).items()},
        meta={k: np.asarray(v, dtype=object) for k, v in (meta or {}).items()},
    )


def make_bundle(runs, K, d=2, T=0, channels=(), meta_schema=(), name="test",
                has_dg=False, image_dir=None):
    manifest = BundleManifest(
        name=name,
        n=len(runs[0].ids),
        K=K,
        T=T,
        d=d,
        runs=len(runs),
        channels=tuple(channels),
        meta_schema=tuple(MetaTagSpec(t) if isinstance(t, str) else t for t in meta_schema),
        has_dg_logits=has_dg,
        image_dir=image_dir,
    )
    manifest.validate()
    return InferenceBundle(manifest=manifest, runs=list(runs))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["numba", "numpy"])
def each_backend(request):
    """Run the test once per kernel backend, restoring the default after."""
    from sf_lens import backend

    if request.param == "numba" and not backend.numba_available():
        pytest.skip("numba not importable")
    old = backend.get_backend()
    backend.set_backend(request.param)
    yield request.param
    backend.set_backend(old)
