from .io import InferenceBundle, RunData, load_bundle, write_bundle
from .lidc import derive_lidc_label, derive_lidc_labels
from .manifest import BundleManifest, MetaTagSpec
from .synthetic import SyntheticSpec, default_studies, generate_synthetic_bundle

__all__ = [
    "BundleManifest",
    "MetaTagSpec",
    "InferenceBundle",
    "RunData",
    "load_bundle",
    "write_bundle",
    "SyntheticSpec",
    "generate_synthetic_bundle",
    "default_studies",
    "derive_lidc_label",
    "derive_lidc_labels",
]
