"""sf-lens: risk-coverage analytics and latent-space exploration for
silent-failure prevention in classification systems."""

__version__ = "0.1.0"

from . import analytics, backend, bundle, core, csf, errors, metrics, shifts, studies

__all__ = [
    "analytics",
    "backend",
    "bundle",
    "core",
    "csf",
    "errors",
    "metrics",
    "shifts",
    "studies",
    "__version__",
]
