"""Confidence scoring functions.

Every channel is a deterministic function of the bundle tensors and is
oriented higher-is-more-confident; entropy-based scores are negated to
keep that single convention. Entropies use the natural log, which only
rescales values and leaves every ranking (hence every AURC) unchanged.

Channel names: msr, pe, mcd-msr, mcd-pe, mcd-ee, dg-res, ext:<name>.
"""

from __future__ import annotations

import numpy as np

from .bundle.io import InferenceBundle, RunData
from .errors import UnknownChannelError, WidthMismatchError

SOFTMAX_CHANNELS = ("msr", "pe")
MCD_CHANNELS = ("mcd-msr", "mcd-pe", "mcd-ee")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stabilized softmax; works on (K,) or (n, K)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def entropy(p: np.ndarray) -> np.ndarray:
    """Shannon entropy in nats with the 0*log(0) := 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return -np.sum(terms, axis=-1)


def msr(logits: np.ndarray) -> np.ndarray:
    return np.max(softmax(logits), axis=-1)


def pe(logits: np.ndarray) -> np.ndarray:
    """Negated predictive entropy of the softmax distribution; range [-ln K, 0]."""
    return -entropy(softmax(logits))


def mcd_channels(stack: np.ndarray) -> dict[str, np.ndarray]:
    """Aggregate a (n, T, K) or (T, K) Monte-Carlo-Dropout logit stack.

    mcd-msr: max of the mean softmax. mcd-pe: negated entropy of the mean
    softmax. mcd-ee: negated mean of per-sample entropies. By concavity of
    the entropy the raw mcd-pe entropy dominates mcd-ee, so as confidences
    mcd-ee >= mcd-pe with equality iff all samples agree.
    """
    stack = np.asarray(stack, dtype=np.float64)
    squeeze = stack.ndim == 2
    if squeeze:
        stack = stack[None, :, :]
    probs = softmax(stack)                  # (n, T, K)
    p_mean = probs.mean(axis=1)             # (n, K)
    out = {
        "mcd-msr": np.max(p_mean, axis=-1),
        "mcd-pe": -entropy(p_mean),
        "mcd-ee": -entropy(probs).mean(axis=1),
    }
    if squeeze:
        out = {k: v[0] for k, v in out.items()}
    return out


def dg_res(aux_logits: np.ndarray, K: int) -> np.ndarray:
    """Confidence from a K+1-wide abstention head: 1 minus the reservation mass."""
    aux = np.asarray(aux_logits, dtype=np.float64)
    width = aux.shape[-1]
    if width != K + 1:
        raise WidthMismatchError(K + 1, width)
    reservation = softmax(aux)[..., -1]
    return 1.0 - reservation


def external_channel(run: RunData, name: str) -> np.ndarray:
    """Pass-through of an ingested channel; finiteness was enforced at load."""
    if name not in run.ext:
        raise UnknownChannelError(name)
    return run.ext[name].astype(np.float64)


def compute_channel(run: RunData, name: str, K: int) -> np.ndarray:
    """Scores of one named channel over a whole run."""
    if name == "msr":
        return msr(run.logits)
    if name == "pe":
        return pe(run.logits)
    if name in MCD_CHANNELS:
        if run.mcd is None:
            raise UnknownChannelError(name)
        return mcd_channels(run.mcd)[name]
    if name == "dg-res":
        if run.dg_logits is None:
            raise UnknownChannelError(name)
        return dg_res(run.dg_logits, K)
    if name.startswith("ext:"):
        return external_channel(run, name[4:])
    raise UnknownChannelError(name)


def available_channels(bundle: InferenceBundle) -> list[str]:
    """All channels the bundle's tensors support, in stable order."""
    names = list(SOFTMAX_CHANNELS)
    if bundle.manifest.T > 0:
        names += list(MCD_CHANNELS)
    if bundle.manifest.has_dg_logits:
        names.append("dg-res")
    names += [f"ext:{c}" for c in bundle.manifest.channels]
    return names
