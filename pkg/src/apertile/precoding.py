"""Zero-forcing sub-array coefficients and beam power normalization."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import expand_weights_dual
from .tiling import AggregationVector


class ChannelRankError(RuntimeError):
    """Effective channel is rank deficient or too ill conditioned to invert."""


@dataclass
class PrecodingMatrix:
    """(2Q, A) coefficients; column b drives the beam serving RX port b.

    `scale` holds the multiplier applied to each column by the power
    normalization (None before normalization); dividing a column by its
    scale recovers the raw zero-forcing solution.
    """

    coefficients: np.ndarray
    scale: np.ndarray | None = None


def zero_forcing(H, condition_cap: float = 1e8) -> PrecodingMatrix:
    """Minimum-norm right inverse of the effective channel.

    Computes conj(H).T @ inv(H @ conj(H).T), so H @ V is the identity on
    the RX ports. Raises ChannelRankError when H has more rows than
    columns, is rank deficient, or its condition number exceeds the cap.
    """
    H = np.asarray(H, dtype=complex)
    ports, dof = H.shape
    if ports > dof:
        raise ChannelRankError(
            f"{ports} RX ports exceed {dof} sub-array degrees of freedom"
        )
    gram = H @ H.conj().T
    lam = np.linalg.eigvalsh(gram)
    if lam[0] <= 0.0:
        raise ChannelRankError("effective channel is rank deficient")
    cond = float(np.sqrt(lam[-1] / lam[0]))
    if cond > condition_cap:
        raise ChannelRankError(
            f"effective channel condition number {cond:.3e} exceeds cap {condition_cap:.3e}"
        )
    coeffs = np.linalg.solve(gram, H).conj().T
    return PrecodingMatrix(coefficients=coeffs)


def normalize_beams(V: PrecodingMatrix, s: AggregationVector) -> PrecodingMatrix:
    """Scale each beam so its expanded element-weight vector has unit norm.

    Column scaling preserves the zero-forcing nulls; the returned `scale`
    entries are the applied multipliers (1 / pre-scale weight norm).
    """
    coeffs = np.asarray(V.coefficients, dtype=complex)
    q = s.tile_count
    if coeffs.shape[0] != 2 * q:
        raise ValueError(
            f"precoder has {coeffs.shape[0]} coefficient rows, tiling implies {2 * q}"
        )
    sizes = np.concatenate([s.tile_sizes()] * 2).astype(float)
    norms = np.sqrt(sizes @ (coeffs.real**2 + coeffs.imag**2))
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize an all-zero beam column")
    return PrecodingMatrix(coefficients=coeffs / norms, scale=1.0 / norms)


def element_weight_norms(V: PrecodingMatrix, s: AggregationVector) -> np.ndarray:
    """Per-beam L2 norm of the expanded element weights (oracle helper)."""
    w = expand_weights_dual(s, np.asarray(V.coefficients).T)
    return np.linalg.norm(w, axis=-1)


# --- export / import (same tensor conventions as channel matrices) --------

_ORDERING_NOTE = (
    "rows: psi blocks V then H, each tile q = 1..Q; cols: served RX port "
    "a = 2*(u-1)+O(chi), O(V)=1, O(H)=2"
)


def save_precoders(precoders: list[PrecodingMatrix], path, meta: dict | None = None) -> None:
    """Persist per-drop precoders for replay/debug, as .npz or JSON."""
    path = str(path)
    stacked = np.stack([np.asarray(p.coefficients) for p in precoders])
    scales = [None if p.scale is None else np.asarray(p.scale) for p in precoders]
    has_scales = all(s is not None for s in scales)
    if path.endswith(".npz"):
        payload = {"coefficients": stacked, "ordering": _ORDERING_NOTE}
        for key, value in (meta or {}).items():
            payload[f"meta_{key}"] = np.asarray(str(value))
        if has_scales:
            payload["scales"] = np.stack(scales)
        np.savez_compressed(path, **payload)
        return
    doc = {
        "kind": "precoding_matrices",
        **{f"meta_{k}": str(v) for k, v in (meta or {}).items()},
        "shape": list(stacked.shape),
        "ordering": _ORDERING_NOTE,
        "real": stacked.real.tolist(),
        "imag": stacked.imag.tolist(),
        "scales": np.stack(scales).tolist() if has_scales else None,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_precoders(path) -> list[PrecodingMatrix]:
    path = str(path)
    if path.endswith(".npz"):
        data = np.load(path, allow_pickle=False)
        stacked = data["coefficients"]
        scales = data["scales"] if "scales" in data else None
    else:
        with open(path) as fh:
            doc = json.load(fh)
        stacked = np.array(doc["real"]) + 1j * np.array(doc["imag"])
        scales = None if doc.get("scales") is None else np.array(doc["scales"])
    return [
        PrecodingMatrix(
            coefficients=stacked[p],
            scale=None if scales is None else scales[p],
        )
        for p in range(stacked.shape[0])
    ]
