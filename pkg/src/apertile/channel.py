"""Deterministic line-of-sight channel between element ports and UE ports.

One drop yields a complex matrix with A = 2U rows and 2*M*N columns. Row
a = 2*(u - 1) + O(chi) (1-based) is the chi-polarized RX port of user u,
with O(V) = 1 and O(H) = 2. Columns come in two polarization blocks, V
then H, each in pixel-index order (column m fastest). Entries combine the
free-space (or exponent-overridden) path gain, the TX element pattern
toward the user, the slant polarization coupling under aligned bases, and
the propagation phase exp(-j 2 pi d / lambda) at the exact element-to-user
distance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .geometry import POLARIZATIONS, ArrayGeometry, ElementPattern
from .tiling import AggregationVector
from .units import dbm_to_watts


@dataclass(frozen=True)
class LinkBudget:
    """Total TX power, per-port noise power, and coverage floor, in watts."""

    tx_power_w: float
    noise_power_w: float
    coverage_threshold_w: float

    def __post_init__(self):
        if min(self.tx_power_w, self.noise_power_w, self.coverage_threshold_w) <= 0:
            raise ValueError("budget powers must be positive")

    @classmethod
    def from_dbm(cls, tx_power_dbm, noise_power_dbm, coverage_threshold_dbm):
        return cls(
            tx_power_w=float(dbm_to_watts(tx_power_dbm)),
            noise_power_w=float(dbm_to_watts(noise_power_dbm)),
            coverage_threshold_w=float(dbm_to_watts(coverage_threshold_dbm)),
        )


@dataclass(frozen=True)
class ChannelModel:
    """Propagation settings: "fspl" or a path-loss-exponent override.

    Exponent 2 reproduces free space; other exponents rescale the amplitude
    as (lambda / 4 pi) d^(-alpha/2) with a 1 m pivot. The penetration loss
    (dB) models indoor users and defaults to 0.
    """

    mode: str = "fspl"
    path_loss_exponent: float = 2.0
    penetration_loss_db: float = 0.0

    def __post_init__(self):
        if self.mode not in ("fspl", "ploss_exp"):
            raise ValueError(f"unknown channel mode {self.mode!r}")
        if self.path_loss_exponent <= 0:
            raise ValueError("path-loss exponent must be positive")

    @property
    def tag(self) -> str:
        if self.mode == "fspl":
            base = "fspl"
        else:
            base = f"ploss_exp({self.path_loss_exponent:g})"
        if self.penetration_loss_db:
            base += f"+pen({self.penetration_loss_db:g}dB)"
        return base

    def amplitude(self, distance_m, wavelength_m):
        """Linear field amplitude of the path gain at the given distance."""
        d = np.asarray(distance_m, dtype=float)
        lam = wavelength_m
        if self.mode == "fspl":
            amp = lam / (4.0 * np.pi * d)
        else:
            amp = lam / (4.0 * np.pi) * d ** (-self.path_loss_exponent / 2.0)
        return amp * 10.0 ** (-self.penetration_loss_db / 20.0)


@dataclass
class ChannelMatrix:
    """(2U, 2MN) complex port-to-port couplings for one drop."""

    matrix: np.ndarray
    drop_index: int
    mode_tag: str

    @property
    def users(self) -> int:
        return self.matrix.shape[0] // 2


def _polarization_coupling(pattern: ElementPattern) -> np.ndarray:
    """coupling[chi, psi] = cos(slant_psi - slant_chi) under aligned bases."""
    slants = np.radians([pattern.slant_deg(p) for p in POLARIZATIONS])
    return np.cos(slants[None, :] - slants[:, None])


def los_green(
    geometry: ArrayGeometry,
    pattern: ElementPattern,
    tx: tuple[int, int, str],
    rx_position: np.ndarray,
    rx_polarization: str,
    model: ChannelModel = ChannelModel(),
) -> complex:
    """Single coupling between one TX element port and one RX port."""
    m, n, psi = tx
    delta = np.asarray(rx_position, dtype=float) - geometry.element_position(m, n)
    d = float(np.linalg.norm(delta))
    if d == 0.0:
        raise ValueError(f"RX position coincides with element ({m}, {n})")
    theta = np.arccos(delta[2] / d)
    phi = np.arctan2(delta[1], delta[0])
    gain = np.sqrt(pattern.power_gain(theta, phi))
    coupling = np.cos(
        np.radians(pattern.slant_deg(psi)) - np.radians(pattern.slant_deg(rx_polarization))
    )
    amp = model.amplitude(d, geometry.wavelength_m)
    phase = np.exp(-2j * np.pi * d / geometry.wavelength_m)
    return complex(gain * coupling * amp * phase)


def assemble_channel(
    geometry: ArrayGeometry,
    pattern: ElementPattern,
    drop,
    model: ChannelModel = ChannelModel(),
) -> ChannelMatrix:
    """Full (2U, 2MN) matrix for one drop, independent of any tiling."""
    rx = np.asarray(drop.positions, dtype=float)
    if rx.ndim != 2 or rx.shape[1] != 3 or rx.shape[0] < 1:
        raise ValueError("drop positions must be a (U, 3) array")
    pos = geometry.element_positions()  # (MN, 3)
    delta = rx[:, None, :] - pos[None, :, :]  # (U, MN, 3)
    d = np.linalg.norm(delta, axis=-1)
    if np.any(d == 0.0):
        raise ValueError("an RX position coincides with an array element")
    theta = np.arccos(np.clip(delta[..., 2] / d, -1.0, 1.0))
    phi = np.arctan2(delta[..., 1], delta[..., 0])
    base = (
        np.sqrt(pattern.power_gain(theta, phi))
        * model.amplitude(d, geometry.wavelength_m)
        * np.exp(-2j * np.pi * d / geometry.wavelength_m)
    )  # (U, MN)
    coupling = _polarization_coupling(pattern)  # (chi, psi)
    u_count, mn = base.shape
    full = base[:, None, None, :] * coupling[None, :, :, None]  # (U, chi, psi, MN)
    matrix = full.reshape(2 * u_count, 2 * mn)
    return ChannelMatrix(matrix=matrix, drop_index=getattr(drop, "index", 0), mode_tag=model.tag)


def aggregate_channel(G, s: AggregationVector) -> np.ndarray:
    """Per-tile column sums of a channel matrix under an aggregation vector.

    Accepts a ChannelMatrix, a (2U, 2MN) array, or any (..., 2U, 2MN) stack;
    returns (..., 2U, 2Q) with columns ordered V tiles 1..Q then H tiles.
    """
    mat = G.matrix if isinstance(G, ChannelMatrix) else np.asarray(G)
    values = np.asarray(s.values)
    mn = values.size
    if mat.shape[-1] != 2 * mn:
        raise ValueError(
            f"channel has {mat.shape[-1]} TX columns, tiling covers {mn} elements"
        )
    order = np.argsort(values, kind="stable")
    sizes = s.tile_sizes()
    starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    cols = np.concatenate((order, mn + order))
    grouped = mat[..., cols]
    return np.add.reduceat(grouped, np.concatenate((starts, mn + starts)), axis=-1)


# --- export / import -----------------------------------------------------

_ORDERING_NOTE = (
    "rows: a = 2*(u-1)+O(chi), O(V)=1, O(H)=2; "
    "cols: psi blocks V then H, each in pixel order i = m + (n-1)*M"
)


def channel_to_json(channel: ChannelMatrix) -> dict:
    return {
        "kind": "channel_matrix",
        "drop_index": channel.drop_index,
        "mode": channel.mode_tag,
        "shape": list(channel.matrix.shape),
        "ordering": _ORDERING_NOTE,
        "real": channel.matrix.real.tolist(),
        "imag": channel.matrix.imag.tolist(),
    }


def channel_from_json(doc: dict) -> ChannelMatrix:
    matrix = np.array(doc["real"]) + 1j * np.array(doc["imag"])
    if list(matrix.shape) != list(doc["shape"]):
        raise ValueError("channel tensor shape disagrees with metadata")
    return ChannelMatrix(
        matrix=matrix, drop_index=int(doc["drop_index"]), mode_tag=str(doc["mode"])
    )


def save_channel(channel: ChannelMatrix, path) -> None:
    path = str(path)
    if path.endswith(".npz"):
        np.savez_compressed(
            path,
            matrix=channel.matrix,
            drop_index=channel.drop_index,
            mode=channel.mode_tag,
            ordering=_ORDERING_NOTE,
        )
    else:
        with open(path, "w") as fh:
            json.dump(channel_to_json(channel), fh)
            fh.write("\n")


def load_channel(path) -> ChannelMatrix:
    path = str(path)
    if path.endswith(".npz"):
        data = np.load(path, allow_pickle=False)
        return ChannelMatrix(
            matrix=data["matrix"],
            drop_index=int(data["drop_index"]),
            mode_tag=str(data["mode"]),
        )
    with open(path) as fh:
        return channel_from_json(json.load(fh))
