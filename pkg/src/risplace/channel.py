"""Wireless link synthesis and rate metrics.

Direct BS-user links are Rayleigh; BS-RIS and RIS-user legs are Rician with
steering-vector deterministic parts.  Path loss follows the urban-micro
street model; any link whose segment crosses an obstacle is zeroed.
All powers are handled in milliwatts (linear); path gains multiply
amplitudes as sqrt(10^(-PL_dB/10)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import geom
from .errors import CoincidentPoints, DimensionMismatch, NonPositiveDistance
from .geom import Obstacle, Point2
from .rng import Stream, substream

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class RfParams:
    """RF front-end parameters.

    f_c in GHz, bandwidth in Hz, noise figure in dB.  Transmit power and the
    Rician factors are authored in dBm/dB (as in scenario files) and exposed
    linearly through p_max, t1, t2; all powers are milliwatts.
    antenna_spacing is a fraction of the carrier wavelength and applies to
    both the BS and RIS uniform linear arrays.
    """

    f_c: float
    bandwidth: float
    noise_figure: float
    p_max_dbm: float
    t1_db: float
    t2_db: float
    m_antennas: int
    n_elements: int
    antenna_spacing: float = 0.5

    @property
    def p_max(self) -> float:
        """Total transmit power, linear mW."""
        return 10.0 ** (self.p_max_dbm / 10.0)

    @property
    def t1(self) -> float:
        return 10.0 ** (self.t1_db / 10.0)

    @property
    def t2(self) -> float:
        return 10.0 ** (self.t2_db / 10.0)

    @property
    def sigma2(self) -> float:
        """Noise power, linear mW, consistent with noise_power(B, NF)."""
        return 10.0 ** (noise_power(self.bandwidth, self.noise_figure) / 10.0)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / (self.f_c * 1e9)

    @property
    def spacing_m(self) -> float:
        return self.antenna_spacing * self.wavelength

    def fraunhofer(self) -> float:
        return geom.fraunhofer_distance(self.m_antennas, self.wavelength, self.spacing_m)


@dataclass(frozen=True)
class LinkAngles:
    """Azimuths (from array broadside) of the three link directions.

    arrival: at the RIS from the BS; departure: at the BS toward the RIS;
    to_users[k]: at the RIS toward user k.  All in (-pi, pi].
    """

    arrival: float
    departure: float
    to_users: tuple


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all links for K users.

    cascades[k] = diag(conj(h_ru[k])) @ h_br, so the effective row channel of
    user k under reflection coefficients t (|t_n| = 1) is
    conj(h_bu[k]) + t @ cascades[k].  Blocked links are exactly zero.
    """

    h_bu: np.ndarray  # (K, M) complex
    h_br: np.ndarray  # (N, M) complex
    h_ru: np.ndarray  # (K, N) complex
    cascades: np.ndarray  # (K, N, M) complex
    pathloss_db: dict
    blocked: dict

    def __post_init__(self):
        for arr in (self.h_bu, self.h_br, self.h_ru, self.cascades):
            arr.setflags(write=False)

    @property
    def n_users(self) -> int:
        return self.h_bu.shape[0]

    @property
    def m_antennas(self) -> int:
        return self.h_bu.shape[1]

    @property
    def n_elements(self) -> int:
        return self.h_br.shape[0]

    @cached_property
    def _cascades_nkm(self) -> np.ndarray:
        """(N, K*M) view of the cascades; theta @ this gives all rows at once."""
        k, n, m = self.cascades.shape
        return np.ascontiguousarray(self.cascades.transpose(1, 0, 2).reshape(n, k * m))

    @cached_property
    def _cascades_flat(self) -> np.ndarray:
        """(K*N, M) view of the cascades for the per-beam reflected gains."""
        k, n, m = self.cascades.shape
        return np.ascontiguousarray(self.cascades.reshape(k * n, m))


def pathloss_ris_leg(d: float, f_c: float) -> float:
    """Urban-micro loss in dB for the BS-RIS and RIS-user legs.

    22*log10(d) + 28 + 20*log10(f_c), d in meters, f_c in GHz.
    """
    if d <= 0:
        raise NonPositiveDistance(f"distance must be positive, got {d}")
    return 22.0 * math.log10(d) + 28.0 + 20.0 * math.log10(f_c)


def pathloss_direct(d: float, f_c: float) -> float:
    """Urban-micro loss in dB for the direct BS-user link.

    36.7*log10(d) + 22.7 + 26*log10(f_c), d in meters, f_c in GHz.
    """
    if d <= 0:
        raise NonPositiveDistance(f"distance must be positive, got {d}")
    return 36.7 * math.log10(d) + 22.7 + 26.0 * math.log10(f_c)


def noise_power(bandwidth: float, noise_figure: float) -> float:
    """Thermal noise power in dBm: -174 + 10*log10(B) + NF."""
    return -174.0 + 10.0 * math.log10(bandwidth) + noise_figure


def steering_vector(n: int, angle: float, spacing: float = 0.5) -> np.ndarray:
    """Unit-modulus ULA steering vector of length n.

    Element m carries phase 2*pi*spacing*m*sin(angle); spacing is a fraction
    of the wavelength.
    """
    m = np.arange(n)
    return np.exp(2j * math.pi * spacing * m * math.sin(angle))


def _broadside_angle(src: Point2, dst: Point2, array_axis: float) -> float:
    dx, dy = dst.x - src.x, dst.y - src.y
    if dx == 0.0 and dy == 0.0:
        raise CoincidentPoints(f"link endpoints coincide at ({src.x}, {src.y})")
    ca, sa = math.cos(array_axis), math.sin(array_axis)
    along = dx * ca + dy * sa
    normal = -dx * sa + dy * ca
    ang = math.atan2(along, normal)
    if ang <= -math.pi:
        ang += 2.0 * math.pi
    return ang


def link_angles(
    bs: Point2, ris: Point2, users: Sequence[Point2], array_axis: float = 0.0
) -> LinkAngles:
    """Azimuths of the BS-RIS link and of each RIS-user link.

    Angles are measured from the broadside normal of a linear array laid
    along array_axis (x-axis by default); broadside is 0, endfire is pi/2.
    """
    departure = _broadside_angle(bs, ris, array_axis)
    arrival = _broadside_angle(ris, bs, array_axis)
    to_users = tuple(_broadside_angle(ris, u, array_axis) for u in users)
    return LinkAngles(arrival=arrival, departure=departure, to_users=to_users)


def _cn(rng: np.random.Generator, *shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def sample_direct(
    rf: RfParams,
    bs: Point2,
    users: Sequence[Point2],
    obstacles: Sequence[Obstacle],
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rayleigh direct links: (K,M) channel matrix, per-user loss dB, blocked mask."""
    k_users, m = len(users), rf.m_antennas
    h = _cn(rng, k_users, m)
    loss = np.array([pathloss_direct(bs.distance_to(u), rf.f_c) for u in users])
    blocked = np.array([geom.segment_blocked(bs, u, obstacles) for u in users])
    amp = np.sqrt(10.0 ** (-loss / 10.0))
    h *= amp[:, None]
    h[blocked] = 0.0
    return h, loss, blocked


def sample_ris_legs(
    rf: RfParams,
    bs: Point2,
    ris: Point2,
    users: Sequence[Point2],
    obstacles: Sequence[Obstacle],
    rng_br: np.random.Generator,
    rng_ru: np.random.Generator,
) -> dict:
    """Rician BS-RIS matrix and RIS-user vectors with blockage applied."""
    k_users, m, n = len(users), rf.m_antennas, rf.n_elements
    angles = link_angles(bs, ris, users)
    spacing = rf.antenna_spacing

    loss_br = pathloss_ris_leg(bs.distance_to(ris), rf.f_c)
    a_n = steering_vector(n, angles.arrival, spacing)
    a_m = steering_vector(m, angles.departure, spacing)
    det_br = np.outer(a_n, a_m.conj())
    w1, w2 = math.sqrt(rf.t1 / (1.0 + rf.t1)), math.sqrt(1.0 / (1.0 + rf.t1))
    h_br = math.sqrt(10.0 ** (-loss_br / 10.0)) * (w1 * det_br + w2 * _cn(rng_br, n, m))
    br_blocked = geom.segment_blocked(bs, ris, obstacles)
    if br_blocked:
        h_br = np.zeros_like(h_br)

    loss_ru = np.array([pathloss_ris_leg(ris.distance_to(u), rf.f_c) for u in users])
    v1, v2 = math.sqrt(rf.t2 / (1.0 + rf.t2)), math.sqrt(1.0 / (1.0 + rf.t2))
    det_ru = np.array([steering_vector(n, zeta, spacing) for zeta in angles.to_users])
    det_ru = det_ru.reshape(k_users, n)
    h_ru = (v1 * det_ru + v2 * _cn(rng_ru, k_users, n)) * np.sqrt(
        10.0 ** (-loss_ru / 10.0)
    )[:, None]
    ru_blocked = np.array([geom.segment_blocked(ris, u, obstacles) for u in users])
    h_ru[ru_blocked] = 0.0

    return {
        "h_br": h_br,
        "h_ru": h_ru,
        "loss_br": loss_br,
        "loss_ru": loss_ru,
        "br_blocked": br_blocked,
        "ru_blocked": ru_blocked,
    }


def assemble_channel_set(
    h_bu: np.ndarray,
    loss_bu: np.ndarray,
    bu_blocked: np.ndarray,
    legs: dict,
) -> ChannelSet:
    """Combine direct links and RIS legs; cascades = diag(conj(h_ru)) @ h_br."""
    cascades = legs["h_ru"].conj()[:, :, None] * legs["h_br"][None, :, :]
    return ChannelSet(
        h_bu=h_bu,
        h_br=legs["h_br"],
        h_ru=legs["h_ru"],
        cascades=cascades,
        pathloss_db={
            "direct": loss_bu,
            "bs_ris": legs["loss_br"],
            "ris_user": legs["loss_ru"],
        },
        blocked={
            "direct": bu_blocked,
            "bs_ris": legs["br_blocked"],
            "ris_user": legs["ru_blocked"],
        },
    )


def sample_channels(
    rf: RfParams,
    bs: Point2,
    ris: Point2,
    users: Sequence[Point2],
    obstacles: Sequence[Obstacle],
    seed: int,
) -> ChannelSet:
    """Draw a full channel realization from the named substreams of ``seed``."""
    if not users:
        raise ValueError("users must be nonempty")
    h_bu, loss_bu, bu_blocked = sample_direct(
        rf, bs, users, obstacles, substream(seed, Stream.DIRECT)
    )
    legs = sample_ris_legs(
        rf,
        bs,
        ris,
        users,
        obstacles,
        substream(seed, Stream.BS_RIS),
        substream(seed, Stream.RIS_USER),
    )
    return assemble_channel_set(h_bu, loss_bu, bu_blocked, legs)


def effective_rows(cs: ChannelSet, theta: np.ndarray) -> np.ndarray:
    """Effective row channels (K,M): conj(h_bu) + theta @ cascades.

    theta holds the unit-modulus reflection coefficients e^{j phi_n}.
    """
    if theta.shape != (cs.n_elements,):
        raise DimensionMismatch(
            f"theta has shape {theta.shape}, expected ({cs.n_elements},)"
        )
    k, m = cs.h_bu.shape
    return cs.h_bu.conj() + (theta @ cs._cascades_nkm).reshape(k, m)


def all_sinr(
    cs: ChannelSet, w: np.ndarray, theta: np.ndarray, sigma2: float
) -> np.ndarray:
    """SINR of every user under beamformer w (M,K) and reflection theta (N,)."""
    if w.shape != (cs.m_antennas, cs.n_users):
        raise DimensionMismatch(
            f"w has shape {w.shape}, expected ({cs.m_antennas}, {cs.n_users})"
        )
    rows = effective_rows(cs, theta)
    gains = np.abs(rows @ w) ** 2  # (K, K): gains[k, i] = |row_k w_i|^2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + sigma2)


def sinr(k: int, cs: ChannelSet, w: np.ndarray, theta: np.ndarray, sigma2: float) -> float:
    """SINR of user k; see all_sinr."""
    return float(all_sinr(cs, w, theta, sigma2)[k])


def wsr(cs: ChannelSet, w: np.ndarray, theta: np.ndarray, sigma2: float) -> float:
    """Equal-weight sum rate (1/K) * sum log2(1 + SINR_k), in bits/s/Hz."""
    gammas = all_sinr(cs, w, theta, sigma2)
    return float(np.log2(1.0 + gammas).mean())
