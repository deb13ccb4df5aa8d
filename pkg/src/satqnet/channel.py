"""Free-space link transmissivity and a truncated Fock-space SPDC link model.

The source emits a dual-rail polarisation-entangled state truncated at two
photon pairs. Each side's two modes go through a bosonic pure-loss channel
and are heralded by two threshold detectors (one per rail) with a per-gate
dark-click probability. A side succeeds when exactly one of its rails
clicks.

Heralding keeps coherence within a fixed post-loss photon-number sector on
each side (one photon, two bunched photons, or vacuum plus a dark click)
and for a fixed hidden dark-click outcome, and maps that sector onto a
logical qubit: rail 1 -> |0>, rail 2 -> |1>. Coherence between different
photon-number sectors is dropped (phase-randomised pump). The success
probability is exactly that of the click model; the fidelity is the
overlap of the heralded two-qubit state with the target Bell state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .orbital import LinkGeometry

# occupancy cutoff per mode (0, 1, 2 photons)
DIM = 3
NUM_MODES = 4
FULL_DIM = DIM**NUM_MODES


class ChannelError(ValueError):
    """Invalid channel or source parameter."""


@dataclass(frozen=True)
class OpticalConfig:
    transmitter_diameter: float
    receiver_diameter: float
    wavelength: float
    extinction_coefficient: float  # 1/m

    def __post_init__(self):
        for name in ("transmitter_diameter", "receiver_diameter", "wavelength", "extinction_coefficient"):
            if not getattr(self, name) > 0:
                raise ChannelError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class SourceConfig:
    mean_photon_number: float
    repetition_rate: float
    dark_click_probability: float = 0.0
    truncation: int = 2
    sign: int = +1

    def __post_init__(self):
        if self.mean_photon_number < 0:
            raise ChannelError("mean photon number must be non-negative")
        if not self.repetition_rate > 0:
            raise ChannelError("repetition rate must be positive")
        if not 0.0 <= self.dark_click_probability < 1.0:
            raise ChannelError("dark click probability must lie in [0, 1)")
        if self.truncation != 2:
            raise ChannelError("only the two-pair truncation is supported")
        if self.sign not in (1, -1):
            raise ChannelError("sign must be +1 or -1")


@dataclass(frozen=True)
class TruncatedSourceState:
    amplitudes: dict  # (a1, a2, b1, b2) -> real amplitude
    normalization: float

    def vector(self) -> np.ndarray:
        psi = np.zeros(FULL_DIM)
        for ket, amp in self.amplitudes.items():
            psi[fock_index(ket)] = amp
        return psi


@dataclass(frozen=True)
class LossResult:
    density: np.ndarray
    # (photons lost on side 1, photons lost on side 2) -> probability
    loss_record: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LinkMetrics:
    eta_free: tuple[float, float]
    eta_atm: tuple[float, float]
    eta: tuple[float, float]
    success_probability: float
    rate: float
    fidelity: float


def fock_index(ket) -> int:
    idx = 0
    for n in ket:
        idx = idx * DIM + n
    return idx


def emission_probability(n_s: float, n: int) -> float:
    """Probability of emitting exactly ``n`` pairs, thermal per mode."""
    if n_s < 0 or n < 0:
        raise ChannelError("emission_probability needs n_s >= 0 and n >= 0")
    if n_s == 0:
        return 1.0 if n == 0 else 0.0
    return (n + 1) * n_s**n / (n_s + 1) ** (n + 2)


def free_space_transmissivity(optics: OpticalConfig, slant_distance):
    aperture = (math.pi * optics.transmitter_diameter**2 / 4) * (math.pi * optics.receiver_diameter**2 / 4)
    s = np.asarray(slant_distance, dtype=float)
    return np.minimum(1.0, aperture / (optics.wavelength * s) ** 2)


def atmospheric_transmissivity(optics: OpticalConfig, atmospheric_path):
    return np.exp(-optics.extinction_coefficient * np.asarray(atmospheric_path, dtype=float))


def transmissivity(optics: OpticalConfig, geometry: LinkGeometry) -> tuple[float, float, float]:
    if not geometry.visible:
        raise ChannelError("transmissivity is undefined below the horizon")
    if not geometry.slant_distance > 0:
        raise ChannelError("slant distance must be positive")
    eta_f = float(free_space_transmissivity(optics, geometry.slant_distance))
    eta_a = float(atmospheric_transmissivity(optics, geometry.atmospheric_path))
    return eta_f, eta_a, eta_f * eta_a


def source_state(source: SourceConfig) -> TruncatedSourceState:
    p = [emission_probability(source.mean_photon_number, n) for n in range(3)]
    norm = 1.0 / math.sqrt(sum(p))
    sgn = float(source.sign)
    one = math.sqrt(p[1] / 2)
    two = math.sqrt(p[2] / 3)
    raw = {
        (0, 0, 0, 0): math.sqrt(p[0]),
        (1, 0, 0, 1): one,
        (0, 1, 1, 0): sgn * one,
        (2, 0, 0, 2): two,
        (1, 1, 1, 1): sgn * two,
        (0, 2, 2, 0): two,
    }
    amps = {ket: norm * a for ket, a in raw.items() if a != 0.0}
    return TruncatedSourceState(amps, norm)


def _single_mode_kraus(eta: float) -> list[np.ndarray]:
    """Kraus operators A_l (l photons lost) of a pure-loss channel on 0..2 photons."""
    ops = []
    for lost in range(DIM):
        a = np.zeros((DIM, DIM))
        for n in range(lost, DIM):
            a[n - lost, n] = math.sqrt(math.comb(n, lost) * eta ** (n - lost) * (1 - eta) ** lost)
        ops.append(a)
    return ops


def _as_density(state) -> np.ndarray:
    if isinstance(state, TruncatedSourceState):
        psi = state.vector()
        return np.outer(psi, psi)
    arr = np.asarray(state)
    if arr.shape == (FULL_DIM,):
        return np.outer(arr, arr.conj())
    if arr.shape == (FULL_DIM, FULL_DIM):
        return arr
    raise ChannelError(f"expected a 4-mode state of dimension {FULL_DIM}")


def apply_pure_loss(state, eta1: float, eta2: float) -> LossResult:
    """Send side 1's modes through loss ``eta1`` and side 2's through ``eta2``."""
    for eta in (eta1, eta2):
        if not 0.0 <= eta <= 1.0:
            raise ChannelError(f"transmissivity {eta} outside [0, 1]")
    rho = _as_density(state)
    k1 = _single_mode_kraus(eta1)
    k2 = _single_mode_kraus(eta2)
    out = np.zeros_like(rho)
    record: dict[tuple[int, int], float] = {}
    for l1, l2, l3, l4 in product(range(DIM), repeat=NUM_MODES):
        op = np.kron(np.kron(k1[l1], k1[l2]), np.kron(k2[l3], k2[l4]))
        branch = op @ rho @ op.conj().T
        prob = float(np.real(np.trace(branch)))
        if prob == 0.0:
            continue
        out += branch
        key = (l1 + l2, l3 + l4)
        record[key] = record.get(key, 0.0) + prob
    return LossResult(out, record)


@lru_cache(maxsize=32)
def _herald_kraus(dark: float) -> tuple[np.ndarray, ...]:
    """Per-side herald Kraus operators, logical qubit <- 9-dim two-mode space.

    One operator per (photon sector, hidden dark-click outcome) that leaves
    exactly one rail clicking.
    """
    ops = []
    quiet = 1.0 - dark
    single = math.sqrt(dark * (1.0 - dark))
    for n in (1, 2):
        rail0, rail1 = n * DIM, n
        op = np.zeros((2, DIM * DIM))
        op[0, rail0] = quiet
        op[1, rail1] = quiet
        ops.append(op)
        if dark > 0.0:
            # a dark click on the occupied rail excludes the other rail's component
            op = np.zeros((2, DIM * DIM))
            op[0, rail0] = single
            ops.append(op)
            op = np.zeros((2, DIM * DIM))
            op[1, rail1] = single
            ops.append(op)
    if dark > 0.0:
        for rail in (0, 1):
            op = np.zeros((2, DIM * DIM))
            op[rail, 0] = single
            ops.append(op)
    return tuple(ops)


def bell_state(sign: int = +1) -> np.ndarray:
    """Target (|01> + sign|10>)/sqrt2 in the logical basis of (side 1, side 2)."""
    return np.array([0.0, 1.0, float(sign), 0.0]) / math.sqrt(2.0)


def herald(density: np.ndarray, dark: float, sign: int = +1) -> tuple[float, float]:
    """Success probability and Bell fidelity of the heralded state."""
    sigma = np.zeros((4, 4))
    side = _herald_kraus(dark)
    for ka in side:
        for kb in side:
            op = np.kron(ka, kb)
            sigma = sigma + np.real(op @ density @ op.conj().T)
    prob = float(np.trace(sigma))
    if prob <= 0.0:
        return 0.0, 0.0
    phi = bell_state(sign)
    return prob, float(phi @ sigma @ phi) / prob


def link_metrics(source: SourceConfig, optics: OpticalConfig, geometry1: LinkGeometry, geometry2: LinkGeometry) -> LinkMetrics:
    ef1, ea1, eta1 = transmissivity(optics, geometry1)
    ef2, ea2, eta2 = transmissivity(optics, geometry2)
    prob, fid = metrics_from_eta(source, eta1, eta2)
    return LinkMetrics((ef1, ef2), (ea1, ea2), (eta1, eta2), prob, source.repetition_rate * prob, fid)


def metrics_from_eta(source: SourceConfig, eta1: float, eta2: float) -> tuple[float, float]:
    """Per-gate success probability and fidelity at arm transmissivities ``eta1``, ``eta2``."""
    lossy = apply_pure_loss(source_state(source), eta1, eta2)
    return herald(lossy.density, source.dark_click_probability, source.sign)


class LinkModel:
    """Vectorised evaluation of :func:`metrics_from_eta` for one source.

    Success probability and the unnormalised Bell overlap are polynomials of
    degree <= 2 in each arm's transmissivity (at most two photons per side),
    so both are recovered exactly from nine density-matrix evaluations.
    """

    _NODES = np.array([0.0, 0.5, 1.0])

    def __init__(self, source: SourceConfig):
        self.source = source
        vander = np.vander(self._NODES, 3, increasing=True)
        inv = np.linalg.inv(vander)
        prob = np.zeros((3, 3))
        overlap = np.zeros((3, 3))
        for a, e1 in enumerate(self._NODES):
            for b, e2 in enumerate(self._NODES):
                p, f = metrics_from_eta(source, e1, e2)
                prob[a, b] = p
                overlap[a, b] = p * f
        # coefficient[k, m] multiplies eta1**k * eta2**m
        self.prob_coeffs = inv @ prob @ inv.T
        self.overlap_coeffs = inv @ overlap @ inv.T

    def evaluate(self, eta1, eta2):
        """Return ``(success_probability, fidelity)`` arrays."""
        e1 = np.asarray(eta1, dtype=float)
        e2 = np.asarray(eta2, dtype=float)
        p1 = np.stack([np.ones_like(e1), e1, e1 * e1])
        p2 = np.stack([np.ones_like(e2), e2, e2 * e2])
        prob = np.einsum("k...,km,m...->...", p1, self.prob_coeffs, p2)
        overlap = np.einsum("k...,km,m...->...", p1, self.overlap_coeffs, p2)
        prob = np.maximum(prob, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            fid = np.where(prob > 0.0, overlap / np.where(prob > 0.0, prob, 1.0), 0.0)
        return prob, np.clip(fid, 0.0, 1.0)

    def rate(self, eta1, eta2):
        prob, _ = self.evaluate(eta1, eta2)
        return self.source.repetition_rate * prob
