"""Sampler dynamics: turning a patch Laplacian into a temporal signal.

The state ``psi`` over the patch pixels evolves under ``A = -L``
(first order: ``psi' = A psi``; second order: ``psi'' + gamma psi' = A psi``)
and the read-out ``h(t)`` sums ``psi`` over a region of pixels. Each
Laplacian mode contributes one decaying (first order) or damped oscillating
(second order) carrier to ``h``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from relcoord.errors import DivergenceError, ValidationError
from relcoord.spectral import SamplerVector, eigh

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class DynamicsConfig:
    gamma: float = 0.2
    order: str = "second"
    dt: float = 1e-3
    t_end: float = 2.0

    def __post_init__(self):
        if self.order not in ("first", "second"):
            raise ValidationError(f"order must be 'first' or 'second', got {self.order!r}")
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.t_end < self.dt:
            raise ValidationError("t_end must be at least dt")
        if self.gamma < 0:
            raise ValidationError("gamma must be non-negative")

    @property
    def steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt


@dataclass
class TemporalSignal:
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(self.samples)):
            raise ValidationError("signal samples must be finite")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "h"])
        for t, h in zip(self.times, self.samples):
            writer.writerow([repr(float(t)), repr(float(h))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TemporalSignal":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        t = np.array([float(r[0]) for r in rows])
        h = np.array([float(r[1]) for r in rows])
        dt = float(t[1] - t[0]) if len(t) > 1 else 1.0
        return cls(dt, h)

    def to_json(self) -> dict:
        return {"dt": self.dt, "samples": self.samples.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "TemporalSignal":
        return cls(float(d["dt"]), np.array(d["samples"]))


def _system_matrix(laplacian: np.ndarray, config: DynamicsConfig) -> np.ndarray:
    a = -np.asarray(laplacian, dtype=np.float64)
    if config.order == "first":
        return a
    n = a.shape[0]
    return np.block([[np.zeros((n, n)), np.eye(n)], [a, -config.gamma * np.eye(n)]])


def trajectory(laplacian, config: DynamicsConfig, psi0=None) -> np.ndarray:
    """Integrate the sampler equation; returns the state at every sample time.

    For the second order system each row is ``[psi, psi']`` with zero initial
    velocity.
    """
    lap = np.asarray(laplacian, dtype=np.float64)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValidationError("laplacian must be square")
    n = lap.shape[0]
    psi0 = np.ones(n) if psi0 is None else np.asarray(psi0, dtype=np.float64)
    if psi0.shape != (n,):
        raise ValidationError(f"psi0 must have length {n}")
    a = _system_matrix(lap, config)
    x = psi0 if config.order == "first" else np.concatenate([psi0, np.zeros(n)])
    # classical RK4 on a linear autonomous system collapses to one matrix:
    # x_{k+1} = (I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24) x_k
    ha = config.dt * a
    ha2 = ha @ ha
    step = np.eye(len(x)) + ha + ha2 / 2 + ha2 @ ha / 6 + ha2 @ ha2 / 24
    states = np.empty((config.steps + 1, len(x)))
    states[0] = x
    for k in range(config.steps):
        x = step @ x
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            raise DivergenceError(f"state exceeded {DIVERGENCE_LIMIT:g} at t={(k + 1) * config.dt:g}")
        states[k + 1] = x
    return states


def _region_mask(n: int, region) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    if region is None:
        mask[:] = True
        return mask
    idx = np.asarray(list(region), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValidationError(f"region indices must lie in 0..{n - 1}")
    mask[idx] = True
    return mask


def simulate(
    laplacian,
    config: DynamicsConfig,
    psi0: Optional[Sequence[float]] = None,
    region: Optional[Sequence[int]] = None,
) -> TemporalSignal:
    """Numerically integrated read-out ``h(t_i) = sum over region of psi(x, t_i)``.

    ``psi0`` defaults to all ones and ``region`` to every pixel.
    """
    states = trajectory(laplacian, config, psi0)
    n = np.asarray(laplacian).shape[0]
    mask = _region_mask(n, region)
    return TemporalSignal(config.dt, states[:, :n][:, mask].sum(axis=1))


def energy(laplacian, states: np.ndarray) -> np.ndarray:
    """``|psi'|^2 + psi^T L psi`` along a second-order trajectory."""
    lap = np.asarray(laplacian, dtype=np.float64)
    n = lap.shape[0]
    psi, vel = states[:, :n], states[:, n:]
    return (vel**2).sum(axis=1) + np.einsum("ti,ij,tj->t", psi, lap, psi)


def mode_response(lam: float, config: DynamicsConfig, t: np.ndarray) -> np.ndarray:
    """Temporal carrier of one mode with eigenvalue ``lam``.

    First order: ``exp(-lam t)``. Second order: the solution of
    ``T'' + gamma T' + lam T = 0`` with ``T(0) = 1, T'(0) = 0``.
    """
    t = np.asarray(t, dtype=np.float64)
    if config.order == "first":
        return np.exp(-lam * t)
    g = config.gamma
    disc = lam - g * g / 4
    scale = max(abs(lam), g * g / 4, 1e-300)
    if abs(disc) <= 1e-12 * scale:
        return np.exp(-g * t / 2) * (1 + g * t / 2)
    if disc > 0:
        w = math.sqrt(disc)
        return np.exp(-g * t / 2) * (np.cos(w * t) + (g / (2 * w)) * np.sin(w * t))
    # overdamped: two real roots r1 > r2
    root = math.sqrt(-disc)
    r1, r2 = -g / 2 + root, -g / 2 - root
    return (r2 * np.exp(r1 * t) - r1 * np.exp(r2 * t)) / (r2 - r1)


def modal_response(eigenvalues, weights, config: DynamicsConfig, t=None) -> TemporalSignal:
    """``h(t) = sum_k weights_k * carrier_k(t)``."""
    t = config.times() if t is None else np.asarray(t, dtype=np.float64)
    h = np.zeros(len(t))
    for lam, c in zip(np.asarray(eigenvalues), np.asarray(weights)):
        h += c * mode_response(float(lam), config, t)
    dt = float(t[1] - t[0]) if len(t) > 1 else config.dt
    return TemporalSignal(dt, h)


def analytic_response(sv: SamplerVector, config: DynamicsConfig, t_grid=None) -> TemporalSignal:
    """Closed-form ``h(t) = sum_k s_k^2 carrier_k(t)`` for uniform ``psi0`` read over every pixel."""
    if sv.sums is None:
        raise ValidationError("analytic_response needs a sampler vector with eigenvector sums")
    return modal_response(sv.eigenvalues, sv.sums**2, config, t_grid)


def region_weights(laplacian, psi0=None, region=None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and carrier weights ``(sum_D phi_k)(phi_k . psi0)`` for a general read-out."""
    vals, vecs = eigh(laplacian)
    n = len(vals)
    psi0 = np.ones(n) if psi0 is None else np.asarray(psi0, dtype=np.float64)
    mask = _region_mask(n, region)
    return vals, vecs[mask].sum(axis=0) * (vecs.T @ psi0)


def recover_frequencies(
    signal: TemporalSignal,
    k: int,
    min_relative: float = 0.05,
    pad_factor: int = 8,
) -> tuple[np.ndarray, bool]:
    """Angular frequencies (rad/s, ascending) of the ``k`` strongest spectral peaks.

    The mean-removed signal is Hann-windowed and zero-padded before the DFT.
    Peaks below ``min_relative`` of the strongest one are ignored (Hann
    sidelobes sit near 0.027). The flag is False when fewer than ``k`` peaks
    were found.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    x = signal.samples - signal.samples.mean()
    n = len(x)
    if n < 3:
        return np.array([]), False
    size = 1 << int(math.ceil(math.log2(n * pad_factor)))
    mag = np.abs(np.fft.rfft(x * np.hanning(n), size))
    omega = 2 * np.pi * np.fft.rfftfreq(size, signal.dt)
    floor = 1e-9 * max(1.0, float(np.abs(signal.samples).max())) * n
    if mag.max() <= floor:
        return np.array([]), False
    inner = mag[1:-1]
    is_peak = (inner > mag[:-2]) & (inner >= mag[2:]) & (inner >= min_relative * mag.max())
    idx = np.nonzero(is_peak)[0] + 1
    idx = idx[mag[idx] > floor]
    best = idx[np.argsort(-mag[idx], kind="stable")][:k]
    return np.sort(omega[best]), len(best) >= k


def dft_bin(signal: TemporalSignal) -> float:
    """Angular resolution of the unpadded DFT of ``signal``."""
    return 2 * np.pi / (len(signal) * signal.dt)


def to_json(signal: TemporalSignal) -> str:
    return json.dumps(signal.to_json())
