"""Coverage sweep: map a grid of (eta, nu, phi) onto final-state coordinates (theta, chi, delta)."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from stirap6.hamiltonian import PulseConfig
from stirap6.propagator import IntegratorSettings, integrate_batch
from stirap6.statespace import coords_arrays, final_amplitudes

HALF_PI = np.pi / 2
TWO_PI = 2 * np.pi
SWEEP_COLUMNS = ("eta", "nu", "phi", "theta", "chi", "delta", "nonadiabaticity", "efficiency", "mode")


@dataclass(frozen=True)
class SweepRecord:
    eta: float
    nu: float
    phi: float
    theta: float
    chi: float
    delta: float
    nonadiabaticity: float
    efficiency: float
    mode: str


class SweepTable:
    """Column store of sweep records; iterating yields ``SweepRecord``.

    Analytic records carry the adiabatic-limit values nonadiabaticity 0 and
    efficiency 1.
    """

    def __init__(self, eta, nu, phi, theta, chi, delta, nonadiabaticity, efficiency, mode):
        self.eta, self.nu, self.phi = eta, nu, phi
        self.theta, self.chi, self.delta = theta, chi, delta
        self.nonadiabaticity, self.efficiency = nonadiabaticity, efficiency
        self.mode = mode

    def __len__(self):
        return self.eta.size

    def __getitem__(self, i) -> SweepRecord:
        return SweepRecord(*(float(getattr(self, c)[i]) for c in SWEEP_COLUMNS[:-1]), self.mode)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(SWEEP_COLUMNS)
            cols = [getattr(self, c) for c in SWEEP_COLUMNS[:-1]]
            for row in zip(*cols):
                writer.writerow([repr(float(v)) for v in row] + [self.mode])

    @classmethod
    def read_csv(cls, path) -> SweepTable:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        mode = rows[0]["mode"] if rows else "analytic"
        cols = {c: np.array([float(r[c]) for r in rows]) for c in SWEEP_COLUMNS[:-1]}
        return cls(mode=mode, **cols)


def polarization_axis(step: float) -> np.ndarray:
    """[0, pi/2] in steps of ``step``, with pi/2 itself always included."""
    axis = np.arange(0.0, HALF_PI - 1e-12, step)
    return np.append(axis, HALF_PI)


def phase_axis(step: float) -> np.ndarray:
    return np.arange(0.0, TWO_PI - 1e-12, step)


def sweep_grid(steps):
    """Flattened grid points in eta-major, then nu, then phi order."""
    d_eta, d_nu, d_phi = steps
    if min(steps) <= 0:
        raise ValueError("sweep steps must be positive")
    E, N, P = np.meshgrid(polarization_axis(d_eta), polarization_axis(d_nu), phase_axis(d_phi), indexing="ij")
    return E.ravel(), N.ravel(), P.ravel()


def _numeric_chunk(args):
    shape, eta, nu, phi, settings = args
    zeros = np.zeros_like(phi)
    final, bright = integrate_batch(shape, eta, nu, (zeros, phi, zeros, zeros), settings)
    j2 = final[:, 3:]
    efficiency = np.sum(np.abs(j2) ** 2, axis=1)
    theta, chi, delta, _ = coords_arrays(j2 / np.sqrt(efficiency)[:, None])
    return theta, chi, delta, bright, efficiency


def run_sweep(pulse_shape: PulseConfig, steps=(0.015, 0.015, 0.015), mode: str = "analytic",
              workers: int | None = None, chunk: int = 2048, settings: IntegratorSettings | None = None) -> SweepTable:
    """Scan polarizations and the residual phase over a regular grid.

    Every grid point uses phi_a = phi_c = phi_d = 0, phi_b = phi. ``analytic``
    evaluates the closed-form adiabatic final state; ``numeric`` integrates the
    Schroedinger equation in fixed-size batches (``chunk`` points each,
    distributed over ``workers`` processes) and also records the maximum
    bright population and the transfer efficiency. Output order and values do
    not depend on ``workers``.
    """
    eta, nu, phi = sweep_grid(steps)
    if mode == "analytic":
        theta, chi, delta, _ = coords_arrays(final_amplitudes(eta, nu, phi))
        return SweepTable(eta, nu, phi, theta, chi, delta, np.zeros_like(eta), np.ones_like(eta), mode)
    if mode != "numeric":
        raise ValueError(f"mode must be 'analytic' or 'numeric', not {mode!r}")

    bounds = range(0, eta.size, chunk)
    jobs = [(pulse_shape, eta[i:i + chunk], nu[i:i + chunk], phi[i:i + chunk], settings) for i in bounds]
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        parts = [_numeric_chunk(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_numeric_chunk, jobs))
    theta, chi, delta, bright, eff = (np.concatenate(col) for col in zip(*parts))
    return SweepTable(eta, nu, phi, theta, chi, delta, bright, eff, mode)


@dataclass(frozen=True)
class SliceReport:
    center: float
    width: float
    theta: np.ndarray
    chi: np.ndarray
    occupancy: float
    cells: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "chi"])
            for th, ch in zip(self.theta, self.chi):
                writer.writerow([repr(float(th)), repr(float(ch))])


def occupancy(theta, chi, cells: int = 10) -> float:
    """Fraction of the ``cells x cells`` partition of [0, pi/2]^2 hit by at least one point."""
    if len(theta) == 0:
        return 0.0
    ix = np.minimum((np.asarray(theta) / HALF_PI * cells).astype(int), cells - 1)
    iy = np.minimum((np.asarray(chi) / HALF_PI * cells).astype(int), cells - 1)
    return np.unique(ix * cells + iy).size / cells**2


def slice_records(records: SweepTable, delta_center: float, width: float = 0.1, cells: int = 10) -> SliceReport:
    """Points whose delta lies within ``width/2`` of ``delta_center`` (circularly)."""
    if len(records) == 0:
        empty = np.empty(0)
        return SliceReport(delta_center, width, empty, empty, 0.0, cells)
    gap = np.abs(np.mod(records.delta - delta_center + np.pi, TWO_PI) - np.pi)
    keep = gap <= width / 2
    theta, chi = records.theta[keep], records.chi[keep]
    return SliceReport(delta_center, width, theta, chi, occupancy(theta, chi, cells), cells)
