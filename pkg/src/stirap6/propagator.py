"""Time-dependent Schroedinger integration and transfer diagnostics."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from stirap6.angular import Q
from stirap6.errors import IntegrationError, PreconditionError
from stirap6.frame import _dark_kets, _frame_polar
from stirap6.hamiltonian import STOKES_NORM, PulseConfig, phase_reduction_diagonal

GROUND = np.array([1, 0, 0, 0, 0, 0], dtype=complex)


@dataclass(frozen=True)
class IntegratorSettings:
    rtol: float = 1e-10
    atol: float = 1e-12
    t_span: tuple[float, float] | None = None  # None -> PulseConfig.default_span()
    samples: int = 2000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise PreconditionError("integrator tolerances must be positive")
        if self.t_span is not None and not self.t_span[0] < self.t_span[1]:
            raise PreconditionError("t_span must satisfy t0 < t1")
        if self.samples < 2:
            raise PreconditionError("need at least two output samples")

    def span_for(self, cfg: PulseConfig) -> tuple[float, float]:
        return self.t_span if self.t_span is not None else cfg.default_span()


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray  # (n,)
    psi: np.ndarray  # (n, 6) bare-basis amplitudes
    bright_raw: np.ndarray  # (n,) unclamped 1 - |<D1|psi>|^2 - |<D2|psi>|^2

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def bright(self) -> np.ndarray:
        return np.clip(self.bright_raw, 0.0, 1.0)

    @property
    def final_state(self) -> np.ndarray:
        return self.psi[-1]

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.psi, axis=1) - 1.0)))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "p00", "p1m1", "p1p1", "p2m2", "p20", "p2p2", "bright"])
            pops, bright = self.populations, self.bright
            for i, t in enumerate(self.t):
                writer.writerow([repr(float(t))] + [repr(float(p)) for p in pops[i]] + [repr(float(bright[i]))])


def _couplings(eta, nu, phases):
    """Per-system complex coefficients multiplying R_p(t) and R_S(t)."""
    pa, pb, pc, pd = (np.asarray(p, dtype=float) for p in phases)
    return (
        np.cos(eta) * np.exp(1j * pa),
        np.sin(eta) * np.exp(1j * pb),
        np.cos(nu) * np.exp(1j * pc) / STOKES_NORM,
        np.sin(nu) * np.exp(1j * pd) / STOKES_NORM,
    )


def _make_rhs(pump, stokes, coeffs, detuning):
    ca, cb, cc, cd = coeffs
    n = ca.shape[0]

    def rhs(t, y):
        psi = y.reshape(6, n)
        rp, rs = pump(t), stokes(t)
        a, b, c, d = rp * ca, rp * cb, rs * cc, rs * cd
        out = np.empty_like(psi)
        out[0] = a * psi[1] + b * psi[2]
        out[1] = a.conj() * psi[0] + detuning * psi[1] + Q * c * psi[3] + d * psi[4]
        out[2] = b.conj() * psi[0] + detuning * psi[2] + c * psi[4] + Q * d * psi[5]
        out[3] = Q * c.conj() * psi[1]
        out[4] = d.conj() * psi[1] + c.conj() * psi[2]
        out[5] = Q * d.conj() * psi[2]
        out *= -0.5j
        return out.reshape(-1)

    return rhs


def _solve(rhs, y0, span, t_eval, rtol, atol):
    sol = solve_ivp(rhs, span, y0, method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        last = float(sol.t[-1]) if sol.t.size else float(span[0])
        raise IntegrationError(f"integration failed: {sol.message}", last)
    return sol


def integrate(cfg: PulseConfig, psi0=None, settings: IntegratorSettings | None = None) -> Trajectory:
    """Integrate ``i d/dt psi = H(t) psi`` across the pulse sequence.

    ``psi0`` defaults to |0,0>. Output is sampled on an even grid of
    ``settings.samples`` points via the integrator's dense output.
    """
    settings = settings or IntegratorSettings()
    psi0 = GROUND if psi0 is None else np.asarray(psi0, dtype=complex)
    if psi0.shape != (6,):
        raise PreconditionError("initial state needs six amplitudes")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise PreconditionError("initial state must be normalized")
    if cfg.stokes_center >= cfg.pump_center and cfg.is_gaussian:
        warnings.warn("pulses are in intuitive order (Stokes does not precede pump)", stacklevel=2)

    span = settings.span_for(cfg)
    t = np.linspace(span[0], span[1], settings.samples)
    coeffs = _couplings(np.array([cfg.eta]), np.array([cfg.nu]), [[p] for p in cfg.phases])
    rhs = _make_rhs(cfg.pump, cfg.stokes, coeffs, cfg.detuning)
    sol = _solve(rhs, psi0.copy(), span, t, settings.rtol, settings.atol)
    psi = sol.y.T

    u1 = phase_reduction_diagonal(*cfg.phases)
    d1, d2 = _dark_kets(*_frame_polar(cfg.pump(t), cfg.stokes(t) / STOKES_NORM, cfg.eta, cfg.nu, cfg.phi))
    reduced = psi * u1
    bright = (
        1.0
        - np.abs(np.einsum("tj,tj->t", d1.conj(), reduced)) ** 2
        - np.abs(np.einsum("tj,tj->t", d2.conj(), reduced)) ** 2
    )
    return Trajectory(t, psi, bright)


def integrate_batch(shape: PulseConfig, eta, nu, phases, settings: IntegratorSettings | None = None):
    """Integrate many polarization/phase variants of one pulse shape at once.

    All systems start in |0,0> and share the envelopes, detuning and time grid
    of ``shape``; only ``eta``, ``nu`` and the four phases vary. Returns
    ``(final_states (N, 6), max_bright (N,))`` with the bright population
    clamped to [0, 1].
    """
    settings = settings or IntegratorSettings(rtol=1e-9, atol=1e-11, samples=600)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    phases = [np.broadcast_to(np.asarray(p, dtype=float), eta.shape) for p in phases]
    n = eta.size
    span = settings.span_for(shape)
    t = np.linspace(span[0], span[1], settings.samples)
    rhs = _make_rhs(shape.pump, shape.stokes, _couplings(eta, nu, phases), shape.detuning)
    y0 = np.zeros((6, n), dtype=complex)
    y0[0] = 1.0
    sol = _solve(rhs, y0.reshape(-1), span, t, settings.rtol, settings.atol)

    pa, pb, pc, pd = phases
    phi = np.mod(pb - pa + pc - pd, 2 * np.pi)
    u1 = np.stack([phase_reduction_diagonal(*p) for p in zip(pa, pb, pc, pd)])  # (N, 6)
    max_bright = np.zeros(n)
    for i, ti in enumerate(t):
        psi = sol.y[:, i].reshape(6, n).T * u1
        d1, d2 = _dark_kets(*_frame_polar(shape.pump(ti), shape.stokes(ti) / STOKES_NORM, eta, nu, phi))
        b = 1.0 - np.abs(np.sum(d1.conj() * psi, axis=1)) ** 2 - np.abs(np.sum(d2.conj() * psi, axis=1)) ** 2
        np.maximum(max_bright, b, out=max_bright)
    final = sol.y[:, -1].reshape(6, n).T
    return final, np.clip(max_bright, 0.0, 1.0)


def max_bright_population(traj: Trajectory) -> float:
    """Largest population found outside the dark subspace along the run."""
    if traj.t.size == 0:
        raise PreconditionError("empty trajectory")
    return float(np.clip(np.max(traj.bright_raw), 0.0, 1.0))


def transfer_efficiency(psi_final) -> float:
    """Total population in |2,-2>, |2,0>, |2,+2>."""
    psi_final = np.asarray(psi_final)
    return float(np.sum(np.abs(psi_final[3:]) ** 2))
