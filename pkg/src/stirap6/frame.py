"""Dark/bright separation of the phase-reduced Hamiltonian H1.

The frame parameters are evaluated in a form multiplied through by powers
of D, so they stay finite when either Stokes component vanishes
(nu = 0 or pi/2). With ``c, d`` the unit Stokes direction and
``s = sqrt(C^2 + D^2)``::

    N = sqrt(c^4 + d^4)            M = sqrt(c^4 + q^2 c^2 d^2 + d^4)
    G = |A c - B d e^{i phi}|      P = |A d^3 + B c^3 e^{i phi}|
    alpha = atan2(-q s N, G)                       in [-pi/2, 0]
    beta  = atan2(q P, M sqrt(G^2 + q^2 s^2 N^2))   in [0, pi/2]
    xi    = arg(A c - B d e^{-i phi})
    zeta  = xi + arg(A d^3 + B c^3 e^{i phi})

The rows of U = U4 U3 U2 are bras; the dark kets returned here are the
complex conjugates of rows 4 and 6.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from stirap6.angular import Q
from stirap6.errors import DegenerateInputError, DomainError
from stirap6.hamiltonian import (
    STOKES_NORM,
    EnvelopeSample,
    PulseConfig,
    envelopes,
    reduced_hamiltonian,
)

BRIGHT_BLOCK = (0, 1, 2, 4)
DARK_ROWS = (3, 5)


@dataclass(frozen=True)
class DarkFrame:
    k: float
    x: float
    y: float
    alpha: float
    beta: float
    xi: float
    zeta: float

    def stokes_direction(self) -> tuple[float, float]:
        """Unit vector ``(C, D)/sqrt(C^2 + D^2)`` recovered from ``k``."""
        if np.isinf(self.k):
            return 1.0, 0.0
        norm = np.hypot(self.k, 1.0)
        return self.k / norm, 1.0 / norm


def _frame_core(A, B, s, c, d, phi):
    """Frame parameters from pump components, Stokes magnitude and direction."""
    N = np.sqrt(c**4 + d**4)
    M = np.sqrt(c**4 + Q**2 * c**2 * d**2 + d**4)
    e = np.exp(1j * phi)
    g = A * c - B * d * e
    p = A * d**3 + B * c**3 * e
    G, P = np.abs(g), np.abs(p)
    alpha = np.arctan2(-Q * s * N, G)
    # No field at all: every state is dark, keep D2 on |0,0> as before the pulses.
    alpha = np.where((s == 0) & (G == 0), -np.pi / 2, alpha)
    beta = np.arctan2(Q * P, M * np.sqrt(G**2 + (Q * s * N) ** 2))
    xi = np.angle(np.conj(g))  # arg(A c - B d e^{-i phi})
    zeta = xi + np.angle(p)
    return c, d, alpha, beta, xi, zeta


def _frame_arrays(A, B, C, D, phi):
    """Vectorized frame parameters; returns ``(c, d, alpha, beta, xi, zeta)``."""
    A, B, C, D, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (A, B, C, D, phi)))
    s = np.hypot(C, D)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(s > 0, C / s, np.nan)
        d = np.where(s > 0, D / s, np.nan)
    return _frame_core(A, B, s, c, d, phi)


def _frame_polar(rp, rs, eta, nu, phi):
    """Same as ``_frame_arrays`` but with the Stokes direction taken from ``nu``.

    ``rs`` is the Stokes magnitude already divided by sqrt(1+q^2). Stays
    defined when either pulse has underflowed to zero.
    """
    rp, rs, eta, nu, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (rp, rs, eta, nu, phi)))
    return _frame_core(rp * np.cos(eta), rp * np.sin(eta), rs, np.cos(nu), np.sin(nu), phi)


def _limit_arrays(eta, nu, phi, stage):
    """Frame parameters in the Stokes-only (early) or pump-only (late) limit.

    Only the polarization angles and phi survive; the pulse magnitudes drop out.
    """
    A, B = np.cos(eta), np.sin(eta)
    c, d = np.cos(nu), np.sin(nu)
    c, d, _, _, xi, zeta = _frame_arrays(A, B, c, d, phi)
    N = np.sqrt(c**4 + d**4)
    M = np.sqrt(c**4 + Q**2 * c**2 * d**2 + d**4)
    e = np.exp(1j * np.asarray(phi))
    G = np.abs(A * c - B * d * e)
    P = np.abs(A * d**3 + B * c**3 * e)
    if stage == "early":
        alpha = np.full(np.shape(xi), -np.pi / 2)
        beta = np.zeros(np.shape(xi))
    elif stage == "late":
        alpha = np.zeros(np.shape(xi))
        beta = np.arctan2(Q * P, M * G)
    else:
        raise ValueError(f"stage must be 'early' or 'late', not {stage!r}")
    return c, d, alpha, beta, xi, zeta


def _frame_from_arrays(c, d, alpha, beta, xi, zeta) -> DarkFrame:
    c, d = float(c), float(d)
    N = np.sqrt(c**4 + d**4)
    M = np.sqrt(c**4 + Q**2 * c**2 * d**2 + d**4)
    k = np.inf if d == 0 else c / d
    return DarkFrame(
        k=float(k),
        x=float(M / N),
        y=float(-Q * d**2 / N),
        alpha=float(alpha),
        beta=float(beta),
        xi=float(xi),
        zeta=float(zeta),
    )


def dark_frame(env: EnvelopeSample, phi: float) -> DarkFrame:
    """Frame parameters ``k, x, y, alpha, beta, xi, zeta`` at one instant."""
    A, B, C, D = env
    if C == 0 and D == 0:
        raise DegenerateInputError("no Stokes field (C = D = 0): dark frame undefined")
    return _frame_from_arrays(*_frame_arrays(A, B, C, D, phi))


def limit_frame(cfg: PulseConfig, stage: str) -> DarkFrame:
    """Frame at the start (``'early'``) or end (``'late'``) of a counterintuitive sequence."""
    return _frame_from_arrays(*_limit_arrays(cfg.eta, cfg.nu, cfg.phi, stage))


def _u2_rows(c, d):
    """Rows 4-6 of U2 restricted to the J=2 block, as (..., 3, 3)."""
    c, d = np.asarray(c, dtype=float), np.asarray(d, dtype=float)
    N = np.sqrt(c**4 + d**4)
    M = np.sqrt(c**4 + Q**2 * c**2 * d**2 + d**4)
    zero = np.zeros_like(c)
    row4 = np.stack([d**2 / M, -Q * c * d / M, c**2 / M], axis=-1)
    row5 = np.stack([Q * c * d**3 / (N * M), N / M, Q * c**3 * d / (N * M)], axis=-1)
    row6 = np.stack([-(c**2) / N, zero, d**2 / N], axis=-1)
    return np.stack([row4, row5, row6], axis=-2)


def _dark_kets(c, d, alpha, beta, xi, zeta):
    """D1 and D2 kets as arrays of shape (..., 6)."""
    rows = _u2_rows(c, d)
    shape = np.shape(alpha)
    d1 = np.zeros(shape + (6,), dtype=complex)
    d1[..., 3:] = rows[..., 0, :]
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    d2 = np.zeros(shape + (6,), dtype=complex)
    d2[..., 0] = -cb * sa * np.exp(-1j * xi)
    d2[..., 3:] = (
        (-sb * np.exp(-1j * zeta))[..., None] * rows[..., 1, :]
        + (cb * ca)[..., None] * rows[..., 2, :]
    )
    return d1, d2


def dark_kets_for(cfg: PulseConfig, t):
    """D1(t), D2(t) in the phase-reduced frame for an array of times."""
    t = np.asarray(t, dtype=float)
    return _dark_kets(*_frame_polar(cfg.pump(t), cfg.stokes(t) / STOKES_NORM, cfg.eta, cfg.nu, cfg.phi))


def build_U(frame: DarkFrame) -> np.ndarray:
    """U = U4 U3 U2 (rows 4 and 6 are the bras of the two dark states)."""
    c, d = frame.stokes_direction()
    U2 = np.eye(6, dtype=complex)
    U2[3:, 3:] = _u2_rows(c, d)
    U3 = np.diag([np.exp(1j * frame.xi), 1, 1, 1, np.exp(1j * frame.zeta), 1])
    ca, sa = np.cos(frame.alpha), np.sin(frame.alpha)
    cb, sb = np.cos(frame.beta), np.sin(frame.beta)
    U4 = np.eye(6, dtype=complex)
    U4[0, 0], U4[0, 5] = ca, sa
    U4[4, 0], U4[4, 4], U4[4, 5] = -sb * sa, cb, sb * ca
    U4[5, 0], U4[5, 4], U4[5, 5] = -cb * sa, -sb, cb * ca
    return U4 @ U3 @ U2


def dark_state_D1(C: float, D: float) -> np.ndarray:
    """The constant dark state living entirely in the J=2 manifold."""
    if C == 0 and D == 0:
        raise DegenerateInputError("D1 undefined for C = D = 0")
    vec = np.zeros(6, dtype=complex)
    vec[3:] = (D * D, -Q * C * D, C * C)
    return vec / np.sqrt(C**4 + D**4 + Q**2 * C**2 * D**2)


def dark_state_D2(frame: DarkFrame) -> np.ndarray:
    """The transfer dark state, ket form (conjugate of row 6 of ``build_U``)."""
    c, d = frame.stokes_direction()
    _, d2 = _dark_kets(c, d, frame.alpha, frame.beta, frame.xi, frame.zeta)
    return d2


class BrightSystem(NamedTuple):
    energies: np.ndarray  # (4,), ascending
    vectors: np.ndarray  # (4, 6), rows are kets in the phase-reduced basis


def _fix_phase(vec):
    j = np.argmax(np.abs(vec))
    return vec * np.exp(-1j * np.angle(vec[j]))


def bright_eigensystem(H1: np.ndarray, frame: DarkFrame) -> BrightSystem:
    """Diagonalize the 4x4 block of ``U H1 U^dagger`` that is not annihilated.

    Eigenvectors are mapped back to the basis of ``H1`` and gauge-fixed so the
    largest component is real and positive.
    """
    if not np.any(H1 - np.diag(np.diag(H1))):
        raise DegenerateInputError("all couplings vanish: no bright states")
    U = build_U(frame)
    Ht = U @ H1 @ U.conj().T
    block = Ht[np.ix_(BRIGHT_BLOCK, BRIGHT_BLOCK)]
    energies, vecs = np.linalg.eigh(block)
    embedded = np.zeros((6, 4), dtype=complex)
    embedded[list(BRIGHT_BLOCK), :] = vecs
    bare = (U.conj().T @ embedded).T
    return BrightSystem(energies, np.array([_fix_phase(v) for v in bare]))


class ThreeLevelAdiabaticity(NamedTuple):
    lhs1: float
    lhs2: float
    rhs: float


def reduced_kappa(cfg: PulseConfig) -> float:
    """Coupling factor of the Stokes leg in the three-level reduction."""
    ends = (0.0, np.pi / 2)
    if not (np.isclose(cfg.eta, ends, atol=1e-12).any() and np.isclose(cfg.nu, ends, atol=1e-12).any()):
        raise DomainError("three-level reduction needs eta, nu in {0, pi/2}")
    # A pairs with C through q and with D through 1; B the other way around.
    return Q if (cfg.eta < 0.1) == (cfg.nu < 0.1) else 1.0


def adiabaticity_three_level(cfg: PulseConfig, kappa: float | None, t: float) -> ThreeLevelAdiabaticity:
    """Both sides of the textbook three-level STIRAP adiabaticity condition.

    Returns ``|theta' sin^2 r / cos r|``, ``|theta' cos^2 r / sin r|`` and
    ``Omega / 2`` where ``tan theta = Omega_p / (kappa Omega_S)`` and
    ``tan 2r = Omega / Delta``. ``kappa=None`` infers it from the polarizations.
    """
    expected = reduced_kappa(cfg)
    if kappa is None:
        kappa = expected
    if not cfg.is_gaussian:
        raise DomainError("analytic mixing-angle rate needs Gaussian envelopes")
    op = cfg.pump(t)
    os_ = cfg.stokes(t) / STOKES_NORM
    omega = np.hypot(op, kappa * os_)
    if omega == 0.0:
        return ThreeLevelAdiabaticity(0.0, 0.0, 0.0)
    dop = cfg.pump_rate(t)
    dos = cfg.stokes_rate(t) / STOKES_NORM
    theta_dot = kappa * (dop * os_ - op * dos) / omega**2
    rho = 0.5 * np.arctan2(omega, cfg.detuning)
    lhs1 = abs(theta_dot * np.sin(rho) ** 2 / np.cos(rho))
    lhs2 = abs(theta_dot * np.cos(rho) ** 2 / np.sin(rho))
    return ThreeLevelAdiabaticity(float(lhs1), float(lhs2), float(0.5 * omega))


@dataclass(frozen=True)
class AdiabaticitySeries:
    """Per-time bright energies and the ratios |eps_k| / |<D2|dB_k/dt>|."""

    t: np.ndarray  # (n,)
    energies: np.ndarray  # (n, 4)
    couplings: np.ndarray  # (n, 4) complex <D2|dB_k/dt>
    ratios: np.ndarray  # (n, 4)
    overlaps: np.ndarray  # (n, 4) |<B_k(t_i)|B_k(t_{i-1})>|, 1 at i = 0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "r1", "r2", "r3", "r4", "eps1", "eps2", "eps3", "eps4"])
            for i, t in enumerate(self.t):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in self.ratios[i]]
                                + [repr(float(v)) for v in self.energies[i]])


def track_bright_states(cfg: PulseConfig, t_grid):
    """Bright eigensystem along ``t_grid`` with continuous labelling and gauge.

    Labels are carried from step to step by maximum-overlap assignment; the
    phase is parallel-transported (overlap with the previous vector made real
    positive). The first sample uses the largest-component gauge.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    n = len(t_grid)
    energies = np.full((n, 4), np.nan)
    vectors = np.full((n, 4, 6), np.nan, dtype=complex)
    overlaps = np.ones((n, 4))
    prev = None
    for i, t in enumerate(t_grid):
        env = envelopes(t, cfg)
        if env.C == 0 and env.D == 0:
            prev = None
            continue
        H1 = reduced_hamiltonian(env, cfg.phi, cfg.detuning)
        eps, vecs = bright_eigensystem(H1, dark_frame(env, cfg.phi))
        if prev is not None:
            ov = np.abs(prev.conj() @ vecs.T)  # (prev label, new index)
            rows, cols = linear_sum_assignment(-ov)
            order = cols[np.argsort(rows)]
            eps, vecs = eps[order], vecs[order]
            for kk in range(4):
                phase = np.vdot(prev[kk], vecs[kk])
                vecs[kk] *= np.exp(-1j * np.angle(phase))
                overlaps[i, kk] = abs(phase)
        energies[i], vectors[i] = eps, vecs
        prev = vecs
    return energies, vectors, overlaps


def adiabaticity_general(cfg: PulseConfig, t_grid) -> AdiabaticitySeries:
    """Ratios |eps_k - eps_0| / |<D2|dB_k/dt>| with eps_0 = 0.

    The time derivative is a centered finite difference on ``t_grid``
    (one-sided at the ends). A matrix element that underflows to zero gives
    ``inf``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    energies, vectors, overlaps = track_bright_states(cfg, t_grid)
    dvec = np.gradient(vectors, t_grid, axis=0)
    _, d2 = dark_kets_for(cfg, t_grid)
    couplings = np.einsum("tj,tkj->tk", d2.conj(), dvec)
    mag = np.abs(couplings)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(mag > 0, np.abs(energies) / mag, np.inf)
    return AdiabaticitySeries(t_grid, energies, couplings, ratios, overlaps)
