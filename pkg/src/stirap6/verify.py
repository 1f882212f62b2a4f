"""Built-in invariant checks, run by ``stirap6 verify``."""

from __future__ import annotations

import numpy as np

from stirap6.angular import Q
from stirap6.frame import build_U, dark_frame, dark_state_D1, dark_state_D2
from stirap6.hamiltonian import EnvelopeSample, builtin_config_path, load_config, reduced_hamiltonian
from stirap6.propagator import IntegratorSettings, integrate
from stirap6.statespace import analytic_final_state, compose_final_state


def _random_frames(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        env = EnvelopeSample(*rng.uniform(0.0, 5.0, 4))
        phi = rng.uniform(0, 2 * np.pi)
        yield env, phi, dark_frame(env, phi)


def run_checks(draws: int = 1000, seed: int = 7):
    """Yield ``(name, passed, detail)`` for each invariant."""
    yield "q^2 = 6", abs(Q**2 - 6) < 1e-12, f"q^2 - 6 = {Q**2 - 6:.2e}"

    worst_unitary = worst_null = worst_block = 0.0
    eye = np.eye(6)
    for env, phi, frame in _random_frames(draws, seed):
        U = build_U(frame)
        H1 = reduced_hamiltonian(env, phi, 0.0)
        worst_unitary = max(worst_unitary, np.max(np.abs(U @ U.conj().T - eye)))
        scale = max(1.0, np.max(np.abs(H1)))
        d1, d2 = dark_state_D1(env.C, env.D), dark_state_D2(frame)
        worst_null = max(worst_null, np.linalg.norm(H1 @ d1) / scale, np.linalg.norm(H1 @ d2) / scale)
        H2 = U @ H1 @ U.conj().T
        worst_block = max(worst_block, np.max(np.abs(H2[[3, 5]])) / scale)
    yield "U unitary", worst_unitary < 1e-10, f"max |U U^+ - 1| = {worst_unitary:.2e} over {draws} draws"
    yield "dark states annihilated", worst_null < 1e-10, f"max |H1 D| / |H1| = {worst_null:.2e}"
    yield "dark rows decoupled", worst_block < 1e-10, f"max |(U H1 U^+)_dark| / |H1| = {worst_block:.2e}"

    cfg, _ = load_config(builtin_config_path("fig2"))
    traj = integrate(cfg, settings=IntegratorSettings(samples=400))
    yield "norm conserved", traj.norm_drift < 1e-8, f"max |norm - 1| = {traj.norm_drift:.2e}"

    gap = np.max(np.abs(analytic_final_state(cfg) - compose_final_state(cfg)))
    yield "closed form matches frame composition", gap < 1e-10, f"max deviation {gap:.2e}"
