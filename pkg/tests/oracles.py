"""Independent reference computations used by the tests.

None of these import the package's numerical core; they rebuild the same
quantities by a different route.
"""

from functools import lru_cache

import numpy as np
from scipy.linalg import null_space


def _jmats(j):
    """J+ for spin j in the basis m = j, j-1, ..., -j."""
    ms = np.arange(j, -j - 1, -1, dtype=float)
    jp = np.zeros((ms.size, ms.size))
    for i in range(1, ms.size):
        m = ms[i]
        jp[i - 1, i] = np.sqrt(j * (j + 1) - m * (m + 1))
    return ms, jp


@lru_cache(maxsize=None)
def clebsch_gordan_ladder(j1, j2):
    """All <j1 m1 j2 m2 | J M> via highest-weight states and lowering operators.

    Returns a dict keyed by (m1, m2, J, M). Condon-Shortley phase:
    <j1 j1 j2 (J - j1) | J J> > 0.
    """
    m1s, jp1 = _jmats(j1)
    m2s, jp2 = _jmats(j2)
    jp = np.kron(jp1, np.eye(m2s.size)) + np.kron(np.eye(m1s.size), jp2)
    jm = jp.T
    pairs = [(a, b) for a in m1s for b in m2s]
    mtot = np.array([a + b for a, b in pairs])
    table = {}
    J = j1 + j2
    while J >= abs(j1 - j2) - 1e-9:
        sub = np.flatnonzero(np.isclose(mtot, J))
        # Inside the M = J subspace only |J, J> is killed by J+.
        ns = null_space(jp[:, sub])
        assert ns.shape[1] == 1
        vec = np.zeros(mtot.size)
        vec[sub] = ns[:, 0]
        lead = next(k for k, (a, b) in enumerate(pairs) if np.isclose(a, j1) and np.isclose(a + b, J))
        vec *= np.sign(vec[lead])
        M = J
        while M >= -J - 1e-9:
            for k, (a, b) in enumerate(pairs):
                if np.isclose(a + b, M):
                    table[(a, b, J, M)] = vec[k]
            vec = jm @ vec
            n = np.linalg.norm(vec)
            if n > 1e-12:
                vec /= n
            M -= 1
        J -= 1
    return table


def wigner3j_oracle(j1, j2, j3, m1, m2, m3):
    """3-j symbol from ladder-built Clebsch-Gordan coefficients."""
    if abs(m1 + m2 + m3) > 1e-9 or not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    cg = clebsch_gordan_ladder(float(j1), float(j2)).get((float(m1), float(m2), float(j3), float(-m3)), 0.0)
    phase = (-1) ** int(round(j1 - j2 - m3))
    return phase * cg / np.sqrt(2 * j3 + 1)


def hamiltonian_oracle(A, B, C, D, phases, detuning, q=np.sqrt(6.0)):
    """Six-level RWA Hamiltonian assembled line by line (lower index is the row)."""
    pa, pb, pc, pd = phases
    lines = [
        (0, 1, A * np.exp(1j * pa)),
        (0, 2, B * np.exp(1j * pb)),
        (1, 3, q * C * np.exp(1j * pc)),
        (1, 4, D * np.exp(1j * pd)),
        (2, 4, C * np.exp(1j * pc)),
        (2, 5, q * D * np.exp(1j * pd)),
    ]
    H = np.zeros((6, 6), dtype=complex)
    for i, j, omega in lines:
        H[i, j] = omega / 2
        H[j, i] = np.conj(omega) / 2
    H[1, 1] = H[2, 2] = detuning / 2
    return H


def kernel(H, rcond=1e-10):
    """Orthonormal basis of ker H as columns."""
    return null_space(H, rcond=rcond)
