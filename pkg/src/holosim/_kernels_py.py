"""Pure-numpy propagation kernels.

Fallback implementation of the hot inner loops; the compiled module
``holosim._kernels`` exposes the same functions with identical semantics.
Step propagators are exact per step (batched Hermitian eigendecomposition);
the Lindblad path is classical fixed-step RK4 with the Hamiltonian sampled
at the substage times.
"""
from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _step_propagators(h_mid: np.ndarray, dts: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h_mid)
    phases = np.exp(-1j * w * dts[:, None])
    return np.einsum("nij,nj,nkj->nik", v, phases, v.conj())


def propagate_unitary(h_mid: np.ndarray, dts: np.ndarray) -> np.ndarray:
    """Ordered product of step propagators exp(-i H_k dt_k), last step leftmost.

    ``h_mid``: (n, d, d) Hermitian midpoint Hamiltonians, ``dts``: (n,) steps.
    """
    d = h_mid.shape[1]
    u = np.eye(d, dtype=complex)
    for step in _step_propagators(h_mid, dts):
        u = step @ u
    return u


def evolve_states(
    h_mid: np.ndarray, dts: np.ndarray, psi0: np.ndarray, stride: int
) -> np.ndarray:
    """Propagate a state, recording every ``stride``-th step plus endpoints."""
    n = h_mid.shape[0]
    psi = psi0.astype(complex).copy()
    out = [psi.copy()]
    steps = _step_propagators(h_mid, dts)
    for k in range(n):
        psi = steps[k] @ psi
        if (k + 1) % stride == 0 or k == n - 1:
            out.append(psi.copy())
    return np.array(out)


def _lindblad_rhs(h, rho, c_ops, cdc_sum):
    drho = -1j * (h @ rho - rho @ h)
    for c in c_ops:
        drho += c @ rho @ c.conj().T
    drho -= 0.5 * (cdc_sum @ rho + rho @ cdc_sum)
    return drho


def lindblad_rk4(
    h_nodes: np.ndarray,
    dts: np.ndarray,
    rho0: np.ndarray,
    c_ops: np.ndarray,
    stride: int,
) -> np.ndarray:
    """RK4 integration of the Lindblad master equation.

    ``h_nodes``: (2 n + 1, d, d) Hamiltonians at step nodes and midpoints
    (step k uses entries 2k, 2k+1, 2k+2); ``c_ops``: (K, d, d) collapse
    operators with the decay rates already folded in as sqrt(rate).
    Records every ``stride``-th step plus endpoints.  The input may be any
    complex matrix (linearity is preserved; no hermitization is applied).
    """
    n = dts.shape[0]
    rho = rho0.astype(complex).copy()
    cdc_sum = np.zeros_like(rho)
    for c in c_ops:
        cdc_sum += c.conj().T @ c
    out = [rho.copy()]
    for k in range(n):
        dt = dts[k]
        h0, h1, h2 = h_nodes[2 * k], h_nodes[2 * k + 1], h_nodes[2 * k + 2]
        k1 = _lindblad_rhs(h0, rho, c_ops, cdc_sum)
        k2 = _lindblad_rhs(h1, rho + 0.5 * dt * k1, c_ops, cdc_sum)
        k3 = _lindblad_rhs(h1, rho + 0.5 * dt * k2, c_ops, cdc_sum)
        k4 = _lindblad_rhs(h2, rho + dt * k3, c_ops, cdc_sum)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % stride == 0 or k == n - 1:
            out.append(rho.copy())
    return np.array(out)
