"""Static preload solve, linearized modal analysis and linear dynamic response.

These preliminary computations anchor the rest of the pipeline: the static
solution linearizes the contact states under bolt preload, the modal step
selects the resonance of interest, and the single-harmonic linear response
provides sweep seeds and the amplified trial vectors of the reduction basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import harmonics as hm
from .contact import PHASE_SEPARATION, PHASE_SLIP, PHASE_STICK
from .model import JointedModel


class StaticSolveError(RuntimeError):
    pass


@dataclass
class StaticSolution:
    """Preloaded equilibrium state and its linearization."""

    u0: np.ndarray
    contact_states: np.ndarray  # per pair: stick/slip/separation code
    K_l: sp.csr_matrix
    normal_forces: np.ndarray
    tangential_forces: np.ndarray
    residual: float
    iterations: int

    @property
    def all_separated(self) -> bool:
        return bool(np.all(self.contact_states == PHASE_SEPARATION))


@dataclass
class ModalData:
    """Selected mode of the linearized preclamped structure plus neighbors."""

    omega_bar: float
    phi_bar: np.ndarray
    frequencies: np.ndarray
    shapes: np.ndarray  # columns, mass-normalized
    selected_index: int


@dataclass
class LinearizedResponse:
    """Harmonic-1 response of the linearized structure to the unit pattern."""

    omega: float
    U1c: np.ndarray
    U1s: np.ndarray


def solve_static(
    model: JointedModel, tol: float = 1e-12, max_iter: int = 50
) -> StaticSolution:
    """Newton solve of the preloaded static system with linearized states.

    The tangential branch is elastic from a zero anchor; the normal branch is
    the unilateral spring.  The linearized stiffness treats pairs at exactly
    zero normal gap as in contact so that preload-free models keep their
    stuck linearization.
    """
    n = model.n_dofs
    p0 = model.static_load
    K = model.stiffness
    if not model.contact_pairs:
        u0 = spla.spsolve(K.tocsc(), p0) if np.any(p0) else np.zeros(n)
        return StaticSolution(
            u0=u0,
            contact_states=np.zeros(0, dtype=np.int8),
            K_l=K.copy(),
            normal_forces=np.zeros(0),
            tangential_forces=np.zeros(0),
            residual=0.0,
            iterations=0,
        )

    B_t, B_n = model.contact_selectors()
    kt, kn, mu = model.contact_param_arrays()
    Kt_full = (B_t.T @ sp.diags(kt) @ B_t).tocsr()

    u = np.zeros(n)
    ref = max(float(np.linalg.norm(p0)), 1.0)
    res_norm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        rel_n = B_n @ u
        active = rel_n >= 0.0
        f_n = np.where(rel_n > 0.0, kn * rel_n, 0.0)
        f_t = kt * (B_t @ u)
        R = K @ u + B_t.T @ f_t + B_n.T @ f_n - p0
        res_norm = float(np.linalg.norm(R))
        if res_norm <= tol * ref:
            break
        J = K + Kt_full + B_n.T @ sp.diags(kn * active) @ B_n
        u = u - spla.spsolve(J.tocsc(), R)
    else:
        raise StaticSolveError(
            f"static solve did not converge: residual {res_norm:.3e}"
        )

    rel_n = B_n @ u
    active = rel_n >= 0.0
    f_n = np.where(rel_n > 0.0, kn * rel_n, 0.0)
    f_t = kt * (B_t @ u)
    states = np.full(len(model.contact_pairs), PHASE_SEPARATION, dtype=np.int8)
    states[active] = PHASE_STICK
    states[active & (np.abs(f_t) > mu * f_n)] = PHASE_SLIP
    K_l = (K + Kt_full + B_n.T @ sp.diags(kn * active) @ B_n).tocsr()

    if np.any(p0) and not active.any():
        raise StaticSolveError(
            "interface fully separated under preload; check preload sign"
        )
    return StaticSolution(
        u0=u,
        contact_states=states,
        K_l=K_l,
        normal_forces=f_n,
        tangential_forces=f_t,
        residual=res_norm,
        iterations=it,
    )


def modal_select(
    K_l: sp.spmatrix,
    M: sp.spmatrix,
    mode_index: int | None = None,
    frequency_hz: float | None = None,
    n_modes: int = 10,
) -> ModalData:
    """Lowest eigenpairs of the linearized structure with one mode selected.

    Shift-invert Lanczos about a small positive shift; selection either by
    1-based mode index or by closeness to a target frequency.
    """
    if mode_index is None and frequency_hz is None:
        mode_index = 1
    k = max(n_modes, (mode_index or 1) + 2)
    n = K_l.shape[0]
    k = min(k, n - 1)
    v0 = np.linspace(1.0, 2.0, n)
    evals, vecs = spla.eigsh(
        K_l.tocsc(), k=k, M=M.tocsc(), sigma=0.0, which="LM", v0=v0
    )
    order = np.argsort(evals)
    evals, vecs = evals[order], vecs[:, order]
    omegas = np.sqrt(np.clip(evals, 0.0, None))
    # mass-normalize deterministically (largest component positive)
    Md = M.tocsr()
    for i in range(vecs.shape[1]):
        phi = vecs[:, i]
        phi = phi / np.sqrt(phi @ (Md @ phi))
        if phi[np.argmax(np.abs(phi))] < 0:
            phi = -phi
        vecs[:, i] = phi
    if mode_index is not None:
        if not 1 <= mode_index <= len(omegas):
            raise ValueError(f"mode index {mode_index} out of computed range")
        sel = mode_index - 1
    else:
        sel = int(np.argmin(np.abs(omegas - 2.0 * np.pi * frequency_hz)))
    return ModalData(
        omega_bar=float(omegas[sel]),
        phi_bar=vecs[:, sel].copy(),
        frequencies=omegas,
        shapes=vecs,
        selected_index=sel,
    )


def linear_dynamic(
    K_l: sp.spmatrix, model: JointedModel, omega: float, H: int
) -> LinearizedResponse:
    """Harmonic-1 block solve of the linearized forced response."""
    n = model.n_dofs
    M, C = model.mass, model.damping
    A = sp.bmat(
        [
            [K_l - omega**2 * M, omega * C],
            [-omega * C, K_l - omega**2 * M],
        ],
        format="csc",
    )
    rhs = np.concatenate([model.excitation_pattern, np.zeros(n)])
    try:
        sol = spla.splu(A).solve(rhs)
    except RuntimeError as exc:
        raise RuntimeError(
            f"linearized dynamic block is singular at omega={omega}: {exc}"
        ) from exc
    return LinearizedResponse(omega=omega, U1c=sol[:n], U1s=sol[n:])


def trial_theta(
    u0: np.ndarray, U_l: LinearizedResponse, alpha: float, H: int
) -> hm.HarmonicVector:
    """Amplified trial vector: static block plus scaled harmonic-1 response."""
    n = u0.size
    theta = hm.HarmonicVector.zeros(n, H)
    theta.comps[0] = u0
    theta.comps[hm.cos_comp(1)] = alpha * U_l.U1c
    theta.comps[hm.sin_comp(1)] = alpha * U_l.U1s
    return theta


def export_static_json(static: StaticSolution, modal: ModalData | None = None) -> dict:
    """JSON-ready inspection payload of the preliminary computations."""
    from .contact import PHASE_NAMES

    out = {
        "static_residual": static.residual,
        "iterations": static.iterations,
        "contact_states": [PHASE_NAMES[int(s)] for s in static.contact_states],
        "normal_forces_n": static.normal_forces.tolist(),
        "tangential_forces_n": static.tangential_forces.tolist(),
        "u0_norm_m": float(np.linalg.norm(static.u0)),
    }
    if modal is not None:
        out["mode_frequencies_hz"] = (modal.frequencies / (2 * np.pi)).tolist()
        out["selected_mode_hz"] = modal.omega_bar / (2 * np.pi)
    return out
