"""Residual-based error indicator evaluated without a reference solution.

The indicator reconstructs the time-domain residual force at the driven DOF
from any converged solution (full order or lifted from a reduced basis) and
normalizes its RMS by the RMS of the applied excitation at that DOF.  All
contact elements are evaluated; this is a per-point diagnostic, not part of
the online solve loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import harmonics as hm
from .aft import AftConfig, AftEngine
from .model import JointedModel


@dataclass
class ErrorReport:
    """RMS residual ratio at the driven DOF plus per-harmonic diagnostics."""

    E: float
    harmonic_residual_norms: np.ndarray
    excitation_dof: int
    n_samples: int

    def as_dict(self) -> dict:
        return {
            "error_metric": self.E,
            "harmonic_residual_norms": self.harmonic_residual_norms.tolist(),
            "excitation_dof": int(self.excitation_dof),
            "n_samples": int(self.n_samples),
        }


def dynamic_coeff_factors(H: int, omega: float):
    """Mass and damping coefficient couplings of the block-diagonal operator.

    Returns (mass_scale, damp_pair) where ``mass_scale[b]`` multiplies
    ``M @ U_b`` and ``damp_pair`` lists ``(row, col, factor)`` couplings of
    ``C @ U_col`` into component ``row``.
    """
    C = hm.n_components(H)
    mass_scale = np.zeros(C)
    damp = []
    for j in range(1, H + 1):
        w = j * omega
        mass_scale[hm.cos_comp(j)] = -(w**2)
        mass_scale[hm.sin_comp(j)] = -(w**2)
        damp.append((hm.cos_comp(j), hm.sin_comp(j), w))
        damp.append((hm.sin_comp(j), hm.cos_comp(j), -w))
    return mass_scale, damp


def apply_dynamic_stiffness(
    model: JointedModel, omega: float, U_comps: np.ndarray
) -> np.ndarray:
    """Block-wise application of the dynamic stiffness to coefficient rows."""
    K, M, Cd = model.stiffness, model.mass, model.damping
    out = (K @ U_comps.T).T
    mass_scale, damp = dynamic_coeff_factors((U_comps.shape[0] - 1) // 2, omega)
    MU = (M @ U_comps.T).T
    out += mass_scale[:, None] * MU
    for r, c, w in damp:
        out[r] += w * (Cd @ U_comps[c])
    return out


def external_force_comps(model: JointedModel, alpha: float, H: int) -> np.ndarray:
    """Coefficient rows of the static preload plus harmonic-1 excitation."""
    P = np.zeros((hm.n_components(H), model.n_dofs))
    P[0] = model.static_load
    P[hm.cos_comp(1)] = alpha * model.excitation_pattern
    return P


def evaluate_error(
    solution: hm.HarmonicVector,
    model: JointedModel,
    omega: float,
    alpha: float,
    cfg: AftConfig | None = None,
    engine: AftEngine | None = None,
    include_amplitude: bool = True,
) -> ErrorReport:
    """Residual error metric of a solution at one frequency point.

    ``include_amplitude`` scales the denominator by the applied amplitude so
    the metric is relative to the actual excitation; disabling it keeps the
    unit-pattern normalization.
    """
    y = model.excitation_dof
    if y < 0 or model.excitation_pattern[y] == 0.0:
        raise ValueError("excitation pattern vanishes at the driven DOF")
    denom_amp = alpha if include_amplitude else 1.0
    if denom_amp == 0.0:
        raise ValueError("zero excitation amplitude in the metric denominator")

    H = solution.H
    if engine is None:
        engine = AftEngine(model, H, cfg)
    N = engine.N
    U_comps = solution.comps

    # full-space frequency-domain residual per harmonic component
    if model.contact_pairs:
        rel_t, rel_n = engine.rel_coeffs(U_comps)
        du_t = hm.synthesize(rel_t, N).T
        du_n = hm.synthesize(rel_n, N).T
        from .contact import march_batch

        res = march_batch(
            du_t, du_n, engine.kt, engine.kn, engine.mu,
            warmup_cap=engine.cfg.warmup_periods,
        )
        engine.element_evals += len(model.contact_pairs)
        Ft = hm.analyze(res["f_t"].T, H)
        Fn = hm.analyze(res["f_n"].T, H)
        F_comps = Ft @ engine.B_t + Fn @ engine.B_n
    else:
        F_comps = np.zeros_like(U_comps)
    R_comps = (
        apply_dynamic_stiffness(model, omega, U_comps)
        + F_comps
        - external_force_comps(model, alpha, H)
    )
    harm_norms = np.linalg.norm(R_comps, axis=1)

    # time-domain residual at the driven DOF (linear rows are band limited;
    # the contact force keeps its full sampled spectrum)
    My = model.mass.getrow(y).toarray().ravel()
    Cy = model.damping.getrow(y).toarray().ravel()
    Ky = model.stiffness.getrow(y).toarray().ravel()
    acc = hm.derivative_coeffs(U_comps, omega, order=2)
    vel = hm.derivative_coeffs(U_comps, omega, order=1)
    ry_comps = acc @ My + vel @ Cy + U_comps @ Ky
    ry_comps[0] -= model.static_load[y]
    ry_comps[hm.cos_comp(1)] -= alpha * model.excitation_pattern[y]
    ry = hm.synthesize(ry_comps, N)
    if model.contact_pairs:
        bt_y = engine.B_t.getcol(y).toarray().ravel()
        bn_y = engine.B_n.getcol(y).toarray().ravel()
        if bt_y.any() or bn_y.any():
            ry = ry + bt_y @ res["f_t"] + bn_y @ res["f_n"]

    rms_r = float(np.sqrt(np.mean(ry**2)))
    rms_p = abs(denom_amp * model.excitation_pattern[y]) / np.sqrt(2.0)
    return ErrorReport(
        E=rms_r / rms_p,
        harmonic_residual_norms=harm_norms,
        excitation_dof=y,
        n_samples=N,
    )
