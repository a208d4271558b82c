"""Multi-harmonic balance solves and frequency sweeps.

The residual of the balance equations is ``Z(omega) U + F(U) - P``, solved by
Newton iteration with the analytic AFT Jacobian.  Frequency sweeps run either
sequentially (each point seeded by its predecessor) or by pseudo-arclength
continuation with tangent predictor and bordered corrector.  Both sweepers
operate on a solver-system object so the full-order and projected systems
share the machinery.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import harmonics as hm
from .aft import AftConfig, AftEngine
from .contact import march_batch
from .errors import (
    ErrorReport,
    apply_dynamic_stiffness,
    dynamic_coeff_factors,
    evaluate_error,
    external_force_comps,
)
from .model import JointedModel, LoadCase
from .preliminary import StaticSolution, linear_dynamic, trial_theta


class DynamicStiffness:
    """Block-diagonal dynamic stiffness over harmonic components.

    Blocks are kept per harmonic; the full operator is only ever assembled
    as a sparse matrix (for factorization), never dense.
    """

    def __init__(self, model: JointedModel, omega: float, H: int):
        self.model = model
        self.omega = omega
        self.H = H

    def block(self, j: int) -> sp.csr_matrix:
        K, M, C = self.model.stiffness, self.model.mass, self.model.damping
        if j == 0:
            return K.copy()
        w = j * self.omega
        return sp.bmat(
            [[K - w**2 * M, w * C], [-w * C, K - w**2 * M]], format="csr"
        )

    def apply(self, U_comps: np.ndarray) -> np.ndarray:
        return apply_dynamic_stiffness(self.model, self.omega, U_comps)

    def to_sparse(self) -> sp.csr_matrix:
        return assemble_Z_sparse(self.model, self.omega, self.H)


def assemble_Z(model: JointedModel, omega: float, H: int) -> DynamicStiffness:
    """Dynamic stiffness with per-harmonic blocks."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return DynamicStiffness(model, omega, H)


def comp_coupling_matrices(H: int, omega: float) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Component-space factors: Z = kron(I,K) + kron(Dm,M) + kron(Sc,C)."""
    mass_scale, damp = dynamic_coeff_factors(H, omega)
    C = hm.n_components(H)
    Dm = sp.diags(mass_scale)
    rows = [r for r, _, _ in damp]
    cols = [c for _, c, _ in damp]
    vals = [w for _, _, w in damp]
    Sc = sp.csr_matrix((vals, (rows, cols)), shape=(C, C))
    return Dm.tocsr(), Sc


def assemble_Z_sparse(model: JointedModel, omega: float, H: int) -> sp.csr_matrix:
    Dm, Sc = comp_coupling_matrices(H, omega)
    C_id = sp.eye(hm.n_components(H), format="csr")
    return (
        sp.kron(C_id, model.stiffness)
        + sp.kron(Dm, model.mass)
        + sp.kron(Sc, model.damping)
    ).tocsr()


def apply_dZ_domega(model: JointedModel, omega: float, U_comps: np.ndarray) -> np.ndarray:
    """Frequency derivative of the dynamic stiffness applied to coefficients."""
    H = (U_comps.shape[0] - 1) // 2
    out = np.zeros_like(U_comps)
    M, Cd = model.mass, model.damping
    for j in range(1, H + 1):
        c, s = hm.cos_comp(j), hm.sin_comp(j)
        out[c] = -2.0 * j**2 * omega * (M @ U_comps[c]) + j * (Cd @ U_comps[s])
        out[s] = -j * (Cd @ U_comps[c]) - 2.0 * j**2 * omega * (M @ U_comps[s])
    return out


@dataclass
class NewtonResult:
    x: np.ndarray
    converged: bool
    iterations: int
    residual_norms: list[float]
    message: str = ""


def _linear_solve(J, rhs):
    if sp.issparse(J):
        return spla.splu(J.tocsc()).solve(rhs)
    return np.linalg.solve(J, rhs)


def newton_solve(
    system,
    x0: np.ndarray,
    omega: float,
    alpha: float,
    tol: float = 1e-8,
    max_iter: int = 40,
    backtrack: int = 5,
) -> NewtonResult:
    """Newton iteration on a solver system with mild step backtracking."""
    ref = system.force_ref(alpha)
    x = np.asarray(x0, dtype=float).copy()
    R, J = system.residual_jac(x, omega, alpha)
    rn = float(np.linalg.norm(R))
    history = [rn]
    for it in range(1, max_iter + 1):
        if rn <= tol * ref:
            return NewtonResult(x, True, it - 1, history)
        dx = _linear_solve(J, -R)
        step = 1.0
        for _ in range(backtrack + 1):
            x_new = x + step * dx
            R_new, J_new = system.residual_jac(x_new, omega, alpha)
            rn_new = float(np.linalg.norm(R_new))
            if rn_new < rn or rn_new <= tol * ref:
                break
            step *= 0.5
        x, R, J, rn = x_new, R_new, J_new, rn_new
        history.append(rn)
    if rn <= tol * ref:
        return NewtonResult(x, True, max_iter, history)
    return NewtonResult(
        x, False, max_iter, history,
        message=f"no convergence in {max_iter} iterations (residual {rn:.3e})",
    )


class HfSystem:
    """Full-order MHBM system bound to a jointed model."""

    def __init__(
        self,
        model: JointedModel,
        H: int,
        static: StaticSolution,
        aft_cfg: AftConfig | None = None,
        newton_tol: float = 1e-8,
        max_iter: int = 40,
    ):
        self.model = model
        self.H = H
        self.static = static
        self.engine = AftEngine(model, H, aft_cfg)
        self.newton_tol = newton_tol
        self.max_iter = max_iter
        self.size = model.n_dofs * hm.n_components(H)
        self._z_cache: tuple[float, sp.csr_matrix] | None = None

    def _Z(self, omega: float) -> sp.csr_matrix:
        if self._z_cache is None or self._z_cache[0] != omega:
            self._z_cache = (omega, assemble_Z_sparse(self.model, omega, self.H))
        return self._z_cache[1]

    def comps(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(hm.n_components(self.H), self.model.n_dofs)

    def lift(self, x: np.ndarray) -> hm.HarmonicVector:
        return hm.HarmonicVector(self.model.n_dofs, self.H, x.copy())

    def force_ref(self, alpha: float) -> float:
        P = external_force_comps(self.model, alpha, self.H)
        return max(float(np.linalg.norm(P)), 1e-30)

    def seed(self, alpha: float, omega: float) -> np.ndarray:
        U_l = linear_dynamic(self.static.K_l, self.model, omega, self.H)
        return trial_theta(self.static.u0, U_l, alpha, self.H).data

    def residual_jac(self, x, omega, alpha):
        Z = self._Z(omega)
        F_comps, Jf = self.engine.evaluate(self.comps(x))
        P = external_force_comps(self.model, alpha, self.H)
        R = Z @ x + F_comps.ravel() - P.ravel()
        return R, (Z + Jf).tocsr()

    def dR_domega(self, x, omega, alpha):
        return apply_dZ_domega(self.model, omega, self.comps(x)).ravel()

    def response(self, x: np.ndarray, alpha: float) -> float:
        coeffs = self.comps(x)[:, self.model.excitation_dof]
        return hm.single_dof_amplitude(coeffs, self.engine.N) / alpha

    def error_metric(self, x, omega, alpha) -> ErrorReport:
        return evaluate_error(
            self.lift(x), self.model, omega, alpha, engine=self.engine
        )


@dataclass
class SweepPoint:
    omega: float
    alpha: float
    response: float
    iterations: int
    error_metric: float
    converged: bool
    x: np.ndarray
    residual: float


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)
    aborted: bool = False
    abort_reason: str = ""
    wall_time: float = 0.0

    def for_amplitude(self, alpha: float) -> list[SweepPoint]:
        return [p for p in self.points if np.isclose(p.alpha, alpha)]

    def peak(self, alpha: float) -> tuple[float, float]:
        pts = [p for p in self.for_amplitude(alpha) if p.converged]
        if not pts:
            raise ValueError(f"no converged points at amplitude {alpha}")
        best = max(pts, key=lambda p: p.response)
        return best.omega, best.response

    @property
    def n_failed(self) -> int:
        return sum(not p.converged for p in self.points)


def _record(system, res: NewtonResult, omega, alpha, compute_error) -> SweepPoint:
    if res.converged:
        response = system.response(res.x, alpha)
        err = (
            system.error_metric(res.x, omega, alpha).E if compute_error else np.nan
        )
    else:
        response, err = np.nan, np.nan
    return SweepPoint(
        omega=omega,
        alpha=alpha,
        response=response,
        iterations=res.iterations,
        error_metric=err,
        converged=res.converged,
        x=res.x,
        residual=res.residual_norms[-1],
    )


def sweep_sequential(
    system,
    load_case: LoadCase,
    compute_error: bool = True,
    amplitudes: list[float] | None = None,
) -> SweepResult:
    """March the frequency grid, reseeding linearly after any failure."""
    t0 = time.perf_counter()
    result = SweepResult()
    grid = load_case.omega_grid()
    for alpha in amplitudes if amplitudes is not None else load_case.amplitudes:
        x_prev = None
        for omega in grid:
            x0 = x_prev if x_prev is not None else system.seed(alpha, omega)
            res = newton_solve(
                system, x0, omega, alpha,
                tol=system.newton_tol, max_iter=system.max_iter,
            )
            result.points.append(_record(system, res, omega, alpha, compute_error))
            x_prev = res.x if res.converged else None
    result.wall_time = time.perf_counter() - t0
    return result


def _tangent(system, x, omega, alpha, J, scale_x, scale_w, prev=None):
    """Scaled unit tangent of the solution path at a converged point."""
    r_w = system.dR_domega(x, omega, alpha)
    t_x = _linear_solve(J, -r_w)
    t = np.concatenate([t_x / scale_x * scale_w, [1.0]])
    t /= np.linalg.norm(t)
    if prev is not None and float(t @ prev) < 0.0:
        t = -t
    return t


def sweep_arclength(
    system,
    load_case: LoadCase,
    compute_error: bool = True,
    amplitudes: list[float] | None = None,
    max_steps_factor: int = 20,
    grow: float = 1.3,
    fast_iters: int = 3,
    corrector_max_iter: int = 12,
) -> SweepResult:
    """Pseudo-arclength continuation across the load-case frequency window.

    Displacement components are normalized by the current solution norm and
    the frequency by the window midpoint so both contribute comparably to
    the arc constraint.  Steps halve on corrector failure and grow on fast
    convergence, within bounds.
    """
    t0 = time.perf_counter()
    result = SweepResult()
    w_start, w_end = load_case.omega_start, load_case.omega_end
    w_ref = 0.5 * (w_start + w_end)
    h0 = (w_end - w_start) / (load_case.n_points * w_ref)
    h_max, h_min = 10.0 * h0, 1e-6 * h0
    tol = system.newton_tol

    for alpha in amplitudes if amplitudes is not None else load_case.amplitudes:
        res0 = newton_solve(
            system, system.seed(alpha, w_start), w_start, alpha,
            tol=tol, max_iter=system.max_iter,
        )
        if not res0.converged:
            result.points.append(_record(system, res0, w_start, alpha, compute_error))
            result.aborted = True
            result.abort_reason = f"no convergence at the first point (alpha={alpha})"
            continue
        result.points.append(_record(system, res0, w_start, alpha, compute_error))
        x, omega = res0.x, w_start
        R, J = system.residual_jac(x, omega, alpha)
        scale_x = max(float(np.linalg.norm(x)), 1e-12)
        t_vec = _tangent(system, x, omega, alpha, J, scale_x, w_ref)
        if t_vec[-1] < 0:
            t_vec = -t_vec
        h = h0
        ref = system.force_ref(alpha)
        max_steps = max_steps_factor * load_case.n_points
        for _ in range(max_steps):
            x_pred = x + h * scale_x * t_vec[:-1]
            w_pred = omega + h * w_ref * t_vec[-1]
            xc, wc = x_pred.copy(), w_pred
            ok = False
            for it in range(1, corrector_max_iter + 1):
                Rc, Jc = system.residual_jac(xc, wc, alpha)
                g = float(
                    t_vec[:-1] @ ((xc - x_pred) / scale_x)
                    + t_vec[-1] * (wc - w_pred) / w_ref
                )
                if np.linalg.norm(Rc) <= tol * ref and abs(g) <= 1e-9:
                    ok = True
                    break
                r_w = system.dR_domega(xc, wc, alpha)
                a = _linear_solve(Jc, Rc)
                b = _linear_solve(Jc, r_w)
                n_vec = t_vec[:-1] / scale_x
                nw = t_vec[-1] / w_ref
                denom = nw - float(n_vec @ b)
                if abs(denom) < 1e-300:
                    break
                d_w = (float(n_vec @ a) - g) / denom
                xc = xc - a - b * d_w
                wc = wc + d_w
            if not ok:
                h *= 0.5
                if h < h_min:
                    result.aborted = True
                    result.abort_reason = (
                        f"arc step collapsed below minimum at omega={omega:.6g}, "
                        f"alpha={alpha}"
                    )
                    break
                continue
            x, omega = xc, wc
            point = NewtonResult(x, True, it, [float(np.linalg.norm(Rc))])
            result.points.append(_record(system, point, omega, alpha, compute_error))
            if omega >= w_end:
                break
            scale_x = max(float(np.linalg.norm(x)), 1e-12)
            t_vec = _tangent(
                system, x, omega, alpha, Jc, scale_x, w_ref, prev=t_vec
            )
            if it <= fast_iters:
                h = min(h * grow, h_max)
        else:
            result.aborted = True
            result.abort_reason = f"step budget exhausted at alpha={alpha}"
    result.wall_time = time.perf_counter() - t0
    return result


def energy_balance(
    model: JointedModel,
    U: hm.HarmonicVector,
    omega: float,
    alpha: float,
    engine: AftEngine | None = None,
) -> dict:
    """Per-period work balance of a converged steady state.

    Returns excitation input work, viscous dissipation and frictional
    dissipation (all J/cycle); at steady state input balances the two sinks.
    """
    if engine is None:
        engine = AftEngine(model, U.H)
    comps = U.comps
    work_in = float(
        np.pi * alpha * (model.excitation_pattern @ comps[hm.sin_comp(1)])
    )
    Cd = model.damping
    viscous = 0.0
    for j in range(1, U.H + 1):
        c, s = comps[hm.cos_comp(j)], comps[hm.sin_comp(j)]
        viscous += np.pi * j**2 * omega * float(c @ (Cd @ c) + s @ (Cd @ s))
    contact = 0.0
    if model.contact_pairs:
        rel_t, rel_n = engine.rel_coeffs(comps)
        du_t = hm.synthesize(rel_t, engine.N).T
        du_n = hm.synthesize(rel_n, engine.N).T
        res = march_batch(
            du_t, du_n, engine.kt, engine.kn, engine.mu,
            warmup_cap=engine.cfg.warmup_periods,
        )
        for arr, disp in ((res["f_t"], du_t), (res["f_n"], du_n)):
            df = np.roll(disp, -1, axis=1) - disp
            fm = 0.5 * (np.roll(arr, -1, axis=1) + arr)
            contact += float(np.sum(fm * df))
    return {"input": work_in, "viscous": viscous, "contact": contact}
