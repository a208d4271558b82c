"""Alternating frequency-time evaluation of contact force coefficients.

Displacement harmonics are synthesized to one sampled period per element,
pushed through the Jenkins kernel, and the resulting forces (and their
analytic time-domain derivatives) are transformed back to harmonic
coefficients.  The engine exposes both the global assembled form used by the
full-order solver and the per-element harmonic tensors reused by the
projected and hyper-reduced solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import harmonics as hm
from .contact import JenkinsConvergenceError, march_batch
from .model import JointedModel


@dataclass(frozen=True)
class AftConfig:
    """Sampling controls of the alternating frequency-time scheme."""

    n_time_samples: int = 256
    warmup_periods: int = 10

    def validate(self, H: int):
        if self.n_time_samples < 4 * H + 4:
            raise ValueError(
                f"N={self.n_time_samples} violates the Nyquist margin "
                f"4H+4={4 * H + 4} for H={H}"
            )
        if self.warmup_periods < 2:
            raise ValueError("need at least 2 warm-up periods to detect closure")


@dataclass
class AftResult:
    """Force coefficients and Jacobian tensors of one AFT evaluation.

    ``force_t``/``force_n`` are (C, p) harmonic coefficients of the element
    forces; ``jac_tt``/``jac_tn``/``jac_nn`` are (C, p, C) tensors with
    ``jac[r, e, c]`` the derivative of force component r of element e with
    respect to input coefficient c.
    """

    force_t: np.ndarray
    force_n: np.ndarray
    jac_tt: np.ndarray
    jac_tn: np.ndarray
    jac_nn: np.ndarray
    warmup_used: int
    time_force_t: np.ndarray
    time_force_n: np.ndarray


class AftEngine:
    """AFT evaluator bound to one model and sampling configuration."""

    def __init__(self, model: JointedModel, H: int, cfg: AftConfig | None = None):
        self.model = model
        self.H = H
        self.cfg = cfg or AftConfig()
        self.cfg.validate(H)
        self.N = self.cfg.n_time_samples
        self.C = hm.n_components(H)
        self.basis = hm.basis_rows(H, self.N)
        self.B_t, self.B_n = model.contact_selectors()
        self.kt, self.kn, self.mu = model.contact_param_arrays()
        self.n_pairs = len(model.contact_pairs)
        # cumulative element-period evaluations; per-iteration contact cost
        self.element_evals = 0

    def rel_coeffs(self, U_comps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Relative displacement coefficients (C, p) from full coefficients."""
        return U_comps @ self.B_t.T, U_comps @ self.B_n.T

    def evaluate_rel(
        self, rel_t: np.ndarray, rel_n: np.ndarray, subset: np.ndarray | None = None
    ) -> AftResult:
        """Run the kernel on relative coefficient inputs for some elements."""
        if subset is None:
            kt, kn, mu = self.kt, self.kn, self.mu
        else:
            kt, kn, mu = self.kt[subset], self.kn[subset], self.mu[subset]
        p = rel_t.shape[1]
        du_t = hm.synthesize(rel_t, self.N).T
        du_n = hm.synthesize(rel_n, self.N).T
        try:
            res = march_batch(
                du_t, du_n, kt, kn, mu,
                warmup_cap=self.cfg.warmup_periods,
                basis=self.basis,
            )
        except JenkinsConvergenceError as exc:
            elem = exc.element
            if elem is not None and subset is not None:
                elem = int(subset[elem])
            raise JenkinsConvergenceError(exc.mismatch, exc.cap, element=elem)
        self.element_evals += p
        Ft = hm.analyze(res["f_t"].T, self.H)
        Fn = hm.analyze(res["f_n"].T, self.H)
        jac_tt = hm.analyze(res["dft_dt"].transpose(1, 0, 2), self.H)
        jac_tn = hm.analyze(res["dft_dn"].transpose(1, 0, 2), self.H)
        jac_nn = hm.analyze(res["dfn_dn"].transpose(1, 0, 2), self.H)
        return AftResult(
            force_t=Ft,
            force_n=Fn,
            jac_tt=jac_tt,
            jac_tn=jac_tn,
            jac_nn=jac_nn,
            warmup_used=res["warmup_used"],
            time_force_t=res["f_t"],
            time_force_n=res["f_n"],
        )

    def evaluate(self, U_comps: np.ndarray) -> tuple[np.ndarray, sp.csr_matrix]:
        """Global force coefficients (C, n) and sparse dF/dU for full U."""
        n = self.model.n_dofs
        size = self.C * n
        if self.n_pairs == 0:
            return np.zeros((self.C, n)), sp.csr_matrix((size, size))
        rel_t, rel_n = self.rel_coeffs(U_comps)
        res = self.evaluate_rel(rel_t, rel_n)
        F_comps = res.force_t @ self.B_t + res.force_n @ self.B_n
        J = self.assemble_jacobian(res)
        return F_comps, J

    def assemble_jacobian(self, res: AftResult) -> sp.csr_matrix:
        """Scatter per-element harmonic tensors into the sparse global form."""
        C = self.C
        Bt, Bn = self.B_t, self.B_n
        blocks = [[None] * C for _ in range(C)]
        for r in range(C):
            for c in range(C):
                block = Bt.T @ sp.diags(res.jac_tt[r, :, c]) @ Bt
                block = block + Bt.T @ sp.diags(res.jac_tn[r, :, c]) @ Bn
                block = block + Bn.T @ sp.diags(res.jac_nn[r, :, c]) @ Bn
                blocks[r][c] = block
        return sp.bmat(blocks, format="csr")

    def element_time_forces(self, U_comps: np.ndarray):
        """Per-element tangential/normal force samples (p, N) for reporting."""
        rel_t, rel_n = self.rel_coeffs(U_comps)
        res = self.evaluate_rel(rel_t, rel_n)
        return res.time_force_t, res.time_force_n


def aft_evaluate(
    U: hm.HarmonicVector,
    omega: float,
    model: JointedModel,
    cfg: AftConfig | None = None,
) -> tuple[hm.HarmonicVector, sp.csr_matrix]:
    """One-off AFT evaluation: nonlinear force harmonics and sparse Jacobian.

    The Jenkins law is rate independent, so ``omega`` only tags the period;
    it does not influence the coefficients.
    """
    engine = AftEngine(model, U.H, cfg)
    F_comps, J = engine.evaluate(U.comps)
    return hm.HarmonicVector(U.n, U.H, F_comps.ravel()), J
