"""Jenkins friction element with unilateral normal spring.

The kernel marches sampled relative displacements of one period through the
stick/slip/separation state machine until the hysteresis loop closes
(Masing behavior), and optionally carries analytic force derivatives with
respect to the harmonic coefficients of the inputs for Jacobian assembly.

Sign conventions: positive relative normal displacement means penetration;
forces are restoring terms on the left-hand side of the balance equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PHASE_STICK = 0
PHASE_SLIP = 1
PHASE_SEPARATION = 2

PHASE_NAMES = {PHASE_STICK: "stick", PHASE_SLIP: "slip", PHASE_SEPARATION: "separation"}

#: Closed-loop state mismatch accepted as periodic (absolute, per component).
CLOSURE_ATOL = 1e-10

DEFAULT_WARMUP_CAP = 10


class JenkinsConvergenceError(RuntimeError):
    """Periodicity not reached within the warm-up cap."""

    def __init__(self, mismatch: float, cap: int, element: int | None = None):
        self.mismatch = mismatch
        self.cap = cap
        self.element = element
        where = "" if element is None else f" (element {element})"
        super().__init__(
            f"hysteresis did not close after {cap} warm-up periods{where}: "
            f"state mismatch {mismatch:.3e}"
        )


@dataclass(frozen=True)
class ContactParams:
    """Per-element Jenkins parameters (already scaled by tributary area)."""

    kt: float
    kn: float
    mu: float

    def __post_init__(self):
        if self.kt <= 0 or self.kn <= 0:
            raise ValueError("contact stiffnesses must be strictly positive")
        if self.mu < 0:
            raise ValueError("friction coefficient must be non-negative")


@dataclass
class JenkinsState:
    """Hysteresis memory of one element at one sample."""

    stick_anchor_disp: float
    stick_anchor_force: float
    slip_sign: float
    phase: int


@dataclass
class PeriodTrace:
    """Forces, tangents and phases of one element over one closed period."""

    n_samples: int
    rel_disp_t: np.ndarray
    rel_disp_n: np.ndarray
    force_t: np.ndarray
    force_n: np.ndarray
    tangent_tt: np.ndarray
    tangent_nn: np.ndarray
    tangent_tn: np.ndarray
    phases: np.ndarray
    warmup_used: int
    state_mismatch: float
    start_state: JenkinsState


def normal_force(du_n, kn):
    """Unilateral spring: ``kn*du_n`` under penetration, zero when separated."""
    du_n = np.asarray(du_n, dtype=float)
    return np.where(du_n > 0.0, kn * du_n, 0.0)


def march_batch(
    du_t: np.ndarray,
    du_n: np.ndarray,
    kt: np.ndarray,
    kn: np.ndarray,
    mu: np.ndarray,
    warmup_cap: int = DEFAULT_WARMUP_CAP,
    basis: np.ndarray | None = None,
    raise_on_failure: bool = True,
):
    """March a batch of elements through warm-up periods until closure.

    Parameters
    ----------
    du_t, du_n : (p, N)
        Relative tangential/normal displacement samples of one period.
    kt, kn, mu : (p,)
        Element parameters.
    basis : (N, C) or None
        Harmonic basis rows; when given, the returned dict also carries the
        running derivatives of ``f_t`` w.r.t. the C tangential/normal input
        coefficients and of ``f_n`` w.r.t. the normal coefficients.

    Returns
    -------
    dict with keys ``f_t``, ``f_n``, ``phases`` (p, N); ``warmup_used``,
    ``state_mismatch``; and with ``basis``: ``dft_dt``, ``dft_dn``,
    ``dfn_dn`` of shape (p, N, C).
    """
    du_t = np.atleast_2d(np.asarray(du_t, dtype=float))
    du_n = np.atleast_2d(np.asarray(du_n, dtype=float))
    p, N = du_t.shape
    if N < 4:
        raise ValueError("need at least 4 samples per period")
    kt = np.broadcast_to(np.asarray(kt, dtype=float), (p,))
    kn = np.broadcast_to(np.asarray(kn, dtype=float), (p,))
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (p,))

    want_jac = basis is not None
    C = basis.shape[1] if want_jac else 0

    pen = du_n > 0.0
    f_n = np.where(pen, kn[:, None] * du_n, 0.0)
    slip_lim = mu[:, None] * f_n

    f_t = np.zeros((p, N))
    phases = np.full((p, N), PHASE_SEPARATION, dtype=np.int8)
    if want_jac:
        dft_dt = np.zeros((p, N, C))
        dft_dn = np.zeros((p, N, C))

    # Zero-anchor stick start: a fully stuck element reproduces the linear
    # spring f_t = kt*du_t exactly, so the stuck limit of the AFT force is
    # linear in the coefficients.
    prev_f = np.zeros(p)
    prev_x = np.zeros(p)
    prev_contact = np.ones(p, dtype=bool)
    prev_B = np.zeros(C) if want_jac else None
    if want_jac:
        prev_dft = np.zeros((p, C))
        prev_dfn = np.zeros((p, C))

    anchor_x = np.zeros(p)
    anchor_f = np.zeros(p)
    zeta = np.ones(p)

    prev_trace = None
    mismatch = np.inf
    warmup_used = warmup_cap
    for period in range(warmup_cap):
        for i in range(N):
            x = du_t[:, i]
            contact = pen[:, i]
            lim = slip_lim[:, i]
            trial = prev_f + kt * (x - prev_x)
            sign_trial = np.sign(trial)
            sticking = contact & prev_contact & (np.abs(trial) <= lim)
            slipping = contact & prev_contact & (np.abs(trial) > lim)
            recontact = contact & ~prev_contact

            f = np.where(sticking, trial, 0.0)
            f = np.where(slipping, lim * sign_trial, f)
            # recontact: anchor with zero force at the current displacement
            f_t[:, i] = f
            ph = np.full(p, PHASE_SEPARATION, dtype=np.int8)
            ph[sticking | recontact] = PHASE_STICK
            ph[slipping] = PHASE_SLIP
            phases[:, i] = ph

            zeta = np.where(slipping, sign_trial, zeta)
            fresh_stick = recontact | (sticking & (phases[:, i - 1] != PHASE_STICK))
            anchor_x = np.where(fresh_stick, x, anchor_x)
            anchor_f = np.where(fresh_stick, f, anchor_f)

            if want_jac:
                B = basis[i]
                dft = np.zeros((p, C))
                dfn = np.zeros((p, C))
                dft[sticking] = prev_dft[sticking] + kt[sticking, None] * (B - prev_B)
                dfn[sticking] = prev_dfn[sticking]
                if slipping.any():
                    coef = (mu * kn * sign_trial)[slipping]
                    dfn[slipping] = coef[:, None] * B
                dft_dt[:, i] = dft
                dft_dn[:, i] = dfn
                prev_dft = dft
                prev_dfn = dfn
                prev_B = B

            prev_f = f
            prev_x = x
            prev_contact = contact

        if prev_trace is not None:
            mismatch = float(np.max(np.abs(f_t - prev_trace)))
            if mismatch <= CLOSURE_ATOL * max(1.0, float(np.max(np.abs(f_t)))):
                warmup_used = period + 1
                break
        prev_trace = f_t.copy()
    else:
        if raise_on_failure:
            per_elem = np.max(np.abs(f_t - prev_trace), axis=1)
            raise JenkinsConvergenceError(
                mismatch, warmup_cap, element=int(np.argmax(per_elem))
            )

    out = {
        "f_t": f_t,
        "f_n": f_n,
        "phases": phases,
        "warmup_used": warmup_used,
        "state_mismatch": mismatch,
        "zeta": zeta,
        "anchor_x": anchor_x,
        "anchor_f": anchor_f,
    }
    if want_jac:
        out["dft_dt"] = dft_dt
        out["dft_dn"] = dft_dn
        dfn_dn = np.where(pen[:, :, None], kn[:, None, None] * basis[None, :, :], 0.0)
        out["dfn_dn"] = dfn_dn
    return out


def march_period(
    du_t: np.ndarray,
    du_n: np.ndarray,
    params: ContactParams,
    warmup_periods: int = DEFAULT_WARMUP_CAP,
) -> PeriodTrace:
    """March one element for one period of periodic motion until closure."""
    du_t = np.asarray(du_t, dtype=float)
    du_n = np.asarray(du_n, dtype=float)
    if du_t.shape != du_n.shape or du_t.ndim != 1:
        raise ValueError("du_t and du_n must be 1-D arrays of equal length")
    res = march_batch(
        du_t[None, :], du_n[None, :],
        np.array([params.kt]), np.array([params.kn]), np.array([params.mu]),
        warmup_cap=warmup_periods,
    )
    phases = res["phases"][0]
    stick = phases == PHASE_STICK
    pen = du_n > 0.0
    slip = phases == PHASE_SLIP
    tangent_tt = np.where(stick, params.kt, 0.0)
    tangent_nn = np.where(pen, params.kn, 0.0)
    tangent_tn = np.where(slip, params.mu * params.kn * res["zeta"][0], 0.0)
    start_state = JenkinsState(
        stick_anchor_disp=float(res["anchor_x"][0]),
        stick_anchor_force=float(res["anchor_f"][0]),
        slip_sign=float(res["zeta"][0]),
        phase=int(phases[0]),
    )
    return PeriodTrace(
        n_samples=du_t.size,
        rel_disp_t=du_t,
        rel_disp_n=du_n,
        force_t=res["f_t"][0],
        force_n=res["f_n"][0],
        tangent_tt=tangent_tt,
        tangent_nn=tangent_nn,
        tangent_tn=tangent_tn,
        phases=phases,
        warmup_used=res["warmup_used"],
        state_mismatch=res["state_mismatch"],
        start_state=start_state,
    )


def _loop_integral(force: np.ndarray, disp: np.ndarray) -> float:
    """Cyclic trapezoidal ``oint f d(disp)`` over one period."""
    df = np.roll(disp, -1) - disp
    fm = 0.5 * (np.roll(force, -1) + force)
    return float(np.sum(fm * df))


def dissipation(trace: PeriodTrace, omega: float = 0.0) -> float:
    """Energy dissipated per cycle by the element (loop integral, J).

    The Jenkins force is rate independent, so the excitation frequency does
    not enter; it is accepted to mirror the sweep call sites.
    """
    return _loop_integral(trace.force_t, trace.rel_disp_t) + _loop_integral(
        trace.force_n, trace.rel_disp_n
    )
