"""Harmonic-vector algebra and the discrete Fourier transform pair.

A multi-harmonic vector collects the Fourier coefficients of every spatial
DOF in the fixed block order ``[U0, U1c, U1s, ..., UHc, UHs]``, each block of
length ``n``.  Component index ``0`` is the static block, component ``2j-1``
the cosine and ``2j`` the sine block of harmonic ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def n_components(H: int) -> int:
    """Number of coefficient blocks for H harmonics (static + cos/sin pairs)."""
    return 2 * H + 1


def cos_comp(j: int) -> int:
    """Component index of the cosine block of harmonic j >= 1."""
    return 2 * j - 1


def sin_comp(j: int) -> int:
    """Component index of the sine block of harmonic j >= 1."""
    return 2 * j


def harmonic_of_comp(b: int) -> int:
    """Harmonic number a component index belongs to (0 for the static block)."""
    return (b + 1) // 2


def comp_label(b: int) -> str:
    """Human-readable label such as ``'h0'``, ``'h1c'``, ``'h2s'``."""
    if b == 0:
        return "h0"
    j = harmonic_of_comp(b)
    return f"h{j}{'c' if b == cos_comp(j) else 's'}"


@dataclass
class HarmonicVector:
    """Fourier coefficients of an n-DOF periodic field up to harmonic H.

    ``data`` is the flat vector of length ``n*(2H+1)`` in component-major
    layout; ``comps`` exposes it as a ``(2H+1, n)`` view.
    """

    n: int
    H: int
    data: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        size = self.n * n_components(self.H)
        if self.data is None:
            self.data = np.zeros(size)
        else:
            self.data = np.asarray(self.data, dtype=float).reshape(size)

    @property
    def comps(self) -> np.ndarray:
        """(2H+1, n) view; row b is coefficient block b."""
        return self.data.reshape(n_components(self.H), self.n)

    @property
    def static(self) -> np.ndarray:
        return self.comps[0]

    def cos(self, j: int) -> np.ndarray:
        return self.comps[cos_comp(j)]

    def sin(self, j: int) -> np.ndarray:
        return self.comps[sin_comp(j)]

    def copy(self) -> "HarmonicVector":
        return HarmonicVector(self.n, self.H, self.data.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    @classmethod
    def zeros(cls, n: int, H: int) -> "HarmonicVector":
        return cls(n, H)

    def dof_coeffs(self, dof: int) -> np.ndarray:
        """(2H+1,) coefficients of a single DOF."""
        return self.comps[:, dof].copy()


def synthesize(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Evaluate truncated Fourier series at N uniform samples over one period.

    Parameters
    ----------
    coeffs : (2H+1, ...) array
        Component-major coefficients; trailing axes are independent signals.
    N : int
        Sample count, ``N >= 2H+2`` so the inverse FFT is exact.

    Returns
    -------
    (N, ...) array of samples at ``t_i = i*T/N``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    H = (coeffs.shape[0] - 1) // 2
    if coeffs.shape[0] != 2 * H + 1:
        raise ValueError("leading axis must have odd length 2H+1")
    if N < 2 * H + 2:
        raise ValueError(f"N={N} too small for H={H} (need N >= 2H+2)")
    spec = np.zeros((N // 2 + 1,) + coeffs.shape[1:], dtype=complex)
    spec[0] = N * coeffs[0]
    for j in range(1, H + 1):
        spec[j] = 0.5 * N * (coeffs[cos_comp(j)] - 1j * coeffs[sin_comp(j)])
    return np.fft.irfft(spec, n=N, axis=0)


def analyze(samples: np.ndarray, H: int) -> np.ndarray:
    """Fourier coefficients of sampled signals: mean plus 2/T-scaled cos/sin.

    Parameters
    ----------
    samples : (N, ...) array
        One full period sampled at ``t_i = i*T/N``.
    H : int
        Harmonic cutoff, ``N >= 2H+2``.

    Returns
    -------
    (2H+1, ...) coefficient array, component-major.
    """
    samples = np.asarray(samples, dtype=float)
    N = samples.shape[0]
    if N < 2 * H + 2:
        raise ValueError(f"N={N} too small for H={H} (need N >= 2H+2)")
    spec = np.fft.rfft(samples, axis=0)
    out = np.zeros((2 * H + 1,) + samples.shape[1:])
    out[0] = spec[0].real / N
    for j in range(1, H + 1):
        out[cos_comp(j)] = 2.0 * spec[j].real / N
        out[sin_comp(j)] = -2.0 * spec[j].imag / N
    return out


def synthesize_time(U: HarmonicVector, N: int) -> np.ndarray:
    """Time samples (N, n) of the displacement ansatz for one period."""
    return synthesize(U.comps, N)


def fourier_analyze(samples: np.ndarray, H: int) -> np.ndarray:
    """Alias of :func:`analyze` matching the time-marching vocabulary."""
    return analyze(samples, H)


def basis_rows(H: int, N: int) -> np.ndarray:
    """(N, 2H+1) matrix B with ``signal(t_i) = B @ coeffs`` for scalar signals."""
    i = np.arange(N)
    B = np.empty((N, 2 * H + 1))
    B[:, 0] = 1.0
    for j in range(1, H + 1):
        ang = 2.0 * np.pi * j * i / N
        B[:, cos_comp(j)] = np.cos(ang)
        B[:, sin_comp(j)] = np.sin(ang)
    return B


def derivative_coeffs(coeffs: np.ndarray, omega: float, order: int = 1) -> np.ndarray:
    """Coefficients of the time derivative of a harmonic signal.

    First derivative maps ``(c_j, s_j) -> (j*omega*s_j, -j*omega*c_j)``;
    applied ``order`` times.  Static block differentiates to zero.
    """
    out = np.array(coeffs, dtype=float, copy=True)
    H = (out.shape[0] - 1) // 2
    for _ in range(order):
        new = np.zeros_like(out)
        for j in range(1, H + 1):
            w = j * omega
            new[cos_comp(j)] = w * out[sin_comp(j)]
            new[sin_comp(j)] = -w * out[cos_comp(j)]
        out = new
    return out


def single_dof_amplitude(coeffs: np.ndarray, N: int = 256) -> float:
    """Peak deviation from the static value over one period for one DOF.

    ``coeffs`` is the (2H+1,) coefficient vector of a scalar signal.  The
    response metric of a frequency sweep normalizes this by the excitation
    amplitude.
    """
    c = np.array(coeffs, dtype=float, copy=True)
    c[0] = 0.0
    trace = synthesize(c, N)
    return float(np.max(np.abs(trace)))
