"""Finite Fourier operator F_c on [-1, 1] and its truncated inverse.

Inner products against the prolate functions are taken with the trapezoid
rule on a uniform 1024-point grid; coarser inputs are linearly interpolated
onto it first.  Oversampling is required because the integrands oscillate on
the scale 1/c.
"""

import numpy as np
from dataclasses import dataclass

from .errors import ValidationError
from .pswf import PSWFBasis

__all__ = [
    "SampledFunction1D",
    "trapezoid_weights",
    "oversample_linear",
    "apply_Fc",
    "inverse_coefficients",
    "invert_Fc_truncated",
    "l2_norm",
]

OVERSAMPLE_N = 1024
MIN_SAMPLES_PER_OSCILLATION = 8.0

_INTERVAL_TOL = 1e-12


@dataclass(eq=False)
class SampledFunction1D:
    """Complex samples on the uniform grid a + k (b - a) / (n - 1)."""

    a: float
    b: float
    values: np.ndarray

    def __post_init__(self):
        self.a = float(self.a)
        self.b = float(self.b)
        self.values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if self.values.ndim != 1:
            raise ValidationError("values must be one-dimensional")
        if self.values.size < 2:
            raise ValidationError("at least two samples are required")
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValidationError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValidationError(f"need a < b, got a={self.a}, b={self.b}")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    def with_values(self, values) -> "SampledFunction1D":
        return SampledFunction1D(self.a, self.b, values)

    def copy(self) -> "SampledFunction1D":
        return SampledFunction1D(self.a, self.b, self.values.copy())


def trapezoid_weights(n: int, dx: float) -> np.ndarray:
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def l2_norm(f: SampledFunction1D) -> float:
    """Trapezoid-rule L2 norm over the sampling interval."""
    w = trapezoid_weights(f.n, f.dx)
    return float(np.sqrt(np.sum(w * np.abs(f.values) ** 2).real))


def interp_complex(x, xp, fp) -> np.ndarray:
    """np.interp for complex ordinates."""
    fp = np.asarray(fp)
    if np.iscomplexobj(fp):
        return np.interp(x, xp, fp.real) + 1j * np.interp(x, xp, fp.imag)
    return np.interp(x, xp, fp).astype(complex)


def _require_unit_interval(f: SampledFunction1D, what: str) -> None:
    if abs(f.a + 1.0) > _INTERVAL_TOL or abs(f.b - 1.0) > _INTERVAL_TOL:
        raise ValidationError(
            f"{what} must be sampled on [-1, 1], got [{f.a}, {f.b}]"
        )


def oversample_linear(f: SampledFunction1D, target_n: int) -> SampledFunction1D:
    """Resample onto ``target_n`` uniform nodes by linear interpolation.

    Exact at nodes shared with the source grid; ``target_n`` must not be
    smaller than the source resolution.
    """
    target_n = int(target_n)
    if target_n < f.n:
        raise ValidationError(
            f"target_n={target_n} is smaller than the source sample count {f.n}"
        )
    if target_n == f.n:
        return f.copy()
    xs = np.linspace(f.a, f.b, target_n)
    return SampledFunction1D(f.a, f.b, interp_complex(xs, f.grid, f.values))


def _oversampled(f: SampledFunction1D) -> SampledFunction1D:
    return oversample_linear(f, max(OVERSAMPLE_N, f.n))


def _check_resolution(c: float, n: int) -> None:
    # samples per oscillation of exp(icxy) at |x| = 1
    spo = np.pi * (n - 1) / c
    if spo < MIN_SAMPLES_PER_OSCILLATION:
        raise ValidationError(
            f"grid too coarse for c={c}: {spo:.1f} samples per oscillation "
            f"after oversampling (need >= {MIN_SAMPLES_PER_OSCILLATION})"
        )


def apply_Fc(basis: PSWFBasis, f: SampledFunction1D,
             out_grid=None) -> SampledFunction1D:
    """Apply F_c[f](x) = int_{-1}^{1} exp(i c x y) f(y) dy.

    The integral is evaluated with trapezoid quadrature on the oversampled
    grid; output samples are returned at the input nodes unless ``out_grid``
    is given.
    """
    _require_unit_interval(f, "apply_Fc input")
    fo = _oversampled(f)
    _check_resolution(basis.c, fo.n)
    y = fo.grid
    w = trapezoid_weights(fo.n, fo.dx)
    xs = f.grid if out_grid is None else np.asarray(out_grid, dtype=float)
    kernel = np.exp(1j * basis.c * xs[:, None] * y[None, :])
    out = kernel @ (w * fo.values)
    return SampledFunction1D(xs[0], xs[-1], out)


def inverse_coefficients(basis: PSWFBasis, g: SampledFunction1D,
                         m: int) -> np.ndarray:
    """Prolate coefficients <psi_j, g> / mu_j of the rank-(m+1) inverse."""
    _require_unit_interval(g, "truncated-inverse input")
    m = int(m)
    if not 0 <= m <= basis.m_max:
        raise ValidationError(
            f"truncation index m={m} outside [0, m_max={basis.m_max}] "
            f"for c={basis.c}"
        )
    go = _oversampled(g)
    _check_resolution(basis.c, go.n)
    w = trapezoid_weights(go.n, go.dx)
    psi_tab = basis.psi_matrix(go.grid)[: m + 1]
    return (psi_tab @ (w * go.values)) / basis.mu[: m + 1]


def invert_Fc_truncated(basis: PSWFBasis, g: SampledFunction1D, m: int,
                        out_grid=None) -> SampledFunction1D:
    """Rank-(m+1) regularized inverse of F_c.

    Returns sum_{j<=m} mu_j^{-1} psi_j(y) <psi_j, g>; the truncation index m
    is the regularization parameter and must not exceed basis.m_max, beyond
    which 1/mu_j amplification has no double-precision headroom.
    """
    coeffs = inverse_coefficients(basis, g, m)
    ys = g.grid if out_grid is None else np.asarray(out_grid, dtype=float)
    psi_out = basis.psi_matrix(ys)[: int(m) + 1]
    out = psi_out.T @ coeffs
    return SampledFunction1D(ys[0], ys[-1], out)
