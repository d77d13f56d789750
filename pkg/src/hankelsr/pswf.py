"""Classical prolate spheroidal wave functions on [-1, 1].

The family ``psi_0, psi_1, ...`` for a bandwidth ``c > 0`` diagonalizes the
finite Fourier operator

    (F_c f)(x) = int_{-1}^{1} exp(i c x y) f(y) dy,
    F_c psi_j = mu_j psi_j,      mu_j = i**j * |mu_j|,

with ``|mu_j|`` strictly decreasing in ``j``.  The functions are computed by
the Legendre-Galerkin method: each ``psi_j`` is expanded in orthonormal
Legendre polynomials, where the prolate differential operator

    L = d/dx (1 - x^2) d/dx - c^2 x^2

is a symmetric matrix coupling only coefficients of equal parity two indices
apart.  Splitting by parity yields two real symmetric tridiagonal
eigenproblems which are solved with LAPACK.

The Fourier eigenvalues are recovered from the coefficients through

    mu_j * beta_k = 2 i^k sqrt(k + 1/2) * int j_k(c y) psi_j(y) dy,

evaluated at the dominant coefficient ``k = argmax |beta_k|`` (``j_k`` is the
spherical Bessel function).  Unlike pointwise quadrature of ``F_c psi_j``,
this ratio keeps full relative accuracy deep into the plunge region where
``|mu_j|`` is many orders of magnitude below ``|mu_0|``, because the
integrand is uniformly small rather than the result of cancellation.  The
phase is fixed exactly to ``i**j``.
"""

import math
import os

import numpy as np
from dataclasses import dataclass, field
from numpy.polynomial.legendre import legder, leggauss, legval
from scipy.linalg import eigh_tridiagonal
from scipy.special import spherical_jn

from .errors import NumericalError, ValidationError

__all__ = [
    "PSWFBasis",
    "build_basis",
    "eval_psi",
    "compute_mu",
    "load_or_build",
]

CACHE_FORMAT_VERSION = 1

# Trailing Legendre coefficient of psi_{max_index} must drop below this
# before the Galerkin truncation is accepted.
TAIL_TOL = 1e-14

# Indices with |mu_j| below this fraction of |mu_0| are unusable in double
# precision (1/mu_j amplification exceeds the headroom) and are excluded
# from m_max.
MU_KEEP_REL = 1e-14

_GALERKIN_DIM_CAP = 4096

# i**j for j mod 4, kept exact.
_IPOW = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])


@dataclass(eq=False)
class PSWFBasis:
    """Prolate basis for one bandwidth.

    Attributes
    ----------
    c : float
        Bandwidth parameter.
    max_index : int
        Largest computed index ``j``.
    legendre_coeffs : ndarray, shape (max_index + 1, K)
        Row ``j`` holds the coefficients of ``psi_j`` in the orthonormal
        Legendre basis; entries of parity opposite to ``j`` are exactly zero.
    chi : ndarray, shape (max_index + 1,)
        Eigenvalues of the prolate differential operator, ascending.
    mu : complex ndarray, shape (max_index + 1,)
        Eigenvalues of the finite Fourier operator, ``mu_j = i**j |mu_j|``.
    """

    c: float
    max_index: int
    legendre_coeffs: np.ndarray
    chi: np.ndarray
    mu: np.ndarray
    _scaled_coeffs: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.legendre_coeffs = np.asarray(self.legendre_coeffs, dtype=float)
        self.chi = np.asarray(self.chi, dtype=float)
        self.mu = np.asarray(self.mu, dtype=complex)
        # Coefficients against unnormalized P_k, ready for Clenshaw.
        k = np.arange(self.legendre_coeffs.shape[1])
        self._scaled_coeffs = self.legendre_coeffs * np.sqrt(k + 0.5)

    @property
    def galerkin_dim(self) -> int:
        return self.legendre_coeffs.shape[1]

    @property
    def mu_abs(self) -> np.ndarray:
        return np.abs(self.mu)

    @property
    def m_max(self) -> int:
        """Largest usable truncation index: |mu_j| >= 1e-14 |mu_0|."""
        keep = self.mu_abs >= MU_KEEP_REL * self.mu_abs[0]
        return int(np.nonzero(keep)[0][-1])

    def psi(self, j: int, xs) -> np.ndarray:
        return eval_psi(self, j, xs)

    def psi_matrix(self, xs) -> np.ndarray:
        """All psi_j evaluated at xs, shape (max_index + 1, len(xs))."""
        xs = _check_points(xs)
        return np.atleast_2d(legval(xs, self._scaled_coeffs.T))

    def psi_deriv_matrix(self, xs) -> np.ndarray:
        """All psi_j' evaluated at xs (exact derivative of the expansion)."""
        xs = _check_points(xs)
        return np.atleast_2d(legval(xs, legder(self._scaled_coeffs.T, axis=0)))

    def save(self, path) -> None:
        """Write the basis to an .npz file (bit-exact round trip)."""
        np.savez(
            path,
            format_version=CACHE_FORMAT_VERSION,
            c=self.c,
            max_index=self.max_index,
            legendre_coeffs=self.legendre_coeffs,
            chi=self.chi,
            mu=self.mu,
        )

    @classmethod
    def load(cls, path) -> "PSWFBasis":
        with np.load(path) as data:
            version = int(data["format_version"])
            if version != CACHE_FORMAT_VERSION:
                raise ValidationError(
                    f"basis cache format {version} not supported "
                    f"(expected {CACHE_FORMAT_VERSION})"
                )
            return cls(
                c=float(data["c"]),
                max_index=int(data["max_index"]),
                legendre_coeffs=data["legendre_coeffs"],
                chi=data["chi"],
                mu=data["mu"],
            )


def _operator_bands(c: float, dim: int, dtype=float):
    """Diagonal and second off-diagonal of -L in the orthonormal basis."""
    k = np.arange(dim, dtype=dtype)
    c2 = dtype(c) * dtype(c)
    diag = k * (k + 1) + c2 * (2 * k * (k + 1) - 1) / ((2 * k + 3) * (2 * k - 1))
    kk = k[: dim - 2]
    off2 = (
        c2
        * (kk + 1)
        * (kk + 2)
        / ((2 * kk + 3) * np.sqrt((2 * kk + 1) * (2 * kk + 5)))
    )
    return diag, off2


def _tridiag_shifted_solve(d, e, shift, rhs):
    """Solve (T - shift I) x = rhs for symmetric tridiagonal T, with partial
    pivoting, in the dtype of the inputs (used with longdouble)."""
    n = d.size
    a = d - shift
    b = np.zeros(n, dtype=d.dtype)
    b[:-1] = e
    cc = np.zeros(n, dtype=d.dtype)
    x = rhs.copy()
    tiny = np.finfo(d.dtype).tiny * 16 + np.finfo(d.dtype).eps * np.max(np.abs(a))
    for i in range(n - 1):
        low = e[i]
        if abs(low) > abs(a[i]):
            a_i, b_i, c_i, x_i = a[i], b[i], cc[i], x[i]
            a[i], b[i], cc[i], x[i] = low, a[i + 1], b[i + 1], x[i + 1]
            low, a[i + 1], b[i + 1], x[i + 1] = a_i, b_i, c_i, x_i
        if a[i] == 0:
            a[i] = tiny
        m = low / a[i]
        a[i + 1] -= m * b[i]
        b[i + 1] -= m * cc[i]
        x[i + 1] -= m * x[i]
    if a[-1] == 0:
        a[-1] = tiny
    x[-1] /= a[-1]
    if n > 1:
        x[-2] = (x[-2] - b[-2] * x[-1]) / a[-2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - b[i] * x[i + 1] - cc[i] * x[i + 2]) / a[i]
    return x


def _rayleigh(d, e, z):
    tz = d * z
    tz[:-1] += e * z[1:]
    tz[1:] += e * z[:-1]
    return float(np.dot(z, tz))


def _polish_eigenpair(d_ld, e_ld, chi, vec):
    """Two inverse-iteration steps in extended precision.

    LAPACK eigenvectors carry parasitic components of other modes at the
    1e-13 level; applied to the Fourier operator these are amplified by
    mu_i / mu_j and would swamp the eigen-relation deep in the plunge
    region.  Extended-precision refinement pushes them to the float64
    storage floor.
    """
    z = vec.astype(np.longdouble)
    chi_ld = np.longdouble(chi)
    for _ in range(2):
        z = _tridiag_shifted_solve(d_ld, e_ld, chi_ld, z)
        z /= np.sqrt(np.dot(z, z))
        chi_ld = np.longdouble(_rayleigh(d_ld, e_ld, z))
    return float(chi_ld), z.astype(float)


def _solve_parity(c: float, diag, off2, parity: int, count: int, dim: int):
    """Lowest eigenpairs of one parity block (indices parity, parity+2, ...),
    refined by extended-precision inverse iteration."""
    idx = np.arange(parity, dim, 2)
    d = diag[idx]
    e = off2[idx[:-1]]
    try:
        vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(
            f"eigensolver failed on parity-{parity} block (first index {parity})"
        ) from exc
    diag_ld, off2_ld = _operator_bands(c, dim, dtype=np.longdouble)
    d_ld = diag_ld[idx]
    e_ld = off2_ld[idx[:-1]]
    for i in range(count):
        vals[i], vecs[:, i] = _polish_eigenpair(d_ld, e_ld, vals[i], vecs[:, i])
    return idx, vals, vecs


def build_basis(c: float, max_index: int) -> PSWFBasis:
    """Construct the prolate basis for bandwidth ``c`` up to ``max_index``.

    The Galerkin dimension starts at ``2*max_index + ceil(c) + 40`` and grows
    until the trailing Legendre coefficient of ``psi_{max_index}`` is below
    1e-14, so every returned function is fully resolved.  Functions are
    normalized to unit L2 norm on [-1, 1] with ``psi_j(1) > 0``.

    Parameters
    ----------
    c : float
        Bandwidth, must be positive.
    max_index : int
        Largest index to compute, must be >= 0.

    Returns
    -------
    PSWFBasis
    """
    if not (np.isfinite(c) and c > 0):
        raise ValidationError(f"bandwidth c must be positive and finite, got {c}")
    max_index = int(max_index)
    if max_index < 0:
        raise ValidationError(f"max_index must be >= 0, got {max_index}")

    n_even = max_index // 2 + 1
    n_odd = (max_index + 1) // 2

    dim = 2 * max_index + math.ceil(c) + 40
    while True:
        diag, off2 = _operator_bands(c, dim)
        coeffs = np.zeros((max_index + 1, dim))
        chi = np.empty(max_index + 1)

        idx_e, vals_e, vecs_e = _solve_parity(c, diag, off2, 0, n_even, dim)
        for i in range(n_even):
            coeffs[2 * i, idx_e] = vecs_e[:, i]
            chi[2 * i] = vals_e[i]
        if n_odd > 0:
            idx_o, vals_o, vecs_o = _solve_parity(c, diag, off2, 1, n_odd, dim)
            for i in range(n_odd):
                coeffs[2 * i + 1, idx_o] = vecs_o[:, i]
                chi[2 * i + 1] = vals_o[i]

        # Value at x = 1 is sum_k beta_k sqrt(k + 1/2); make it positive.
        at_one = coeffs @ np.sqrt(np.arange(dim) + 0.5)
        flip = at_one < 0
        coeffs[flip] *= -1.0

        tail = np.max(np.abs(coeffs[max_index, -2:]))
        if tail <= TAIL_TOL:
            break
        if dim >= _GALERKIN_DIM_CAP:
            raise NumericalError(
                f"Galerkin truncation did not converge for index {max_index} "
                f"(tail {tail:.2e} at dimension {dim})"
            )
        dim = min(_GALERKIN_DIM_CAP, dim + max(32, dim // 2))

    mu = _fourier_eigenvalues(c, coeffs)
    return PSWFBasis(c=float(c), max_index=max_index, legendre_coeffs=coeffs,
                     chi=chi, mu=mu)


def _fourier_eigenvalue_from_coeffs(c: float, coeffs_j: np.ndarray, j: int,
                                    x_gl: np.ndarray, w_gl: np.ndarray) -> complex:
    """mu_j from one coefficient row via the dominant-coefficient ratio."""
    k_star = int(np.argmax(np.abs(coeffs_j)))
    beta = coeffs_j[k_star]
    if abs(beta) < 1e-8:
        raise NumericalError(
            f"degenerate coefficient vector for index {j}: max |beta| = {abs(beta):.2e}"
        )
    k = np.arange(coeffs_j.size)
    psi_gl = legval(x_gl, coeffs_j * np.sqrt(k + 0.5))
    proj = np.dot(w_gl * spherical_jn(k_star, c * x_gl), psi_gl)
    magnitude = abs(2.0 * math.sqrt(k_star + 0.5) * proj / beta)
    return _IPOW[j % 4] * magnitude


def _fourier_eigenvalues(c: float, coeffs: np.ndarray) -> np.ndarray:
    n_j, dim = coeffs.shape
    x_gl, w_gl = leggauss(dim + 64)
    mu = np.empty(n_j, dtype=complex)
    for j in range(n_j):
        mu[j] = _fourier_eigenvalue_from_coeffs(c, coeffs[j], j, x_gl, w_gl)
    return mu


def compute_mu(basis: PSWFBasis, j: int) -> complex:
    """Recompute the Fourier eigenvalue mu_j from the stored coefficients.

    Matches ``basis.mu[j]`` bit for bit; exposed so the eigenvalue path can
    be exercised independently of construction.
    """
    j = _check_index(basis, j)
    x_gl, w_gl = leggauss(basis.galerkin_dim + 64)
    return _fourier_eigenvalue_from_coeffs(
        basis.c, basis.legendre_coeffs[j], j, x_gl, w_gl
    )


def _check_index(basis: PSWFBasis, j: int) -> int:
    j = int(j)
    if not 0 <= j <= basis.max_index:
        raise ValidationError(
            f"index {j} out of range [0, {basis.max_index}]"
        )
    return j


def _check_points(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.size and np.max(np.abs(xs)) > 1 + 1e-12:
        raise ValidationError("evaluation points must lie in [-1, 1]")
    return np.clip(xs, -1.0, 1.0)


def eval_psi(basis: PSWFBasis, j: int, xs) -> np.ndarray:
    """Evaluate psi_j at points in [-1, 1] (Clenshaw on the Legendre series)."""
    j = _check_index(basis, j)
    xs = _check_points(xs)
    return legval(xs, basis._scaled_coeffs[j])


def _cache_filename(c: float, max_index: int) -> str:
    return f"pswf_c{c:.17g}_j{int(max_index)}.npz"


def load_or_build(c: float, max_index: int, cache_dir=None) -> PSWFBasis:
    """Return a basis, reusing a cache file when available.

    Cache hits reproduce bit-identical coefficients and eigenvalues since
    the .npz round trip preserves every float64 exactly.
    """
    if cache_dir is None:
        return build_basis(c, max_index)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, _cache_filename(c, max_index))
    if os.path.exists(path):
        basis = PSWFBasis.load(path)
        if basis.c == c and basis.max_index == int(max_index):
            return basis
    basis = build_basis(c, max_index)
    basis.save(path)
    return basis
