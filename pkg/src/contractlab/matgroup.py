"""Dense small-matrix kernel and structure theory of the special linear group.

Every operation accepts numpy arrays of shape (..., n, n) and broadcasts over
leading axes; the grid sweeps in the experiment harness rely on this batching
instead of compiled extensions.

Conventions fixed here and used package-wide:

* the compact factor is the rotation group SO(n), the flat factor is the space
  of symmetric traceless matrices (the "symmetric part");
* the invariant form is ``form_B(x, y) = trace(x_p y_p)`` on symmetric parts,
  so ``diag(1, -1)`` has squared length 2;
* tolerance ladder: 1e-12 for algebraic identities, 1e-9 for reconstructions,
  1e-6 for finite-difference geometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TOL_ALGEBRAIC = 1e-12
TOL_RECONSTRUCTION = 1e-9
TOL_FINITE_DIFF = 1e-6

# Norm beyond which the exponential refuses to run (entries would dwarf the
# representable range once squared); accuracy 1e-12 is guaranteed for norms
# up to 10, see mat_exp.
MAT_EXP_NORM_LIMIT = 300.0

_TAYLOR_ORDER = 18

# 2x2 basis: diagonal, symmetric off-diagonal, rotation generator.
BASIS_H = np.array([[1.0, 0.0], [0.0, -1.0]])
BASIS_X = np.array([[0.0, 1.0], [1.0, 0.0]])
GEN_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def mat_exp(x):
    """Matrix exponential by scaling-and-squaring over a degree-18 Taylor core.

    Batched over leading axes. Relative accuracy is below 1e-12 for Frobenius
    norms up to 10; inputs with norm beyond MAT_EXP_NORM_LIMIT raise
    OverflowError since squaring would leave the representable range.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != x.shape[-2]:
        raise ValueError("mat_exp requires square matrices")
    if not np.all(np.isfinite(x)):
        raise ValueError("mat_exp requires finite entries")
    norm = np.linalg.norm(x, axis=(-2, -1))
    top = float(norm.max()) if norm.size else 0.0
    if top > MAT_EXP_NORM_LIMIT:
        raise OverflowError(
            f"matrix norm {top:.4g} exceeds the exponential range limit "
            f"{MAT_EXP_NORM_LIMIT:g}"
        )
    squarings = 0
    if top > 0.5:
        squarings = int(np.ceil(np.log2(top / 0.5)))
    y = x / (2.0 ** squarings)
    n = x.shape[-1]
    eye = np.eye(n)
    acc = np.broadcast_to(eye, y.shape).copy()
    for order in range(_TAYLOR_ORDER, 0, -1):
        acc = eye + (y @ acc) / order
    for _ in range(squarings):
        acc = acc @ acc
    return acc


def spd_log(s):
    """Unique symmetric logarithm of a symmetric positive-definite matrix.

    Uses the symmetric eigendecomposition; batched. Raises on asymmetric or
    non-positive input, naming the offending eigenvalue.
    """
    s = np.asarray(s, dtype=np.float64)
    scale = max(1.0, float(np.abs(s).max())) if s.size else 1.0
    asym = float(np.abs(s - np.swapaxes(s, -1, -2)).max()) if s.size else 0.0
    if asym > 1e-10 * scale:
        raise ValueError(f"spd_log requires a symmetric matrix (asymmetry {asym:.3g})")
    sym = 0.5 * (s + np.swapaxes(s, -1, -2))
    eigval, eigvec = np.linalg.eigh(sym)
    low = float(eigval.min())
    if low <= 0.0:
        raise ValueError(f"spd_log requires positive eigenvalues, found {low:.6g}")
    logs = np.log(eigval)
    return (eigvec * logs[..., None, :]) @ np.swapaxes(eigvec, -1, -2)


def _check_unit_det(g, what):
    det = np.linalg.det(g)
    worst = float(np.abs(det - 1.0).max()) if det.size else 0.0
    if worst > 1e-8:
        raise ValueError(f"{what} requires unit determinant (drift {worst:.3g})")


def unimodular_inverse(g):
    """Inverse of a batch of unit-determinant 2x2 matrices (adjugate form)."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape[-2:] != (2, 2):
        raise ValueError("unimodular_inverse expects 2x2 matrices")
    _check_unit_det(g, "unimodular_inverse")
    out = np.empty_like(g)
    out[..., 0, 0] = g[..., 1, 1]
    out[..., 0, 1] = -g[..., 0, 1]
    out[..., 1, 0] = -g[..., 1, 0]
    out[..., 1, 1] = g[..., 0, 0]
    return out


def cartan_decompose(g):
    """Split g = mat_exp(x) k with x symmetric traceless and k a rotation.

    Global polar-type decomposition: x = spd_log(g g^T) / 2, k = mat_exp(-x) g.
    Batched; returns (k, x).
    """
    g = np.asarray(g, dtype=np.float64)
    _check_unit_det(g, "cartan_decompose")
    x = 0.5 * spd_log(g @ np.swapaxes(g, -1, -2))
    k = mat_exp(-x) @ g
    return k, x


class IwasawaData(NamedTuple):
    """Triple (kappa, log_a, n_part) with g = kappa . exp(log_a) . n_part."""

    kappa: np.ndarray
    log_a: np.ndarray
    n_part: np.ndarray


def iwasawa_decompose(g):
    """Rotation-diagonal-unipotent decomposition via modified Gram-Schmidt.

    Columns of g are orthonormalized left to right with a re-orthogonalization
    pass (cancellation matters in the small-parameter sweeps); the upper
    triangular factor with positive diagonal is split into exp(log_a) and a
    unit-diagonal part. Batched; returns IwasawaData.
    """
    g = np.asarray(g, dtype=np.float64)
    _check_unit_det(g, "iwasawa_decompose")
    n = g.shape[-1]
    kappa = np.zeros_like(g)
    upper = np.zeros(g.shape[:-2] + (n, n))
    for j in range(n):
        col = g[..., :, j].copy()
        for _pass in range(2):
            for i in range(j):
                proj = np.einsum("...i,...i->...", kappa[..., :, i], col)
                upper[..., i, j] += proj
                col = col - proj[..., None] * kappa[..., :, i]
        nrm = np.linalg.norm(col, axis=-1)
        upper[..., j, j] = nrm
        kappa[..., :, j] = col / nrm[..., None]
    diag = np.diagonal(upper, axis1=-2, axis2=-1)
    log_a = np.eye(n) * np.log(diag)[..., None, :]
    n_part = upper / diag[..., :, None]
    return IwasawaData(kappa=kappa, log_a=log_a, n_part=n_part)


@dataclass(frozen=True)
class AlgebraVector:
    """Traceless matrix split into antisymmetric and symmetric parts."""

    k_part: np.ndarray
    p_part: np.ndarray

    @property
    def mat(self):
        return self.k_part + self.p_part


def split_kp(mat):
    """Split a matrix into (antisymmetric, symmetric-traceless) parts.

    Any multiple of the identity present in the input is discarded.
    """
    mat = np.asarray(mat, dtype=np.float64)
    n = mat.shape[-1]
    anti = 0.5 * (mat - np.swapaxes(mat, -1, -2))
    sym = 0.5 * (mat + np.swapaxes(mat, -1, -2))
    tr = np.trace(sym, axis1=-2, axis2=-1)
    sym = sym - np.eye(n) * (tr / n)[..., None, None]
    return anti, sym


def algebra_vector(mat):
    """Build an AlgebraVector from a traceless matrix, validating the split."""
    mat = np.asarray(mat, dtype=np.float64)
    tr = float(np.abs(np.trace(mat, axis1=-2, axis2=-1)).max())
    if tr > 1e-10:
        raise ValueError(f"algebra_vector requires a traceless matrix (trace {tr:.3g})")
    k_part, p_part = split_kp(mat)
    return AlgebraVector(k_part=k_part, p_part=p_part)


def _is_orthogonal(k):
    n = k.shape[-1]
    gap = np.abs(k @ np.swapaxes(k, -1, -2) - np.eye(n))
    return float(gap.max()) <= 1e-8 if gap.size else True


def adjoint(k, x):
    """Conjugation k x k^{-1} on algebra elements.

    Orthogonal k uses the transpose (and preserves the antisymmetric/symmetric
    split); other invertible elements fall back to a linear solve. Accepts an
    AlgebraVector or a plain array and returns the same kind.
    """
    k = np.asarray(k, dtype=np.float64)
    typed = isinstance(x, AlgebraVector)
    mat = x.mat if typed else np.asarray(x, dtype=np.float64)
    if _is_orthogonal(k):
        out = k @ mat @ np.swapaxes(k, -1, -2)
    else:
        out = k @ mat @ np.linalg.inv(k)
    if typed:
        k_part, p_part = split_kp(out)
        return AlgebraVector(k_part=k_part, p_part=p_part)
    return out


def bracket(x, y):
    """Commutator x y - y x, re-split when given AlgebraVector inputs.

    The split obeys [k,k] in k, [k,p] in p, [p,p] in k.
    """
    typed = isinstance(x, AlgebraVector) or isinstance(y, AlgebraVector)
    xm = x.mat if isinstance(x, AlgebraVector) else np.asarray(x, dtype=np.float64)
    ym = y.mat if isinstance(y, AlgebraVector) else np.asarray(y, dtype=np.float64)
    out = xm @ ym - ym @ xm
    if typed:
        k_part, p_part = split_kp(out)
        return AlgebraVector(k_part=k_part, p_part=p_part)
    return out


def form_B(x, y):
    """Invariant inner product trace(x_p y_p) of the symmetric parts."""
    xp = x.p_part if isinstance(x, AlgebraVector) else split_kp(x)[1]
    yp = y.p_part if isinstance(y, AlgebraVector) else split_kp(y)[1]
    return np.einsum("...ij,...ji->...", xp, yp)


def p_norm(v):
    """Length of a symmetric part under form_B."""
    return np.sqrt(form_B(v, v))


def proj_a(v):
    """Diagonal part of a symmetric traceless matrix (projection onto the
    diagonal subspace, orthogonal for form_B)."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    diag = np.diagonal(v, axis1=-2, axis2=-1)
    return np.eye(n) * diag[..., None, :]


# ---------------------------------------------------------------------------
# Rotations and the 2x2 plane of symmetric parts


def rotation(theta):
    """SO(2) element(s) with the given angle(s); batched over theta."""
    theta = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(theta.shape + (2, 2))
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def rotation_angle(k):
    """Angle of an SO(2) element, in (-pi, pi]; batched."""
    k = np.asarray(k, dtype=np.float64)
    return np.arctan2(k[..., 1, 0], k[..., 0, 0])


def p_basis(n=2):
    """Orthonormal basis of the symmetric traceless part under form_B.

    Diagonal directions come first (Gram-Schmidt over the consecutive-difference
    diagonals), then the off-diagonal pairs; shape (dim_p, n, n).
    """
    vecs = []
    for i in range(n - 1):
        d = np.zeros(n)
        d[i], d[i + 1] = 1.0, -1.0
        for prev in vecs:
            d = d - prev * np.dot(prev, d)
        vecs.append(d / np.linalg.norm(d))
    out = [np.diag(d) for d in vecs]
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n))
            m[i, j] = m[j, i] = 1.0 / np.sqrt(2.0)
            out.append(m)
    return np.stack(out)


def p_from_coords(coords, n=2):
    """Symmetric part with the given coefficients in the p_basis frame."""
    coords = np.asarray(coords, dtype=np.float64)
    return np.einsum("...k,kij->...ij", coords, p_basis(n))


def coords_from_p(v, n=2):
    """Coefficients of a symmetric part in the p_basis frame."""
    v = np.asarray(v, dtype=np.float64)
    return np.einsum("...ij,kji->...k", v, p_basis(n))


# ---------------------------------------------------------------------------
# Restricted-root data


class RootData(NamedTuple):
    """Positive-root covectors, their multiplicities, and the half-sum."""

    positive_roots: tuple
    multiplicities: tuple
    rho: np.ndarray


def positive_roots(n):
    """Covectors e_i - e_j (i < j) as length-n arrays of diagonal values."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            c = np.zeros(n)
            c[i], c[j] = 1.0, -1.0
            out.append(c)
    return out


def root_data(n):
    roots = positive_roots(n)
    mults = tuple(1 for _ in roots)
    rho = 0.5 * np.sum(roots, axis=0)
    return RootData(positive_roots=tuple(roots), multiplicities=mults, rho=rho)


def rho_covector(n):
    """Half-sum of positive roots: ((n-1)/2, (n-3)/2, ..., -(n-1)/2)."""
    return root_data(n).rho


def root_vector(alpha):
    """Matrix v with bracket(v, h) = alpha(h) v for every diagonal h.

    For alpha = e_i - e_j this is the elementary matrix with a 1 in row j,
    column i.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    n = alpha.shape[0]
    i = int(np.argmax(alpha > 0.5))
    j = int(np.argmax(alpha < -0.5))
    out = np.zeros((n, n))
    out[j, i] = 1.0
    return out


def pair_covector(cov, h):
    """Apply a covector (values on the diagonal) to a diagonal-part matrix."""
    cov = np.asarray(cov, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    diag = np.diagonal(h, axis1=-2, axis2=-1)
    return np.einsum("i,...i->...", cov, diag)


def wave_covector(ell):
    """The 2x2 covector with value ell on s -> s * diag(1, -1)."""
    return np.array([0.5 * ell, -0.5 * ell])


# ---------------------------------------------------------------------------
# Deterministic sampling (counter-based generator for reproducible sweeps)


def make_rng(seed):
    """Counter-based 64-bit generator; the seed is recorded in reports."""
    return np.random.Generator(np.random.Philox(seed))


def sample_p(rng, count, n=2, scale=1.0):
    """Symmetric traceless samples with form_B norm at most scale."""
    raw = rng.normal(size=(count, n, n))
    sym = 0.5 * (raw + np.swapaxes(raw, -1, -2))
    tr = np.trace(sym, axis1=-2, axis2=-1)
    sym = sym - np.eye(n) * (tr / n)[..., None, None]
    norms = np.sqrt(np.einsum("...ij,...ji->...", sym, sym))
    radii = scale * rng.uniform(0.05, 1.0, size=count)
    return sym * (radii / norms)[..., None, None]


def sample_rotation(rng, count, n=2):
    """Rotation samples: uniform angles for n = 2, QR-based beyond."""
    if n == 2:
        return rotation(rng.uniform(0.0, 2.0 * np.pi, size=count))
    raw = rng.normal(size=(count, n, n))
    q, r = np.linalg.qr(raw)
    sign = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    q = q * sign[..., None, :]
    det = np.linalg.det(q)
    q[det < 0, :, 0] *= -1.0
    return q


def sample_group(rng, count, n=2, scale=1.0):
    """Unit-determinant samples mat_exp(p) @ rotation."""
    return mat_exp(sample_p(rng, count, n, scale)) @ sample_rotation(rng, count, n)
