"""Hermitian linear algebra, state parametrizations and random-state sampling.

Operators are dense complex numpy arrays.  An operator basis is an ndarray of
shape (d*d, d, d): element 0 is the identity scaled to unit norm, the rest are
the traceless generalized Gell-Mann matrices, all orthonormal under the
Hilbert-Schmidt inner product Tr(G[j] @ G[k]) = delta_jk.  A Bloch vector
collects the d*d real expansion coefficients of a Hermitian matrix in that
basis, so both parametrization round trips are exact linear maps.
"""

import numpy as np

# Eigenvalues in [EIG_FLOOR, 0) count as zero for positivity checks.
EIG_FLOOR = -1e-10


def hermitize(h):
    """Symmetrize (h + h^dag)/2, absorbing floating-point drift."""
    h = np.asarray(h)
    return 0.5 * (h + h.conj().T)


def is_hermitian(h, rtol=1e-10):
    """True when ||h - h^dag||_F <= rtol * ||h||_F."""
    h = np.asarray(h)
    scale = np.linalg.norm(h)
    return float(np.linalg.norm(h - h.conj().T)) <= rtol * max(scale, 1e-300)


def min_eigenvalue(h):
    """Smallest eigenvalue of a Hermitian matrix (symmetrized first)."""
    return float(np.linalg.eigvalsh(hermitize(h))[0])


def purity(rho):
    """Tr(rho^2), real part."""
    rho = np.asarray(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def hs_distance(a, b):
    """Hilbert-Schmidt distance: the Frobenius norm of a - b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def assert_density_matrix(rho, name="state"):
    """Raise ValueError unless rho is Hermitian, unit trace and positive
    semidefinite within the module tolerances."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError(f"{name} is not Hermitian")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-10:
        raise ValueError(f"{name} has trace {tr}, expected 1")
    lo = min_eigenvalue(rho)
    if lo < EIG_FLOOR:
        raise ValueError(f"{name} has negative eigenvalue {lo}")


def is_density_matrix(rho):
    try:
        assert_density_matrix(rho)
    except ValueError:
        return False
    return True


def gell_mann_basis(d):
    """Orthonormal Hermitian operator basis for dimension d.

    Element 0 is I/sqrt(d).  Then, in order: the symmetric off-diagonal
    matrices (e_jk + e_kj)/sqrt(2), the antisymmetric ones
    i(e_kj - e_jk)/sqrt(2), and the diagonal ones
    diag(1, .., 1, -l, 0, ..)/sqrt(l(l+1)).  For d = 2 this is the identity
    and the three Pauli matrices, each divided by sqrt(2).
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for k in range(1, d):
        for j in range(k):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            mats.append(m / np.sqrt(2.0))
    for k in range(1, d):
        for j in range(k):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1.0j
            m[k, j] = 1.0j
            mats.append(m / np.sqrt(2.0))
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -float(l)
        mats.append(np.diag(diag).astype(complex) / np.sqrt(l * (l + 1.0)))
    return np.stack(mats)


def to_bloch(h, basis):
    """Expansion coefficients r_k = Tr(h G_k).

    The imaginary residue (below 1e-10 for Hermitian input) is discarded.
    """
    h = np.asarray(h)
    if h.shape != basis.shape[1:]:
        raise ValueError(f"operator shape {h.shape} does not match basis dimension {basis.shape[1]}")
    return np.einsum("kij,ji->k", basis, h).real


def from_bloch(r, basis):
    """Hermitian matrix sum_k r_k G_k from real coefficients r."""
    r = np.asarray(r, dtype=float)
    if r.shape != (basis.shape[0],):
        raise ValueError(f"expected {basis.shape[0]} coefficients, got shape {r.shape}")
    return np.einsum("k,kij->ij", r, basis)


def positivize(h):
    """Clip negative eigenvalues to zero and renormalize the trace to one.

    The result shares the eigenbasis of the (symmetrized) input.  Raises
    ValueError when no eigenvalue is positive.
    """
    w, v = np.linalg.eigh(hermitize(h))
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        raise ValueError("no positive eigenvalues to keep")
    w /= total
    return (v * w) @ v.conj().T


def cholesky_to_state(a):
    """Map a factor a to the state a a^dag / Tr(a a^dag)."""
    a = np.asarray(a, dtype=complex)
    gram = a @ a.conj().T
    tr = float(np.trace(gram).real)
    if tr <= 0.0:
        raise ValueError("degenerate factor: Tr(a a^dag) must be positive")
    return gram / tr


def state_to_cholesky(rho):
    """Canonical lower-triangular factor of rho with nonnegative real diagonal.

    Singular states are clipped to the positive cone and given a 1e-12
    diagonal jitter before factoring; the round trip through
    cholesky_to_state stays within 1e-8.
    """
    rho = np.asarray(rho, dtype=complex)
    assert_density_matrix(rho)
    try:
        return np.linalg.cholesky(rho)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(hermitize(rho))
        w = np.clip(w, 0.0, None)
        fixed = (v * w) @ v.conj().T + 1e-12 * np.eye(rho.shape[0])
        fixed /= np.trace(fixed).real
        return np.linalg.cholesky(fixed)


def cholesky_vector(a):
    """Flatten a lower-triangular factor into d*d reals.

    Layout: the d diagonal entries first, then real and imaginary part of
    every strictly-lower entry in row-major order.
    """
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    out = np.empty(d * d)
    out[:d] = a.diagonal().real
    pos = d
    for i in range(1, d):
        for j in range(i):
            out[pos] = a[i, j].real
            out[pos + 1] = a[i, j].imag
            pos += 2
    return out


def cholesky_from_vector(v, d):
    """Inverse of cholesky_vector: rebuild the lower-triangular factor."""
    v = np.asarray(v, dtype=float)
    if v.shape != (d * d,):
        raise ValueError(f"expected {d * d} entries for dimension {d}, got shape {v.shape}")
    a = np.zeros((d, d), dtype=complex)
    a[np.diag_indices(d)] = v[:d]
    pos = d
    for i in range(1, d):
        for j in range(i):
            a[i, j] = v[pos] + 1j * v[pos + 1]
            pos += 2
    return a


def random_density_ginibre(d, rng):
    """Random full-rank state x x^dag / Tr(x x^dag), x a d-by-d matrix with
    independent standard-normal real and imaginary parts."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    while True:
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        tr = float(np.einsum("ij,ij->", x, x.conj()).real)
        if tr > 0.0:
            return (x @ x.conj().T) / tr


def random_haar_pure(d, rng):
    """Haar-distributed unit vector: a normalized complex Gaussian draw."""
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    while True:
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        norm = float(np.linalg.norm(v))
        if norm > 0.0:
            return v / norm
