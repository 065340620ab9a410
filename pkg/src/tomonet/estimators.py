"""Classical state reconstruction.

Linear inversion by pseudoinverse, positivity-constrained least squares by
accelerated projected gradient with an exact spectral projection, and maximum
likelihood by the R-rho-R fixed-point iteration.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .qcore import from_bloch, hermitize, hs_distance, positivize, to_bloch


@dataclass
class SolverOptions:
    """Iteration budget and stopping tolerance shared by the iterative solvers."""

    max_iter: int = 5000
    tol: float = 1e-10
    step_scale: float = 1.0  # multiplies the 1/L gradient step in constrained_ls

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be positive, got {self.max_iter}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.step_scale <= 0.0:
            raise ValueError(f"step_scale must be positive, got {self.step_scale}")


@dataclass
class EstimatorReport:
    """Estimate plus solver diagnostics."""

    estimate: np.ndarray
    method: str
    iterations: int
    wall_time: float
    converged: bool
    objective_trace: list = field(default_factory=list)


def _values(f):
    """Accept either a FrequencyVector or a bare array of frequencies."""
    return np.asarray(getattr(f, "values", f), dtype=float)


def linear_inversion(f, cmat):
    """Least-squares Bloch vector r = C^- f.

    The pseudoinverse drops singular values below 1e-10 times the largest.
    The result need not correspond to a positive matrix.
    """
    cmat = np.asarray(cmat, dtype=float)
    f = _values(f)
    if f.shape != (cmat.shape[0],):
        raise ValueError(f"expected {cmat.shape[0]} frequencies, got shape {f.shape}")
    return np.linalg.pinv(cmat, rcond=1e-10) @ f


def project_simplex(w):
    """Euclidean projection of a real vector onto the probability simplex."""
    w = np.asarray(w, dtype=float)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, w.size + 1)
    k = np.nonzero(u - css / idx > 0.0)[0][-1]
    return np.clip(w - css[k] / (k + 1.0), 0.0, None)


def psd_simplex_projection(h):
    """Frobenius-nearest density matrix to a Hermitian matrix.

    Eigenvectors are kept; the spectrum is projected onto the probability
    simplex, which is the exact Hilbert-Schmidt projection onto the set of
    unit-trace positive matrices.
    """
    w, v = np.linalg.eigh(hermitize(h))
    return (v * project_simplex(w)) @ v.conj().T


def constrained_ls(f, cmat, basis, opts=None):
    """Least squares min ||f - C r|| over Bloch vectors of density matrices.

    Accelerated projected gradient with step 1/L, L the largest eigenvalue of
    C^T C.  Whenever the accelerated step would raise the objective the
    momentum is restarted and a plain descent step is taken instead, so the
    recorded objective trace is non-increasing.  Starts from the positivized
    linear-inversion state and stops when an accepted step moves less than
    opts.tol.
    """
    start = time.perf_counter()
    opts = opts or SolverOptions()
    cmat = np.asarray(cmat, dtype=float)
    f = _values(f)
    if f.shape != (cmat.shape[0],):
        raise ValueError(f"expected {cmat.shape[0]} frequencies, got shape {f.shape}")
    top = np.linalg.svd(cmat, compute_uv=False)[0]
    step = opts.step_scale / (top * top)

    def proj(r):
        return to_bloch(psd_simplex_projection(from_bloch(r, basis)), basis)

    def objective(r):
        return float(np.linalg.norm(cmat @ r - f))

    try:
        x = to_bloch(positivize(from_bloch(linear_inversion(f, cmat), basis)), basis)
    except ValueError:
        d = basis.shape[1]
        x = to_bloch(np.eye(d, dtype=complex) / d, basis)
    y = x
    t_mom = 1.0
    trace = [objective(x)]
    converged = False
    iters = 0
    for iters in range(1, opts.max_iter + 1):
        z = proj(y - step * (cmat.T @ (cmat @ y - f)))
        if objective(z) > trace[-1]:
            z = proj(x - step * (cmat.T @ (cmat @ x - f)))
            t_mom = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        y = z + ((t_mom - 1.0) / t_next) * (z - x)
        shift = float(np.linalg.norm(z - x))
        x = z
        t_mom = t_next
        trace.append(objective(x))
        if shift < opts.tol:
            converged = True
            break
    return EstimatorReport(
        estimate=from_bloch(x, basis),
        method="cls",
        iterations=iters,
        wall_time=time.perf_counter() - start,
        converged=converged,
        objective_trace=trace,
    )


def log_likelihood(f, p):
    """sum_j f_j log p_j over observed outcomes; p is floored at 1e-300."""
    f = _values(f)
    p = np.asarray(p, dtype=float)
    if f.shape != p.shape:
        raise ValueError(f"shape mismatch: {f.shape} vs {p.shape}")
    mask = f > 0.0
    return float(np.sum(f[mask] * np.log(np.clip(p[mask], 1e-300, None))))


def mle(f, povm, opts=None, rho0=None):
    """Maximum likelihood by iterating rho <- R rho R / Tr(R rho R).

    R = sum_j (f_j / p_j) Pi_j with p_j = Tr(rho Pi_j) floored at 1e-12;
    outcomes with f_j = 0 drop out of R.  Starts from the maximally mixed
    state unless rho0 is given, symmetrizes each iterate, and stops once
    successive iterates are closer than opts.tol in Hilbert-Schmidt distance.
    The objective trace holds the log-likelihood of every iterate visited,
    including the returned one.
    """
    start = time.perf_counter()
    opts = opts or SolverOptions()
    f = _values(f)
    elems = povm.elements
    if f.shape != (povm.n_outcomes,):
        raise ValueError(f"expected {povm.n_outcomes} frequencies, got shape {f.shape}")
    d = povm.dim
    rho = np.eye(d, dtype=complex) / d if rho0 is None else hermitize(np.asarray(rho0, dtype=complex))
    mask = f > 0.0
    sub = elems[mask]
    fsub = f[mask]

    def loglik(p):
        return float(np.sum(fsub * np.log(np.clip(p, 1e-300, None))))

    trace = []
    converged = False
    iters = 0
    for iters in range(1, opts.max_iter + 1):
        p = np.einsum("lij,ji->l", sub, rho).real
        trace.append(loglik(p))
        r = np.einsum("l,lij->ij", fsub / np.clip(p, 1e-12, None), sub)
        nxt = r @ rho @ r
        nxt = hermitize(nxt / np.trace(nxt).real)
        shift = hs_distance(nxt, rho)
        rho = nxt
        if shift < opts.tol:
            converged = True
            break
    trace.append(loglik(np.einsum("lij,ji->l", sub, rho).real))
    return EstimatorReport(
        estimate=rho,
        method="mle",
        iterations=iters,
        wall_time=time.perf_counter() - start,
        converged=converged,
        objective_trace=trace,
    )
