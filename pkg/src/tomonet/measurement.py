"""Square-root measurements, the Born rule, and shot-noise sampling."""

from dataclasses import dataclass

import numpy as np

from .qcore import gell_mann_basis, min_eigenvalue, random_haar_pure


@dataclass(frozen=True)
class Povm:
    """A discrete measurement: positive operators that sum to the identity."""

    elements: np.ndarray  # shape (m, d, d), complex

    @property
    def dim(self):
        return self.elements.shape[1]

    @property
    def n_outcomes(self):
        return self.elements.shape[0]

    def validate(self):
        elems = self.elements
        if elems.ndim != 3 or elems.shape[1] != elems.shape[2]:
            raise ValueError(f"elements must have shape (m, d, d), got {elems.shape}")
        for k in range(elems.shape[0]):
            lo = min_eigenvalue(elems[k])
            if lo < -1e-10:
                raise ValueError(f"element {k} has negative eigenvalue {lo}")
        resid = float(np.linalg.norm(elems.sum(axis=0) - np.eye(self.dim)))
        if resid >= 1e-10:
            raise ValueError(f"completeness violated: residual {resid}")
        return self


@dataclass(frozen=True)
class FrequencyVector:
    """Relative outcome frequencies; trials == 0 marks exact probabilities."""

    values: np.ndarray
    trials: int = 0


def square_root_measurement(states):
    """POVM with elements G^(-1/2) |phi_l><phi_l| G^(-1/2), where G is the
    frame operator sum_l |phi_l><phi_l| of the generating pure states.

    States only enter through their projectors, so global phases are
    irrelevant.  Raises ValueError when the states fail to span the space
    (frame eigenvalues at or below 1e-10 count as deficient).
    """
    kets = np.asarray(states, dtype=complex)
    if kets.ndim != 2:
        raise ValueError(f"expected an array of state vectors, got shape {kets.shape}")
    m, d = kets.shape
    if m < d:
        raise ValueError(f"{m} states cannot span dimension {d}")
    g = np.einsum("li,lj->ij", kets, kets.conj())
    w, v = np.linalg.eigh(g)
    rank = int(np.sum(w > 1e-10))
    if rank < d:
        raise ValueError(f"generating states span rank {rank} < dimension {d}")
    g_isqrt = (v / np.sqrt(w)) @ v.conj().T
    mapped = kets @ g_isqrt.T
    elements = np.einsum("li,lj->lij", mapped, mapped.conj())
    return Povm(elements).validate()


def born_probabilities(rho, povm):
    """Outcome distribution p_l = Tr(rho Pi_l)."""
    rho = np.asarray(rho)
    d = povm.dim
    if rho.shape != (d, d):
        raise ValueError(f"state shape {rho.shape} does not match measurement dimension {d}")
    return np.einsum("lij,ji->l", povm.elements, rho).real


def measurement_matrix(povm, basis):
    """Real m-by-d^2 matrix C with C[l, k] = Tr(Pi_l G_k), so that the Born
    probabilities of any state are C times its Bloch vector."""
    if basis.shape[1] != povm.dim:
        raise ValueError(
            f"basis dimension {basis.shape[1]} does not match measurement dimension {povm.dim}"
        )
    return np.einsum("lij,kji->lk", povm.elements, basis).real


def sample_frequencies(p, trials, rng):
    """Multinomial relative frequencies after `trials` independent shots."""
    p = np.asarray(p, dtype=float)
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    # Rounding can leave probabilities a hair below zero; shave before drawing.
    q = np.clip(p, 0.0, None)
    q = q / q.sum()
    counts = rng.multinomial(trials, q)
    return FrequencyVector(values=counts / float(trials), trials=int(trials))


def random_srm(d, rng, n_states=None, min_singular=1e-8):
    """Square-root measurement generated by Haar-random pure states.

    Defaults to d^2 states.  Redraws the whole set until the measurement
    matrix is well conditioned (smallest singular value above min_singular),
    so linear inversion on the result is stable.
    """
    if n_states is None:
        n_states = d * d
    if n_states < d * d:
        raise ValueError(f"need at least d^2 = {d * d} states for an informationally complete measurement")
    basis = gell_mann_basis(d)
    while True:
        kets = np.stack([random_haar_pure(d, rng) for _ in range(n_states)])
        try:
            povm = square_root_measurement(kets)
        except ValueError:
            continue
        c = measurement_matrix(povm, basis)
        if np.linalg.svd(c, compute_uv=False)[-1] > min_singular:
            return povm
