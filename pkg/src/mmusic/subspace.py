"""Eigendecomposition, model-order selection and Root-MUSIC delay extraction.

Root polynomial orientation: the selected roots are the signal poles, i.e. a
scatterer whose samples advance as ``exp(-2j*pi*df*delay*n)`` yields a root at
``exp(-2j*pi*df*delay)``. :func:`roots_to_delays` undoes that sign.
"""

from dataclasses import dataclass, replace

import numpy as np

from ._validation import check_int, check_positive, check_real_vector
from .exceptions import InvalidInputError, NoSignalError, NumericError

# relative floor for eigenvalues that are zero up to rounding
EIGENVALUE_FLOOR = 1e-10

# two roots closer than this are treated as one conjugate-reciprocal pair
PAIR_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SubspaceSplit:
    """Eigenvalues (descending), matching unit eigenvectors as columns, and the
    signal-subspace dimension once chosen."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    signal_dim: int | None = None

    @property
    def size(self):
        return self.eigenvalues.size

    def with_signal_dim(self, signal_dim):
        signal_dim = check_int(signal_dim, "signal_dim", minimum=0, maximum=self.size - 1)
        return replace(self, signal_dim=signal_dim)

    @property
    def noise_vectors(self):
        if self.signal_dim is None:
            raise InvalidInputError("signal_dim has not been set")
        return self.eigenvectors[:, self.signal_dim :]


@dataclass(frozen=True)
class RootSet:
    roots: np.ndarray
    selected: np.ndarray
    delays: np.ndarray | None = None


def eigendecompose(matrix):
    """Full Hermitian eigensystem sorted by descending eigenvalue."""
    entries = getattr(matrix, "entries", matrix)
    entries = np.asarray(entries, dtype=np.complex128)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {entries.shape}")
    if not np.isfinite(entries).all():
        raise NumericError("covariance matrix has non-finite entries")
    try:
        w, v = np.linalg.eigh(entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(w, kind="stable")[::-1]
    return SubspaceSplit(eigenvalues=w[order], eigenvectors=v[:, order])


def estimate_order_threshold(eigenvalues, threshold):
    """Count eigenvalues strictly above ``threshold``, capped at ``L - 1``."""
    w = check_real_vector(eigenvalues, "eigenvalues", min_size=1)
    threshold = check_positive(threshold, "threshold")
    return min(int(np.count_nonzero(w > threshold)), w.size - 1)


def clamp_eigenvalues(eigenvalues, floor=None):
    """Clamp eigenvalues from below so the information criterion is defined.

    The default floor is the magnitude of the most negative eigenvalue (the
    Toeplitz estimate is indefinite under missing data, and nothing below that
    level is distinguishable from estimation error), but never less than
    ``EIGENVALUE_FLOOR * max(eigenvalues)``.
    """
    w = check_real_vector(eigenvalues, "eigenvalues", min_size=1)
    top = max(float(w.max()), np.finfo(float).tiny)
    if floor is None:
        floor = max(-float(w.min()), EIGENVALUE_FLOOR * top)
    return np.maximum(w, floor)


def aic_curve(eigenvalues, effective_samples):
    """AIC value for every candidate order ``k = 0..L-1``."""
    w = check_real_vector(eigenvalues, "eigenvalues")
    if w.size < 2:
        raise InvalidInputError("order selection needs at least 2 eigenvalues")
    if (w <= 0).any():
        raise InvalidInputError("eigenvalues must be clamped to a positive floor")
    if np.any(np.diff(w) > 0):
        raise InvalidInputError("eigenvalues must be sorted in descending order")
    size = w.size
    effective_samples = check_int(effective_samples, "effective_samples", minimum=size)
    logw = np.log(w)
    curve = np.empty(size)
    for k in range(size):
        tail = w[k:]
        m = size - k
        log_ratio = logw[k:].mean() - np.log(tail.mean())
        curve[k] = -2.0 * effective_samples * m * log_ratio + 2.0 * k * (2 * size - k)
    return curve


def estimate_order_aic(eigenvalues, effective_samples):
    """Akaike order estimate from the eigenvalue tail.

    ``AIC(k) = -2 n (L-k) log(geometric_mean / arithmetic_mean) + 2 k (2L - k)``
    evaluated on eigenvalues ``k+1..L``; returns the minimising ``k``.

    Parameters
    ----------
    eigenvalues : array-like
        Sorted descending and already clamped to a positive floor
        (see :func:`clamp_eigenvalues`).
    effective_samples : int
        Number of effective snapshots ``n``, at least ``L``.
    """
    return int(np.argmin(aic_curve(eigenvalues, effective_samples)))


def noise_polynomial(noise_vectors):
    """Coefficients (highest power first) of the degree ``2(L-1)`` null polynomial.

    The coefficient of ``z**(L-1+d)`` is the sum of the ``-d``-th diagonal of the
    noise projector ``G G^H``, which makes the roots the signal poles.
    """
    g = np.asarray(noise_vectors, dtype=np.complex128)
    size = g.shape[0]
    proj = g @ g.conj().T
    upper = np.array([np.trace(proj, offset=d) for d in range(size)])
    # proj is Hermitian, so the sub-diagonal sums are conjugates of these
    return np.concatenate([np.conj(upper[:0:-1]), [upper[0].real], upper[1:]])


def companion_roots(coeffs):
    """All roots of a polynomial (highest power first) via companion eigenvalues.

    Leading zeros reduce the degree; trailing zeros contribute roots at 0.
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise NumericError("polynomial is identically zero")
    c = c[nz[0] : nz[-1] + 1]
    zeros_at_origin = len(coeffs) - 1 - nz[-1]
    degree = c.size - 1
    if degree == 0:
        return np.zeros(zeros_at_origin, dtype=np.complex128)
    companion = np.zeros((degree, degree), dtype=np.complex128)
    companion[0, :] = -c[1:] / c[0]
    companion[np.arange(1, degree), np.arange(degree - 1)] = 1.0
    try:
        roots = np.linalg.eigvals(companion)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"root finding failed: {exc}") from exc
    if not np.isfinite(roots).all():
        raise NumericError("root finding returned non-finite roots")
    return np.concatenate([roots, np.zeros(zeros_at_origin, dtype=np.complex128)])


def select_roots(roots, count):
    """Pick ``count`` roots nearest the unit circle, at most one per
    conjugate-reciprocal pair, from inside or on the circle.

    Ties in distance go to the smaller angle magnitude.
    """
    roots = np.asarray(roots, dtype=np.complex128)
    mag = np.abs(roots)
    candidates = np.flatnonzero(mag <= 1.0 + PAIR_TOLERANCE)
    order = np.lexsort(
        (np.abs(np.angle(roots[candidates])), np.abs(1.0 - mag[candidates]))
    )
    chosen = []
    for idx in candidates[order]:
        z = roots[idx]
        if any(abs(z - 1.0 / np.conj(roots[j])) < PAIR_TOLERANCE for j in chosen):
            continue
        chosen.append(idx)
        if len(chosen) == count:
            break
    if len(chosen) < count:
        raise NumericError(
            f"only {len(chosen)} distinct roots available, {count} requested"
        )
    return roots[np.array(chosen, dtype=int)]


def polish_double_roots(coeffs, roots):
    """Refine roots that rounding split off a double root on the unit circle.

    On the unit circle the null polynomial is a non-negative squared norm, so
    its zeros there are double; rounding splits them by about ``sqrt(eps)``.
    A double root of the polynomial is a simple root of its derivative, so a
    few Newton steps on the derivative restore full precision. Both members of
    each such pair are replaced by the refined value.
    """
    roots = np.array(roots, dtype=np.complex128)
    d1 = np.polyder(np.asarray(coeffs, dtype=np.complex128))
    d2 = np.polyder(d1)
    near = np.flatnonzero(np.abs(1.0 - np.abs(roots)) < PAIR_TOLERANCE)
    done = set()
    for idx in near:
        if idx in done:
            continue
        z = roots[idx]
        for _ in range(8):
            denom = np.polyval(d2, z)
            if denom == 0:
                break
            step = np.polyval(d1, z) / denom
            z = z - step
            if abs(step) <= 4 * np.finfo(float).eps * abs(z):
                break
        if abs(z - roots[idx]) > PAIR_TOLERANCE:
            continue
        partners = near[np.abs(roots[near] - 1.0 / np.conj(roots[idx])) < PAIR_TOLERANCE]
        for j in {int(idx), *map(int, partners)}:
            roots[j] = z
            done.add(j)
    return roots


def roots_to_delays(selected, frequency_step):
    """Delays in seconds, in ``[0, 1/frequency_step)``, from signal-pole roots."""
    z = np.atleast_1d(np.asarray(selected, dtype=np.complex128))
    if z.size == 0:
        raise InvalidInputError("no roots given")
    frequency_step = check_positive(frequency_step, "frequency_step")
    omega = np.mod(-np.angle(z), 2.0 * np.pi)
    omega[omega >= 2.0 * np.pi] = 0.0
    return omega / (2.0 * np.pi * frequency_step)


def root_music(split, frequency_step=None):
    """Root-MUSIC on a split with ``1 <= signal_dim < L``.

    Parameters
    ----------
    split : SubspaceSplit
    frequency_step : float, optional
        When given, the returned ``RootSet.delays`` are filled in, sorted
        ascending together with ``selected``.
    """
    if split.signal_dim is None:
        raise InvalidInputError("signal_dim has not been set")
    if split.signal_dim == 0:
        raise NoSignalError("signal subspace is empty (order 0)")
    coeffs = noise_polynomial(split.noise_vectors)
    roots = polish_double_roots(coeffs, companion_roots(coeffs))
    selected = select_roots(roots, split.signal_dim)
    delays = None
    if frequency_step is not None:
        delays = roots_to_delays(selected, frequency_step)
        order = np.argsort(delays, kind="stable")
        selected, delays = selected[order], delays[order]
    return RootSet(roots=roots, selected=selected, delays=delays)
