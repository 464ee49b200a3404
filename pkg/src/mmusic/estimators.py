"""scikit-learn style front ends for the subspace profiler and the OMP baseline.

Both estimators are fitted on a single pulse train: ``X`` is the complex sample
vector (one entry per pulse) and ``mask`` flags the usable pulses. After
``fit`` the estimated scatterers are available as ``profile_`` and
``predict`` evaluates the fitted point-scatterer model at any pulse index,
which fills in the missing samples.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .acf import estimate_acf
from .amplitude import build_steering, form_profile, least_squares_amplitudes
from .baseline_omp import build_dictionary, omp_path, refit, select_atoms_aic
from .covariance import choose_matrix_size, default_max_size, form_toeplitz
from .exceptions import InvalidInputError, NoDataError
from .signal_model import (
    X_BAND_START_FREQUENCY,
    AvailabilityMask,
    MaskedSamples,
    RadarConfig,
)
from .subspace import (
    clamp_eigenvalues,
    eigendecompose,
    estimate_order_aic,
    estimate_order_threshold,
    root_music,
)

ORDER_SELECTORS = ("aic", "threshold")


def _validate_data(X, mask):
    if isinstance(X, MaskedSamples):
        if mask is not None:
            X = MaskedSamples(X.samples, X.mask & AvailabilityMask(mask))
        data = X
    else:
        arr = np.asarray(X)
        if mask is None:
            mask = AvailabilityMask.full(arr.size)
        data = MaskedSamples(arr, mask)
    if data.mask.valid_count == 0:
        raise NoDataError("mask has no valid pulses")
    return data


class _ProfilerMixin:
    def _radar(self, pulse_count):
        return RadarConfig(
            pulse_count=pulse_count,
            start_frequency=self.start_frequency,
            frequency_step=self.frequency_step,
        )

    def predict(self, pulse_indices=None):
        """Model samples ``sum_k a_k exp(-2j*pi*f_n*delay_k)`` at the given pulses.

        Defaults to every pulse of the fitted train.
        """
        check_is_fitted(self, "profile_")
        if pulse_indices is None:
            pulse_indices = np.arange(self.n_pulses_)
        n = np.asarray(pulse_indices)
        freqs = self.start_frequency + n * self.frequency_step
        steering = np.exp(-2j * np.pi * np.multiply.outer(freqs, self.profile_.delays))
        return steering @ self.profile_.amplitudes

    def score(self, X, mask=None):
        """Negative mean squared residual over the valid pulses of ``X``."""
        data = _validate_data(X, mask)
        idx = data.mask.valid_indices
        resid = data.samples[idx] - self.predict(idx)
        return -float(np.mean(np.abs(resid) ** 2))


class MMusicProfiler(_ProfilerMixin, BaseEstimator):
    """Range profiler for stepped-frequency data with missing pulses.

    The autocovariance is estimated from available sample pairs only, turned
    into a Hermitian Toeplitz matrix, eigendecomposed, and the scatterer delays
    are read off the roots of the noise-subspace polynomial. Amplitudes come
    from least squares over the valid pulses.

    Parameters
    ----------
    frequency_step : float, default=1.875e6
        Carrier step between pulses in Hz.
    start_frequency : float, default=10e9
        Carrier of the first pulse in Hz.
    order_selector : {"aic", "threshold"}, default="aic"
        How the number of scatterers is chosen from the eigenvalues.
    threshold_ratio : float, default=0.01
        For ``"threshold"``: eigenvalues above ``threshold_ratio * max`` count.
    n_scatterers : int, optional
        Fix the model order instead of selecting it.
    max_matrix_size : int, optional
        Upper bound on the covariance size. Defaults to ``min(N // 4, 128)``.
    size_rule : {"half_expected", "half_full", "all_defined"}, default="half_expected"
        How the covariance size is chosen below ``max_matrix_size``; see
        :func:`mmusic.covariance.choose_matrix_size`.
    diagonal_loading : float, default=0.0
        Added to the covariance diagonal.

    Attributes
    ----------
    acf_ : AcfEstimate
    matrix_size_ : int
    size_rule_fallback_ : bool
        True when the size rule gave no usable size and the largest
        fully-estimable size was used instead.
    covariance_ : CovarianceMatrix
    eigenvalues_ : ndarray
    n_scatterers_ : int
    roots_ : RootSet
    delays_ : ndarray
    amplitudes_ : ndarray
    profile_ : Profile
    """

    def __init__(
        self,
        frequency_step=1.875e6,
        start_frequency=X_BAND_START_FREQUENCY,
        order_selector="aic",
        threshold_ratio=0.01,
        n_scatterers=None,
        max_matrix_size=None,
        size_rule="half_expected",
        diagonal_loading=0.0,
    ):
        self.frequency_step = frequency_step
        self.start_frequency = start_frequency
        self.order_selector = order_selector
        self.threshold_ratio = threshold_ratio
        self.n_scatterers = n_scatterers
        self.max_matrix_size = max_matrix_size
        self.size_rule = size_rule
        self.diagonal_loading = diagonal_loading

    def fit(self, X, mask=None):
        """Estimate the scatterers of one pulse train.

        Parameters
        ----------
        X : array-like of complex, shape (n_pulses,) or MaskedSamples
        mask : array-like of bool, shape (n_pulses,), optional
            Usable pulses. Combined with the mask of ``X`` if both are given.
        """
        if self.order_selector not in ORDER_SELECTORS:
            raise InvalidInputError(
                f"order_selector must be one of {ORDER_SELECTORS}, "
                f"got {self.order_selector!r}"
            )
        data = _validate_data(X, mask)
        n = len(data)
        radar = self._radar(n)
        max_size = self.max_matrix_size or default_max_size(n)
        max_size = min(max_size, n)

        acf = estimate_acf(data, max_size - 1)
        size, fell_back = choose_matrix_size(acf, max_size, self.size_rule)
        cov = form_toeplitz(acf, size, loading=self.diagonal_loading)
        split = eigendecompose(cov)
        order = self._select_order(split.eigenvalues, data.mask.valid_count)
        roots = root_music(split.with_signal_dim(order), radar.frequency_step)

        steering = build_steering(radar, data.mask, roots.delays)
        amps = least_squares_amplitudes(steering, data.valid_samples)

        self.n_pulses_ = n
        self.acf_ = acf
        self.matrix_size_ = size
        self.size_rule_fallback_ = fell_back
        self.covariance_ = cov
        self.eigenvalues_ = split.eigenvalues
        self.n_scatterers_ = order
        self.roots_ = roots
        self.delays_ = roots.delays
        self.amplitudes_ = amps
        self.profile_ = form_profile(roots.delays, amps)
        return self

    def _select_order(self, eigenvalues, valid_count):
        size = eigenvalues.size
        if self.n_scatterers is not None:
            if not 0 <= self.n_scatterers < size:
                raise InvalidInputError(
                    f"n_scatterers={self.n_scatterers} needs 0 <= K < L={size}"
                )
            return int(self.n_scatterers)
        if self.order_selector == "threshold":
            top = float(eigenvalues[0])
            if top <= 0:
                return 0
            return estimate_order_threshold(eigenvalues, self.threshold_ratio * top)
        effective = max(size, valid_count - size + 1)
        return estimate_order_aic(clamp_eigenvalues(eigenvalues), effective)


class OMPProfiler(_ProfilerMixin, BaseEstimator):
    """Orthogonal matching pursuit on a uniform delay grid.

    Parameters
    ----------
    frequency_step, start_frequency : float
        As for :class:`MMusicProfiler`.
    grid_size : int, optional
        Number of delay grid points. Defaults to ``4 * n_pulses``.
    max_atoms : int, optional
        Fixed number of atoms. When unset, OMP runs up to ``atom_cap`` atoms
        and the count is chosen by AIC on the residual energies.
    residual_tol : float, optional
        Stop once ``||r|| <= residual_tol * ||y||``. Defaults to
        ``10**(-snr_db/20)`` when ``snr_db`` is given, else 0.05.
    snr_db : float, optional
    atom_cap : int, default=64
    """

    def __init__(
        self,
        frequency_step=1.875e6,
        start_frequency=X_BAND_START_FREQUENCY,
        grid_size=None,
        max_atoms=None,
        residual_tol=None,
        snr_db=None,
        atom_cap=64,
    ):
        self.frequency_step = frequency_step
        self.start_frequency = start_frequency
        self.grid_size = grid_size
        self.max_atoms = max_atoms
        self.residual_tol = residual_tol
        self.snr_db = snr_db
        self.atom_cap = atom_cap

    def fit(self, X, mask=None):
        data = _validate_data(X, mask)
        n = len(data)
        radar = self._radar(n)
        dictionary = build_dictionary(radar, data.mask, self.grid_size or 4 * n)
        y = data.valid_samples
        tol = self.residual_tol
        if tol is None:
            tol = 10.0 ** (-self.snr_db / 20.0) if self.snr_db is not None else 0.05

        cap = self.max_atoms if self.max_atoms is not None else self.atom_cap
        cap = min(cap, y.size)
        path = omp_path(y, dictionary, cap, tol)
        if self.max_atoms is None:
            n_atoms = select_atoms_aic(path.residual_norms, y.size)
        else:
            n_atoms = path.atom_indices.size
        support = path.atom_indices[:n_atoms]

        self.n_pulses_ = n
        self.dictionary_ = dictionary
        self.path_ = path
        self.n_atoms_ = int(n_atoms)
        self.profile_ = refit(y, dictionary, support)
        self.delays_ = self.profile_.delays
        self.amplitudes_ = self.profile_.amplitudes
        return self
