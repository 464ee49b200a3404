"""Grid-based orthogonal matching pursuit, used as the sparse-recovery baseline.

The dictionary holds unit-norm steering columns on a uniform delay grid over
the unambiguous window, restricted to the valid pulses. Reported amplitudes are
rescaled back to the physical (unnormalised) steering convention so they are
comparable with the least-squares amplitudes of the subspace method.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_complex_vector, check_int, check_positive
from .amplitude import Profile, form_profile
from .exceptions import InvalidInputError, NoDataError
from .signal_model import AvailabilityMask


@dataclass(frozen=True)
class Dictionary:
    grid_delays: np.ndarray
    atoms: np.ndarray
    pulse_indices: np.ndarray
    column_norm: float

    @property
    def grid_size(self):
        return self.grid_delays.size


@dataclass(frozen=True)
class OmpPath:
    """Greedy path: atom chosen at each step and residual norm after it.

    ``residual_norms[0]`` is the norm of the observations themselves.
    """

    atom_indices: np.ndarray
    residual_norms: np.ndarray


def build_dictionary(config, mask, grid_size):
    flags = mask.flags if isinstance(mask, AvailabilityMask) else np.asarray(mask, bool)
    grid_size = check_int(grid_size, "grid_size", minimum=2)
    if flags.size != config.pulse_count:
        raise InvalidInputError(
            f"mask length {flags.size} does not match pulse_count {config.pulse_count}"
        )
    idx = np.flatnonzero(flags)
    if idx.size == 0:
        raise NoDataError("mask has no valid pulses")
    grid = np.arange(grid_size) * (config.unambiguous_delay / grid_size)
    norm = np.sqrt(idx.size)
    atoms = np.exp(-2j * np.pi * np.outer(config.frequencies[idx], grid)) / norm
    return Dictionary(grid_delays=grid, atoms=atoms, pulse_indices=idx, column_norm=norm)


def _greedy(y, atoms, max_atoms, stop_norm):
    chosen = []
    norms = [float(np.linalg.norm(y))]
    coef = np.zeros(0, dtype=np.complex128)
    residual = y
    while len(chosen) < max_atoms and norms[-1] > stop_norm:
        corr = np.abs(atoms.conj().T @ residual)
        corr[chosen] = -1.0
        best = int(np.argmax(corr))
        if corr[best] <= 0:
            break
        chosen.append(best)
        sub = atoms[:, chosen]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        residual = y - sub @ coef
        norms.append(float(np.linalg.norm(residual)))
    return np.array(chosen, dtype=int), np.array(norms), coef


def _check_observations(observations, dictionary):
    y = check_complex_vector(observations, "observations")
    if y.size != dictionary.atoms.shape[0]:
        raise InvalidInputError(
            f"{y.size} observations for {dictionary.atoms.shape[0]} valid pulses"
        )
    return y


def omp_path(observations, dictionary, max_atoms, residual_tol=0.0):
    """Run OMP and return the selection order and residual history."""
    y = _check_observations(observations, dictionary)
    max_atoms = check_int(max_atoms, "max_atoms", minimum=1)
    residual_tol = check_positive(residual_tol, "residual_tol", strict=False)
    chosen, norms, _ = _greedy(
        y, dictionary.atoms, max_atoms, residual_tol * np.linalg.norm(y)
    )
    return OmpPath(atom_indices=chosen, residual_norms=norms)


def refit(observations, dictionary, atom_indices):
    """Least-squares amplitudes on a fixed support, as a :class:`Profile`."""
    y = _check_observations(observations, dictionary)
    atom_indices = np.asarray(atom_indices, dtype=int)
    if atom_indices.size == 0:
        return Profile.empty()
    coef, *_ = np.linalg.lstsq(dictionary.atoms[:, atom_indices], y, rcond=None)
    return form_profile(
        dictionary.grid_delays[atom_indices], coef / dictionary.column_norm
    )


def omp(observations, dictionary, max_atoms, residual_tol=0.0):
    """Orthogonal matching pursuit over ``dictionary``.

    Each step adds the atom with the largest ``|<atom, residual>|`` and refits
    all selected atoms jointly. Stops when the residual norm drops to
    ``residual_tol * ||y||`` or ``max_atoms`` atoms are in.

    Returns
    -------
    Profile
        One point per selected atom, at its grid delay.
    """
    path = omp_path(observations, dictionary, max_atoms, residual_tol)
    return refit(observations, dictionary, path.atom_indices)


def select_atoms_aic(residual_norms, n_obs, params_per_atom=2):
    """Number of atoms minimising ``2 n log(RSS_k / n) + 2 p k`` along an OMP path.

    ``p`` counts the real parameters per atom (real and imaginary amplitude; the
    grid delay is not free).
    """
    norms = np.asarray(residual_norms, dtype=float)
    n_obs = check_int(n_obs, "n_obs", minimum=1)
    if norms.size == 0:
        raise InvalidInputError("empty residual history")
    rss = norms**2
    tiny = np.finfo(float).tiny
    k = np.arange(norms.size)
    aic = 2.0 * n_obs * np.log(np.maximum(rss, tiny) / n_obs) + 2.0 * params_per_atom * k
    return int(np.argmin(aic))
