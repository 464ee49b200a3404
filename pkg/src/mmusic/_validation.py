"""Input validation helpers shared by the estimators and the functional API.

scikit-learn's ``check_array`` rejects complex input, so the checks here are
written against numpy directly while keeping the same spirit: coerce, check
shape and finiteness, raise a ``ValueError`` subclass with a useful message.
"""

import numbers

import numpy as np

from .exceptions import InvalidInputError


def check_complex_vector(x, name="X", allow_nonfinite_where=None):
    """Return ``x`` as a 1-D complex128 array.

    Parameters
    ----------
    x : array-like
        Input samples.
    name : str
        Used in error messages.
    allow_nonfinite_where : ndarray of bool, optional
        Entries where this is False must be finite; entries where it is True
        may hold anything (masked-out pulses are never read).
    """
    arr = np.asarray(x)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if not (np.issubdtype(arr.dtype, np.number) or arr.dtype == bool):
        raise InvalidInputError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = arr.astype(np.complex128, copy=True)
    finite = np.isfinite(arr)
    if allow_nonfinite_where is not None:
        finite |= allow_nonfinite_where
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise InvalidInputError(f"{name} has a non-finite value at index {bad}")
    return arr


def check_real_vector(x, name="x", min_size=0):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < min_size:
        raise InvalidInputError(f"{name} needs at least {min_size} entries")
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def check_bool_vector(flags, name="mask", length=None):
    arr = np.asarray(flags)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.dtype != bool:
        if not np.issubdtype(arr.dtype, np.number) or not np.isin(arr, (0, 1)).all():
            raise InvalidInputError(f"{name} must contain only 0/1 or booleans")
        arr = arr.astype(bool)
    if length is not None and arr.size != length:
        raise InvalidInputError(
            f"{name} has length {arr.size}, expected {length}"
        )
    return arr.copy()


def check_int(value, name, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise InvalidInputError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_positive(value, name, strict=True):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidInputError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value < 0 or (strict and value == 0):
        cmp = "> 0" if strict else ">= 0"
        raise InvalidInputError(f"{name} must be finite and {cmp}, got {value}")
    return value
