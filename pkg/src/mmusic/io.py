"""Plain-text file formats: samples, masks, profiles and plot series.

* samples file: one pulse per line, ``real,imag`` (commas or whitespace).
* mask file: one ``0``/``1`` flag per line.
* profile / plot files: comma-separated with a one-line header, optionally
  preceded by ``# key: value`` comment lines.

Floats are written with ``repr`` so files round-trip exactly and identical
inputs give byte-identical output.
"""

import io

import numpy as np

from ._validation import check_positive
from .exceptions import InvalidInputError
from .signal_model import AvailabilityMask

PROFILE_COLUMNS = ("range_m", "delay_s", "amplitude_re", "amplitude_im", "magnitude_db")


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _read_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def read_samples(path):
    """Complex samples from a two-column (real, imag) text file."""
    values = []
    for lineno, line in _read_lines(path):
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise InvalidInputError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
        try:
            values.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise InvalidInputError(f"{path}:{lineno}: not a number: {line!r}")
    if not values:
        raise InvalidInputError(f"{path}: no samples")
    return np.array(values, dtype=np.complex128)


def write_samples(path, samples):
    with open(path, "w", encoding="utf-8") as fh:
        for z in np.asarray(samples, dtype=np.complex128):
            fh.write(f"{fmt(z.real)},{fmt(z.imag)}\n")


def read_mask(path):
    flags = []
    for lineno, line in _read_lines(path):
        if line not in ("0", "1"):
            raise InvalidInputError(f"{path}:{lineno}: mask flag must be 0 or 1, got {line!r}")
        flags.append(line == "1")
    if not flags:
        raise InvalidInputError(f"{path}: empty mask")
    return AvailabilityMask(np.array(flags, dtype=bool))


def format_mask(mask):
    return "".join("1\n" if f else "0\n" for f in mask.flags)


def write_mask(path, mask):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_mask(mask))


def _comment_block(meta):
    return "".join(f"# {k}: {v}\n" for k, v in (meta or {}).items())


def format_table(columns, rows, meta=None):
    buf = io.StringIO()
    buf.write(_comment_block(meta))
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def format_profile(profile, meta=None):
    rows = zip(
        profile.ranges,
        profile.delays,
        profile.amplitudes.real,
        profile.amplitudes.imag,
        profile.magnitude_db,
    )
    return format_table(PROFILE_COLUMNS, rows, meta)


def emit_profile_plotdata(profile, resolution_m, span_m):
    """Impulse series on a range axis ``0, resolution, 2*resolution, ... < span``.

    Each scatterer is placed at its nearest axis sample; when two land on the
    same sample the stronger one is kept. Scatterers beyond the span are
    dropped. Returns ``{"range_m": ..., "magnitude_db": ...}`` sorted by range.
    """
    resolution_m = check_positive(resolution_m, "resolution_m")
    span_m = check_positive(span_m, "span_m")
    bins = {}
    for r, db in zip(profile.ranges, profile.magnitude_db):
        k = int(np.rint(r / resolution_m))
        if k * resolution_m >= span_m or k < 0:
            continue
        if k not in bins or db > bins[k]:
            bins[k] = float(db)
    keys = sorted(bins)
    return {
        "range_m": np.array([k * resolution_m for k in keys], dtype=float),
        "magnitude_db": np.array([bins[k] for k in keys], dtype=float),
    }


def format_plotdata(series, meta=None):
    return format_table(
        ("range_m", "magnitude_db"), zip(series["range_m"], series["magnitude_db"]), meta
    )
