"""Shape-based distance between equal-length load profiles.

The distance between two sequences is ``1 - max_w NCC_w(x, y)`` where
``NCC_w`` is the cross-correlation at shift ``w`` divided by the geometric
mean of the two zero-lag autocorrelations (coefficient normalization).
Cross-correlations are evaluated with a real FFT padded to a 5-smooth
length so the whole lag range costs ``O(m log m)``.

Conventions, fixed once here and relied on everywhere else:

* ``ncc_sequence(x, y)`` has length ``2m - 1``; entry ``w`` corresponds to
  shift ``s = w - (m - 1)``, i.e. the correlation of ``x`` with ``y``
  shifted right by ``s`` (zero-padded, truncated to length ``m``).
* ``sbd(x, y).shift`` is the shift to pass to ``align(y, shift)`` so that
  ``y`` lines up with ``x``.
* Equal-NCC ties resolve to the smallest ``|shift|``, then to the negative
  one, which keeps results deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft

from .errors import HeatPatternsError


class ZeroNormInput(HeatPatternsError):
    """A correlation input has zero Euclidean norm."""


class ShiftOutOfRange(HeatPatternsError):
    """|shift| must be strictly smaller than the sequence length."""


@dataclass(frozen=True)
class SbdResult:
    """Distance in [0, 2] plus the shift achieving the best alignment."""

    distance: float
    shift: int


def _fft_length(m: int) -> int:
    # smallest 5-smooth size that holds the full 2m-1 lag range
    return next_fast_len(2 * m - 1, real=True)


@lru_cache(maxsize=32)
def _lag_order(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Column permutation putting lags in tie-break preference order.

    Returns ``(perm, shifts)`` where ``shifts[j]`` is the shift of permuted
    column ``j``. Taking the first argmax over permuted columns therefore
    honours the (|shift| ascending, negative first) tie rule.
    """
    shifts = np.arange(2 * m - 1) - (m - 1)
    perm = np.lexsort((shifts, np.abs(shifts)))
    order = perm.copy()
    order.setflags(write=False)
    ordered_shifts = shifts[perm]
    ordered_shifts.setflags(write=False)
    return order, ordered_shifts


def _as_row_matrix(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ValueError("expected a vector or a matrix of row vectors")
    return arr


def _check_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size < 2:
        raise ValueError(f"{name} must have length >= 2")
    return arr


class RowSpectra:
    """Cached real-FFT spectra for a fixed matrix of equal-length rows.

    k-shape iterations and pairwise matrices correlate the same rows against
    many references; caching the forward transforms once makes every later
    correlation a multiply plus one inverse FFT.
    """

    def __init__(self, rows):
        x = _as_row_matrix(rows)
        if x.shape[1] < 2:
            raise ValueError("rows must have length >= 2")
        self.values = x
        self.m = x.shape[1]
        self.nfft = _fft_length(self.m)
        self.norms = np.linalg.norm(x, axis=1)
        if np.any(self.norms == 0.0):
            raise ZeroNormInput("zero-norm row in correlation input")
        self.spectra = rfft(x, self.nfft, axis=1)

    def _ref_spectrum(self, ref: np.ndarray) -> tuple[np.ndarray, float]:
        if ref.shape != (self.m,):
            raise ValueError("reference length does not match rows")
        norm = float(np.linalg.norm(ref))
        if norm == 0.0:
            raise ZeroNormInput("zero-norm reference in correlation input")
        return rfft(ref, self.nfft), norm

    def _max_over_lags(self, cc: np.ndarray, scale: np.ndarray):
        m = self.m
        seq = np.concatenate((cc[:, self.nfft - (m - 1):], cc[:, :m]), axis=1)
        seq /= scale[:, np.newaxis]
        order, shifts = _lag_order(m)
        ordered = seq[:, order]
        best = ordered.argmax(axis=1)
        vals = ordered[np.arange(ordered.shape[0]), best]
        return vals, shifts[best]

    def ncc_max(self, ref) -> tuple[np.ndarray, np.ndarray]:
        """Per row r: max NCC and best shift of ``sbd(row_r, ref)``."""
        ref = np.asarray(ref, dtype=np.float64)
        f_ref, norm_ref = self._ref_spectrum(ref)
        cc = irfft(self.spectra * np.conj(f_ref), self.nfft, axis=1)
        return self._max_over_lags(cc, self.norms * norm_ref)

    def ncc_max_reversed(self, ref) -> tuple[np.ndarray, np.ndarray]:
        """Per row r: max NCC and best shift of ``sbd(ref, row_r)``.

        The returned shifts align each row toward ``ref`` via ``align``.
        """
        ref = np.asarray(ref, dtype=np.float64)
        f_ref, norm_ref = self._ref_spectrum(ref)
        cc = irfft(f_ref * np.conj(self.spectra), self.nfft, axis=1)
        return self._max_over_lags(cc, self.norms * norm_ref)

    def distances_to(self, ref) -> np.ndarray:
        """Shape-based distances of every row to ``ref``, clipped to [0, 2]."""
        vals, _ = self.ncc_max(ref)
        return np.clip(1.0 - vals, 0.0, 2.0)


def ncc_sequence(x, y) -> np.ndarray:
    """Coefficient-normalized cross-correlation of ``x`` against ``y``.

    Returns all ``2m - 1`` lags; entry ``w`` holds the shift ``w - (m - 1)``.
    """
    x = _check_vector(x, "x")
    y = _check_vector(y, "y")
    if x.shape != y.shape:
        raise ValueError("x and y must have the same length")
    m = x.size
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ZeroNormInput("zero-norm input to ncc_sequence")
    nfft = _fft_length(m)
    cc = irfft(rfft(x, nfft) * np.conj(rfft(y, nfft)), nfft)
    seq = np.concatenate((cc[nfft - (m - 1):], cc[:m]))
    return seq / (nx * ny)


def sbd(x, y) -> SbdResult:
    """Shape-based distance plus the maximizing shift."""
    seq = ncc_sequence(x, y)
    m = (seq.size + 1) // 2
    order, shifts = _lag_order(m)
    ordered = seq[order]
    best = int(ordered.argmax())
    distance = float(np.clip(1.0 - ordered[best], 0.0, 2.0))
    return SbdResult(distance=distance, shift=int(shifts[best]))


def align(y, shift: int) -> np.ndarray:
    """Shift ``y`` by ``shift`` positions with zero padding, same length."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("y must be one-dimensional")
    m = y.size
    if abs(shift) >= m:
        raise ShiftOutOfRange(f"|shift| = {abs(shift)} must be < {m}")
    out = np.zeros(m, dtype=np.float64)
    if shift >= 0:
        out[shift:] = y[: m - shift]
    else:
        out[: m + shift] = y[-shift:]
    return out


def pairwise_distances(rows) -> np.ndarray:
    """Symmetric matrix of shape-based distances between all rows."""
    spectra = RowSpectra(rows)
    n, m, nfft = spectra.values.shape[0], spectra.m, spectra.nfft
    dist = np.zeros((n, n), dtype=np.float64)
    for i in range(n - 1):
        cc = irfft(spectra.spectra[i] * np.conj(spectra.spectra[i + 1:]),
                   nfft, axis=1)
        seq = np.concatenate((cc[:, nfft - (m - 1):], cc[:, :m]), axis=1)
        best = seq.max(axis=1) / (spectra.norms[i] * spectra.norms[i + 1:])
        row = np.clip(1.0 - best, 0.0, 2.0)
        dist[i, i + 1:] = row
        dist[i + 1:, i] = row
    return dist
