"""Fourier infrastructure on square periodic grids.

A :class:`Grid2D` owns the wavenumber arrays, dealias mask and
Littlewood-Paley windows for an ``n x n`` grid on ``[0, L)^2`` and exposes the
spectral operations used everywhere else: derivatives, the zero-mean inverse
Laplacian, Riesz transforms, dyadic frequency projections and Sobolev norms.

Discrete norms approximate their continuum counterparts: ``norm2`` carries
the quadrature weight ``(L/n)^d`` so that Plancherel holds exactly between
``norm2`` and ``sobolev_norm(..., s=0)``.  A single Fourier mode
``A * exp(i k.x)`` has ``sobolev_norm = |A| * (1 + |k|^2)^(s/2) * L^(d/2)``.

Grids are immutable; derived arrays are computed once and cached, which
doubles as the FFT "plan" cache (all cached arrays are read-only views).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonzeroMeanError
from .windows import PLATEAU_EDGE, lp_annulus_window, lp_low_window

__all__ = ["Grid1D", "Grid2D", "MEAN_TOL_FACTOR"]

# An inverse Laplacian is refused (rather than silently projected) when the
# data mean exceeds this factor times the L2 norm of the data.
MEAN_TOL_FACTOR = 1e-10


def _validate_size(n: int) -> None:
    if n < 8 or n % 2 != 0:
        raise ValueError(f"grid size must be even and >= 8, got {n}")
    if n & (n - 1) != 0:
        raise ValueError(f"grid size must be a power of two, got {n}")


def _real_like(template: np.ndarray, values: np.ndarray) -> np.ndarray:
    return values.real if not np.iscomplexobj(template) else values


@dataclass(frozen=True)
class Grid1D:
    """Periodic interval [0, length) sampled at n points."""

    n: int
    length: float

    def __post_init__(self):
        _validate_size(self.n)
        if not self.length > 0:
            raise ValueError("length must be positive")

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * (self.length / self.n)

    @cached_property
    def k(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.length / self.n)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fft(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.ifft(fh)

    def dx(self, f: np.ndarray) -> np.ndarray:
        out = np.fft.ifft(1j * self.k * np.fft.fft(f))
        return _real_like(f, out)

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        out = np.fft.ifft(-(self.k**2) * np.fft.fft(f))
        return _real_like(f, out)

    def antiderivative_zero_mean(self, f: np.ndarray) -> np.ndarray:
        """Zero-mean solution of g' = f - mean(f)."""
        fh = np.fft.fft(f)
        gh = np.zeros_like(fh)
        nz = self.k != 0
        gh[nz] = fh[nz] / (1j * self.k[nz])
        return _real_like(f, np.fft.ifft(gh))

    def norm2(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.spacing))

    def sobolev_norm(self, f: np.ndarray, s: float) -> float:
        coeff = np.fft.fft(f) / self.n
        weight = (1.0 + self.k**2) ** s
        return float(np.sqrt(self.length * np.sum(weight * np.abs(coeff) ** 2)))


@dataclass(frozen=True)
class Grid2D:
    """Periodic square [0, length)^2 sampled at n x n points."""

    n: int
    length: float

    def __post_init__(self):
        _validate_size(self.n)
        if not self.length > 0:
            raise ValueError("length must be positive")

    # -- coordinates and wavenumbers -------------------------------------

    @cached_property
    def x(self) -> np.ndarray:
        """x coordinate, shape (n, n), varying along axis 0."""
        ax = np.arange(self.n) * (self.length / self.n)
        return np.broadcast_to(ax[:, None], (self.n, self.n)).copy()

    @cached_property
    def y(self) -> np.ndarray:
        ax = np.arange(self.n) * (self.length / self.n)
        return np.broadcast_to(ax[None, :], (self.n, self.n)).copy()

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer frequencies in FFT storage order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def kx(self) -> np.ndarray:
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.length / self.n)
        return np.broadcast_to(k1[:, None], (self.n, self.n)).copy()

    @cached_property
    def ky(self) -> np.ndarray:
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.length / self.n)
        return np.broadcast_to(k1[None, :], (self.n, self.n)).copy()

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.k2)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep integer frequencies with \|m\| <= n/3."""
        keep = np.abs(self.modes) <= self.n // 3
        return keep[:, None] & keep[None, :]

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    # -- transforms and derivatives --------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.fft2(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(fh)

    def dx(self, f: np.ndarray) -> np.ndarray:
        return _real_like(f, np.fft.ifft2(1j * self.kx * np.fft.fft2(f)))

    def dy(self, f: np.ndarray) -> np.ndarray:
        return _real_like(f, np.fft.ifft2(1j * self.ky * np.fft.fft2(f)))

    def derivative(self, f: np.ndarray, axis: int) -> np.ndarray:
        return self.dx(f) if axis == 0 else self.dy(f)

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return _real_like(f, np.fft.ifft2(-self.k2 * np.fft.fft2(f)))

    def mean(self, f: np.ndarray):
        return np.mean(f)

    def project_mean(self, f: np.ndarray) -> np.ndarray:
        return f - np.mean(f)

    def inverse_laplacian(self, f: np.ndarray, project_mean: bool = True) -> np.ndarray:
        """Zero-mean solution of ``laplacian g = f``.

        With ``project_mean`` the zero mode of ``f`` is discarded; otherwise a
        mean exceeding ``MEAN_TOL_FACTOR * norm2(f)`` raises
        :class:`NonzeroMeanError`.
        """
        m = np.mean(f)
        if not project_mean and abs(m) > MEAN_TOL_FACTOR * max(self.norm2(f), 1e-300):
            raise NonzeroMeanError(
                f"inverse Laplacian of data with mean {abs(m):.3e} "
                f"(tolerance {MEAN_TOL_FACTOR:.1e} * ||f||)"
            )
        fh = np.fft.fft2(f)
        gh = np.zeros_like(fh)
        nz = self.k2 > 0
        gh[nz] = fh[nz] / (-self.k2[nz])
        return _real_like(f, np.fft.ifft2(gh))

    def riesz(self, axis: int, f: np.ndarray) -> np.ndarray:
        """Riesz transform R_axis f with multiplier k_axis / |k| (0 at k=0).

        The multiplier is odd and real, so a single transform of a real
        field is purely imaginary; the result is therefore always returned
        complex.  Compositions of two transforms map real back to real.
        """
        kj = self.kx if axis == 0 else self.ky
        mult = np.zeros(self.shape)
        nz = self.kmag > 0
        mult[nz] = kj[nz] / self.kmag[nz]
        return np.fft.ifft2(mult * np.fft.fft2(f))

    def dealias(self, f: np.ndarray) -> np.ndarray:
        return _real_like(f, np.fft.ifft2(self.dealias_mask * np.fft.fft2(f)))

    # -- Littlewood-Paley decomposition -----------------------------------

    @cached_property
    def lp_levels(self) -> tuple[int, ...]:
        """Dyadic levels (0 marks the low block) covering the whole grid."""
        kmax = float(np.max(self.kmag))
        top = 1
        while top < kmax:
            top *= 2
        levels = [0]
        level = 1
        while level <= top:
            levels.append(level)
            level *= 2
        return tuple(levels)

    def lp_window(self, level: int) -> np.ndarray:
        """Frequency-space window of one dyadic block, evaluated on the grid."""
        if level == 0:
            return lp_low_window(self.kmag)
        if level < 1 or level & (level - 1) != 0:
            raise ValueError(f"level must be 0 or a power of two, got {level}")
        return lp_annulus_window(self.kmag, float(level))

    def lp_project(self, f: np.ndarray, level: int) -> np.ndarray:
        return _real_like(f, np.fft.ifft2(self.lp_window(level) * np.fft.fft2(f)))

    # -- norms -------------------------------------------------------------

    def norm2(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2)) * self.spacing)

    def sobolev_norm(self, f: np.ndarray, s: float) -> float:
        coeff = np.fft.fft2(f) / self.n**2
        weight = (1.0 + self.k2) ** s
        return float(self.length * np.sqrt(np.sum(weight * np.abs(coeff) ** 2)))

    def integral(self, f: np.ndarray):
        """Grid quadrature of f over the box (spectrally exact for smooth f)."""
        val = np.sum(f) * self.spacing**2
        return float(val.real) if not np.iscomplexobj(f) else complex(val)
