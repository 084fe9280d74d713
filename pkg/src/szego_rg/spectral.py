"""Spectral core: frequency grids, spectral fields, transforms, projectors.

A field is stored as complex Fourier coefficients c(k) for k = -n_max..n_max
on either the torus (length 2*pi, freq(k) = k) or a large periodic box of
length L used as a controlled discretization of the line (freq(k) = 2*pi*k/L).

Normalization convention:

    u(x)  = sum_k c(k) exp(i * freq(k) * x)
    c(k)  = (1/length) * int u(x) exp(-i * freq(k) * x) dx

so that (1/length) * int |u|^2 dx = sum_k |c(k)|^2.  The L2 norm used
throughout the package is therefore sqrt(sum |c(k)|^2), and the quartic term
in the energy is (1/4) * (1/length) * int |u|^4 dx.

Cubic products are evaluated pointwise on a physical grid padded by an
oversampling factor >= 2 and truncated back to |k| <= n_max, which makes the
spectral convolution of a cubic term exact (no aliasing into retained modes).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.fft import fft, ifft, next_fast_len

TWO_PI = 2.0 * np.pi

# Floor used in relative-drift denominators so identically-zero invariants
# do not divide by zero.
DRIFT_FLOOR = 1e-30

MIN_N_MAX = 4


class Domain(enum.Enum):
    """Geometry of the periodic domain."""

    TORUS = "torus"
    BIGBOX = "bigbox"


@dataclass(frozen=True)
class FrequencyGrid:
    """Symmetric mode grid k = -n_max..n_max with frequencies freq(k).

    On the torus the length is exactly 2*pi and freq(k) = k; on the big box
    freq(k) = 2*pi*k/length.
    """

    n_max: int
    domain: Domain
    length: float

    def __post_init__(self):
        if self.n_max < MIN_N_MAX:
            raise ValueError(f"n_max must be >= {MIN_N_MAX}, got {self.n_max}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.domain is Domain.TORUS and abs(self.length - TWO_PI) > 1e-12:
            raise ValueError("torus grid must have length 2*pi")

    @property
    def size(self) -> int:
        return 2 * self.n_max + 1

    @property
    def modes(self) -> np.ndarray:
        return _grid_modes(self.n_max)

    @property
    def freqs(self) -> np.ndarray:
        return _grid_freqs(self.n_max, self.length)

    @property
    def freq_unit(self) -> float:
        """Frequency of mode k=1, i.e. the mode spacing 2*pi/length."""
        return TWO_PI / self.length

    def freq(self, k: int) -> float:
        if abs(k) > self.n_max:
            raise ValueError(f"mode {k} outside grid range +-{self.n_max}")
        return TWO_PI * k / self.length

    def index(self, k: int) -> int:
        """Array index of mode k (modes stored in order -n_max..n_max)."""
        if abs(k) > self.n_max:
            raise ValueError(f"mode {k} outside grid range +-{self.n_max}")
        return k + self.n_max


@lru_cache(maxsize=32)
def _grid_modes(n_max: int) -> np.ndarray:
    m = np.arange(-n_max, n_max + 1)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=32)
def _grid_freqs(n_max: int, length: float) -> np.ndarray:
    f = TWO_PI * np.arange(-n_max, n_max + 1) / length
    f.setflags(write=False)
    return f


def make_grid(n_max: int, domain: Domain, length: float | None = None) -> FrequencyGrid:
    """Build a grid; a torus grid may omit the length (fixed to 2*pi)."""
    if domain is Domain.TORUS:
        if length is None:
            length = TWO_PI
    elif length is None:
        raise ValueError("big-box grid requires an explicit length")
    return FrequencyGrid(n_max=n_max, domain=domain, length=float(length))


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients on a FrequencyGrid.

    Immutable: the coefficient array is copied on construction and marked
    read-only, so fields can be shared freely across threads.
    """

    grid: FrequencyGrid
    coeff: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeff, dtype=np.complex128, copy=True)
        if c.shape != (self.grid.size,):
            raise ValueError(
                f"coefficient array has shape {c.shape}, expected ({self.grid.size},)"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)

    def __getitem__(self, k: int) -> complex:
        """Coefficient of mode k."""
        return complex(self.coeff[self.grid.index(k)])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coeff + other.coeff)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_grid(other)
        return SpectralField(self.grid, self.coeff - other.coeff)

    def __mul__(self, scalar) -> "SpectralField":
        return SpectralField(self.grid, self.coeff * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeff)

    def _check_same_grid(self, other: "SpectralField"):
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")


def zero_field(grid: FrequencyGrid) -> SpectralField:
    return SpectralField(grid, np.zeros(grid.size, dtype=np.complex128))


def field_from_modes(grid: FrequencyGrid, amplitudes: Mapping[int, complex]) -> SpectralField:
    """Field with the given {mode: amplitude} entries, zero elsewhere."""
    c = np.zeros(grid.size, dtype=np.complex128)
    for k, a in amplitudes.items():
        c[grid.index(k)] = a
    return SpectralField(grid, c)


def random_field(
    grid: FrequencyGrid,
    rng: np.random.Generator,
    decay: float = 1.0,
    hardy: bool = False,
) -> SpectralField:
    """Seeded random field with |c(k)| ~ (1+|k|)^-decay; optionally Hardy."""
    modes = grid.modes
    mag = (1.0 + np.abs(modes)) ** (-decay)
    z = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    c = mag * z
    if hardy:
        c[modes < 0] = 0.0
    return SpectralField(grid, c)


# ---------------------------------------------------------------------------
# transforms


def physical_points(grid: FrequencyGrid, oversample: int = 2) -> int:
    """Number of physical samples for the given padding factor."""
    if oversample < 2:
        raise ValueError("oversample must be >= 2 (cubic dealiasing)")
    return next_fast_len(oversample * grid.size)


def to_physical(f: SpectralField, oversample: int = 2) -> np.ndarray:
    """Samples u(x_j) on an equispaced grid of >= oversample*(2n+1) points."""
    n_pts = physical_points(f.grid, oversample)
    spec = np.zeros(n_pts, dtype=np.complex128)
    spec[f.grid.modes % n_pts] = f.coeff
    return ifft(spec) * n_pts


def from_physical(samples: np.ndarray, grid: FrequencyGrid) -> SpectralField:
    """Inverse of to_physical; truncation to |k| <= n_max is the dealiasing."""
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 1 or samples.size < grid.size:
        raise ValueError(
            f"need at least {grid.size} samples on one axis, got shape {samples.shape}"
        )
    spec = fft(samples) / samples.size
    return SpectralField(grid, spec[grid.modes % samples.size])


def cubic_product(f: SpectralField, oversample: int = 2) -> SpectralField:
    """Dealiased |u|^2 u, evaluated pointwise on the padded physical grid."""
    u = to_physical(f, oversample)
    with np.errstate(over="ignore"):  # let diverging states reach the guard
        return from_physical(np.abs(u) ** 2 * u, f.grid)


def pointwise_product(fields: Sequence[SpectralField], conjugate: Iterable[bool],
                      oversample: int = 4) -> SpectralField:
    """Dealiased pointwise product of several fields, some conjugated.

    The default padding factor 4 keeps products of up to five factors exact
    on the retained modes.
    """
    fields = list(fields)
    grid = fields[0].grid
    n_pts = physical_points(grid, oversample)
    prod = np.ones(n_pts, dtype=np.complex128)
    for g, conj in zip(fields, conjugate, strict=True):
        if g.grid != grid:
            raise ValueError("fields live on different grids")
        spec = np.zeros(n_pts, dtype=np.complex128)
        spec[grid.modes % n_pts] = g.coeff
        u = ifft(spec) * n_pts
        prod *= np.conj(u) if conj else u
    return from_physical(prod, grid)


# ---------------------------------------------------------------------------
# projectors and multipliers


def project_plus(f: SpectralField) -> SpectralField:
    """Szego projector: keep modes with freq(k) >= 0 (k = 0 included)."""
    c = f.coeff.copy()
    c[f.grid.modes < 0] = 0.0
    return SpectralField(f.grid, c)


def project_minus(f: SpectralField) -> SpectralField:
    """Complement of project_plus; project_plus(f) + project_minus(f) = f."""
    c = f.coeff.copy()
    c[f.grid.modes >= 0] = 0.0
    return SpectralField(f.grid, c)


def apply_abs_D(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, np.abs(f.grid.freqs) * f.coeff)


def apply_D(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, f.grid.freqs * f.coeff)


def apply_inv_D_minus(f: SpectralField) -> SpectralField:
    """(1/D) Pi_-: divide by freq(k) for k <= -1, zero for k >= 0.

    Never singular: mode 0 belongs to Pi_+.  On a big box the k = -1 mode
    divides by -2*pi/L, an O(L) amplification that callers report rather
    than reject.
    """
    modes = f.grid.modes
    c = np.zeros_like(f.coeff)
    neg = modes < 0
    c[neg] = f.coeff[neg] / f.grid.freqs[neg]
    return SpectralField(f.grid, c)


def conjugate_field(f: SpectralField) -> SpectralField:
    """Coefficients of conj(u): c(k) -> conj(c(-k))."""
    return SpectralField(f.grid, np.conj(f.coeff[::-1]))


def free_flow(f: SpectralField, t: float) -> SpectralField:
    """Propagator exp(-i|D|t): multiply c(k) by exp(-i |freq(k)| t)."""
    return SpectralField(f.grid, np.exp(-1j * np.abs(f.grid.freqs) * t) * f.coeff)


# ---------------------------------------------------------------------------
# norms and conserved quantities


def l2_norm_sq(f: SpectralField) -> float:
    return float(np.sum(np.abs(f.coeff) ** 2))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm: ( sum (1 + freq^2)^s |c(k)|^2 )^(1/2), s >= 0."""
    if s < 0:
        raise ValueError("sobolev_norm requires s >= 0")
    w = (1.0 + f.grid.freqs**2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeff) ** 2)))


def negative_mode_mass(f: SpectralField) -> float:
    """Squared L2 mass carried by modes k < 0 (Hardy defect)."""
    return float(np.sum(np.abs(f.coeff[f.grid.modes < 0]) ** 2))


def quartic_mean(f: SpectralField, oversample: int = 2) -> float:
    """(1/length) * int |u|^4 dx, exact on the padded grid."""
    u = to_physical(f, oversample)
    with np.errstate(over="ignore"):  # blown-up states evaluate to inf
        return float(np.mean(np.abs(u) ** 4))


def mass(f: SpectralField) -> float:
    """Q = sum |c(k)|^2."""
    return l2_norm_sq(f)


def momentum(f: SpectralField) -> float:
    """M = sum freq(k) |c(k)|^2."""
    return float(np.sum(f.grid.freqs * np.abs(f.coeff) ** 2))


def energy(f: SpectralField) -> float:
    """E = (1/2) sum |freq(k)| |c(k)|^2 + (1/4) (1/length) int |u|^4 dx."""
    kinetic = 0.5 * float(np.sum(np.abs(f.grid.freqs) * np.abs(f.coeff) ** 2))
    return kinetic + 0.25 * quartic_mean(f)


@dataclass(frozen=True)
class ConservedReport:
    """Time series of conserved quantities with relative drift statistics."""

    times: np.ndarray
    energy: np.ndarray
    mass: np.ndarray
    momentum: np.ndarray
    h_half: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.times)
        for name in ("energy", "mass", "momentum"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} series length differs from times")
        if self.h_half is not None and len(self.h_half) != n:
            raise ValueError("h_half series length differs from times")

    def max_rel_drift(self, name: str) -> float:
        series = getattr(self, name)
        if series is None:
            raise ValueError(f"no series {name!r}")
        q0 = series[0]
        return float(np.max(np.abs(series - q0)) / max(abs(q0), DRIFT_FLOOR))

    def drifts(self) -> dict[str, float]:
        out = {name: self.max_rel_drift(name) for name in ("energy", "mass", "momentum")}
        if self.h_half is not None:
            out["h_half"] = self.max_rel_drift("h_half")
        return out


def conserved_series(times: Sequence[float], states: Sequence[SpectralField],
                     with_h_half: bool = False) -> ConservedReport:
    """Evaluate E, Q, M (and optionally the H^{1/2} norm) along a trajectory."""
    e = np.array([energy(f) for f in states])
    q = np.array([mass(f) for f in states])
    m = np.array([momentum(f) for f in states])
    hh = np.array([sobolev_norm(f, 0.5) for f in states]) if with_h_half else None
    return ConservedReport(np.asarray(times, dtype=float), e, q, m, hh)
