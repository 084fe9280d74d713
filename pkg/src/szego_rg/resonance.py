"""Resonant / oscillatory splitting of the cubic half-wave nonlinearity.

Everything here operates on the interaction-picture nonlinearity

    f(u, t) = -i exp(i|D|t) ( |exp(-i|D|t) u|^2 exp(-i|D|t) u ),

whose Fourier coefficients are quadruple sums over modes (k; l, m, j) tied by
the momentum constraint k - l + m - j = 0, with the combination

    phi = |k| - |l| + |m| - |j|

acting as the oscillation frequency of each summand: the factor exp(i*t*phi)
carries the whole time dependence.  Quadruples with phi = 0 form the resonant
set; their contribution f_res(u) is time independent and drives the effective
dynamics.  The rest is the oscillatory part f_osc(u, t), whose antiderivative
in t is F_osc.

Two antiderivative conventions coexist:

  * torus: the unique zero-mean-in-t primitive, term weight exp(i*t*phi)/(i*phi);
  * line:  the primitive vanishing at t = 0, weight (exp(i*t*phi) - 1)/(i*phi).

Closed forms are provided for f_res on both geometries, for F_osc on the box
with Hardy input (where the phase collapses to -2*xi on output frequency xi),
and for the resonant quintic kernel r2 = {f'(W,t).F_osc(W,t)}_res with Hardy
input.  Every closed form has a direct-summation brute-force oracle in this
module; the two routes share nothing but the field type.

In brute-force sums the inner mode indices are confined to the grid range
|k| <= n_max, consistent with compositions through grid-truncated fields
(vacuous for Hardy inputs, where all intermediate modes are in range anyway).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import (
    Domain,
    SpectralField,
    apply_inv_D_minus,
    cubic_product,
    free_flow,
    l2_norm_sq,
    negative_mode_mass,
    pointwise_product,
    project_minus,
    project_plus,
)

HARDY_TOL = 1e-12

# Quintic brute-force kernels enumerate a 4-dimensional index box per output
# mode; keep them to oracle-sized grids.
MAX_QUINTIC_N_MAX = 12
MAX_CUBIC_N_MAX = 96


def require_hardy(f: SpectralField, tol: float = HARDY_TOL, what: str = "input"):
    """Reject fields whose negative-mode mass exceeds tol (relative)."""
    neg = negative_mode_mass(f)
    if neg > tol * max(l2_norm_sq(f), 1e-300):
        raise ValueError(
            f"{what} must be a Hardy field (negative-mode mass {neg:.3e} above tolerance)"
        )


# ---------------------------------------------------------------------------
# phase and resonant-set predicates


def phase(grid, k: int, l: int, m: int, j: int) -> float:
    """|freq(k)| - |freq(l)| + |freq(m)| - |freq(j)|."""
    return (
        abs(grid.freq(k)) - abs(grid.freq(l)) + abs(grid.freq(m)) - abs(grid.freq(j))
    )


@dataclass(frozen=True)
class Quadruple:
    """Mode quadruple (k; l, m, j) subject to k - l + m - j = 0.

    k is the output mode; l and j enter the cubic sum holomorphically and m
    through a conjugate factor.
    """

    k: int
    l: int
    m: int
    j: int

    def __post_init__(self):
        _check_momentum(self.k, self.l, self.m, self.j)

    def phase(self, grid) -> float:
        return phase(grid, self.k, self.l, self.m, self.j)

    def phase_index(self) -> int:
        """Integer phase |k| - |l| + |m| - |j| on mode indices."""
        return abs(self.k) - abs(self.l) + abs(self.m) - abs(self.j)

    def is_resonant(self, grid) -> bool:
        if grid.domain is Domain.TORUS:
            return is_resonant_torus(self.k, self.l, self.m, self.j)
        return is_resonant_line(grid, self.k, self.l, self.m, self.j)


def _check_momentum(k: int, l: int, m: int, j: int):
    if k - l + m - j != 0:
        raise ValueError(f"momentum constraint violated: {k}-{l}+{m}-{j} != 0")


def is_resonant_torus(k: int, l: int, m: int, j: int) -> bool:
    """Integer-mode resonance test on the torus.

    With k - l + m - j = 0, the phase |k|-|l|+|m|-|j| vanishes exactly when
    k > 0 and (l,m,j all >= 0, or k = l, or k = j); k = 0 and l,m,j share a
    sign class; k < 0 and the mirrored conditions hold.
    """
    _check_momentum(k, l, m, j)
    if k > 0:
        return (l >= 0 and m >= 0 and j >= 0) or k == l or k == j
    if k < 0:
        return (l <= 0 and m <= 0 and j <= 0) or k == l or k == j
    return (l >= 0 and m >= 0 and j >= 0) or (l <= 0 and m <= 0 and j <= 0)


def is_resonant_line(grid, k: int, l: int, m: int, j: int) -> bool:
    """Resonance test for box frequencies: all four in one (closed) sign
    class, or the diagonal cases k = l, k = j.

    Frequencies are integer multiples of 2*pi/length, so the test is exact
    integer arithmetic; no floating-point classification.
    """
    del grid  # frequencies are rational multiples of one unit; signs suffice
    _check_momentum(k, l, m, j)
    if k == l or k == j:
        return True
    if k >= 0 and l >= 0 and m >= 0 and j >= 0:
        return True
    return k <= 0 and l <= 0 and m <= 0 and j <= 0


# ---------------------------------------------------------------------------
# cached index meshes for the per-output-mode kernel sums


@lru_cache(maxsize=16)
def _lm_mesh(n_max: int):
    modes = np.arange(-n_max, n_max + 1)
    L, M = np.meshgrid(modes, modes, indexing="ij")
    for a in (L, M):
        a.setflags(write=False)
    return L, M


@lru_cache(maxsize=4)
def _lmnp_mesh(n_max: int):
    modes = np.arange(-n_max, n_max + 1)
    A, B, C, D = np.meshgrid(modes, modes, modes, modes, indexing="ij")
    for a in (A, B, C, D):
        a.setflags(write=False)
    return A, B, C, D


def _gather(coeff: np.ndarray, modes: np.ndarray, n_max: int) -> np.ndarray:
    """coeff at the given mode array; out-of-range entries read as mode 0
    (callers must mask them out)."""
    idx = np.clip(modes + n_max, 0, 2 * n_max)
    return coeff[idx]


def _resonant_mask(domain: Domain, k: int, L, M, J):
    nonneg = (L >= 0) & (M >= 0) & (J >= 0)
    nonpos = (L <= 0) & (M <= 0) & (J <= 0)
    if domain is Domain.TORUS:
        if k > 0:
            return nonneg | (L == k) | (J == k)
        if k < 0:
            return nonpos | (L == k) | (J == k)
        return nonneg | nonpos
    if k > 0:
        return nonneg | (L == k) | (J == k)
    if k < 0:
        return nonpos | (L == k) | (J == k)
    return nonneg | nonpos | (L == k) | (J == k)


def _sign_uniform_mask(k: int, L, M, J):
    """Support of the two-term line closed form: all four modes non-negative,
    or all four strictly negative (mode 0 counts as the + class)."""
    if k >= 0:
        return (L >= 0) & (M >= 0) & (J >= 0)
    return (L < 0) & (M < 0) & (J < 0)


def _check_cubic_size(grid):
    if grid.n_max > MAX_CUBIC_N_MAX:
        raise ValueError(
            f"direct kernel sums are limited to n_max <= {MAX_CUBIC_N_MAX}"
        )


# ---------------------------------------------------------------------------
# the full nonlinearity and its resonant part


def f_full(u: SpectralField, t: float) -> SpectralField:
    """f(u,t) = -i exp(i|D|t)(|v|^2 v), v = exp(-i|D|t) u, via FFT products."""
    v = free_flow(u, t)
    c = cubic_product(v)
    return SpectralField(u.grid, -1j * free_flow(c, -t).coeff)


def f_res_bruteforce(u: SpectralField, sign_uniform_only: bool = False) -> SpectralField:
    """Direct sum of -i * u(j) u(l) conj(u(m)) over resonant quadruples.

    With sign_uniform_only=True the sum is restricted to quadruples whose
    four modes share a sign class; the dropped quadruples (diagonals k = l,
    k = j and the zero-mode-coupled all-nonpositive cases) are the discrete
    leftovers of sets of measure zero in the continuum resonant set, and form
    exactly the difference with the two-term line closed form.
    """
    grid = u.grid
    _check_cubic_size(grid)
    n = grid.n_max
    L, M = _lm_mesh(n)
    w = u.coeff
    out = np.zeros(grid.size, dtype=np.complex128)
    for k in grid.modes:
        J = k - L + M
        valid = np.abs(J) <= n
        if sign_uniform_only:
            mask = valid & _sign_uniform_mask(k, L, M, J)
        else:
            mask = valid & _resonant_mask(grid.domain, k, L, M, J)
        terms = _gather(w, J, n) * _gather(w, L, n) * np.conj(_gather(w, M, n))
        out[k + n] = -1j * terms[mask].sum()
    return SpectralField(grid, out)


def f_res_closed_torus(u: SpectralField) -> SpectralField:
    """Ten-term closed form of the torus resonant kernel.

    Grouping the resonant quadruples by sign pattern gives

        f_res(u) = -i [ P+(|u+|^2 u+) + 2 ||u-||^2 u+
                        + F(|u-|^2 u-)(0) delta_{k=0}
                        + P-(|u-|^2 u-) + 2 u^(0) P-(|u-|^2)
                        + conj(u^(0)) u-^2 + 2 ||u+||^2 u- ]

    with u^(0) the zero-mode coefficient and ||.||^2 = sum |c(k)|^2.
    """
    if u.grid.domain is not Domain.TORUS:
        raise ValueError("f_res_closed_torus requires a torus grid")
    grid = u.grid
    up = project_plus(u)
    um = project_minus(u)
    cube_p = cubic_product(up)
    cube_m = cubic_product(um)
    q_plus = l2_norm_sq(up)
    q_minus = l2_norm_sq(um)
    u0 = u.coeff[grid.index(0)]
    abs_minus_sq = pointwise_product([um, um], [False, True], oversample=2)
    minus_sq = pointwise_product([um, um], [False, False], oversample=2)

    c = project_plus(cube_p).coeff.copy()
    c += 2.0 * q_minus * up.coeff
    c[grid.index(0)] += cube_m.coeff[grid.index(0)]
    c += project_minus(cube_m).coeff
    c += 2.0 * u0 * project_minus(abs_minus_sq).coeff
    c += np.conj(u0) * minus_sq.coeff
    c += 2.0 * q_plus * um.coeff
    return SpectralField(grid, -1j * c)


def f_res_closed_line(u: SpectralField) -> SpectralField:
    """Two-term line closed form -i(P+(|u+|^2 u+) + P-(|u-|^2 u-)).

    Equals the sign-uniform brute-force sum; the diagonal and zero-coupled
    quadruples it drops are reported by measure_zero_split.
    """
    if u.grid.domain is not Domain.BIGBOX:
        raise ValueError("f_res_closed_line requires a big-box grid")
    up = project_plus(u)
    um = project_minus(u)
    c = project_plus(cubic_product(up)).coeff + project_minus(cubic_product(um)).coeff
    return SpectralField(u.grid, -1j * c)


def f_res_closed(u: SpectralField) -> SpectralField:
    """Domain dispatch between the torus and line closed forms."""
    if u.grid.domain is Domain.TORUS:
        return f_res_closed_torus(u)
    return f_res_closed_line(u)


def measure_zero_split(u: SpectralField) -> dict[str, float]:
    """L2 size of the resonant contributions the line closed form drops.

    Returns the norms of the diagonal part ({l=k} or {j=k} outside the
    sign-uniform set) and of the zero-mode-coupled part, each weighted by a
    single 1/L-spaced mode layer in the continuum limit.
    """
    grid = u.grid
    _check_cubic_size(grid)
    n = grid.n_max
    L, M = _lm_mesh(n)
    w = u.coeff
    diag = np.zeros(grid.size, dtype=np.complex128)
    zero = np.zeros(grid.size, dtype=np.complex128)
    for k in grid.modes:
        J = k - L + M
        valid = np.abs(J) <= n
        res = valid & _resonant_mask(grid.domain, k, L, M, J)
        uni = valid & _sign_uniform_mask(k, L, M, J)
        extra = res & ~uni
        diag_mask = extra & ((L == k) | (J == k))
        zero_mask = extra & ~diag_mask
        terms = _gather(w, J, n) * _gather(w, L, n) * np.conj(_gather(w, M, n))
        diag[k + n] = -1j * terms[diag_mask].sum()
        zero[k + n] = -1j * terms[zero_mask].sum()
    return {
        "diagonal": float(np.linalg.norm(diag)),
        "zero_coupled": float(np.linalg.norm(zero)),
    }


# ---------------------------------------------------------------------------
# oscillatory part and its antiderivative


def f_osc(u: SpectralField, t: float) -> SpectralField:
    """Brute-force sum of -i exp(i t phi) u(j) u(l) conj(u(m)) over phi != 0."""
    grid = u.grid
    _check_cubic_size(grid)
    n = grid.n_max
    unit = grid.freq_unit
    L, M = _lm_mesh(n)
    w = u.coeff
    out = np.zeros(grid.size, dtype=np.complex128)
    for k in grid.modes:
        J = k - L + M
        valid = np.abs(J) <= n
        mask = valid & ~_resonant_mask(grid.domain, k, L, M, J)
        if not mask.any():
            continue
        phi = (abs(k) - np.abs(L) + np.abs(M) - np.abs(J))[mask] * unit
        terms = (
            _gather(w, J, n) * _gather(w, L, n) * np.conj(_gather(w, M, n))
        )[mask]
        out[k + n] = -1j * np.sum(np.exp(1j * t * phi) * terms)
    return SpectralField(grid, out)


def osc_primitive_bruteforce(
    u: SpectralField, t: float, from_zero: bool
) -> SpectralField:
    """Phase-weighted quadruple sum for the antiderivative of f_osc.

    Term weights: exp(i t phi)/(i phi) (zero t-mean, the torus convention) or
    (exp(i t phi) - 1)/(i phi) (vanishing at t = 0, the line convention).
    """
    grid = u.grid
    _check_cubic_size(grid)
    n = grid.n_max
    unit = grid.freq_unit
    L, M = _lm_mesh(n)
    w = u.coeff
    out = np.zeros(grid.size, dtype=np.complex128)
    for k in grid.modes:
        J = k - L + M
        valid = np.abs(J) <= n
        mask = valid & ~_resonant_mask(grid.domain, k, L, M, J)
        if not mask.any():
            continue
        phi = (abs(k) - np.abs(L) + np.abs(M) - np.abs(J))[mask] * unit
        osc = np.exp(1j * t * phi)
        if from_zero:
            osc = osc - 1.0
        terms = (
            _gather(w, J, n) * _gather(w, L, n) * np.conj(_gather(w, M, n))
        )[mask]
        out[k + n] = np.sum(-1j * osc / (1j * phi) * terms)
    return SpectralField(grid, out)


def F_osc_torus(u: SpectralField, t: float) -> SpectralField:
    """Zero-mean-in-t antiderivative of f_osc on the torus."""
    if u.grid.domain is not Domain.TORUS:
        raise ValueError("F_osc_torus requires a torus grid")
    return osc_primitive_bruteforce(u, t, from_zero=False)


def F_osc_line(w_field: SpectralField, t: float) -> SpectralField:
    """Closed-form box antiderivative for Hardy input.

    For W supported on k >= 0 every non-resonant quadruple has output mode
    k < 0 and phase -2*xi(k), so

        F_osc_hat(xi) = (exp(-2 i t xi) - 1) / (2 xi) * F(|W|^2 W)(xi),  xi < 0,

    and zero on xi >= 0.  Vanishes at t = 0.
    """
    if w_field.grid.domain is not Domain.BIGBOX:
        raise ValueError("F_osc_line requires a big-box grid")
    require_hardy(w_field)
    grid = w_field.grid
    cube = cubic_product(w_field)
    xi = grid.freqs
    out = np.zeros(grid.size, dtype=np.complex128)
    neg = grid.modes < 0
    out[neg] = (np.exp(-2j * t * xi[neg]) - 1.0) / (2.0 * xi[neg]) * cube.coeff[neg]
    return SpectralField(grid, out)


def F_osc(u: SpectralField, t: float) -> SpectralField:
    """Antiderivative of f_osc in the grid's native convention."""
    if u.grid.domain is Domain.TORUS:
        return F_osc_torus(u, t)
    return osc_primitive_bruteforce(u, t, from_zero=True)


def dF_osc(u: SpectralField, t: float, h: SpectralField) -> SpectralField:
    """Directional derivative of F_osc at u in direction h.

    R-linear in h: the two holomorphic slots receive h, the conjugated slot
    receives conj(h).  Follows the grid's antiderivative convention.
    """
    grid = u.grid
    _check_cubic_size(grid)
    if h.grid != grid:
        raise ValueError("direction field lives on a different grid")
    from_zero = grid.domain is not Domain.TORUS
    n = grid.n_max
    unit = grid.freq_unit
    L, M = _lm_mesh(n)
    w = u.coeff
    hv = h.coeff
    out = np.zeros(grid.size, dtype=np.complex128)
    for k in grid.modes:
        J = k - L + M
        valid = np.abs(J) <= n
        mask = valid & ~_resonant_mask(grid.domain, k, L, M, J)
        if not mask.any():
            continue
        phi = (abs(k) - np.abs(L) + np.abs(M) - np.abs(J))[mask] * unit
        osc = np.exp(1j * t * phi)
        if from_zero:
            osc = osc - 1.0
        wj, wl, wm = (
            _gather(w, J, n)[mask],
            _gather(w, L, n)[mask],
            np.conj(_gather(w, M, n))[mask],
        )
        hj, hl, hm = (
            _gather(hv, J, n)[mask],
            _gather(hv, L, n)[mask],
            np.conj(_gather(hv, M, n))[mask],
        )
        slots = hj * wl * wm + wj * hl * wm + wj * wl * hm
        out[k + n] = np.sum(-1j * osc / (1j * phi) * slots)
    return SpectralField(grid, out)


def fprime_dot(u: SpectralField, t: float, h: SpectralField) -> SpectralField:
    """R-linear derivative of f_full at u in direction h.

    With v = exp(-i|D|t) u and g = exp(-i|D|t) h this is
    -i exp(i|D|t) (2 |v|^2 g + v^2 conj(g)), evaluated by dealiased products.
    """
    if h.grid != u.grid:
        raise ValueError("direction field lives on a different grid")
    v = free_flow(u, t)
    g = free_flow(h, t)
    p1 = pointwise_product([v, v, g], [False, True, False], oversample=2)
    p2 = pointwise_product([v, v, g], [False, False, True], oversample=2)
    total = SpectralField(u.grid, 2.0 * p1.coeff + p2.coeff)
    return SpectralField(u.grid, -1j * free_flow(total, -t).coeff)


# ---------------------------------------------------------------------------
# quintic resonant kernel r2 = {f'(W,t) . F_osc(W,t)}_res and the companion
# oscillatory antiderivative n2


def _check_quintic_size(grid):
    if grid.domain is not Domain.TORUS:
        raise ValueError("quintic kernels are defined on the torus grid")
    if grid.n_max > MAX_QUINTIC_N_MAX:
        raise ValueError(
            f"quintic brute force is an oracle for n_max <= {MAX_QUINTIC_N_MAX}"
        )


def _quintic_families(w: np.ndarray, n: int, k: int):
    """Yield (total_phase, contribution) arrays of both sextuple families.

    Family 1 (h in a holomorphic slot of f'):
        j = k - l + m internal, q = j - n' + p,
        inner phase phi' = |j|-|n'|+|p|-|q| != 0, weight 2i/phi',
        factors W(n') W(q) conj(W(p)) W(l) conj(W(m)).
    Family 2 (h in the conjugated slot):
        m = l + j - k internal, q = m - n' + p,
        inner phase phi'' = |m|-|n'|+|p|-|q| != 0, weight i/phi'',
        factors W(j) W(l) conj(W(n')) conj(W(q)) W(p).
    Total phases are phi + phi' and phi - phi'' with phi the outer phase.
    """
    A, B, C, D = _lmnp_mesh(n)

    # family 1: (A, B, C, D) = (l, m, n', p)
    J = k - A + B
    Q = J - C + D
    ok = (np.abs(J) <= n) & (np.abs(Q) <= n)
    phi = abs(k) - np.abs(A) + np.abs(B) - np.abs(J)
    phi_in = np.abs(J) - np.abs(C) + np.abs(D) - np.abs(Q)
    ok &= phi_in != 0
    contrib = np.zeros(A.shape, dtype=np.complex128)
    contrib[ok] = (
        2j
        / phi_in[ok]
        * _gather(w, C, n)[ok]
        * _gather(w, Q, n)[ok]
        * np.conj(_gather(w, D, n)[ok])
        * _gather(w, A, n)[ok]
        * np.conj(_gather(w, B, n)[ok])
    )
    yield (phi + phi_in), ok, contrib

    # family 2: (A, B, C, D) = (l, j, n', p)
    Mi = A + B - k
    Q = Mi - C + D
    ok = (np.abs(Mi) <= n) & (np.abs(Q) <= n)
    phi = abs(k) - np.abs(A) + np.abs(Mi) - np.abs(B)
    phi_in = np.abs(Mi) - np.abs(C) + np.abs(D) - np.abs(Q)
    ok &= phi_in != 0
    contrib = np.zeros(A.shape, dtype=np.complex128)
    contrib[ok] = (
        1j
        / phi_in[ok]
        * _gather(w, B, n)[ok]
        * _gather(w, A, n)[ok]
        * np.conj(_gather(w, C, n)[ok])
        * np.conj(_gather(w, Q, n)[ok])
        * _gather(w, D, n)[ok]
    )
    yield (phi - phi_in), ok, contrib


def r2_bruteforce(w_field: SpectralField) -> SpectralField:
    """Direct evaluation of the two sextuple sums of the resonant quintic.

    Keeps exactly the terms whose total phase vanishes; time independent by
    construction.
    """
    grid = w_field.grid
    _check_quintic_size(grid)
    n = grid.n_max
    w = w_field.coeff
    out = np.zeros(grid.size, dtype=np.complex128)
    for k in grid.modes:
        acc = 0.0 + 0.0j
        for total, ok, contrib in _quintic_families(w, n, k):
            acc += contrib[ok & (total == 0)].sum()
        out[k + n] = acc
    return SpectralField(grid, out)


def r2_closed_hardy(w_field: SpectralField) -> SpectralField:
    """Closed form of the resonant quintic for Hardy input:

        r2(W) = -i P+(|W|^2 (1/D) P-(|W|^2 W))
                - (i/2) P+(W^2 conj((1/D) P-(|W|^2 W))).
    """
    grid = w_field.grid
    if grid.domain is not Domain.TORUS:
        raise ValueError("r2_closed_hardy is defined on the torus grid")
    require_hardy(w_field)
    g = apply_inv_D_minus(project_minus(cubic_product(w_field)))
    term1 = project_plus(
        pointwise_product([w_field, w_field, g], [False, True, False], oversample=2)
    )
    term2 = project_plus(
        pointwise_product([w_field, w_field, g], [False, False, True], oversample=2)
    )
    return SpectralField(grid, -1j * term1.coeff - 0.5j * term2.coeff)


def r2_time_average(w_field: SpectralField, n_samples: int | None = None) -> SpectralField:
    """Averaging oracle: (1/R) sum_r f'(W, t_r).F_osc(W, t_r) over one period.

    All phases are integers bounded by 6*n_max, so R > 6*n_max nodes kill
    every oscillatory term exactly and the average is the resonant part.
    """
    grid = w_field.grid
    if grid.domain is not Domain.TORUS:
        raise ValueError("r2_time_average is defined on the torus grid")
    r_nodes = n_samples or (6 * grid.n_max + 2)
    acc = np.zeros(grid.size, dtype=np.complex128)
    for r in range(r_nodes):
        t = 2.0 * np.pi * r / r_nodes
        acc += fprime_dot(w_field, t, F_osc_torus(w_field, t)).coeff
    return SpectralField(grid, acc / r_nodes)


def n2_phase_coefficients(w_field: SpectralField):
    """Assemble d/dt N2(W, t) = sum_Phi c[k, Phi] exp(i t Phi), Phi != 0.

    The right-hand side {f'(W,t).F_osc(W,t)}_osc - F'_osc(W,t).f_res(W) is a
    trigonometric polynomial in t with integer phases |Phi| <= 6*n_max; this
    returns (phases, c) with c of shape (grid.size, len(phases)).
    """
    grid = w_field.grid
    _check_quintic_size(grid)
    n = grid.n_max
    w = w_field.coeff
    h = f_res_closed_torus(w_field).coeff
    n_phases = 12 * n + 1
    offset = 6 * n
    coef = np.zeros((grid.size, n_phases), dtype=np.complex128)
    L, M = _lm_mesh(n)
    for k in grid.modes:
        row_re = np.zeros(n_phases)
        row_im = np.zeros(n_phases)

        # sextuple families of {f'.F_osc}_osc (total phase != 0)
        for total, ok, contrib in _quintic_families(w, n, k):
            mask = ok & (total != 0)
            idx = (total[mask] + offset).ravel()
            vals = contrib[mask].ravel()
            row_re += np.bincount(idx, weights=vals.real, minlength=n_phases)
            row_im += np.bincount(idx, weights=vals.imag, minlength=n_phases)

        # minus F'_osc(W,t).f_res(W): every term oscillates at the outer
        # phase phi != 0 and carries weight exp(i t phi)/phi per slot
        J = k - L + M
        valid = np.abs(J) <= n
        phi = abs(k) - np.abs(L) + np.abs(M) - np.abs(J)
        mask = valid & (phi != 0)
        wj, wl, wm = _gather(w, J, n), _gather(w, L, n), np.conj(_gather(w, M, n))
        hj, hl, hm = _gather(h, J, n), _gather(h, L, n), np.conj(_gather(h, M, n))
        slots = hj * wl * wm + wj * hl * wm + wj * wl * hm
        vals = (slots[mask] / phi[mask]).ravel()
        idx = (phi[mask] + offset).ravel()
        row_re += np.bincount(idx, weights=vals.real, minlength=n_phases)
        row_im += np.bincount(idx, weights=vals.imag, minlength=n_phases)

        coef[k + n] = row_re + 1j * row_im

    phases = np.arange(-offset, offset + 1)
    keep = phases != 0
    coef[:, offset] = 0.0
    return phases[keep], coef[:, keep]


def n2_from_coefficients(grid, phases: np.ndarray, coef: np.ndarray, t: float) -> SpectralField:
    """Evaluate N2 from its phase decomposition: term / (i * Phi)."""
    osc = np.exp(1j * t * phases) / (1j * phases)
    return SpectralField(grid, coef @ osc)


def n2_field(w_field: SpectralField, t: float) -> SpectralField:
    """The unique zero-t-mean antiderivative of the oscillatory quintic part.

    Every oscillatory term of d/dt N2 is divided by i times its total phase;
    resonant terms are excluded by construction.
    """
    phases, coef = n2_phase_coefficients(w_field)
    return n2_from_coefficients(w_field.grid, phases, coef, t)


def n2_rhs(w_field: SpectralField, t: float) -> SpectralField:
    """Defining right-hand side of d/dt N2, assembled from independent parts:
    f'(W,t).F_osc(W,t) minus its resonant part r2 minus F'_osc(W,t).f_res(W)."""
    a = fprime_dot(w_field, t, F_osc_torus(w_field, t))
    b = r2_bruteforce(w_field)
    c = dF_osc(w_field, t, f_res_closed_torus(w_field))
    return SpectralField(w_field.grid, a.coeff - b.coeff - c.coeff)


# ---------------------------------------------------------------------------
# kernel-term view (inspection and small-grid cross-checks)


@dataclass(frozen=True)
class KernelTerm:
    """One summand of a phase-weighted kernel sum.

    input_modes lists (mode, conjugated) pairs; phase is in frequency units;
    the summand is weight * exp(i t phase) * prod of coefficients.
    """

    output_mode: int
    input_modes: tuple[tuple[int, bool], ...]
    phase: float
    weight: complex


def cubic_kernel_terms(grid, resonant: bool | None = None):
    """Enumerate the cubic kernel terms of f(u, t) in lexicographic (l, m)
    order per output mode; resonant=True/False filters by phase."""
    n = grid.n_max
    unit = grid.freq_unit
    for k in grid.modes:
        for l in grid.modes:
            for m in grid.modes:
                j = k - l + m
                if abs(j) > n:
                    continue
                phi = abs(k) - abs(l) + abs(m) - abs(j)
                if resonant is True and phi != 0:
                    continue
                if resonant is False and phi == 0:
                    continue
                yield KernelTerm(
                    output_mode=k,
                    input_modes=((j, False), (l, False), (m, True)),
                    phase=phi * unit,
                    weight=-1j,
                )
