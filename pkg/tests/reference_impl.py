"""Slow, loop-based reference implementations used as test oracles.

These are deliberately written in plain Python over dictionaries, with the
momentum constraints resolved differently from the package code, so that the
two routes share nothing but the definitions of the sums.
"""

from __future__ import annotations

import numpy as np


def coeffs_to_dict(field) -> dict[int, complex]:
    return {int(k): complex(field.coeff[i]) for i, k in enumerate(field.grid.modes)}


def torus_resonant(k, l, m, j) -> bool:
    if k > 0:
        return (l >= 0 and m >= 0 and j >= 0) or k == l or k == j
    if k < 0:
        return (l <= 0 and m <= 0 and j <= 0) or k == l or k == j
    return (l >= 0 and m >= 0 and j >= 0) or (l <= 0 and m <= 0 and j <= 0)


def ref_f_res(c: dict[int, complex], n: int) -> dict[int, complex]:
    """-i * sum over resonant quadruples of c(j) c(l) conj(c(m)), resolved
    as m = l + j - k (the package resolves j instead)."""
    out = {}
    for k in range(-n, n + 1):
        acc = 0.0j
        for l in range(-n, n + 1):
            for j in range(-n, n + 1):
                m = l + j - k
                if abs(m) > n:
                    continue
                if not torus_resonant(k, l, m, j):
                    continue
                acc += c[j] * c[l] * np.conj(c[m])
        out[k] = -1j * acc
    return out


def ref_f_osc(c: dict[int, complex], n: int, t: float, unit: float = 1.0) -> dict[int, complex]:
    out = {}
    for k in range(-n, n + 1):
        acc = 0.0j
        for l in range(-n, n + 1):
            for j in range(-n, n + 1):
                m = l + j - k
                if abs(m) > n:
                    continue
                phi = abs(k) - abs(l) + abs(m) - abs(j)
                if phi == 0:
                    continue
                acc += np.exp(1j * t * phi * unit) * c[j] * c[l] * np.conj(c[m])
        out[k] = -1j * acc
    return out


def ref_osc_primitive(c, n, t, from_zero, unit: float = 1.0):
    out = {}
    for k in range(-n, n + 1):
        acc = 0.0j
        for l in range(-n, n + 1):
            for j in range(-n, n + 1):
                m = l + j - k
                if abs(m) > n:
                    continue
                phi = abs(k) - abs(l) + abs(m) - abs(j)
                if phi == 0:
                    continue
                osc = np.exp(1j * t * phi * unit)
                if from_zero:
                    osc -= 1.0
                acc += -1j * osc / (1j * phi * unit) * c[j] * c[l] * np.conj(c[m])
        out[k] = acc
    return out


def ref_r2(c: dict[int, complex], n: int) -> dict[int, complex]:
    """The two resonant sextuple sums, with the inner quadruple enumerated
    first (j = n' - p + q resp. m = n' - p + q) and the outer constraint
    resolving the remaining factor index."""
    out = {}
    rng = range(-n, n + 1)
    for k in rng:
        acc = 0.0j
        # family 1: inner quadruple (j; n', p, q), outer factor pair (l, m)
        for np_ in rng:
            for p in rng:
                for q in rng:
                    j = np_ - p + q
                    if abs(j) > n:
                        continue
                    phi_in = abs(j) - abs(np_) + abs(p) - abs(q)
                    if phi_in == 0:
                        continue
                    for l in rng:
                        m = l + j - k
                        if abs(m) > n:
                            continue
                        if abs(k) - abs(l) + abs(m) - abs(np_) + abs(p) - abs(q) != 0:
                            continue
                        acc += (
                            2j
                            / phi_in
                            * c[np_]
                            * c[q]
                            * np.conj(c[p])
                            * c[l]
                            * np.conj(c[m])
                        )
        # family 2: inner quadruple (m; n', p, q), outer factor pair (l, j)
        for np_ in rng:
            for p in rng:
                for q in rng:
                    m = np_ - p + q
                    if abs(m) > n:
                        continue
                    phi_in = abs(m) - abs(np_) + abs(p) - abs(q)
                    if phi_in == 0:
                        continue
                    for l in rng:
                        j = k - l + m
                        if abs(j) > n:
                            continue
                        if abs(k) - abs(l) - abs(j) + abs(np_) - abs(p) + abs(q) != 0:
                            continue
                        acc += (
                            1j
                            / phi_in
                            * c[j]
                            * c[l]
                            * np.conj(c[np_])
                            * np.conj(c[q])
                            * c[p]
                        )
        out[k] = acc
    return out


def dict_to_array(d: dict[int, complex], n: int) -> np.ndarray:
    return np.array([d[k] for k in range(-n, n + 1)], dtype=np.complex128)
