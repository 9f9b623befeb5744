"""Dense complex linear algebra over small bipartite Hilbert spaces.

Matrices are plain complex numpy arrays.  Joint indices are C-major: the
product basis state |i_C i_H> sits at row/column  i_C * d_H + i_H,  i.e.
the C factor is the slow index and the H factor the fast one.  Every
function in this package that takes a joint-space matrix assumes this
ordering.

Intended for local dimensions up to ~16 per subsystem; everything is
dense and double precision.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

HERMITICITY_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def _reshape4(m, dims: tuple[int, int]) -> np.ndarray:
    d_c, d_h = dims
    m = _square(m)
    if m.shape[0] != d_c * d_h:
        raise ValueError(f"matrix side {m.shape[0]} does not match dims {dims}")
    return m.reshape(d_c, d_h, d_c, d_h)


def kron(a, b) -> np.ndarray:
    """Kronecker product with the C factor first: kron(A_C, B_H)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, dims: tuple[int, int], which: str) -> np.ndarray:
    """Trace out one subsystem ('C' or 'H') of a joint-space matrix."""
    r = _reshape4(m, dims)
    if which == "H":
        return np.einsum("ijkj->ik", r)
    if which == "C":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"subsystem tag must be 'C' or 'H', got {which!r}")


def partial_transpose(m, dims: tuple[int, int], which: str) -> np.ndarray:
    """Transpose the indices of one subsystem only."""
    r = _reshape4(m, dims)
    if which == "H":
        out = r.transpose(0, 3, 2, 1)
    elif which == "C":
        out = r.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem tag must be 'C' or 'H', got {which!r}")
    d = dims[0] * dims[1]
    return out.reshape(d, d)


def hermiticity_defect(m) -> float:
    """Max absolute entry of M - M†."""
    m = _square(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending real eigenvalues; rejects non-Hermitian input."""
    m = _square(m)
    defect = hermiticity_defect(m)
    if defect > HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigvalsh(m)


def spectral_norm(m) -> float:
    """Largest singular value."""
    m = np.asarray(m, dtype=complex)
    return float(np.linalg.norm(m, 2))


def matrix_exp(m) -> np.ndarray:
    """Matrix exponential.

    Hermitian and anti-Hermitian generators (every use in this package is
    exp(-i H t) with H Hermitian) go through an eigendecomposition; any
    other square input falls back to scipy's expm.
    """
    m = _square(m)
    if hermiticity_defect(m) <= HERMITICITY_TOL:
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        return (v * np.exp(w)) @ v.conj().T
    k = 1j * m
    if hermiticity_defect(k) <= HERMITICITY_TOL:
        w, v = np.linalg.eigh(0.5 * (k + k.conj().T))
        return (v * np.exp(-1j * w)) @ v.conj().T
    return scipy.linalg.expm(m)
