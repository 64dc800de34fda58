"""Dense complex matrix kernels for unitary and Hermitian matrices.

Matrices are plain numpy arrays of dtype complex128.  Everything here is a
pure function; no array is ever mutated after it is returned.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class LinalgError(ValueError):
    """A matrix violated a precondition (shape, unitarity, hermiticity)."""


def as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {m.shape}")
    return m


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = as_square(u)
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) <= tol


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = as_square(h)
    return np.linalg.norm(h - h.conj().T) <= tol


def multiply(a, b) -> np.ndarray:
    a, b = as_square(a), as_square(b)
    if a.shape != b.shape:
        raise LinalgError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_square(a), as_square(b))


def eig_unitary(u, tol: float = UNITARY_TOL):
    """Spectral decomposition of a unitary: u = V diag(e^{i phases}) V†.

    Uses a complex Schur decomposition, which for a normal matrix yields a
    diagonal factor and orthonormal eigenvectors even with degenerate
    eigenvalues.  Phases lie in (-pi, pi].

    Returns (phases, vectors).
    """
    u = as_square(u)
    if not is_unitary(u, tol):
        raise LinalgError("eig_unitary requires a unitary matrix")
    t, v = scipy.linalg.schur(u, output="complex")
    eigvals = np.diag(t)
    phases = np.angle(eigvals / np.abs(eigvals))
    # np.angle returns values in [-pi, pi]; fold -pi onto +pi.
    phases = np.where(phases <= -np.pi + 1e-15, np.pi, phases)
    return phases, v


def expm_hermitian(h, scale: float = 1.0) -> np.ndarray:
    """exp(i * scale * h) for Hermitian h."""
    h = as_square(h)
    if not is_hermitian(h):
        raise LinalgError("expm_hermitian requires a Hermitian matrix")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * scale * w)) @ v.conj().T


def logm_unitary(u) -> np.ndarray:
    """Principal-branch Hermitian generator: returns H with u = exp(iH).

    Eigenvalues of H lie in (-pi, pi]; a unitary eigenvalue at -1 maps
    to +pi.
    """
    phases, v = eig_unitary(u)
    h = (v * phases) @ v.conj().T
    return (h + h.conj().T) / 2


@dataclass(frozen=True)
class CharPolyCoeffs:
    """Coefficients of the monic characteristic polynomial of a dim x dim
    matrix:  x^N + lambdas[N-2] x^{N-1} + ... + lambdas[0] x + constant.

    lambdas[j-1] is the coefficient of x^j, j = 1 .. N-1.  For a unitary
    matrix |constant| = 1 and its phase is the chi angle of the spectrum.
    """

    dim: int
    lambdas: np.ndarray
    constant: complex

    def coefficient(self, power: int) -> complex:
        if power == self.dim:
            return 1.0 + 0j
        if power == 0:
            return self.constant
        return complex(self.lambdas[power - 1])


def char_poly_coeffs(u) -> CharPolyCoeffs:
    """Characteristic polynomial coefficients via the Vieta recurrence on
    the eigenvalues (incremental expansion of prod(x - mu_k))."""
    u = as_square(u)
    n = u.shape[0]
    if n < 2:
        raise LinalgError("char_poly_coeffs requires dim >= 2")
    mu = np.linalg.eigvals(u)
    # coeffs[k] multiplies x^{n-k}; coeffs[0] = 1 (monic).
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    for k, root in enumerate(mu):
        coeffs[1 : k + 2] = coeffs[1 : k + 2] - root * coeffs[: k + 1]
    lambdas = coeffs[n - 1 : 0 : -1].copy()  # lambda_1 .. lambda_{N-1}
    return CharPolyCoeffs(dim=n, lambdas=lambdas, constant=complex(coeffs[n]))


def haar_random(dim: int, seed: int) -> np.ndarray:
    """Haar-random unitary: Ginibre draw, QR, R-diagonal phase correction.

    Deterministic for a fixed seed.
    """
    if dim < 2:
        raise LinalgError("haar_random requires dim >= 2")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    z /= np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, norm: float, seed: int) -> np.ndarray:
    """Seeded GUE-style Hermitian matrix rescaled to spectral norm `norm`."""
    if dim < 2:
        raise LinalgError("random_hermitian requires dim >= 2")
    if norm <= 0:
        raise LinalgError("norm must be positive")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (a + a.conj().T) / 2
    return h * (norm / np.linalg.norm(h, 2))
