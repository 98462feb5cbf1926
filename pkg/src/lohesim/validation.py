"""Input validation helpers, in the spirit of ``sklearn.utils.validation``.

Every public entry point funnels raw user input through one of these so the
numerical kernels can assume well-formed complex arrays.
"""

import numbers

import numpy as np

NORM_TOL = 1e-9
SKEW_TOL = 1e-12
SYM_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


def check_states(Z, *, norm_tol=NORM_TOL, copy=True):
    """Validate an ensemble of particle states.

    Accepts anything array-like of shape ``(N, d)`` (or ``(d,)`` for a single
    particle) and returns a complex128 array of shape ``(N, d)``. Each row must
    be a unit vector to within ``norm_tol``; pass ``norm_tol=None`` to skip the
    sphere check.
    """
    Z = np.array(Z, dtype=np.complex128) if copy else np.asarray(Z, dtype=np.complex128)
    if Z.ndim == 1:
        Z = Z[np.newaxis, :]
    if Z.ndim != 2:
        raise ValidationError(f"states must be 2-D (N, d), got shape {Z.shape}")
    if Z.shape[0] < 1 or Z.shape[1] < 1:
        raise ValidationError(f"need N >= 1 and d >= 1, got shape {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise ValidationError("states contain non-finite entries")
    if norm_tol is not None:
        dev = np.abs(np.linalg.norm(Z, axis=1) - 1.0)
        if dev.max() > norm_tol:
            j = int(dev.argmax())
            raise ValidationError(
                f"state {j} is off the unit sphere by {dev[j]:.3e} (tol {norm_tol:g})"
            )
    return Z


def check_vector(v, d=None):
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValidationError(f"expected a 1-D vector, got shape {v.shape}")
    if d is not None and v.shape[0] != d:
        raise ValidationError(f"dimension mismatch: expected {d}, got {v.shape[0]}")
    return v


def check_skew_hermitian(omega, d=None, *, tol=SKEW_TOL):
    omega = np.array(omega, dtype=np.complex128)
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise ValidationError(f"free flow must be a square matrix, got shape {omega.shape}")
    if d is not None and omega.shape[0] != d:
        raise ValidationError(f"free flow is {omega.shape[0]}x{omega.shape[0]}, expected {d}x{d}")
    resid = np.abs(omega + omega.conj().T).max()
    if resid > tol:
        raise ValidationError(f"matrix is not skew-Hermitian (|O + O^H| = {resid:.3e})")
    return omega


def check_adjacency(A, N=None, *, tol=SYM_TOL):
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"adjacency must be square, got shape {A.shape}")
    if N is not None and A.shape[0] != N:
        raise ValidationError(f"adjacency is {A.shape[0]}x{A.shape[0]}, expected {N}x{N}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("adjacency contains non-finite entries")
    if np.abs(A - A.T).max() > tol:
        raise ValidationError("adjacency is not symmetric")
    if A.min() < 0:
        raise ValidationError("adjacency has negative weights")
    return A


def check_scalar(x, name, *, min_val=None, max_val=None, include_min=True, include_max=True):
    """Check a real scalar parameter against optional bounds and return it as float."""
    if isinstance(x, bool) or not isinstance(x, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not np.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {x}")
    if min_val is not None:
        if (include_min and x < min_val) or (not include_min and x <= min_val):
            op = ">=" if include_min else ">"
            raise ValidationError(f"{name} must be {op} {min_val}, got {x}")
    if max_val is not None:
        if (include_max and x > max_val) or (not include_max and x >= max_val):
            op = "<=" if include_max else "<"
            raise ValidationError(f"{name} must be {op} {max_val}, got {x}")
    return x


def check_same_shape(a, b, what="ensembles"):
    if a.shape != b.shape:
        raise ValidationError(f"{what} have mismatched shapes {a.shape} vs {b.shape}")
