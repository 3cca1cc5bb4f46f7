"""Finite-dimensional discretizations of T = A* P A by two independent routes,
plus the logarithmic potential and the Steklov circle operator.

fourier:   compression of the quadratic form onto the truncated Fourier basis
           of a torus of period L with the measure localized in a sub-box.
logkernel: Nystrom matrix of the log-singular kernel of A A* on the atoms of
           the measure (the K K* side; nonzero spectra of the two sides
           coincide).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import k0 as bessel_k0

from .coeffs import sphere_area
from .errors import (
    BudgetError,
    DegenerateKernelError,
    NegativeDensityError,
    SupportTooLargeError,
)
from .measures import PointCloudMeasure, SignedDensity, check_pairing

HERMITICITY_TOL = 1e-10
DEFAULT_MATRIX_BUDGET = 12_000
EULER_GAMMA = float(np.euler_gamma)


def log_kernel_coefficient(ambient_dim: int) -> float:
    """Leading log coefficient of the kernel of (1 - Laplace)^{-N/2}:
    omega_{N-1} / (2 pi)^N.  (At N = 2 this matches the exact Bessel kernel
    K_0 / (2 pi); the constant printed in the source would not.)"""
    return sphere_area(ambient_dim) / (2.0 * math.pi) ** ambient_dim


@dataclass(frozen=True)
class LogKernelSpec:
    kernel_choice: str = "pure_log"  # pure_log | bessel_exact_N2
    log_coefficient: float | None = None  # default omega_{N-1}/(2 pi)^N
    diagonal_rule: str = "cell_average"  # cell_average | zero

    def __post_init__(self):
        if self.kernel_choice not in ("pure_log", "bessel_exact_N2"):
            raise ValueError(f"unknown kernel choice {self.kernel_choice!r}")
        if self.diagonal_rule not in ("cell_average", "zero"):
            raise ValueError(f"unknown diagonal rule {self.diagonal_rule!r}")
        if self.log_coefficient is not None and self.log_coefficient <= 0:
            raise ValueError("log coefficient must be positive")


@dataclass(frozen=True)
class AssembledOperator:
    """Dense self-adjoint matrix discretizing T, with provenance metadata."""

    matrix: np.ndarray
    route: str  # fourier | logkernel | logpotential | steklov
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError("operator matrix must be square and nonempty")
        dev = np.abs(m - m.conj().T).max()
        if dev > HERMITICITY_TOL:
            raise ValueError(f"matrix deviates from self-adjointness by {dev:g}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def measure_fingerprint(measure: PointCloudMeasure, density: SignedDensity) -> str:
    h = hashlib.sha256()
    h.update(measure.positions.tobytes())
    h.update(measure.weights.tobytes())
    h.update(density.values.tobytes())
    return h.hexdigest()[:12]


def _frequency_grid(K: int, n_dim: int) -> np.ndarray:
    axes = [np.arange(-K, K + 1)] * n_dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def assemble_fourier_bs(
    measure: PointCloudMeasure,
    density: SignedDensity,
    L: float,
    K: int,
    matrix_budget: int = DEFAULT_MATRIX_BUDGET,
) -> AssembledOperator:
    """Quadratic-form compression onto torus frequencies |xi|_inf <= K.

    M[xi, xi'] = a(xi) a(xi') L^{-N} sum_i w_i V_i exp(2 pi i (xi' - xi) X_i / L)
    with the multiplier a(xi) = (1 + (2 pi |xi| / L)^2)^{-N/4}.  The measure
    support must fit in a box of side L/2 (localization margin).
    """
    check_pairing(measure, density)
    n_dim = measure.ambient_dim
    n_modes = (2 * K + 1) ** n_dim
    if n_modes > matrix_budget:
        raise BudgetError(f"{n_modes} Fourier modes exceed the budget {matrix_budget}")
    span = measure.positions.max(axis=0) - measure.positions.min(axis=0)
    if np.any(span > L / 2):
        raise SupportTooLargeError(
            f"support box side {span.max():g} exceeds the localization margin L/2 = {L / 2:g}"
        )

    coords = _frequency_grid(K, n_dim)
    a = (1.0 + (2 * math.pi / L) ** 2 * (coords**2).sum(axis=1)) ** (-n_dim / 4.0)
    wv = measure.weights * density.values

    # Fourier sums of the weighted measure on the difference grid eta = xi' - xi,
    # factored per axis: F[eta] = sum_i w_i V_i prod_ax exp(2 pi i eta_ax X_i,ax / L).
    diff = np.arange(-2 * K, 2 * K + 1)
    factors = [
        np.exp(2j * math.pi / L * np.outer(diff, measure.positions[:, ax]))
        for ax in range(n_dim)
    ]
    if n_dim == 1:
        F = factors[0] @ wv
    elif n_dim == 2:
        F = (factors[0] * wv) @ factors[1].T
    else:
        letters = "abcdef"[:n_dim]
        spec = ",".join(f"{c}i" for c in letters) + ",i->" + letters
        F = np.einsum(spec, *factors, wv)
    F_flat = F.ravel()

    side = 4 * K + 1
    strides = side ** np.arange(n_dim - 1, -1, -1)
    matrix = np.empty((n_modes, n_modes), dtype=complex)
    block = max(1, 2**22 // n_modes)
    for i0 in range(0, n_modes, block):
        i1 = min(i0 + block, n_modes)
        d = coords[None, :, :] - coords[i0:i1, None, :] + 2 * K
        idx = d @ strides
        matrix[i0:i1] = F_flat[idx]
        matrix[i0:i1] *= a[i0:i1, None] * a[None, :]
    matrix /= L**n_dim

    return AssembledOperator(
        matrix=matrix,
        route="fourier",
        metadata={
            "torus_period": L,
            "cutoff": K,
            "ambient_dim": n_dim,
            "modes": int(n_modes),
            "max_wavenumber": 2 * math.pi * K / L,
            "measure": measure_fingerprint(measure, density),
        },
    )


def _pairwise_distances(measure: PointCloudMeasure) -> tuple[np.ndarray, np.ndarray]:
    pos = measure.positions
    sq = ((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1)
    n = len(pos)
    off = sq + np.diag(np.full(n, np.inf))
    nn = np.sqrt(off.min(axis=1))
    if n == 1:
        nn = np.ones(1)  # no neighbor scale; unit cell convention
    if not np.all(nn > 0):
        raise DegenerateKernelError("coincident atoms: kernel matrix is singular")
    dist = np.sqrt(sq)
    np.fill_diagonal(dist, 1.0)  # placeholder, diagonal set by rule below
    return dist, nn


def _log_kernel_matrix(
    measure: PointCloudMeasure, spec: LogKernelSpec
) -> tuple[np.ndarray, float]:
    n_dim = measure.ambient_dim
    c_log = spec.log_coefficient or log_kernel_coefficient(n_dim)
    dist, nn = _pairwise_distances(measure)
    if spec.kernel_choice == "bessel_exact_N2":
        if n_dim != 2:
            raise ValueError("bessel_exact_N2 requires ambient dimension 2")
        kern = bessel_k0(dist) / (2 * math.pi)
    else:
        kern = c_log * (-np.log(dist))
    if spec.diagonal_rule == "cell_average":
        # exact 1-d cell mean of -log over a cell of width delta
        diag = c_log * (1.0 - np.log(nn / 2.0))
        if spec.kernel_choice == "bessel_exact_N2":
            # K_0(r) = -log r + (log 2 - gamma) + O(r^2 log r)
            diag = diag + c_log * (math.log(2.0) - EULER_GAMMA)
    else:
        diag = np.zeros(len(nn))
    np.fill_diagonal(kern, diag)
    return kern, c_log


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    lam, q = np.linalg.eigh(matrix)
    lam = np.clip(lam, 0.0, None)  # clip small negatives (>= -1e-12 scale)
    return (q * np.sqrt(lam)) @ q.T


def assemble_log_kernel(
    measure: PointCloudMeasure,
    density: SignedDensity,
    spec: LogKernelSpec | None = None,
) -> AssembledOperator:
    """Nystrom matrix of the log-singular K K* kernel on the atoms.

    S = sqrt(D) k sqrt(D) with D_i = w_i |V_i|.  For sign-changing V the
    returned operator is S^{1/2} Sigma S^{1/2} with Sigma = diag(sgn V); its
    nonzero spectrum equals that of the sign-framed T by the two-sided
    factorization.
    """
    check_pairing(measure, density)
    spec = spec or LogKernelSpec()
    kern, c_log = _log_kernel_matrix(measure, spec)
    d_vec = measure.weights * np.abs(density.values)
    root = np.sqrt(d_vec)
    S = root[:, None] * kern * root[None, :]
    S = 0.5 * (S + S.T)
    signs = np.sign(density.values)
    sign_framed = bool(np.any(signs < 0))
    if sign_framed:
        half = _psd_sqrt(S)
        matrix = half @ (signs[:, None] * half)
        matrix = 0.5 * (matrix + matrix.T)
    else:
        matrix = S
    return AssembledOperator(
        matrix=matrix,
        route="logkernel",
        metadata={
            "kernel_choice": spec.kernel_choice,
            "log_coefficient": c_log,
            "diagonal_rule": spec.diagonal_rule,
            "sign_framed": sign_framed,
            "ambient_dim": measure.ambient_dim,
            "measure": measure_fingerprint(measure, density),
        },
    )


def assemble_log_potential(
    measure: PointCloudMeasure,
    density: SignedDensity,
    diagonal_rule: str = "cell_average",
) -> AssembledOperator:
    """Logarithmic potential f -> int log|X-Y| f(Y) P(dY) realized in L_{2,P}.

    Requires V >= 0 (for mixed signs use the sign-framed log-kernel route).
    The matrix is sqrt(w_i V_i) log|X_i - X_j| sqrt(w_j V_j); its singular
    values are read off by the spectral module.
    """
    check_pairing(measure, density)
    if np.any(density.values < 0):
        raise NegativeDensityError(
            "log potential needs V >= 0; use assemble_log_kernel for signed densities"
        )
    dist, nn = _pairwise_distances(measure)
    kern = np.log(dist)
    if diagonal_rule == "cell_average":
        diag = np.log(nn / 2.0) - 1.0  # cell mean of +log
    elif diagonal_rule == "zero":
        diag = np.zeros(len(nn))
    else:
        raise ValueError(f"unknown diagonal rule {diagonal_rule!r}")
    np.fill_diagonal(kern, diag)
    root = np.sqrt(measure.weights * density.values)
    matrix = root[:, None] * kern * root[None, :]
    matrix = 0.5 * (matrix + matrix.T)
    return AssembledOperator(
        matrix=matrix,
        route="logpotential",
        metadata={
            "diagonal_rule": diagonal_rule,
            "ambient_dim": measure.ambient_dim,
            "measure": measure_fingerprint(measure, density),
        },
    )


def circle_angles(measure: PointCloudMeasure, center=(0.0, 0.0)) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    rel = measure.positions - c[None, :]
    return np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2 * math.pi)


def assemble_steklov_circle(
    measure: PointCloudMeasure,
    density: SignedDensity,
    K: int,
    zero_mode: str = "drop",
    center=(0.0, 0.0),
    matrix_budget: int = DEFAULT_MATRIX_BUDGET,
) -> AssembledOperator:
    """Weighted Steklov form on the unit circle over Fourier modes.

    The Dirichlet-to-Neumann operator of the disc acts as |k| on e^{i k t};
    its inverse square root is undefined on constants, so either the zero
    mode is dropped (b(k) = |k|^{-1/2}, 1 <= |k| <= K) or all modes are kept
    with the shifted multiplier b(k) = (|k| + 1)^{-1/2}.
    """
    check_pairing(measure, density)
    if measure.ambient_dim != 2:
        raise ValueError("the Steklov circle operator lives in the plane")
    if zero_mode == "drop":
        modes = np.concatenate([np.arange(-K, 0), np.arange(1, K + 1)])
        b = np.abs(modes) ** -0.5
    elif zero_mode == "shift":
        modes = np.arange(-K, K + 1)
        b = (np.abs(modes) + 1.0) ** -0.5
    else:
        raise ValueError(f"unknown zero-mode policy {zero_mode!r}")
    if len(modes) > matrix_budget:
        raise BudgetError(f"{len(modes)} Steklov modes exceed the budget {matrix_budget}")
    theta = circle_angles(measure, center)
    wv = measure.weights * density.values
    phases = np.exp(-1j * np.outer(modes, theta))
    matrix = (phases * wv) @ phases.conj().T / (2 * math.pi)
    matrix *= b[:, None] * b[None, :]
    matrix = 0.5 * (matrix + matrix.conj().T)
    return AssembledOperator(
        matrix=matrix,
        route="steklov",
        metadata={
            "cutoff": K,
            "zero_mode": zero_mode,
            "modes": int(len(modes)),
            "measure": measure_fingerprint(measure, density),
        },
    )


# -- binary operator export --------------------------------------------------

_MAGIC = b"SPLO"
_FORMAT_VERSION = 1


def save_operator(op: AssembledOperator, path) -> None:
    """Binary layout: magic, version, dtype flag, size, then the row-major
    lower triangle (real, or interleaved re/im); metadata in a JSON sidecar."""
    m = op.matrix
    is_complex = np.iscomplexobj(m)
    n = op.size
    idx = np.tril_indices(n)
    tri = m[idx]
    with open(path, "wb") as f:
        f.write(_MAGIC)
        np.array([_FORMAT_VERSION, int(is_complex), n], dtype="<i8").tofile(f)
        if is_complex:
            np.stack([tri.real, tri.imag], axis=-1).astype("<f8").tofile(f)
        else:
            tri.astype("<f8").tofile(f)
    sidecar = {"route": op.route, "metadata": op.metadata}
    with open(str(path) + ".json", "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)


def load_operator(path) -> AssembledOperator:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError("not a spectralab operator file")
        version, is_complex, n = np.fromfile(f, dtype="<i8", count=3)
        if version != _FORMAT_VERSION:
            raise ValueError(f"unsupported operator format version {version}")
        count = n * (n + 1) // 2
        if is_complex:
            raw = np.fromfile(f, dtype="<f8", count=2 * count).reshape(-1, 2)
            tri = raw[:, 0] + 1j * raw[:, 1]
        else:
            tri = np.fromfile(f, dtype="<f8", count=count)
    m = np.zeros((n, n), dtype=complex if is_complex else float)
    idx = np.tril_indices(n)
    m[idx] = tri
    upper = np.triu_indices(n, k=1)
    m[upper] = m.conj().T[upper]
    try:
        with open(str(path) + ".json") as f:
            sidecar = json.load(f)
    except FileNotFoundError:
        sidecar = {"route": "unknown", "metadata": {}}
    return AssembledOperator(
        matrix=m, route=sidecar["route"], metadata=sidecar["metadata"]
    )
