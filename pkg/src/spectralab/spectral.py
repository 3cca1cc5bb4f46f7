"""Eigendecomposition and spectral functionals: counting functions, Weyl
plateaus, Dixmier sequences, order bounds, and cross-route spectrum matching.

The plateau statistic is a median of k * lambda_k over an index window, not a
fit of n(lambda): medians are robust to the staircase shape of counting
functions.  Window defaults (5%..25% of the spectrum length) deliberately
exclude the discretization-corrupted tail; windows are artifact conventions
and are reported alongside every number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import SolverError, SpectralWindowError
from .operators import AssembledOperator

EIGENVALUE_FLOOR_FACTOR = 1e-14
RESIDUAL_TOL = 1e-8
DEFAULT_WINDOW_FRACTIONS = (0.05, 0.25)


@dataclass(frozen=True)
class EigenReport:
    """Signed spectrum above the numerical floor, sorted descending."""

    positive: np.ndarray  # descending positive eigenvalues
    negative: np.ndarray  # descending absolute values of negative eigenvalues
    size: int
    floor: float
    route: str = "unknown"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("positive", "negative"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            if np.any(np.diff(arr) > 0):
                raise ValueError(f"{name} eigenvalue list must be sorted descending")
            if np.any(arr <= 0):
                raise ValueError(f"{name} list must hold values above the floor")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def sequence(self, sign: str) -> np.ndarray:
        if sign in ("+", "plus", "positive"):
            return self.positive
        if sign in ("-", "minus", "negative"):
            return self.negative
        raise ValueError(f"unknown sign {sign!r}")

    @property
    def singular_values(self) -> np.ndarray:
        return np.sort(np.concatenate([self.positive, self.negative]))[::-1]


def _residual_block(n: int, values: np.ndarray, pairs: int) -> tuple[int, int]:
    # Check eigenpairs at the large-|lambda| end of the spectrum (ascending order).
    k = min(pairs, n)
    if abs(values[0]) >= abs(values[-1]):
        return 0, k - 1
    return n - k, n - 1


def eigen_spectrum(
    op: AssembledOperator, residual_pairs: int = 5
) -> EigenReport:
    """Full dense self-adjoint eigensolve with a residual spot check.

    All eigenvalues come from one divide-and-conquer solve; a contiguous
    block of `residual_pairs` eigenpairs at the large-magnitude end is then
    recomputed with vectors and checked against ||M v - lam v|| <= 1e-8 ||M||.
    """
    m = op.matrix
    if not np.all(np.isfinite(m)):
        raise SolverError("operator matrix contains non-finite entries")
    n = op.size
    try:
        values = sla.eigh(m, eigvals_only=True, driver="evd", check_finite=False)
    except Exception as exc:  # pragma: no cover - LAPACK failures are rare
        raise SolverError(
            f"dense eigensolve failed on a {n} x {n} matrix: {exc}; "
            f"max |entry| {np.abs(m).max():g}, fro norm {np.linalg.norm(m):g}"
        ) from exc
    norm = float(np.abs(values).max(initial=0.0))

    if norm > 0 and n >= 2:
        lo, hi = _residual_block(n, values, residual_pairs)
        try:
            vals_blk, vecs_blk = sla.eigh(
                m, subset_by_index=(lo, hi), driver="evr", check_finite=False
            )
        except Exception as exc:  # pragma: no cover
            raise SolverError(f"residual eigenpair recomputation failed: {exc}") from exc
        resid = np.linalg.norm(m @ vecs_blk - vecs_blk * vals_blk, axis=0)
        if np.any(resid > RESIDUAL_TOL * norm):
            raise SolverError(
                f"eigenpair residual {resid.max():g} exceeds {RESIDUAL_TOL:g} * ||M|| "
                f"(||M|| = {norm:g}, size {n})"
            )
        agree = np.abs(vals_blk - values[lo : hi + 1]).max()
        if agree > RESIDUAL_TOL * norm:
            raise SolverError(
                f"evd/evr eigenvalue mismatch {agree:g} on the residual block"
            )

    floor = EIGENVALUE_FLOOR_FACTOR * norm
    pos = np.sort(values[values > floor])[::-1]
    neg = np.sort(-values[values < -floor])[::-1]
    return EigenReport(
        positive=pos,
        negative=neg,
        size=n,
        floor=floor,
        route=op.route,
        metadata=dict(op.metadata),
    )


def counting(report: EigenReport, lam: float, sign: str = "+") -> int:
    """Number of eigenvalues of (sign) T exceeding lam > 0."""
    if lam <= 0:
        raise ValueError("counting is defined for lam > 0")
    seq = report.sequence(sign)
    return int(np.sum(seq > lam))


@dataclass(frozen=True)
class WeylFit:
    window: tuple[int, int]  # 1-indexed, inclusive
    plateau: float
    dispersion: float  # interquartile range / plateau

    def __post_init__(self):
        if self.window[0] < 1 or self.plateau < 0:
            raise ValueError("invalid Weyl fit")


def _resolve_window(
    n: int,
    window: tuple[int, int] | None,
    fractions: tuple[float, float],
) -> tuple[int, int]:
    if window is not None:
        lo, hi = int(window[0]), int(window[1])
        lo = max(lo, 1)
        hi = min(hi, n)
    else:
        lo = max(1, int(round(fractions[0] * n)))
        hi = min(n, int(round(fractions[1] * n)))
    if hi < lo:
        raise SpectralWindowError(f"window [{lo}, {hi}] is empty for {n} eigenvalues")
    return lo, hi


def weyl_plateau(
    report: EigenReport,
    sign: str = "+",
    window_fractions: tuple[float, float] = DEFAULT_WINDOW_FRACTIONS,
    window: tuple[int, int] | None = None,
    min_count: int = 40,
) -> WeylFit:
    """Median of k * lambda_k over the window; dispersion is IQR / plateau."""
    seq = report.sequence(sign)
    if len(seq) < min_count:
        raise SpectralWindowError(
            f"need at least {min_count} eigenvalues of sign {sign}, have {len(seq)}"
        )
    lo, hi = _resolve_window(len(seq), window, window_fractions)
    k = np.arange(lo, hi + 1, dtype=float)
    products = k * seq[lo - 1 : hi]
    plateau = float(np.median(products))
    q1, q3 = np.percentile(products, [25, 75])
    dispersion = float((q3 - q1) / plateau) if plateau > 0 else math.inf
    return WeylFit(window=(lo, hi), plateau=plateau, dispersion=dispersion)


@dataclass(frozen=True)
class DixmierEstimate:
    """Log-averaged partial sums n -> sum_{k<=n} s_k / log(n + 2)."""

    sequence: np.ndarray
    final: float

    @staticmethod
    def from_values(s: np.ndarray) -> "DixmierEstimate":
        s = np.asarray(s, dtype=float)
        if s.size == 0:
            raise ValueError("need at least one singular value")
        n = np.arange(1, len(s) + 1, dtype=float)
        seq = np.cumsum(s) / np.log(n + 2.0)
        return DixmierEstimate(sequence=seq, final=float(seq[-1]))


def dixmier_sequence(arg) -> DixmierEstimate:
    """Dixmier estimator for raw singular values or for a signed report.

    For an EigenReport with both signs present, the estimate is the
    difference of the positive and negative log-averaged sums (partial sums
    saturate once a list is exhausted), so the final value approximates the
    signed trace.
    """
    if isinstance(arg, EigenReport):
        if len(arg.negative) == 0:
            return DixmierEstimate.from_values(arg.positive)
        if len(arg.positive) == 0:
            est = DixmierEstimate.from_values(arg.negative)
            return DixmierEstimate(sequence=-est.sequence, final=-est.final)
        m = max(len(arg.positive), len(arg.negative))
        cp = np.cumsum(arg.positive)
        cn = np.cumsum(arg.negative)
        cp = np.concatenate([cp, np.full(m - len(cp), cp[-1])])
        cn = np.concatenate([cn, np.full(m - len(cn), cn[-1])])
        n = np.arange(1, m + 1, dtype=float)
        seq = (cp - cn) / np.log(n + 2.0)
        return DixmierEstimate(sequence=seq, final=float(seq[-1]))
    return DixmierEstimate.from_values(np.asarray(arg, dtype=float))


def order_bounds(
    report: EigenReport, sign: str = "+", window: tuple[int, int] | None = None
) -> tuple[float, float]:
    """(inf, sup) of k * lambda_k over the window: the two-sided order witness."""
    seq = report.sequence(sign)
    if len(seq) == 0:
        raise SpectralWindowError("empty spectrum")
    lo, hi = _resolve_window(len(seq), window, DEFAULT_WINDOW_FRACTIONS)
    k = np.arange(lo, hi + 1, dtype=float)
    products = k * seq[lo - 1 : hi]
    return float(products.min()), float(products.max())


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    deviations_positive: np.ndarray
    deviations_negative: np.ndarray

    @property
    def worst(self) -> float:
        worst = 0.0
        for dev in (self.deviations_positive, self.deviations_negative):
            if len(dev):
                worst = max(worst, float(dev.max()))
        return worst


def spectra_match(
    a: EigenReport, b: EigenReport, top: int, rel_tol: float
) -> MatchResult:
    """Elementwise comparison of the top eigenvalues of each sign.

    Each sign is compared over min(top, len_a, len_b) entries; a sign with no
    eigenvalues on either side is skipped (floors differ between routes).
    """
    if len(a.positive) + len(a.negative) == 0 or len(b.positive) + len(b.negative) == 0:
        raise ValueError("both reports must carry some spectrum")
    devs = {}
    for sign in ("+", "-"):
        sa, sb = a.sequence(sign), b.sequence(sign)
        m = min(top, len(sa), len(sb))
        if m == 0:
            devs[sign] = np.empty(0)
            continue
        ref = np.maximum(np.abs(sa[:m]), np.abs(sb[:m]))
        devs[sign] = np.abs(sa[:m] - sb[:m]) / ref
    matched = all(len(d) == 0 or d.max() <= rel_tol for d in devs.values())
    return MatchResult(
        matched=bool(matched),
        deviations_positive=devs["+"],
        deviations_negative=devs["-"],
    )


# -- serialization -----------------------------------------------------------


def write_spectrum_csv(report: EigenReport, path) -> None:
    """Columns index, sign, lambda, k_lambda with full float precision."""
    with open(path, "w") as f:
        f.write("index,sign,lambda,k_lambda\n")
        for sign, seq in (("+", report.positive), ("-", report.negative)):
            for i, lam in enumerate(seq, start=1):
                f.write(f"{i},{sign},{float(lam)!r},{float(i * lam)!r}\n")


def read_spectrum_csv(path) -> dict[str, np.ndarray]:
    pos, neg = [], []
    with open(path) as f:
        header = f.readline()
        if not header.startswith("index,sign"):
            raise ValueError("not a spectralab spectrum file")
        for line in f:
            idx, sign, lam, _ = line.strip().split(",")
            (pos if sign == "+" else neg).append(float(lam))
    return {"+": np.array(pos), "-": np.array(neg)}
