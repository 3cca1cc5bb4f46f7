"""Discrete approximations of singular measures and their geometric diagnostics.

A measure is represented as a weighted atom cloud.  Integrals against the
measure become weighted sums, ball masses become range queries, and the
regularity/density quantities of fractal geometry become finite-scale ratio
statistics.  All resolutions are explicit: nothing here claims to compute a
limit, only its finite-scale proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    BudgetError,
    DegenerateSystemError,
    DimensionMismatchError,
    EvaluationError,
    InvalidRatioError,
    LipschitzBoundError,
    ResolutionError,
    ScenarioError,
)

MASS_RTOL = 1e-12
IFS_DIMENSION_CAP = 64.0
IFS_RESIDUAL_TOL = 1e-12
DEFAULT_ATOM_BUDGET = 200_000
DEFAULT_REGULARITY_THRESHOLD = 50.0
DEFAULT_PREISS_CONSTANT = 10.0  # heuristic placeholder; the true constant is nonconstructive


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Component:
    """Contiguous atom range [start, stop) carrying one nominal dimension."""

    start: int
    stop: int
    nominal_dim: float


@dataclass(frozen=True)
class PointCloudMeasure:
    """Weighted atom cloud approximating a compactly supported Borel measure.

    positions : (n, N) array of atom locations in R^N
    weights   : (n,) nonnegative masses
    components: partition of the atom range, each with a nominal dimension
    total_mass: declared total mass, must match the weight sum
    """

    positions: np.ndarray
    weights: np.ndarray
    components: tuple[Component, ...]
    total_mass: float

    def __post_init__(self):
        pos = _readonly(np.asarray(self.positions, dtype=float))
        w = _readonly(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)
        if pos.ndim != 2 or pos.shape[0] != w.shape[0]:
            raise ValueError("positions must be (n, N) matching weights (n,)")
        if not np.all(np.isfinite(pos)):
            raise ValueError("atom positions must lie in a finite bounding box")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        s = float(w.sum())
        if abs(s - self.total_mass) > MASS_RTOL * max(1.0, abs(self.total_mass)):
            raise ValueError(
                f"total_mass {self.total_mass!r} does not match weight sum {s!r}"
            )
        edges = [(c.start, c.stop) for c in self.components]
        expect = 0
        for start, stop in edges:
            if start != expect or stop < start:
                raise ValueError("components must partition the atom range in order")
            expect = stop
        if expect != len(w):
            raise ValueError("components must cover all atoms")
        for c in self.components:
            if not (0.0 < c.nominal_dim <= self.ambient_dim):
                raise ValueError("nominal_dim must lie in (0, N]")

    @property
    def ambient_dim(self) -> int:
        return self.positions.shape[1]

    @property
    def atom_count(self) -> int:
        return self.positions.shape[0]

    def component_slice(self, i: int) -> slice:
        c = self.components[i]
        return slice(c.start, c.stop)

    @staticmethod
    def from_atoms(
        positions: np.ndarray, weights: np.ndarray, nominal_dim: float
    ) -> "PointCloudMeasure":
        """Single-component measure from raw atom arrays."""
        w = np.asarray(weights, dtype=float)
        return PointCloudMeasure(
            positions=np.asarray(positions, dtype=float),
            weights=w,
            components=(Component(0, len(w), nominal_dim),),
            total_mass=float(w.sum()),
        )


@dataclass(frozen=True)
class SignedDensity:
    """Per-atom values of a real density V; the pairing with a measure gives P = V mu."""

    values: np.ndarray

    def __post_init__(self):
        v = _readonly(np.asarray(self.values, dtype=float))
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("density values must be a finite 1-d sequence")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def positive_part(self) -> np.ndarray:
        return np.maximum(self.values, 0.0)

    @property
    def negative_part(self) -> np.ndarray:
        return np.maximum(-self.values, 0.0)

    @staticmethod
    def ones(n: int) -> "SignedDensity":
        return SignedDensity(np.ones(n))


def check_pairing(measure: PointCloudMeasure, density: SignedDensity) -> None:
    if len(density) != measure.atom_count:
        raise ValueError(
            f"density length {len(density)} does not match atom count {measure.atom_count}"
        )


ORTHOGONALITY_TOL = 1e-10


@dataclass(frozen=True)
class Similitude:
    """Contractive similitude x -> h Q x + b with 0 < h < 1 and Q orthogonal."""

    ratio: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise InvalidRatioError(f"contraction ratio {self.ratio} not in (0, 1)")
        q = _readonly(np.asarray(self.rotation, dtype=float))
        b = _readonly(np.asarray(self.translation, dtype=float))
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", b)
        n = b.shape[0]
        if q.shape != (n, n):
            raise ValueError("rotation must be square and match the translation")
        if np.abs(q.T @ q - np.eye(n)).max() > ORTHOGONALITY_TOL:
            raise ValueError("rotation matrix is not orthogonal to 1e-10")

    @property
    def dim(self) -> int:
        return self.translation.shape[0]

    def fixed_point(self) -> np.ndarray:
        """Unique solution of x = h Q x + b (exists since h < 1)."""
        n = self.dim
        return np.linalg.solve(np.eye(n) - self.ratio * self.rotation, self.translation)

    @staticmethod
    def scaling(ratio: float, translation: Sequence[float]) -> "Similitude":
        b = np.asarray(translation, dtype=float)
        return Similitude(ratio, np.eye(len(b)), b)


def ifs_dimension(maps: Sequence[Similitude]) -> float:
    """Similarity dimension: the unique d > 0 with sum h_j^d = 1.

    Found by monotone bisection on (0, 64]; the left side is strictly
    decreasing in d, from m - 1 > 0 down to -1.
    """
    if len(maps) < 2:
        raise DegenerateSystemError("an IFS needs at least two maps")
    h = np.array([s.ratio for s in maps], dtype=float)
    if np.any(h <= 0.0) or np.any(h >= 1.0):
        raise InvalidRatioError("all contraction ratios must lie in (0, 1)")

    def f(d: float) -> float:
        return float(np.sum(h**d)) - 1.0

    lo, hi = 1e-12, IFS_DIMENSION_CAP
    if f(hi) > 0.0:
        raise InvalidRatioError("no similarity dimension below the cap 64")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * hi and abs(f(hi)) <= IFS_RESIDUAL_TOL:
            break
    d = 0.5 * (lo + hi)
    if abs(f(d)) > IFS_RESIDUAL_TOL:
        d = hi if abs(f(hi)) < abs(f(d)) else d
    return d


@dataclass(frozen=True)
class SimilitudeSystem:
    """An IFS together with its similarity dimension."""

    maps: tuple[Similitude, ...]
    similarity_dim: float

    def __post_init__(self):
        h = np.array([s.ratio for s in self.maps])
        residual = abs(np.sum(h**self.similarity_dim) - 1.0)
        if residual > IFS_RESIDUAL_TOL:
            raise ValueError(f"similarity_dim residual {residual:g} exceeds 1e-12")
        n = self.maps[0].dim
        if not (0.0 < self.similarity_dim <= n):
            raise ValueError("similarity dimension must lie in (0, N]")

    @staticmethod
    def from_maps(maps: Sequence[Similitude]) -> "SimilitudeSystem":
        return SimilitudeSystem(tuple(maps), ifs_dimension(maps))

    @property
    def probabilities(self) -> np.ndarray:
        """Self-similar weights p_j = h_j^d (sum to one by construction)."""
        h = np.array([s.ratio for s in self.maps])
        return h**self.similarity_dim


def cantor_system() -> SimilitudeSystem:
    """Middle-third Cantor IFS on the line (embedded as 1-d maps)."""
    maps = [Similitude.scaling(1 / 3, [0.0]), Similitude.scaling(1 / 3, [2 / 3])]
    return SimilitudeSystem.from_maps(maps)


def sierpinski_system(side: float = 1.0) -> SimilitudeSystem:
    """Sierpinski gasket IFS: three half-scale maps toward triangle vertices."""
    verts = np.array([[0.0, 0.0], [side, 0.0], [0.5 * side, 0.5 * math.sqrt(3) * side]])
    maps = [Similitude.scaling(0.5, 0.5 * v) for v in verts]
    return SimilitudeSystem.from_maps(maps)


def ifs_self_similar_measure(
    system: SimilitudeSystem, depth: int, atom_budget: int = DEFAULT_ATOM_BUDGET
) -> PointCloudMeasure:
    """Depth-k atomization of the self-similar measure of an IFS.

    One atom per word w = (j_1 ... j_k): its position is the composed map
    S_{j_1} o ... o S_{j_k} applied to the fixed point of S_{j_1}, its weight
    the product of the self-similar probabilities p_{j_i} = h_{j_i}^d.  The
    open set condition is assumed, not verified; weights are exact for equal
    ratios and the natural surrogate otherwise.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    m = len(system.maps)
    if m**depth > atom_budget:
        raise BudgetError(f"{m}^{depth} atoms exceed the budget {atom_budget}")
    n = system.maps[0].dim
    probs = system.probabilities

    # Left-to-right composition: keep (M, b) of the composed affine map plus
    # the first letter of each word; extend words on the right.
    mats = np.array([s.ratio * s.rotation for s in system.maps])  # (m, n, n)
    offs = np.array([s.translation for s in system.maps])  # (m, n)
    cur_m = mats.copy()
    cur_b = offs.copy()
    cur_first = np.arange(m)
    cur_w = probs.copy()
    for _ in range(depth - 1):
        # new = old o S_j : x -> M_old (M_j x + b_j) + b_old
        new_m = np.einsum("aij,bjk->abik", cur_m, mats).reshape(-1, n, n)
        new_b = (
            np.einsum("aij,bj->abi", cur_m, offs) + cur_b[:, None, :]
        ).reshape(-1, n)
        cur_first = np.repeat(cur_first, m)
        cur_w = (cur_w[:, None] * probs[None, :]).ravel()
        cur_m, cur_b = new_m, new_b

    fixed = np.array([s.fixed_point() for s in system.maps])  # (m, n)
    pos = np.einsum("aij,aj->ai", cur_m, fixed[cur_first]) + cur_b
    total = float(cur_w.sum())
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"IFS weights sum to {total!r}, expected 1")
    return PointCloudMeasure(
        positions=pos,
        weights=cur_w,
        components=(Component(0, len(cur_w), system.similarity_dim),),
        total_mass=total,
    )


@dataclass(frozen=True)
class LipschitzPatch:
    """Graph patch y = phi(x) over an axis-aligned box G in R^d.

    phi maps (m, d) arrays of points to (m, codim) arrays of values; the
    surface lives in R^{d + codim}.
    """

    param_dim: int
    codim: int
    box_lo: np.ndarray
    box_hi: np.ndarray
    resolution: tuple[int, ...]
    phi: Callable[[np.ndarray], np.ndarray]
    lipschitz_estimate: float

    def __post_init__(self):
        lo = _readonly(np.asarray(self.box_lo, dtype=float))
        hi = _readonly(np.asarray(self.box_hi, dtype=float))
        object.__setattr__(self, "box_lo", lo)
        object.__setattr__(self, "box_hi", hi)
        if lo.shape != (self.param_dim,) or hi.shape != (self.param_dim,):
            raise ValueError("box bounds must have length param_dim")
        if np.any(hi <= lo):
            raise ValueError("box must have positive extent on every axis")
        if len(self.resolution) != self.param_dim or min(self.resolution) < 2:
            raise ValueError("need a resolution of at least 2 cells per axis")

    @property
    def ambient_dim(self) -> int:
        return self.param_dim + self.codim


def _patch_grid(patch: LipschitzPatch):
    axes = [
        patch.box_lo[i]
        + (patch.box_hi[i] - patch.box_lo[i]) * (np.arange(k) + 0.5) / k
        for i, k in enumerate(patch.resolution)
    ]
    steps = [
        (patch.box_hi[i] - patch.box_lo[i]) / k for i, k in enumerate(patch.resolution)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return mesh, pts, steps


def surface_measure(patch: LipschitzPatch) -> PointCloudMeasure:
    """Midpoint-rule surface measure of a Lipschitz graph patch.

    Atom positions are (x_c, phi(x_c)) at cell centers; the weight is the
    area element sigma(x_c) = det(I + (grad phi)^T grad phi)^{1/2} times the
    cell volume.  Gradients use central differences, one-sided at the box
    boundary.
    """
    d, q = patch.param_dim, patch.codim
    mesh, pts, steps = _patch_grid(patch)
    vals = np.asarray(patch.phi(pts), dtype=float).reshape(-1, q)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("phi evaluated to a non-finite value on the grid")
    grid_shape = tuple(patch.resolution)
    vals_grid = vals.reshape(*grid_shape, q)

    # jac[..., a, i] = d phi_a / d x_i
    jac = np.empty(grid_shape + (q, d))
    for a in range(q):
        grads = np.gradient(vals_grid[..., a], *steps, edge_order=1)
        if d == 1:
            grads = [grads]
        for i in range(d):
            jac[..., a, i] = grads[i]
    if not np.all(np.isfinite(jac)):
        raise EvaluationError("non-finite finite-difference gradient")
    op_norms = np.linalg.norm(jac.reshape(-1, q, d), ord=2, axis=(1, 2))
    if op_norms.max(initial=0.0) > patch.lipschitz_estimate * (1 + 1e-6):
        raise LipschitzBoundError(
            f"gradient norm {op_norms.max():.6g} exceeds the Lipschitz estimate "
            f"{patch.lipschitz_estimate:.6g}"
        )

    gram = np.einsum("...ai,...aj->...ij", jac, jac) + np.eye(d)
    sigma = np.sqrt(np.linalg.det(gram.reshape(-1, d, d)))
    cell_vol = float(np.prod(steps))
    weights = sigma * cell_vol
    positions = np.concatenate([pts, vals], axis=1)
    return PointCloudMeasure(
        positions=positions,
        weights=weights,
        components=(Component(0, len(weights), float(d)),),
        total_mass=float(weights.sum()),
    )


def union_measure(
    parts: Sequence[tuple[PointCloudMeasure, SignedDensity]]
) -> tuple[PointCloudMeasure, SignedDensity]:
    """Concatenate measures; every input component survives with its dimension."""
    if not parts:
        raise ValueError("need at least one part")
    ambient = parts[0][0].ambient_dim
    for mu, v in parts:
        check_pairing(mu, v)
        if mu.ambient_dim != ambient:
            raise DimensionMismatchError(
                f"ambient dimensions differ: {mu.ambient_dim} vs {ambient}"
            )
    positions = np.vstack([mu.positions for mu, _ in parts])
    weights = np.concatenate([mu.weights for mu, _ in parts])
    values = np.concatenate([v.values for _, v in parts])
    comps = []
    offset = 0
    for mu, _ in parts:
        for c in mu.components:
            comps.append(Component(c.start + offset, c.stop + offset, c.nominal_dim))
        offset += mu.atom_count
    total = float(sum(mu.total_mass for mu, _ in parts))
    out = PointCloudMeasure(
        positions=positions,
        weights=weights,
        components=tuple(comps),
        total_mass=total,
    )
    return out, SignedDensity(values)


# -- ball statistics ---------------------------------------------------------

_KDTREE_THRESHOLD = 100_000


def _tree(measure: PointCloudMeasure) -> cKDTree:
    return cKDTree(measure.positions)


def ball_mass(measure: PointCloudMeasure, center: Sequence[float], radius: float) -> float:
    """Mass of the closed ball B(center, radius): a weighted range count."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)
    if measure.atom_count > _KDTREE_THRESHOLD:
        idx = _tree(measure).query_ball_point(c, radius)
        return float(measure.weights[idx].sum())
    dist = np.linalg.norm(measure.positions - c[None, :], axis=1)
    return float(measure.weights[dist <= radius].sum())


def nearest_neighbor_spacing(measure: PointCloudMeasure) -> float:
    """Median nearest-neighbor distance; the resolution scale of the cloud."""
    if measure.atom_count < 2:
        return math.inf
    d, _ = _tree(measure).query(measure.positions, k=2)
    return float(np.median(d[:, 1]))


def diameter(measure: PointCloudMeasure) -> float:
    span = measure.positions.max(axis=0) - measure.positions.min(axis=0)
    return float(np.linalg.norm(span))


def _check_radii_floor(measure: PointCloudMeasure, radii: np.ndarray) -> float:
    floor = 4.0 * nearest_neighbor_spacing(measure)
    if radii.min() < floor:
        raise ResolutionError(
            f"radius {radii.min():g} below the resolution floor {floor:g} "
            "(4 x nearest-neighbor spacing); the atom cloud cannot witness it"
        )
    return floor


@dataclass(frozen=True)
class AhlforsBand:
    """Empirical bounds on mu(B(X, r)) / r^s over sampled centers and radii."""

    exponent: float
    c_lower: float
    c_upper: float
    is_regular: bool
    threshold: float
    radii: tuple[float, ...]
    sample_count: int

    @property
    def ratio(self) -> float:
        return self.c_upper / self.c_lower if self.c_lower > 0 else math.inf


def ahlfors_constants(
    measure: PointCloudMeasure,
    s: float,
    radii: Sequence[float],
    sample_count: int,
    seed: int = 0,
    ratio_threshold: float = DEFAULT_REGULARITY_THRESHOLD,
) -> AhlforsBand:
    """Scan mu(B(X, r)) / r^s over sampled atoms X; report the min/max band.

    The measure is flagged empirically s-regular when the band ratio stays
    below `ratio_threshold`.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    r = np.asarray(sorted(radii), dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise ValueError("radii must be positive")
    _check_radii_floor(measure, r)
    n = measure.atom_count
    if sample_count >= n:
        centers = measure.positions
    else:
        rng = np.random.default_rng(seed)
        centers = measure.positions[rng.choice(n, size=sample_count, replace=False)]
    lo, hi = math.inf, -math.inf
    for c in centers:
        dist = np.linalg.norm(measure.positions - c[None, :], axis=1)
        masses = np.array([measure.weights[dist <= ri].sum() for ri in r])
        ratios = masses / r**s
        lo = min(lo, float(ratios.min()))
        hi = max(hi, float(ratios.max()))
    return AhlforsBand(
        exponent=s,
        c_lower=lo,
        c_upper=hi,
        is_regular=bool(lo > 0 and hi / lo <= ratio_threshold),
        threshold=ratio_threshold,
        radii=tuple(float(x) for x in r),
        sample_count=len(centers),
    )


@dataclass(frozen=True)
class DensityEstimate:
    """Finite-scale proxy for the lower/upper s-densities at one point.

    `mat_cond_ok` flags 0 < density < infinity at finite scale;
    `preiss_ok` flags upper < c * lower with the configurable placeholder
    constant (the true constant is nonconstructive) -- both heuristics.
    """

    exponent: float
    lower: float
    upper: float
    radii_used: tuple[float, ...]
    mat_cond_ok: bool
    preiss_ok: bool
    preiss_constant: float

    def __post_init__(self):
        if self.lower > self.upper or self.lower < 0:
            raise ValueError("need 0 <= lower <= upper")


def density_bounds(
    measure: PointCloudMeasure,
    s: float,
    center: Sequence[float],
    radii: Sequence[float],
    preiss_constant: float = DEFAULT_PREISS_CONSTANT,
) -> DensityEstimate:
    """Min/max of mu(B(X, r)) / r^s over the given radii at a fixed center."""
    r = np.asarray(sorted(radii), dtype=float)
    if r.size == 0 or np.any(r <= 0):
        raise ValueError("radii must be positive")
    _check_radii_floor(measure, r)
    c = np.asarray(center, dtype=float)
    dist = np.linalg.norm(measure.positions - c[None, :], axis=1)
    masses = np.array([measure.weights[dist <= ri].sum() for ri in r])
    ratios = masses / r**s
    lower, upper = float(ratios.min()), float(ratios.max())
    return DensityEstimate(
        exponent=s,
        lower=lower,
        upper=upper,
        radii_used=tuple(float(x) for x in r),
        mat_cond_ok=bool(lower > 0 and math.isfinite(upper)),
        preiss_ok=bool(upper < preiss_constant * lower),
        preiss_constant=preiss_constant,
    )


# -- scenario catalog --------------------------------------------------------


def _circle_atoms(n: int, radius: float, center=(0.0, 0.0)):
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    pos = np.stack(
        [center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)], axis=1
    )
    w = np.full(n, 2 * np.pi * radius / n)
    return theta, pos, w


def _cantor_midpoints(depth: int) -> np.ndarray:
    """Midpoints of the level-k triadic intervals: distinct, none at 0 or 1."""
    x = np.array([0.5])
    for _ in range(depth):
        x = np.concatenate([x / 3.0, x / 3.0 + 2.0 / 3.0])
    return np.sort(x)


def _fibonacci_sphere(n: int, radius: float):
    j = np.arange(n)
    z = 1.0 - (2.0 * j + 1.0) / n
    phi = math.pi * (3.0 - math.sqrt(5.0)) * j
    rho = np.sqrt(1.0 - z**2)
    pos = radius * np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    w = np.full(n, 4 * np.pi * radius**2 / n)
    return pos, w


def _require(params: dict, name: str, scenario: str) -> float:
    if name not in params:
        raise ScenarioError(f"scenario {scenario!r} is missing parameter {name!r}")
    return params[name]


BUILTIN_MEASURES = (
    "circle",
    "segment",
    "two_circles",
    "sphere",
    "cantor_line",
    "cantor_circle",
    "sierpinski",
    "half_signed_circle",
    "circle_plus_square",
    "steklov_cantor",
)


def builtin_measure(
    name: str, params: dict | None = None
) -> tuple[PointCloudMeasure, SignedDensity]:
    """Construct one of the catalog measures with its default density.

    All catalog measures carry V = 1 except `half_signed_circle`, whose
    density is +1 on the upper half-arc and -1 on the lower.
    """
    p = dict(params or {})

    def get(key, default=None):
        if default is None:
            return _require(p, key, name)
        return p.get(key, default)

    if name == "circle":
        n = int(get("atoms", 2000))
        r = float(get("radius", 1.0))
        cx, cy = float(get("cx", 0.0)), float(get("cy", 0.0))
        _, pos, w = _circle_atoms(n, r, (cx, cy))
        return PointCloudMeasure.from_atoms(pos, w, 1.0), SignedDensity.ones(n)

    if name == "segment":
        n = int(get("atoms", 2000))
        length = float(get("length", 1.0))
        x = length * (np.arange(n) + 0.5) / n
        pos = np.stack([x, np.zeros(n)], axis=1)
        w = np.full(n, length / n)
        return PointCloudMeasure.from_atoms(pos, w, 1.0), SignedDensity.ones(n)

    if name == "two_circles":
        n = int(get("atoms", 3000))
        r1, r2 = float(get("r1", 1.0)), float(get("r2", 0.5))
        gap = float(get("gap", 1.0))
        n1 = int(round(n * r1 / (r1 + r2)))
        n2 = n - n1
        _, pos1, w1 = _circle_atoms(n1, r1, (0.0, 0.0))
        _, pos2, w2 = _circle_atoms(n2, r2, (r1 + gap + r2, 0.0))
        m1 = PointCloudMeasure.from_atoms(pos1, w1, 1.0)
        m2 = PointCloudMeasure.from_atoms(pos2, w2, 1.0)
        return union_measure(
            [(m1, SignedDensity.ones(n1)), (m2, SignedDensity.ones(n2))]
        )

    if name == "sphere":
        n = int(get("atoms", 3000))
        r = float(get("radius", 1.0))
        pos, w = _fibonacci_sphere(n, r)
        return PointCloudMeasure.from_atoms(pos, w, 2.0), SignedDensity.ones(n)

    if name == "cantor_line":
        depth = int(get("depth", 9))
        system = cantor_system()
        line = ifs_self_similar_measure(system, depth)
        pos = np.concatenate([line.positions, np.zeros((line.atom_count, 1))], axis=1)
        mu = PointCloudMeasure(
            positions=pos,
            weights=line.weights,
            components=line.components,
            total_mass=line.total_mass,
        )
        return mu, SignedDensity.ones(mu.atom_count)

    if name in ("cantor_circle", "steklov_cantor"):
        depth = int(get("depth", 10 if name == "cantor_circle" else 12))
        r = float(get("radius", 1.0))
        d = math.log(2) / math.log(3)
        x = _cantor_midpoints(depth)
        theta = 2 * np.pi * x
        pos = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        w = np.full(len(x), 1.0 / len(x))
        return (
            PointCloudMeasure.from_atoms(pos, w, d),
            SignedDensity.ones(len(x)),
        )

    if name == "sierpinski":
        depth = int(get("depth", 7))
        system = sierpinski_system(float(get("side", 1.0)))
        mu = ifs_self_similar_measure(system, depth)
        return mu, SignedDensity.ones(mu.atom_count)

    if name == "half_signed_circle":
        n = int(get("atoms", 2000))
        r = float(get("radius", 1.0))
        theta, pos, w = _circle_atoms(n, r)
        v = np.where(theta < np.pi, 1.0, -1.0)
        return PointCloudMeasure.from_atoms(pos, w, 1.0), SignedDensity(v)

    if name == "circle_plus_square":
        n = int(get("atoms", 2000))
        r = float(get("radius", 1.0))
        cells = int(get("cells", 45))
        side = float(get("side", 1.0))
        _, cpos, cw = _circle_atoms(n, r)
        g = side * ((np.arange(cells) + 0.5) / cells - 0.5)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        spos = np.stack([gx.ravel(), gy.ravel()], axis=1)
        sw = np.full(cells * cells, side * side / (cells * cells))
        mc = PointCloudMeasure.from_atoms(cpos, cw, 1.0)
        ms = PointCloudMeasure.from_atoms(spos, sw, 2.0)
        return union_measure(
            [(mc, SignedDensity.ones(n)), (ms, SignedDensity.ones(cells * cells))]
        )

    raise ScenarioError(f"unknown measure scenario {name!r}")


# -- serialization -----------------------------------------------------------


def save_measure_text(
    measure: PointCloudMeasure, path, density: SignedDensity | None = None
) -> None:
    """Columnar text format: header `N n_components total_mass`, one line per
    component `count nominal_dim`, then one line per atom `x1 .. xN w [V]`."""
    if density is not None:
        check_pairing(measure, density)
    with open(path, "w") as f:
        f.write(
            f"{measure.ambient_dim} {len(measure.components)} {measure.total_mass!r}\n"
        )
        for c in measure.components:
            f.write(f"{c.stop - c.start} {c.nominal_dim!r}\n")
        for i in range(measure.atom_count):
            cols = [repr(float(x)) for x in measure.positions[i]]
            cols.append(repr(float(measure.weights[i])))
            if density is not None:
                cols.append(repr(float(density.values[i])))
            f.write(" ".join(cols) + "\n")


def load_measure_text(path) -> tuple[PointCloudMeasure, SignedDensity | None]:
    with open(path) as f:
        first = f.readline().split()
        ambient, ncomp = int(first[0]), int(first[1])
        total = float(first[2])
        comps = []
        start = 0
        for _ in range(ncomp):
            cnt_s, dim_s = f.readline().split()
            cnt = int(cnt_s)
            comps.append(Component(start, start + cnt, float(dim_s)))
            start += cnt
        rows = [line.split() for line in f if line.strip()]
    data = np.array(rows, dtype=float)
    pos = data[:, :ambient]
    w = data[:, ambient]
    v = SignedDensity(data[:, ambient + 1]) if data.shape[1] > ambient + 1 else None
    mu = PointCloudMeasure(
        positions=pos, weights=w, components=tuple(comps), total_mass=total
    )
    return mu, v
