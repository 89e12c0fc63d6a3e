"""Periodic grids, field containers, and spectral/finite-difference calculus.

Everything downstream (composite operators, functionals, right-hand sides)
is built on the primitives here: Fourier-collocation derivatives on a uniform
periodic lattice, rectangle-rule quadrature (exact for resolved trigonometric
polynomials), 2/3-rule dealiasing, and a seeded smooth-positive field
generator used by the verification suites.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi

_BACKENDS = ("spectral", "fd2")


class Grid:
    """Uniform periodic lattice on [0, L1) x ... x [0, Ld), d in {1,2,3}.

    Node counts must be even and >= 8 per axis so the 2/3 dealiasing rule and
    Nyquist handling are well defined.
    """

    __slots__ = ("dim", "n", "length", "spacing", "shape", "_kd", "_lap_mult",
                 "_dealias_mask", "_coords")

    def __init__(self, n, length=None):
        if np.isscalar(n):
            n = (int(n),)
        n = tuple(int(m) for m in n)
        dim = len(n)
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2, or 3, got {dim}")
        for m in n:
            if m < 8 or m % 2 != 0:
                raise ValueError(f"node counts must be even and >= 8, got {m}")
        if length is None:
            length = (TWO_PI,) * dim
        elif np.isscalar(length):
            length = (float(length),) * dim
        else:
            length = tuple(float(L) for L in length)
        if len(length) != dim:
            raise ValueError("length must have one entry per axis")
        for L in length:
            if L <= 0:
                raise ValueError("domain extents must be positive")
        self.dim = dim
        self.n = n
        self.length = length
        self.spacing = tuple(L / m for L, m in zip(length, n))
        self.shape = n

        # Wavenumbers with the Nyquist mode zeroed, so d/dx of a real field is
        # real and div(grad f) == laplacian f holds to roundoff by construction.
        kd = []
        for m, L in zip(n, length):
            k = TWO_PI * np.fft.fftfreq(m, d=L / m)
            k[m // 2] = 0.0
            kd.append(k)
        self._kd = kd
        lap = np.zeros(n)
        for a in range(dim):
            lap = lap - self._bcast(kd[a] ** 2, a)
        self._lap_mult = lap

        mask = np.ones(n, dtype=bool)
        for a, m in enumerate(n):
            idx = np.rint(np.fft.fftfreq(m) * m).astype(int)
            mask = mask & self._bcast(np.abs(idx) <= m // 3, a)
        self._dealias_mask = mask

        self._coords = tuple(
            np.arange(m) * h for m, h in zip(n, self.spacing))

    def _bcast(self, arr1d, axis):
        shape = [1] * self.dim
        shape[axis] = self.n[axis]
        return arr1d.reshape(shape)

    @property
    def node_count(self):
        return int(np.prod(self.n))

    @property
    def volume(self):
        return float(np.prod(self.length))

    def coords(self):
        """Per-axis 1D coordinate arrays."""
        return self._coords

    def meshgrid(self):
        """Full nodal coordinate arrays, shape == grid.shape each."""
        return np.meshgrid(*self._coords, indexing="ij")

    def dealias_limit(self):
        """Largest mode index kept by the 2/3 rule (per axis minimum)."""
        return min(m // 3 for m in self.n)

    def __eq__(self, other):
        return (isinstance(other, Grid) and self.n == other.n
                and self.length == other.length)

    def __hash__(self):
        return hash((self.n, self.length))

    def __repr__(self):
        return f"Grid(n={self.n}, length={self.length})"


def _freeze(arr):
    arr.setflags(write=False)
    return arr


class ScalarField:
    """Nodal samples of a scalar on a Grid. Immutable once constructed."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=float, copy=True).reshape(grid.shape)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _freeze(v))

    def __setattr__(self, *a):
        raise AttributeError("ScalarField is immutable")

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, fn(*grid.meshgrid()))

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.shape, float(c)))


class VectorField:
    """dim scalar components sharing a Grid; stored as one (dim, *n) array."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=float, copy=True)
        v = v.reshape((grid.dim,) + grid.shape)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _freeze(v))

    def __setattr__(self, *a):
        raise AttributeError("VectorField is immutable")

    @classmethod
    def from_components(cls, *components):
        grid = components[0].grid
        if len(components) != grid.dim:
            raise ValueError("need one component per axis")
        return cls(grid, np.stack([c.values for c in components]))

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    def component(self, i):
        return ScalarField(self.grid, self.values[i])


class TensorField:
    """dim x dim scalar components sharing a Grid; (dim, dim, *n) array."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=float, copy=True)
        v = v.reshape((grid.dim, grid.dim) + grid.shape)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", _freeze(v))

    def __setattr__(self, *a):
        raise AttributeError("TensorField is immutable")

    def component(self, i, j):
        return ScalarField(self.grid, self.values[i, j])


# ---------------------------------------------------------------------------
# array-level calculus (used internally; public field ops wrap these)
# ---------------------------------------------------------------------------

def deriv_arr(grid, arr, axis, backend="spectral"):
    """d(arr)/dx_axis on the grid."""
    if backend == "spectral":
        ik = 1j * grid._bcast(grid._kd[axis], axis)
        return np.real(np.fft.ifftn(ik * np.fft.fftn(arr)))
    if backend == "fd2":
        h = grid.spacing[axis]
        return (np.roll(arr, -1, axis) - np.roll(arr, 1, axis)) / (2 * h)
    raise ValueError(f"unknown backend {backend!r}")


def lap_arr(grid, arr, backend="spectral"):
    if backend == "spectral":
        return np.real(np.fft.ifftn(grid._lap_mult * np.fft.fftn(arr)))
    if backend == "fd2":
        out = np.zeros_like(arr)
        for a, h in enumerate(grid.spacing):
            out += (np.roll(arr, -1, a) - 2 * arr + np.roll(arr, 1, a)) / h**2
        return out
    raise ValueError(f"unknown backend {backend!r}")


def grad_arr(grid, arr, backend="spectral"):
    """(dim, *n) array of first derivatives."""
    return np.stack([deriv_arr(grid, arr, a, backend)
                     for a in range(grid.dim)])


def div_arr(grid, vec, backend="spectral"):
    out = np.zeros(grid.shape)
    for a in range(grid.dim):
        out += deriv_arr(grid, vec[a], a, backend)
    return out


def hess_arr(grid, arr, backend="spectral"):
    """(dim, dim, *n) Hessian; symmetric by construction (spectral)."""
    d = grid.dim
    g = grad_arr(grid, arr, backend)
    out = np.empty((d, d) + grid.shape)
    for i in range(d):
        for j in range(i, d):
            if i == j and backend == "spectral":
                hij = np.real(np.fft.ifftn(
                    -grid._bcast(grid._kd[i] ** 2, i) * np.fft.fftn(arr)))
            else:
                hij = deriv_arr(grid, g[i], j, backend)
            out[i, j] = hij
            out[j, i] = hij
    return out


def jac_arr(grid, vec, backend="spectral"):
    """Jacobian (dim, dim, *n) with [i, j] = d(vec_i)/dx_j."""
    d = grid.dim
    out = np.empty((d, d) + grid.shape)
    for i in range(d):
        for j in range(d):
            out[i, j] = deriv_arr(grid, vec[i], j, backend)
    return out


def tdiv_arr(grid, tens, backend="spectral"):
    """Row-wise divergence of a tensor: out_i = sum_j d(T_ij)/dx_j."""
    d = grid.dim
    out = np.zeros((d,) + grid.shape)
    for i in range(d):
        for j in range(d):
            out[i] += deriv_arr(grid, tens[i, j], j, backend)
    return out


def quad(grid, arr):
    """Rectangle-rule integral: (mean nodal value) x (domain volume)."""
    return float(np.mean(arr) * grid.volume)


def dealias_arr(grid, arr):
    return np.real(np.fft.ifftn(grid._dealias_mask * np.fft.fftn(arr)))


# ---------------------------------------------------------------------------
# field-level operations
# ---------------------------------------------------------------------------

def grad(f, backend="spectral"):
    return VectorField(f.grid, grad_arr(f.grid, f.values, backend))


def div(F, backend="spectral"):
    return ScalarField(F.grid, div_arr(F.grid, F.values, backend))


def laplacian(f, backend="spectral"):
    return ScalarField(f.grid, lap_arr(f.grid, f.values, backend))


def hessian(f, backend="spectral"):
    return TensorField(f.grid, hess_arr(f.grid, f.values, backend))


def grad_vec(F, backend="spectral"):
    return TensorField(F.grid, jac_arr(F.grid, F.values, backend))


def sym_grad(F, backend="spectral"):
    J = jac_arr(F.grid, F.values, backend)
    return TensorField(F.grid, 0.5 * (J + np.swapaxes(J, 0, 1)))


def div_tensor(T, backend="spectral"):
    return VectorField(T.grid, tdiv_arr(T.grid, T.values, backend))


def integrate(f):
    return quad(f.grid, f.values)


def lp_norm(f, p):
    """(integral |f|^p)^(1/p); p == np.inf returns the max nodal magnitude."""
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    p = float(p)
    if p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    return quad(f.grid, np.abs(f.values) ** p) ** (1.0 / p)


def dealias(f):
    """Zero all modes above 2/3 of Nyquist (per axis). Idempotent."""
    if isinstance(f, ScalarField):
        return ScalarField(f.grid, dealias_arr(f.grid, f.values))
    if isinstance(f, VectorField):
        return VectorField(f.grid, np.stack(
            [dealias_arr(f.grid, c) for c in f.values]))
    raise TypeError("dealias expects a ScalarField or VectorField")


def random_smooth_positive(grid, seed, modes, floor):
    """floor + s^2 for a seeded truncated random Fourier series s.

    Coefficients decay like (1 + |k|^2)^-2 so the result is well resolved;
    modes must not exceed n/3 per axis (dealias-safe). Deterministic per seed.
    """
    if floor <= 0:
        raise ValueError("floor must be positive")
    modes = int(modes)
    if modes < 0:
        raise ValueError("modes must be nonnegative")
    if modes > min(grid.n) // 3:
        raise ValueError(
            f"modes={modes} exceeds dealias-safe limit {min(grid.n) // 3}")
    rng = np.random.default_rng(seed)
    if modes == 0:
        c = rng.standard_normal()
        return ScalarField.constant(grid, floor + c * c)
    # spectral synthesis: white noise shaped by (1 + |k|^2)^-2 within the
    # mode box; FFT of real noise keeps the result real after masking
    noise = rng.standard_normal(grid.shape)
    coeff = np.fft.fftn(noise)
    k2 = np.zeros(grid.shape)
    box = np.ones(grid.shape, dtype=bool)
    for a, m in enumerate(grid.n):
        idx = np.rint(np.fft.fftfreq(m) * m).astype(int)
        k2 = k2 + grid._bcast(idx.astype(float) ** 2, a)
        box &= grid._bcast(np.abs(idx) <= modes, a)
    amp = np.where(box, (1.0 + k2) ** -2, 0.0)
    s = np.real(np.fft.ifftn(amp * coeff)) * np.sqrt(grid.node_count)
    return ScalarField(grid, floor + s * s)


def random_smooth_vector(grid, seed, modes, amplitude=1.0):
    """Seeded smooth vector field for identity/inequality test ensembles."""
    comps = []
    for i in range(grid.dim):
        f = random_smooth_positive(grid, (seed + 1) * 7919 + i, modes,
                                   floor=1.0)
        comps.append(amplitude * (f.values - np.mean(f.values)))
    return VectorField(grid, np.stack(comps))
