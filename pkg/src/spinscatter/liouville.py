"""Lindblad generator, steady states and propagation of vectorized operators.

Vectorization is column stacking: ``vec(A)[i + 4 j] = A[i, j]``, so that
``vec(A X B) = (B^T kron A) vec(X)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConsistencyError, InvalidParameterError
from .model import Basis, ModelParams, Operator4, standard_operators, system_hamiltonian

DIM = 4
DEG_TOL = 1e-9
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14

_I4 = np.eye(DIM, dtype=complex)


def vec(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(DIM, DIM, order="F")


def expectation_row(a: np.ndarray) -> np.ndarray:
    """Row vector ``r`` with ``r @ vec(X) == Tr(a X)``."""
    return vec(np.asarray(a).T)


def dissipator(c: np.ndarray) -> np.ndarray:
    cdc = c.conj().T @ c
    return np.kron(c.conj(), c) - 0.5 * np.kron(_I4, cdc) - 0.5 * np.kron(cdc.T, _I4)


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    return -1j * (np.kron(_I4, h) - np.kron(h.T, _I4))


# -- matrix exponential ------------------------------------------------------
# Pade-approximant scaling and squaring (Higham 2005, "The scaling and
# squaring method for the matrix exponential revisited").

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0, 13: 5.371920351148152e0}


def _pade_uv(a, m):
    b = _PADE[m]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
        return u, v
    powers = [ident, a2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ a2)
    u = a @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    v = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return u, v


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade approximant."""
    a = np.asarray(a, dtype=complex)
    norm1 = np.linalg.norm(a, 1)
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            u, v = _pade_uv(a, m)
            return np.linalg.solve(v - u, v + u)
    s = max(0, math.ceil(math.log2(norm1 / _THETA[13]))) if norm1 > 0 else 0
    u, v = _pade_uv(a / 2.0**s, 13)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


# -- generator ---------------------------------------------------------------

class Liouvillian:
    """Immutable 16x16 Lindblad generator acting on ``vec(rho)``.

    Matrix exponentials and the eigendecomposition are computed lazily and
    cached; population is guarded by a lock so concurrent readers see one
    value.
    """

    _CACHE_LIMIT = 512

    def __init__(self, matrix, basis: Basis, params: ModelParams, deg_tol: float = DEG_TOL,
                 ode_rtol: float = ODE_RTOL, ode_atol: float = ODE_ATOL):
        m = np.array(matrix, dtype=complex)
        m.setflags(write=False)
        self.matrix = m
        self.basis = Basis(basis)
        self.params = params
        self.deg_tol = deg_tol
        self.ode_rtol = ode_rtol
        self.ode_atol = ode_atol
        self._lock = threading.Lock()
        self._expm_cache: dict[float, np.ndarray] = {}
        self._eig = None
        self._norm = float(np.linalg.norm(m, 2))

    @property
    def norm(self) -> float:
        return self._norm

    @property
    def zero_tol(self) -> float:
        """Absolute threshold below which an eigenvalue counts as undamped."""
        return self.deg_tol * max(self._norm, 1.0)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho))

    def exp(self, t: float) -> np.ndarray:
        key = float(t)
        cached = self._expm_cache.get(key)
        if cached is not None:
            return cached
        with self._lock:
            cached = self._expm_cache.get(key)
            if cached is None:
                cached = expm(self.matrix * key)
                cached.setflags(write=False)
                if len(self._expm_cache) >= self._CACHE_LIMIT:
                    self._expm_cache.clear()
                self._expm_cache[key] = cached
        return cached

    def eig(self):
        """Eigenvalues with left and right eigenvectors (cached)."""
        if self._eig is None:
            from scipy.linalg import eig

            with self._lock:
                if self._eig is None:
                    w, vl, vr = eig(self.matrix, left=True, right=True)
                    self._eig = (w, vl, vr)
        return self._eig

    def spectral_projector(self, indices) -> np.ndarray:
        """Projector onto the eigenspaces of the eigenvalues in ``indices``,
        along all other eigenspaces.

        Eigenvalues are grouped into clusters of nearly equal value and each
        cluster's projector is built from orthonormal right and left null
        bases of ``L - lambda`` (SVD), which stays well conditioned when the
        eigenvectors returned by ``eig`` are nearly parallel. This assumes the
        eigenvalues are semisimple, as undamped Lindblad modes always are.
        """
        idx = np.asarray(indices, dtype=int)
        out = np.zeros_like(self.matrix)
        for cluster in self.clusters(idx):
            out = out + self._cluster_projector(cluster)
        return out

    @property
    def cluster_tol(self) -> float:
        return 1e-6 * max(self._norm, 1.0)

    def clusters(self, indices) -> list[np.ndarray]:
        """Split ``indices`` into groups of eigenvalues closer than ``cluster_tol``."""
        w, _, _ = self.eig()
        idx = np.asarray(indices, dtype=int)
        if idx.size == 0:
            return []
        order = idx[np.lexsort((w[idx].real, w[idx].imag))]
        groups, current = [], [order[0]]
        for a, b in zip(order[:-1], order[1:]):
            if abs(w[b] - w[a]) <= self.cluster_tol:
                current.append(b)
            else:
                groups.append(np.array(current))
                current = [b]
        groups.append(np.array(current))
        return groups

    def _cluster_projector(self, cluster) -> np.ndarray:
        w, _, _ = self.eig()
        k = len(cluster)
        shifted = self.matrix - np.mean(w[cluster]) * np.eye(self.matrix.shape[0])
        u, _, vh = np.linalg.svd(shifted)
        right = vh[-k:].conj().T          # shifted @ right ~ 0
        left = u[:, -k:]                  # left^H @ shifted ~ 0
        return right @ np.linalg.solve(left.conj().T @ right, left.conj().T)

    def null_indices(self) -> np.ndarray:
        w, _, _ = self.eig()
        return np.flatnonzero(np.abs(w) < self.zero_tol)

    def undamped_indices(self) -> np.ndarray:
        """Eigenvalues on the imaginary axis (stationary or persistently
        oscillating components)."""
        w, _, _ = self.eig()
        return np.flatnonzero(w.real > -self.zero_tol)


def build_liouvillian(p: ModelParams, basis: Basis = Basis.VOIGT, *, deg_tol: float = DEG_TOL,
                      ode_rtol: float = ODE_RTOL, ode_atol: float = ODE_ATOL) -> Liouvillian:
    """Generator of the rotating-frame master equation for ``p``.

    Jump operators are ``sqrt(gamma) S_-^{R,L}`` in the Faraday basis and the
    equivalent ``sqrt(gamma) S_-^{H,V}`` in the Voigt basis. With
    ``gamma_pd > 0`` the ground-state dephasing jump
    ``sqrt(gamma_pd/2) * zeeman`` is added, which damps the ``|+><-|``
    coherence at rate ``gamma_pd``.
    """
    p.require_decay()
    basis = Basis(basis)
    ops = standard_operators(basis)
    h = system_hamiltonian(p, basis).entries
    jumps = ("sm_R", "sm_L") if basis is Basis.FARADAY else ("sm_H", "sm_V")
    mat = hamiltonian_superop(h)
    for name in jumps:
        mat = mat + dissipator(math.sqrt(p.gamma) * ops[name].entries)
    if p.gamma_pd > 0:
        ground_zeeman = ops["P_g"].entries @ ops["zeeman"].entries @ ops["P_g"].entries
        mat = mat + dissipator(math.sqrt(p.gamma_pd / 2.0) * ground_zeeman)
    return Liouvillian(mat, basis, p, deg_tol=deg_tol, ode_rtol=ode_rtol, ode_atol=ode_atol)


# -- states ------------------------------------------------------------------

@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    basis: Basis = Basis.VOIGT

    def expect(self, op: Operator4) -> complex:
        return complex(np.trace(op.to(self.basis).entries @ self.entries))

    def check(self, atol: float = 1e-10, eig_tol: float = 1e-10):
        r = self.entries
        if abs(np.trace(r) - 1.0) > atol:
            raise ConsistencyError(f"trace {np.trace(r)} != 1")
        if np.max(np.abs(r - r.conj().T)) > atol:
            raise ConsistencyError("density matrix is not hermitian")
        if np.min(np.linalg.eigvalsh(0.5 * (r + r.conj().T))) < -eig_tol:
            raise ConsistencyError("density matrix has negative eigenvalues")
        return self


@dataclass(frozen=True)
class SteadyState:
    rho: DensityMatrix
    degenerate: bool
    null_dimension: int


def default_initial_state(basis: Basis = Basis.VOIGT) -> np.ndarray:
    """Equal mixture of the two ground states (basis independent)."""
    return 0.5 * standard_operators(basis)["P_g"].entries


def steady_state(lv: Liouvillian) -> SteadyState:
    """Trace-one stationary state of ``lv``.

    With a one-dimensional null space this is the normalized null vector.
    Otherwise the state is the infinite-time limit of propagation from the
    equal ground mixture, i.e. that state projected onto the null space,
    and the result is flagged degenerate.
    """
    null = lv.null_indices()
    if null.size == 0:
        raise ConsistencyError("generator has no stationary state")
    if null.size == 1:
        _, _, vh = np.linalg.svd(lv.matrix)
        x = vh[-1].conj()
        degenerate = False
    else:
        proj = lv.spectral_projector(null)
        x = proj @ vec(default_initial_state(lv.basis))
        degenerate = True
    rho = unvec(x)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise ConsistencyError("null space contains no trace-one element")
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    dm = DensityMatrix(rho, lv.basis).check(atol=1e-8, eig_tol=1e-8)
    return SteadyState(dm, degenerate, int(null.size))


# -- propagation -------------------------------------------------------------

def propagate(lv: Liouvillian, x0, t: float, method: str = "expm") -> np.ndarray:
    """Return ``exp(L t) x0``.

    ``x0`` may be a 4x4 operator or its 16-vector; the result has the same
    shape. ``method`` is ``"expm"`` (cached matrix exponential) or ``"ode"``
    (adaptive DOP853 integration with the generator's tolerances).
    """
    if not t >= 0:
        raise InvalidParameterError(f"propagation time must be >= 0, got {t}")
    arr = np.asarray(x0, dtype=complex)
    as_matrix = arr.shape == (DIM, DIM)
    x = vec(arr) if as_matrix else arr.reshape(-1)
    if t == 0:
        out = x.copy()
    elif method == "expm":
        out = lv.exp(t) @ x
    elif method == "ode":
        m = lv.matrix
        sol = solve_ivp(lambda _s, y: m @ y, (0.0, float(t)), x, method="DOP853",
                        rtol=lv.ode_rtol, atol=lv.ode_atol)
        if not sol.success:
            raise ConsistencyError(f"ODE integration failed: {sol.message}")
        out = sol.y[:, -1]
    else:
        raise ValueError(f"unknown propagation method {method!r}")
    return unvec(out) if as_matrix else out


def change_basis_superop() -> np.ndarray:
    """Superoperator mapping ``vec`` of a Faraday-basis operator to ``vec`` of
    the same operator in the Voigt basis (and back; it is an involution)."""
    from .model import VOIGT_UNITARY as u

    return np.kron(u.T, u.conj().T)
