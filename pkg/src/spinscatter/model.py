"""Parameters, basis states and operators of the driven four-level spin emitter.

Two orthonormal bases are used throughout:

* Faraday, ordered ``(up, Up, down, Down)`` -- ground spin states along the
  optical axis and their trion partners.
* Voigt, ordered ``(+, P, -, M)`` with ``|+/-> = (|up> +/- |down>)/sqrt(2)`` and
  ``|P/M> = (|Up> +/- |Down>)/sqrt(2)``.

The change of basis matrix is real, symmetric and unitary, hence its own
inverse, so ``voigt_transform`` maps in either direction.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .errors import InvalidParameterError, UnsupportedConfigurationError


class Basis(str, enum.Enum):
    FARADAY = "faraday"
    VOIGT = "voigt"

    def other(self) -> "Basis":
        return Basis.VOIGT if self is Basis.FARADAY else Basis.FARADAY


FARADAY_LABELS = ("up", "Up", "down", "Down")
VOIGT_LABELS = ("plus", "P", "minus", "M")

# Columns are the Voigt states expressed in the Faraday basis.
_S = 1.0 / math.sqrt(2.0)
VOIGT_UNITARY = np.array(
    [
        [_S, 0.0, _S, 0.0],
        [0.0, _S, 0.0, _S],
        [_S, 0.0, -_S, 0.0],
        [0.0, _S, 0.0, -_S],
    ],
    dtype=complex,
)


def _check_finite(name, value):
    if not cmath.isfinite(complex(value)):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CavityParams:
    """Bare emitter-cavity parameters before adiabatic elimination of the cavity.

    All frequencies share one (arbitrary) angular-frequency unit.
    ``alpha_r``/``alpha_l`` are the coherent drive amplitudes per circular
    polarization.
    """

    g: float
    kappa: float
    omega_c: float
    omega_0: float
    omega_d: float
    alpha_r: complex = 0.0
    alpha_l: complex = 0.0

    def __post_init__(self):
        for f in fields(self):
            _check_finite(f.name, getattr(self, f.name))
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.g < 0:
            raise InvalidParameterError(f"g must be >= 0, got {self.g}")

    @property
    def cavity_detuning(self) -> float:
        return self.omega_c - self.omega_d

    @property
    def emitter_detuning(self) -> float:
        return self.omega_0 - self.omega_d


@dataclass(frozen=True)
class ModelParams:
    """Reduced spin-system parameters in the frame rotating at the laser frequency.

    Parameters
    ----------
    gamma : float
        Purcell-enhanced decay rate of each trion. Must be > 0 for any
        dynamics; zero is accepted here only so that a decoupled cavity
        reduction can be represented and rejected downstream.
    delta : float
        Renormalized laser detuning of the trion transitions.
    omega_b : float
        Transverse Zeeman energy (>= 0).
    omega_r, omega_l : complex
        Rabi drives on the right/left circular transitions. A horizontally
        polarized drive has ``omega_r == omega_l``.
    gamma_pd : float
        Pure ground-state dephasing rate (0 switches the term off).
    omega_d : float
        Laser frequency; only labels the absolute frequency axis.
    """

    gamma: float = 1.0
    delta: float = 0.0
    omega_b: float = 0.0
    omega_r: complex = 0.0
    omega_l: complex = 0.0
    gamma_pd: float = 0.0
    omega_d: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            _check_finite(f.name, getattr(self, f.name))
        for name in ("gamma", "delta", "omega_b", "gamma_pd", "omega_d"):
            if isinstance(getattr(self, name), complex):
                raise InvalidParameterError(f"{name} must be real")
        if self.gamma < 0:
            raise InvalidParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.gamma_pd < 0:
            raise InvalidParameterError(f"gamma_pd must be >= 0, got {self.gamma_pd}")
        if self.omega_b < 0:
            raise InvalidParameterError(f"omega_b must be >= 0, got {self.omega_b}")

    @classmethod
    def horizontal(cls, gamma=1.0, delta=0.0, omega_b=0.0, omega=0.0,
                   gamma_pd=0.0, omega_d=0.0) -> "ModelParams":
        """Horizontally polarized drive with real Rabi frequency ``omega``."""
        return cls(gamma=float(gamma), delta=float(delta), omega_b=float(omega_b),
                   omega_r=omega, omega_l=omega, gamma_pd=float(gamma_pd),
                   omega_d=float(omega_d))

    def require_decay(self):
        if not self.gamma > 0:
            raise InvalidParameterError(f"gamma must be > 0, got {self.gamma}")

    @property
    def is_horizontal(self) -> bool:
        return complex(self.omega_r) == complex(self.omega_l)

    @property
    def omega(self) -> float:
        """Real Rabi frequency of a horizontal drive, global phase removed."""
        if not self.is_horizontal:
            raise UnsupportedConfigurationError(
                "closed forms require a horizontal drive (omega_r == omega_l)"
            )
        return abs(complex(self.omega_r))

    def normalized(self) -> "ModelParams":
        """Same physics with every frequency expressed in units of gamma."""
        self.require_decay()
        g = self.gamma
        return ModelParams(gamma=1.0, delta=self.delta / g, omega_b=self.omega_b / g,
                           omega_r=self.omega_r / g, omega_l=self.omega_l / g,
                           gamma_pd=self.gamma_pd / g, omega_d=self.omega_d / g)

    def with_(self, **changes) -> "ModelParams":
        if "omega" in changes:
            w = changes.pop("omega")
            changes["omega_r"] = changes["omega_l"] = w
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, complex):
                out[f.name] = v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
            else:
                out[f.name] = float(v)
        return out


@dataclass(frozen=True)
class BlochVector:
    """Ground-manifold Bloch components with half-weight Pauli operators,
    ``r_i = Tr(sigma_i rho)`` so that ``|r| <= 1/2``."""

    r_x: float
    r_y: float
    r_z: float = 0.0

    def __post_init__(self):
        if self.r_x**2 + self.r_y**2 + self.r_z**2 > 0.25 + 1e-9:
            raise InvalidParameterError("Bloch vector longer than 1/2")

    @classmethod
    def from_density(cls, rho: np.ndarray, basis: Basis = Basis.VOIGT) -> "BlochVector":
        ops = standard_operators(basis)
        comps = [float(np.real(np.trace(ops[k].entries @ rho))) for k in ("sigma_x", "sigma_y", "sigma_z")]
        return cls(*comps)


class Operator4:
    """A 4x4 operator tagged with the basis its entries refer to."""

    __slots__ = ("entries", "basis")

    def __init__(self, entries, basis: Basis = Basis.FARADAY):
        arr = np.array(entries, dtype=complex)
        if arr.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        self.entries = arr
        self.basis = Basis(basis)

    def __repr__(self):
        return f"Operator4(basis={self.basis.value}, entries=\n{self.entries})"

    def _same_basis(self, other: "Operator4"):
        if other.basis is not self.basis:
            raise ValueError("operators are expressed in different bases")

    def __matmul__(self, other: "Operator4") -> "Operator4":
        self._same_basis(other)
        return Operator4(self.entries @ other.entries, self.basis)

    def __add__(self, other: "Operator4") -> "Operator4":
        self._same_basis(other)
        return Operator4(self.entries + other.entries, self.basis)

    def __sub__(self, other: "Operator4") -> "Operator4":
        self._same_basis(other)
        return Operator4(self.entries - other.entries, self.basis)

    def __mul__(self, scalar) -> "Operator4":
        return Operator4(self.entries * scalar, self.basis)

    __rmul__ = __mul__

    def dag(self) -> "Operator4":
        return Operator4(self.entries.conj().T, self.basis)

    def to(self, basis: Basis) -> "Operator4":
        basis = Basis(basis)
        return self if basis is self.basis else voigt_transform(self)

    def allclose(self, other: "Operator4", atol=1e-12) -> bool:
        return np.allclose(self.entries, other.to(self.basis).entries, rtol=0, atol=atol)


def voigt_transform(op: Operator4) -> Operator4:
    """Express ``op`` in the other basis (Faraday <-> Voigt)."""
    u = VOIGT_UNITARY
    return Operator4(u.conj().T @ op.entries @ u, op.basis.other())


def _ket_bra(i, j):
    m = np.zeros((4, 4), dtype=complex)
    m[i, j] = 1.0
    return m


def _faraday_catalog() -> dict[str, np.ndarray]:
    up, Up, dn, Dn = range(4)
    sm_r = _ket_bra(up, Up)
    sm_l = _ket_bra(dn, Dn)
    cat = {
        "sm_R": sm_r,
        "sm_L": sm_l,
        "sm_H": (sm_r + sm_l) / math.sqrt(2.0),
        "sm_V": (sm_r - sm_l) / math.sqrt(2.0),
        "P_e": _ket_bra(Up, Up) + _ket_bra(Dn, Dn),
        "P_g": _ket_bra(up, up) + _ket_bra(dn, dn),
        "zeeman": _ket_bra(up, dn) + _ket_bra(dn, up),
    }
    for k, name in enumerate(FARADAY_LABELS):
        cat[f"proj_{name}"] = _ket_bra(k, k)
    return cat


def _voigt_catalog() -> dict[str, np.ndarray]:
    p, P, m, M = range(4)
    sz = 0.5 * (_ket_bra(p, p) - _ket_bra(m, m))
    sx = 0.5 * (_ket_bra(p, m) + _ket_bra(m, p))
    cat = {
        "sigma_x": sx,
        "sigma_z": sz,
        "sigma_y": 1j * (sx @ sz - sz @ sx),
    }
    for k, name in enumerate(VOIGT_LABELS):
        cat[f"proj_{name}"] = _ket_bra(k, k)
    return cat


def _build_catalog(basis: Basis) -> dict[str, Operator4]:
    out = {}
    for name, mat in _faraday_catalog().items():
        out[name] = Operator4(mat, Basis.FARADAY).to(basis)
    for name, mat in _voigt_catalog().items():
        out[name] = Operator4(mat, Basis.VOIGT).to(basis)
    for pol in ("R", "L", "H", "V"):
        out[f"sp_{pol}"] = out[f"sm_{pol}"].dag()
    return out


_CATALOGS = {b: _build_catalog(b) for b in Basis}


def standard_operators(basis: Basis = Basis.VOIGT) -> dict[str, Operator4]:
    """Named operator catalog in the requested basis.

    Keys: ``sm_{R,L,H,V}`` and their adjoints ``sp_*``; ``P_e``/``P_g``
    manifold projectors; ``zeeman`` (``|up><down| + |down><up|``, the
    coupling multiplying ``omega_b``); half-weight ground Paulis
    ``sigma_{x,y,z}`` defined on ``{|+>, |->}``; ``proj_<label>`` for all
    eight basis states of both bases.

    ``sm_H``/``sm_V`` are normalized so that ``sqrt(gamma) * sm_{H,V}`` are
    the linear-polarization jump operators.
    """
    return dict(_CATALOGS[Basis(basis)])


def system_hamiltonian(p: ModelParams, basis: Basis = Basis.VOIGT) -> Operator4:
    """Rotating-frame Hamiltonian: detuned trions, Zeeman coupling, Rabi drive."""
    ops = _CATALOGS[Basis.FARADAY]
    drive = complex(p.omega_r) * ops["sm_R"].entries + complex(p.omega_l) * ops["sm_L"].entries
    h = p.delta * ops["P_e"].entries + p.omega_b * ops["zeeman"].entries + drive + drive.conj().T
    return Operator4(h, Basis.FARADAY).to(basis)


def cavity_reduction(cp: CavityParams) -> ModelParams:
    """Eliminate the cavity mode in the Purcell regime.

    Returns the Purcell decay rate, the cavity-shifted detuning and the
    effective Rabi drives. ``gamma`` is zero for ``g == 0``; consumers reject
    that. The drives keep the phase of the reduction formula; for a
    horizontal drive ``ModelParams.omega`` removes it.
    """
    dc = cp.cavity_detuning
    lorentz = dc**2 + cp.kappa**2 / 4.0
    gamma = cp.g**2 * cp.kappa / lorentz
    delta = cp.emitter_detuning + dc * cp.g**2 / lorentz
    factor = 1j * cp.g / (cp.kappa / 2.0 - 1j * dc)
    omega_r = factor * complex(cp.alpha_r)
    omega_l = factor * complex(cp.alpha_l)
    return ModelParams(gamma=float(gamma), delta=float(delta), omega_b=0.0,
                       omega_r=omega_r, omega_l=omega_l, gamma_pd=0.0,
                       omega_d=float(cp.omega_d))


def empty_cavity_reflection(omega_k: float, cp: CavityParams) -> complex:
    """Reflection coefficient of the empty single-sided cavity at ``omega_k``."""
    _check_finite("omega_k", omega_k)
    d = 1j * (cp.omega_c - omega_k)
    return (d - cp.kappa / 2.0) / (d + cp.kappa / 2.0)
