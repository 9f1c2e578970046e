"""Dimension-2 weakly stiff connections.

In the plane the stiffness PDEs lose their rigidity: every meromorphic
function f builds a weakly stiff connection on a definite plane through
A(z) = -2/(conj(z) + f(z)), and every pair of one-variable functions builds
one on the split plane in null coordinates.  This module houses those
constructors, the finite-difference verifier for the defining PDEs, the
incompressibility (closedness) detector, and the boundary dichotomy for
rational f on the unit disk.  Everything here is two-dimensional by type;
in dimension three and higher the weak equations force the stiff class, so
no constructor of this kind exists there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError
from .models import CanonicalModel, parse_model
from .projconn import AssociatedForm, curvature, fd_jacobian
from .pseudospace import Signature

INF = float("inf")
FD_STEP = 1e-5
_COEF_TOL = 1e-12


# ---------------------------------------------------------------------------
# rational functions over the complex field


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    scale = float(np.abs(c).max()) if c.size else 0.0
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > _COEF_TOL * scale)[0]
    return c[: keep[-1] + 1] if keep.size else np.zeros(1, dtype=complex)


def _poly_gcd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = _trim(a), _trim(b)
    while np.abs(b).max() > 0:
        _, r = npoly.polydiv(a, b)
        a, b = b, _trim(r)
        if b.size == 1 and b[0] == 0:
            break
    return a / a[-1]


class RationalComplexFn:
    """f(z) = N(z)/D(z) with complex coefficients, ascending powers.

    The representation is normalized: common factors cancelled, denominator
    monic.  evaluate() detects poles; the pole-free way to use f inside the
    conformal construction is conj_denominator / a_complex, which evaluate
    conj(z) D + N so that poles of f extend smoothly.
    """

    def __init__(self, num, den) -> None:
        num = _trim(num)
        den = _trim(den)
        if den.size == 1 and den[0] == 0:
            raise ValueError("denominator is identically zero")
        g = _poly_gcd(num, den) if np.abs(num).max() > 0 else np.ones(1, complex)
        if g.size > 1:
            num = _trim(npoly.polydiv(num, g)[0])
            den = _trim(npoly.polydiv(den, g)[0])
        lead = den[-1]
        self.num = num / lead
        self.den = den / lead

    def __repr__(self) -> str:
        return f"RationalComplexFn(num={self.num.tolist()}, den={self.den.tolist()})"

    def evaluate(self, z: complex) -> complex:
        nv = npoly.polyval(z, self.num)
        dv = npoly.polyval(z, self.den)
        scale = max(1.0, float(np.abs(self.den).max()) * max(1.0, abs(z)) ** (self.den.size - 1))
        if abs(dv) <= 1e-300 * scale:
            raise DomainError(f"pole of f at z = {z}")
        return complex(nv / dv)

    __call__ = evaluate

    def derivative(self) -> "RationalComplexFn":
        nd = npoly.polyder(self.num)
        dd = npoly.polyder(self.den)
        num = npoly.polysub(npoly.polymul(nd, self.den), npoly.polymul(self.num, dd))
        return RationalComplexFn(num, npoly.polymul(self.den, self.den))

    def conj_denominator(self, z: complex) -> complex:
        """Q(z) = conj(z) D(z) + N(z), the denominator of A = -2D/Q."""
        return complex(
            np.conj(z) * npoly.polyval(z, self.den) + npoly.polyval(z, self.num)
        )

    def a_complex(self, z: complex) -> complex:
        """A(z) = -2/(conj(z)+f(z)) evaluated pole-safely as -2D/(conj(z)D+N)."""
        dv = npoly.polyval(z, self.den)
        qv = np.conj(z) * dv + npoly.polyval(z, self.num)
        if abs(qv) == 0.0:
            raise DomainError(f"conj(z) + f(z) vanishes at z = {z}")
        return complex(-2.0 * dv / qv)

    def is_neg_inverse_z(self) -> bool:
        """Whether f equals -1/z as a rational function (z N + D = 0)."""
        zn = np.concatenate([[0.0 + 0.0j], self.num])
        s = npoly.polyadd(zn, self.den)
        scale = max(float(np.abs(self.num).max()), float(np.abs(self.den).max()), 1.0)
        return bool(np.abs(_trim(s)).max() <= 1e-12 * scale)

    def to_json_dict(self) -> dict:
        return {
            "num": [[float(c.real), float(c.imag)] for c in self.num],
            "den": [[float(c.real), float(c.imag)] for c in self.den],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RationalComplexFn":
        num = [complex(re, im) for re, im in d["num"]]
        den = [complex(re, im) for re, im in d["den"]]
        return cls(num, den)


@dataclass(frozen=True)
class HatRealPair:
    """The split-plane data: f1 of y2 and f2 of y1, valued in R or infinity.

    The value float('inf') (or -inf) encodes the vanishing of the associated
    coefficient: b = 0 there.
    """

    f1: Callable[[float], float]
    f2: Callable[[float], float]


# ---------------------------------------------------------------------------
# constructors


def _check_definite_plane(sig: Signature) -> None:
    if sig.d != 2 or sig.p * sig.m != 0:
        raise ValueError("meromorphic construction lives on a definite plane")


def from_meromorphic(f: Optional[RationalComplexFn],
                     domain_sampler: Optional[Iterable] = None,
                     sig: Signature = Signature(2, 0)) -> AssociatedForm:
    """Associated form of the weakly stiff connection built from f.

    A(z) = -2/(conj(z) + f(z)), a = (Re A, Im A).  Pass f = None for the
    constant infinity (A = 0, the trivial connection).  When a sampler of
    domain points (complex numbers or coordinate pairs) is given, the
    nonvanishing of conj(z) + f(z) is checked up front on those points.
    The Wirtinger identity d(A)/d(conj z) = A^2/2 holds exactly for this
    family, which is the weak stiffness equation A^2 = 2 dbar A.
    """
    _check_definite_plane(sig)
    if f is None:
        zero = AssociatedForm(
            sig=sig,
            evaluate=lambda x: np.zeros(2),
            jac=lambda x: np.zeros((2, 2)),
            chart="canonical",
        )
        return zero

    def ev(x):
        z = complex(x[0], x[1])
        A = f.a_complex(z)
        return np.array([A.real, A.imag])

    fprime = f.derivative()

    def jac(x):
        z = complex(x[0], x[1])
        dv = npoly.polyval(z, f.den)
        dpv = npoly.polyval(z, npoly.polyder(f.den))
        npv = npoly.polyval(z, npoly.polyder(f.num))
        q = np.conj(z) * dv + npoly.polyval(z, f.num)
        if abs(q) == 0.0:
            raise DomainError(f"conj(z) + f(z) vanishes at z = {z}")
        qz = np.conj(z) * dpv + npv
        dA_dz = -2.0 * (dpv * q - dv * qz) / (q * q)
        dA_dzbar = 2.0 * dv * dv / (q * q)        # equals A^2/2
        d1A = dA_dz + dA_dzbar
        d2A = 1j * (dA_dz - dA_dzbar)
        return np.array([[d1A.real, d1A.imag], [d2A.real, d2A.imag]])

    form = AssociatedForm(sig=sig, evaluate=ev, jac=jac, chart="canonical")
    if domain_sampler is not None:
        for pt in domain_sampler:
            z = complex(pt) if np.isscalar(pt) or isinstance(pt, complex) \
                else complex(pt[0], pt[1])
            if abs(f.conj_denominator(z)) == 0.0:
                raise DomainError(f"conj(z) + f(z) vanishes at sampled z = {z}")
    return form


def from_meromorphic_callable(fn: Callable[[complex], complex],
                              sig: Signature = Signature(2, 0)) -> AssociatedForm:
    """Raw-callable variant for experiments: A = -2/(conj(z) + fn(z)).

    No pole handling: fn must be finite on the points where the form is
    evaluated, and the denominator check is pointwise only.
    """
    _check_definite_plane(sig)

    def ev(x):
        z = complex(x[0], x[1])
        den = np.conj(z) + fn(z)
        if abs(den) == 0.0:
            raise DomainError(f"conj(z) + f(z) vanishes at z = {z}")
        A = -2.0 / den
        return np.array([A.real, A.imag])

    return AssociatedForm(sig=sig, evaluate=ev, jac=None, chart="canonical")


def from_pair_11(p: HatRealPair) -> AssociatedForm:
    """Associated form on the split plane in null coordinates y = (x1+x2, x1-x2).

    b1 = 1/(f1(y2) - y1), b2 = 1/(f2(y1) - y2); an infinite f value gives a
    vanishing coefficient.  The form satisfies D_1 b1 = b1^2 and
    D_2 b2 = b2^2 identically in its free variable.
    """

    def coeff(fv: float, yi: float) -> float:
        if math.isinf(fv):
            return 0.0
        den = fv - yi
        if den == 0.0:
            raise DomainError("pair denominator f - y vanishes")
        return 1.0 / den

    def ev(y):
        return np.array([coeff(p.f1(y[1]), y[0]), coeff(p.f2(y[0]), y[1])])

    return AssociatedForm(sig=Signature(1, 1), evaluate=ev, jac=None, chart="eprime")


# ---------------------------------------------------------------------------
# coordinates


def coords_E11_to_Eprime(x) -> np.ndarray:
    """y = (x1 + x2, x1 - x2); sends q(x) = x1^2 - x2^2 to y1 y2."""
    x = np.asarray(x, dtype=float)
    return np.array([x[0] + x[1], x[0] - x[1]])


def coords_Eprime_to_E11(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.array([(y[0] + y[1]) / 2.0, (y[0] - y[1]) / 2.0])


def form_to_eprime(a: AssociatedForm) -> AssociatedForm:
    """Pull a split-plane form in standard coordinates to null coordinates."""
    if a.sig != Signature(1, 1) or a.chart != "canonical":
        raise ValueError("expects a standard-chart form of signature (1,1)")

    def ev(y):
        av = a(coords_Eprime_to_E11(y))
        return np.array([(av[0] + av[1]) / 2.0, (av[0] - av[1]) / 2.0])

    return AssociatedForm(sig=a.sig, evaluate=ev, jac=None, chart="eprime")


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class WeakStiffReport:
    n_probes: int
    chart: str
    max_residual: float
    residual_sym: float        # first defining PDE
    residual_diag: float       # second defining PDE
    trace_max: float           # max |R_121^1 + R_122^2| over probes
    weakly_stiff: bool
    isometric: bool
    status: str                # "isometric" or "similarity-only"


def verify_weakstiff(a: AssociatedForm, probes: Sequence,
                     step: float = FD_STEP, tol: float = 1e-6) -> WeakStiffReport:
    """Finite-difference check of the weak stiffness PDEs at the probes.

    Standard chart on a definite plane: D1 a2 + D2 a1 = 2 a1 a2 and
    D1 a1 - a1^2 = D2 a2 - a2^2.  Null chart on the split plane:
    D1 b1 = b1^2 and D2 b2 = b2^2.  The holonomy of a weakly stiff
    connection consists of infinitesimal similarities; it consists of
    isometries exactly when the curvature trace R_121^1 + R_122^2 vanishes,
    which for this class is the closedness of the form.
    """
    if a.sig.d != 2:
        raise ValueError(
            "weak stiffness is a two-dimensional notion; in dimension >= 3 "
            "the weak equations force the stiff class"
        )
    if a.chart == "canonical" and a.sig.p * a.sig.m != 0:
        raise ValueError("split-plane forms must be given in the eprime chart")
    probes = [np.asarray(p, dtype=float) for p in probes]
    if not probes:
        raise ValueError("need at least one probe")
    r_sym = r_diag = tr_max = 0.0
    for x in probes:
        av = a(x)
        J = fd_jacobian(a, x, step=step)
        if a.chart == "eprime":
            r_sym = max(r_sym, abs(J[0, 0] - av[0] ** 2))
            r_diag = max(r_diag, abs(J[1, 1] - av[1] ** 2))
        else:
            r_sym = max(r_sym, abs(J[0, 1] + J[1, 0] - 2.0 * av[0] * av[1]))
            r_diag = max(r_diag, abs((J[0, 0] - av[0] ** 2) - (J[1, 1] - av[1] ** 2)))
        # trace of curvature in the (1,2) plane: 3(D1 a2 - D2 a1)
        tr_max = max(tr_max, abs(3.0 * (J[0, 1] - J[1, 0])))
    worst = max(r_sym, r_diag)
    iso = tr_max < tol
    return WeakStiffReport(
        n_probes=len(probes),
        chart=a.chart,
        max_residual=worst,
        residual_sym=r_sym,
        residual_diag=r_diag,
        trace_max=tr_max,
        weakly_stiff=worst < tol,
        isometric=iso,
        status="isometric" if iso else "similarity-only",
    )


def curvature_identity_component(a: AssociatedForm, x):
    """Split R_12 into scalar and traceless parts: (scalar, traceless_max).

    For a connection whose curvature endomorphism is a pure multiple of the
    identity at every point, that multiple must vanish; this helper feeds
    the numeric echo of that fact.
    """
    R = curvature(a, x)
    M = R[0, 1]                     # M[k, l] = R_12k^l
    scalar = float(np.trace(M)) / 2.0
    dev = float(np.abs(M - scalar * np.eye(2)).max())
    return scalar, dev


# ---------------------------------------------------------------------------
# the boundary dichotomy on the unit disk


@dataclass(frozen=True)
class CanonicalDiskModel:
    """Marker: the connection is the disk model, complete and boundary-rigid."""

    model: CanonicalModel = field(default_factory=lambda: parse_model("S(2,0;-1;-)"))


@dataclass(frozen=True)
class ExtendsPastBoundary:
    """Witness circle point where conj(z) + f(z) does not vanish, so the
    connection continues across the boundary there (and the disk cannot be
    geodesically complete for it)."""

    point: complex
    margin: float                   # |conj(z) D + N| at the witness


def conj_dichotomy(f: RationalComplexFn, samples: int = 1024):
    """Either f is -1/z (the disk model) or some boundary point extends.

    On |z| = 1 the quantity conj(z) D(z) + N(z) equals (D + z N)/z, so it
    vanishes identically exactly when z N + D = 0, i.e. f = -1/z.  Otherwise
    the polynomial D + z N has finitely many roots and the circle maximum is
    positive; the maximizer is returned as the witness.
    """
    if f.is_neg_inverse_z():
        return CanonicalDiskModel()
    best_z, best_v = 1.0 + 0.0j, -1.0
    for k in range(samples):
        z = complex(math.cos(2 * math.pi * k / samples),
                    math.sin(2 * math.pi * k / samples))
        v = abs(f.conj_denominator(z))
        if v > best_v:
            best_z, best_v = z, v
    if best_v <= 0.0:
        raise RuntimeError("degenerate rational function: no boundary witness found")
    return ExtendsPastBoundary(point=best_z, margin=best_v)
