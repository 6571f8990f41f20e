"""Closed-form spray coefficients for affine winds.

For ``w = c + A x`` every ingredient of the general spray is a polynomial in
``x``, and the spray becomes

    G^1 = F P11 y1 + F P12 y2 + L11 y1^2 + L12 y2^2 + Q01 y1 y2
          + (A01 y1^3 + B01 y1^2 y2 + D01 y1 y2^2) / F + F^2 R01

with the second component obtained by exchanging the roles of the two axes:

    G^2 = F P21 y1 + F P22 y2 + L21 y1^2 + L22 y2^2 + Q02 y1 y2
          + (A02 y2^3 + B02 y2^2 y1 + D02 y2 y1^2) / F + F^2 R02.

Everything here is plain arithmetic so the same code serves scalars and
numpy batches.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import StrongWind, ZeroVector
from .wind import AffineWind


@dataclass(frozen=True)
class AffineConstants:
    A1: float
    A2: float
    A3: float
    A4: float
    A5: float
    A6: float
    B1: float
    B2: float
    B3: float
    B4: float
    B5: float
    B6: float
    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    C6: float
    E: float
    J: float
    K: float
    N: float
    M00: float
    M10: float
    M01: float
    M20: float
    M11: float
    M02: float

    def lww(self, x1, x2):
        """``L_ww`` as the quadratic sum over ``M_lk x1^l x2^k``."""
        return (self.M00 + self.M10 * x1 + self.M01 * x2
                + self.M20 * x1 * x1 + self.M11 * x1 * x2 + self.M02 * x2 * x2)

    def as_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in asdict(self).items()}


def affine_constants(wind: AffineWind) -> AffineConstants:
    a1, b1 = map(float, wind.A[0])
    a2, b2 = map(float, wind.A[1])
    c1, c2 = map(float, wind.c)
    return AffineConstants(
        A1=a1, B1=b1, C1=c1,
        A2=a2, B2=b2, C2=c2,
        A3=2 * (a1 * a1 + a2 * a2), B3=2 * (a1 * b1 + a2 * b2), C3=2 * (a1 * c1 + a2 * c2),
        A4=2 * (a1 * b1 + a2 * b2), B4=2 * (b1 * b1 + b2 * b2), C4=2 * (b1 * c1 + b2 * c2),
        A5=a2 * a2 + b1 * a2 + 2 * a1 * a1,
        B5=a2 * b2 + b1 * b2 + 2 * a1 * b1,
        C5=2 * c1 * a1 + c2 * a2 + c2 * b1,
        A6=2 * a2 * b2 + a1 * b1 + a1 * a2,
        B6=2 * b2 * b2 + b1 * b1 + b1 * a2,
        C6=c1 * a2 + c1 * b1 + 2 * c2 * b2,
        E=2 * a1, J=2 * (a2 + b1), K=2 * b2,
        M11=2 * (2 * a1 * a1 * b1 + a1 * b1 * b2 + a1 * a2 * b2 + b1 * b1 * a2
                 + b1 * a2 * a2 + 2 * a2 * b2 * b2),
        M02=2 * (b1 * b1 * a1 + b1 * b1 * b2 + a2 * b1 * b2 + b2 ** 3),
        M20=2 * (a1 ** 3 + a1 * b1 * a2 + a1 * a2 * a2 + a2 * a2 * b2),
        M00=2 * (c1 * c1 * a1 + c1 * c2 * b1 + c1 * c2 * a2 + b2 * c2 * c2),
        M10=2 * (2 * c1 * a1 * a1 + c1 * a2 * b1 + a1 * c2 * b1 + c1 * a2 * a2
                 + a1 * a2 * c2 + 2 * c2 * a2 * b2),
        M01=2 * (2 * c1 * a1 * b1 + c1 * b2 * b1 + b1 * b1 * c2 + c1 * a2 * b2
                 + b1 * c2 * a2 + 2 * c2 * b2 * b2),
        N=b1 - a2,
    )


@dataclass(frozen=True)
class AffinePolynomials:
    """Polynomial coefficients of both spray components at one point (or batch).

    Naming: ``P12`` is P^1_2, ``Q01`` is Q_0^1, ``A02`` is A_0^2, and so on.
    """

    P11: object
    P12: object
    L11: object
    L12: object
    Q01: object
    R01: object
    A01: float
    B01: float
    D01: float
    P21: object
    P22: object
    L21: object
    L22: object
    Q02: object
    R02: object
    A02: float
    B02: float
    D02: float

    def as_dict(self) -> dict:
        return {k: (np.asarray(v).tolist()) for k, v in asdict(self).items()}


def affine_polynomials(k: AffineConstants, x) -> AffinePolynomials:
    x1, x2 = x[0], x[1]
    w1 = k.C1 + k.A1 * x1 + k.B1 * x2
    w2 = k.C2 + k.A2 * x1 + k.B2 * x2
    s1 = k.A5 * x1 + k.B5 * x2 + k.C5      # coefficient of y1 in S_0
    s2 = k.A6 * x1 + k.B6 * x2 + k.C6      # coefficient of y2 in S_0
    st1 = k.A3 * x1 + k.B3 * x2 + k.C3     # S_1 + T_1
    st2 = k.A4 * x1 + k.B4 * x2 + k.C4     # S_2 + T_2
    lww = k.lww(x1, x2)
    return AffinePolynomials(
        P11=-0.5 * w1 * s1 - 0.25 * lww,
        P12=-0.5 * (w1 * s2 + k.N),
        L11=0.5 * s1 + 0.25 * k.E * w1,
        L12=0.25 * k.K * w1,
        Q01=0.5 * s2 + 0.25 * k.J * w1,
        R01=0.25 * (w1 * lww - st1),
        A01=-k.E / 4, B01=-k.J / 4, D01=-k.K / 4,
        P21=-0.5 * (w2 * s1 - k.N),
        P22=-0.5 * w2 * s2 - 0.25 * lww,
        L21=0.25 * k.E * w2,
        L22=0.5 * s2 + 0.25 * k.K * w2,
        Q02=0.5 * s1 + 0.25 * k.J * w2,
        R02=0.25 * (w2 * lww - st2),
        A02=-k.K / 4, B02=-k.J / 4, D02=-k.E / 4,
    )


def spray_from_polynomials(p: AffinePolynomials, F, y) -> np.ndarray:
    y1, y2 = y[0], y[1]
    F2 = F * F
    g1 = (F * p.P11 * y1 + F * p.P12 * y2 + p.L11 * y1 * y1 + p.L12 * y2 * y2
          + p.Q01 * y1 * y2 + (p.A01 * y1 ** 3 + p.B01 * y1 * y1 * y2
                               + p.D01 * y1 * y2 * y2) / F + F2 * p.R01)
    g2 = (F * p.P21 * y1 + F * p.P22 * y2 + p.L21 * y1 * y1 + p.L22 * y2 * y2
          + p.Q02 * y1 * y2 + (p.A02 * y2 ** 3 + p.B02 * y2 * y2 * y1
                               + p.D02 * y2 * y1 * y1) / F + F2 * p.R02)
    return np.array([g1, g2])


def affine_spray_eval(wind: AffineWind, x, y, check: bool = True,
                      constants: AffineConstants | None = None) -> np.ndarray:
    """Spray coefficients of the Zermelo metric of an affine wind."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = wind.value(x, check=check)
    ww = w[0] * w[0] + w[1] * w[1]
    if check:
        if np.any(ww >= 1.0):
            raise StrongWind("spray requires |w(x)| < 1")
        if np.any(y[0] * y[0] + y[1] * y[1] == 0.0):
            raise ZeroVector("spray is undefined at y = 0")
    k = affine_constants(wind) if constants is None else constants
    rho = 1.0 - ww
    yw = y[0] * w[0] + y[1] * w[1]
    F = (np.sqrt(yw * yw + rho * (y[0] * y[0] + y[1] * y[1])) - yw) / rho
    return spray_from_polynomials(affine_polynomials(k, x), F, y)
