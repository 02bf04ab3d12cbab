"""Built-in energy densities and their exact derivatives.

density_eval is the single constitutive entry point used by both the
energy-minimization and reference solvers: given field values and
gradients at a batch of points it returns the density and its partials
with respect to the gradient and the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expressions as ex


class InvertedElement(Exception):
    pass


def lame_parameters(E: float, nu: float) -> tuple[float, float]:
    lam = nu * E / ((1 + nu) * (1 - 2 * nu))
    mu = E / (2 * (1 + nu))
    return lam, mu


def _check_elastic(E, nu):
    if E <= 0:
        raise ValueError("Young's modulus must be positive")
    if not -1 < nu < 0.5:
        raise ValueError("Poisson's ratio must be in (-1, 0.5)")


@dataclass
class Poisson:
    """Energy density 1/2 |grad u|^2 (scalar field)."""

    components = 1


@dataclass
class ScreenedPoisson:
    """Energy density 1/2 |grad u|^2 + 1/2 k^2 u^2."""

    k: float = 1.0
    components = 1


@dataclass
class LinearElastic:
    E: float = 1000.0
    nu: float = 0.3
    plane: str = "strain"  # 2D assumption; ignored in 3D

    def __post_init__(self):
        _check_elastic(self.E, self.nu)
        if self.plane not in ("strain", "stress"):
            raise ValueError("plane must be 'strain' or 'stress'")

    def lame(self, dim: int) -> tuple[float, float]:
        lam, mu = lame_parameters(self.E, self.nu)
        if dim == 2 and self.plane == "stress":
            lam = 2 * lam * mu / (lam + 2 * mu)
        return lam, mu


@dataclass
class NeoHookean:
    """Compressible Neo-Hookean solid.

    Two parameterizations: (E, nu) selects the log-form density
    1/2 lam ln(J)^2 - mu ln(J) + 1/2 mu (I1 - dim); (a0, a1) selects
    the isochoric form a0 (I1_iso - 3) + a1 (J - 1)^2 (3D only).
    """

    E: float | None = None
    nu: float | None = None
    a0: float | None = None
    a1: float | None = None

    def __post_init__(self):
        if (self.E is None) != (self.nu is None):
            raise ValueError("E and nu must be given together")
        if (self.a0 is None) != (self.a1 is None):
            raise ValueError("a0 and a1 must be given together")
        if (self.E is None) == (self.a0 is None):
            raise ValueError("give exactly one of (E, nu) or (a0, a1)")
        if self.E is not None:
            _check_elastic(self.E, self.nu)

    @property
    def isochoric(self) -> bool:
        return self.a0 is not None


@dataclass
class Isihara:
    a0: float = 0.5
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.5


@dataclass
class GentThomas:
    a0: float = 0.5
    a1: float = 1.0
    a2: float = 1.5


@dataclass
class Custom:
    """User-defined energy density over displacement-gradient symbols."""

    ast: object
    text: str = ""

    @classmethod
    def from_text(cls, text: str, dim: int) -> "Custom":
        ast = ex.parse(text, ex.GRAD_SYMBOLS)
        ex.validate(ast, dim)
        return cls(ast=ast, text=text)


HYPERELASTIC = (NeoHookean, Isihara, GentThomas)


def stiffness_scale(model) -> float:
    """Order-of-magnitude energy curvature of the model, used to keep the
    boundary penalty the same relative weight across materials (a fixed
    penalty factor that balances a unit-stiffness Poisson problem would be
    a thousand times too weak for steel-like moduli)."""
    if isinstance(model, LinearElastic):
        return model.E
    if isinstance(model, NeoHookean):
        return 2.0 * (model.a0 + model.a1) if model.isochoric else model.E
    if isinstance(model, Isihara):
        return 2.0 * (model.a0 + model.a1 + model.a2 + model.a3)
    if isinstance(model, GentThomas):
        return 2.0 * (model.a0 + model.a1 + model.a2)
    return 1.0


def model_components(model, dim: int) -> int:
    """Solution components: 1 for scalar problems, dim for mechanics."""
    if isinstance(model, (Poisson, ScreenedPoisson)):
        return 1
    if isinstance(model, Custom):
        syms = ex.symbols_of(model.ast)
        rows = {s[0] for s in syms}
        return max(len(rows), 1) if rows <= {"u", "v", "w"} else dim
    return dim


def _deformation(G: np.ndarray):
    """F = I + G with J and F^{-T}; raises InvertedElement when J <= 0."""
    dim = G.shape[-1]
    F = G + np.eye(dim)
    J = np.linalg.det(F)
    if np.any(J <= 0):
        q = int(np.argmax(J <= 0))
        raise InvertedElement(f"det(F) = {J.flat[q]:.3e} <= 0 at point {q}")
    FinvT = np.transpose(np.linalg.inv(F), (0, 2, 1))
    return F, J, FinvT


def _isochoric_invariants(F, J):
    """I1_iso, I2_iso and their dF-derivatives for a batch of F."""
    I1 = np.einsum("qij,qij->q", F, F)
    C = np.einsum("qki,qkj->qij", F, F)
    trC2 = np.einsum("qij,qij->q", C, C)
    I2 = 0.5 * (I1**2 - trC2)
    Jm23 = J ** (-2.0 / 3.0)
    Jm43 = J ** (-4.0 / 3.0)
    I1_iso = Jm23 * I1
    I2_iso = Jm43 * I2
    FinvT = np.transpose(np.linalg.inv(F), (0, 2, 1))
    dI1 = 2.0 * F
    FC = np.einsum("qik,qkj->qij", F, C)
    dI2 = 2.0 * (I1[:, None, None] * F - FC)
    dI1_iso = Jm23[:, None, None] * dI1 - (2.0 / 3.0) * I1_iso[:, None, None] * FinvT
    dI2_iso = Jm43[:, None, None] * dI2 - (4.0 / 3.0) * I2_iso[:, None, None] * FinvT
    return I1_iso, I2_iso, dI1_iso, dI2_iso


def density_eval(model, u: np.ndarray, G: np.ndarray, dim: int):
    """Energy density and exact partials at a batch of points.

    u is (q, c) field values, G is (q, c, dim) gradients. Returns
    (psi (q,), dpsi/dG (q, c, dim), dpsi/du (q, c)).
    """
    u = np.atleast_2d(np.asarray(u, dtype=float).T).T
    G = np.asarray(G, dtype=float)
    q = G.shape[0]

    if isinstance(model, Poisson):
        psi = 0.5 * np.einsum("qcd,qcd->q", G, G)
        return psi, G.copy(), np.zeros_like(u)

    if isinstance(model, ScreenedPoisson):
        psi = 0.5 * np.einsum("qcd,qcd->q", G, G) + 0.5 * model.k**2 * u[:, 0] ** 2
        return psi, G.copy(), model.k**2 * u

    if isinstance(model, LinearElastic):
        lam, mu = model.lame(dim)
        eps = 0.5 * (G + np.transpose(G, (0, 2, 1)))
        tr = np.einsum("qii->q", eps)
        sigma = 2 * mu * eps + lam * tr[:, None, None] * np.eye(dim)
        psi = 0.5 * np.einsum("qij,qij->q", sigma, eps)
        return psi, sigma, np.zeros_like(u)

    if isinstance(model, NeoHookean) and not model.isochoric:
        lam, mu = lame_parameters(model.E, model.nu)
        F, J, FinvT = _deformation(G)
        lnJ = np.log(J)
        I1 = np.einsum("qij,qij->q", F, F)
        psi = 0.5 * lam * lnJ**2 - mu * lnJ + 0.5 * mu * (I1 - dim)
        dF = (lam * lnJ - mu)[:, None, None] * FinvT + mu * F
        return psi, dF, np.zeros_like(u)

    if isinstance(model, NeoHookean):
        F, J, FinvT = _deformation(G)
        I1_iso, _, dI1_iso, _ = _isochoric_invariants(F, J)
        psi = model.a0 * (I1_iso - 3) + model.a1 * (J - 1) ** 2
        dF = model.a0 * dI1_iso + (2 * model.a1 * (J - 1) * J)[:, None, None] * FinvT
        return psi, dF, np.zeros_like(u)

    if isinstance(model, Isihara):
        F, J, FinvT = _deformation(G)
        I1_iso, I2_iso, dI1_iso, dI2_iso = _isochoric_invariants(F, J)
        psi = (
            model.a0 * (I1_iso - 3)
            + model.a1 * (I2_iso - 3)
            + model.a2 * (I1_iso - 3) ** 2
            + model.a3 * (J - 1) ** 2
        )
        dF = (
            (model.a0 + 2 * model.a2 * (I1_iso - 3))[:, None, None] * dI1_iso
            + model.a1 * dI2_iso
            + (2 * model.a3 * (J - 1) * J)[:, None, None] * FinvT
        )
        return psi, dF, np.zeros_like(u)

    if isinstance(model, GentThomas):
        F, J, FinvT = _deformation(G)
        I1_iso, I2_iso, dI1_iso, dI2_iso = _isochoric_invariants(F, J)
        psi = model.a0 * (I1_iso - 3) + model.a1 * np.log(I2_iso / 3) + model.a2 * (J - 1) ** 2
        dF = (
            model.a0 * dI1_iso
            + (model.a1 / I2_iso)[:, None, None] * dI2_iso
            + (2 * model.a2 * (J - 1) * J)[:, None, None] * FinvT
        )
        return psi, dF, np.zeros_like(u)

    if isinstance(model, Custom):
        bindings = ex.grad_bindings(G, dim)
        psi, grads = ex.partials(model.ast, bindings)
        psi = np.broadcast_to(np.asarray(psi, dtype=float), (q,)).copy()
        dG = np.zeros_like(G)
        rows = "uvw"[: G.shape[1]]
        cols = "xyz"[:dim]
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                dG[:, i, j] = np.broadcast_to(grads[r + c], (q,))
        return psi, dG, np.zeros_like(u)

    raise TypeError(f"unknown material model {model!r}")


# Canonical one-line expression strings for the three isochoric models, as
# accepted by the custom-energy interface. Joined from readable pieces; the
# result is a single line.

_DET = (
    "((1+ux)*(1+vy)*(1+wz) + uy*vz*wx + uz*vx*wy - uz*(1+vy)*(wx)"
    " - uy*vx*(1+wz) - (1+ux)*vz*wy)"
)
_TRC = (
    "((1+ux)**2 + vx**2 + wx**2 + uy**2 + (1+vy)**2 + wy**2"
    " + uz**2 + vz**2 + (1+wz)**2)"
)
_TRC2 = (
    "(((1+ux)**2+vx**2+wx**2)**2+(uy**2+(1+vy)**2+wy**2)**2"
    "+(uz**2+vz**2+(1+wz)**2)**2+2*((1+ux)*uy+vx*(1+vy)+wx*wy)**2"
    "+2*((1+ux)*uz+vx*vz+wx*(1+wz))**2+2*(uy*uz+(1+vy)*vz+wy*(1+wz))**2)"
)
_I2_ISO = f"({_DET}**(-4/3)*0.5*({_TRC}**2-{_TRC2}))"
_I1_ISO = f"({_DET}**(-2/3)*{_TRC})"

NEO_HOOKEAN_EXPR = f"0.5*({_I1_ISO} - 3) + 1.5*({_DET}-1)**2"
ISIHARA_EXPR = (
    f"0.5*({_I1_ISO} - 3) + ({_I2_ISO}-3) + ({_I1_ISO}-3)**2 + 1.5*({_DET}-1)**2"
)
GENT_THOMAS_EXPR = (
    f"0.5*({_I1_ISO} - 3) + log({_I2_ISO}/3) + 1.5*({_DET}-1)**2"
)

EXPRESSION_STRINGS = {
    "neo_hookean": NEO_HOOKEAN_EXPR,
    "isihara": ISIHARA_EXPR,
    "gent_thomas": GENT_THOMAS_EXPR,
}

BUILTIN_FOR_EXPRESSION = {
    "neo_hookean": NeoHookean(a0=0.5, a1=1.5),
    "isihara": Isihara(a0=0.5, a1=1.0, a2=1.0, a3=1.5),
    "gent_thomas": GentThomas(a0=0.5, a1=1.0, a2=1.5),
}
