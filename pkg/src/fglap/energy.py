"""Modulars, the Luxemburg seminorm and the Dirichlet energy on lattice functions."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .discrete import form_for
from .errors import DomainError
from .lattice import LatticeFunction
from .operator import _check_zero_trace
from .young import YoungFunction


@dataclass(frozen=True)
class EnergyBreakdown:
    gagliardo_modular: float
    load_term: float
    total: float

    def to_dict(self):
        return asdict(self)


def _prepare(yf, u, s):
    if u.exterior.kind != "zero":
        raise DomainError("energies are defined for functions vanishing outside the box")
    _check_zero_trace(u)
    form = form_for(yf, u, s)
    return form, form.free_values(u)


def modular(yf: YoungFunction, u: LatticeFunction, s: float, scale: float = 1.0) -> float:
    """Discrete ``iint G(D_s u / scale) dmu`` over ``R^n x R^n``."""
    if scale <= 0:
        raise DomainError("scale must be positive")
    form, x = _prepare(yf, u, s)
    return float(form.modular(x / scale))


def luxemburg_seminorm(yf: YoungFunction, u: LatticeFunction, s: float, rtol: float = 1e-8) -> float:
    """Scale at which the modular equals one, by bisection in log-scale."""
    form, x = _prepare(yf, u, s)
    if not np.any(x):
        return 0.0
    m = lambda lam: form.modular(x / lam)  # noqa: E731
    lo, hi = 1.0, 1.0
    while m(lo) < 1.0:
        lo *= 0.5
    while m(hi) > 1.0:
        hi *= 2.0
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        if m(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-3 * rtol:
            break
    return float(np.sqrt(lo * hi))


def _load(form, f, x):
    fv = form.free_values(f) if isinstance(f, LatticeFunction) else np.asarray(f(form.nodes[: form.nfree]), dtype=float)
    return fv * form.load_weights()


def dirichlet_energy(yf: YoungFunction, u: LatticeFunction, f, s: float) -> EnergyBreakdown:
    """``J(u) = modular(u) - int f u`` (trapezoid load)."""
    form, x = _prepare(yf, u, s)
    mod = float(form.modular(x))
    load = float(_load(form, f, x) @ x)
    return EnergyBreakdown(mod, load, mod - load)


def energy_gradient(yf: YoungFunction, u: LatticeFunction, f, s: float) -> np.ndarray:
    """Gradient of the discrete energy, indexed like the interior nodes of ``u``.

    Component ``i`` is the weak pairing with the nodal hat function minus the
    load it receives.  The result has the shape of ``u.values`` with zeros on
    the box boundary.
    """
    form, x = _prepare(yf, u, s)
    grad = form.modular_and_grad(x)[1] - _load(form, f, x)
    out = np.zeros(int(np.prod(u.shape)))
    out[form.flat_index[: form.nfree]] = grad
    return out.reshape(u.shape)
