"""Discrete Gagliardo-Orlicz modular on a uniform grid.

The double integral of ``G(D_s u)`` over ``R^n x R^n`` is split as

* node-pair cells ``i != j`` inside the domain, midpoint rule with cut-cell
  volumes ``v_i = |cell_i cap Omega|``;
* diagonal cells, refined once into 4 subcells whose values come from the
  piecewise (bi)linear interpolant;
* domain times complement, where ``u = 0``: along each ray from node ``i`` the
  radial integral has the closed form ``Ghat(|u_i| r_exit^-s) / s`` with
  ``Ghat(tau) = int_0^tau G(t)/t dt``.

Nodes with positive signed distance carry unknowns ("free" nodes); the rest
of the nodes with ``v_i > 0`` are held at zero.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from .lattice import LatticeFunction
from .young import YoungFunction, sphere_measure

# rows per chunk in the generic (non power-sum) pair evaluation
_CHUNK = 256


@numba.njit(cache=True)
def _powi(a, e):
    ie = int(e)
    if ie == e and ie >= 0:
        r = 1.0
        for _ in range(ie):
            r *= a
        return r
    return a**e


@numba.njit(cache=True)
def _pair_energy_grad(u, I, J, nfree, Ts, Tn, v, coefs, exps):
    n = u.size
    K = coefs.size
    E = 0.0
    grad = np.zeros(nfree)
    for i in range(nfree):
        ui = u[i]
        ii = I[i]
        ji = J[i]
        vi = v[i]
        gi = 0.0
        Ei = 0.0
        for j in range(i + 1, n):
            a = abs(ii - I[j])
            b = abs(ji - J[j])
            rs = Ts[a, b]
            d = (ui - u[j]) * rs
            ad = abs(d)
            Gv = 0.0
            gv = 0.0
            for k in range(K):
                e = exps[k]
                pw = _powi(ad, e - 1.0)
                Gv += coefs[k] * pw * ad / e
                gv += coefs[k] * pw
            if d < 0:
                gv = -gv
            w = Tn[a, b] * vi * v[j]
            Ei += Gv * w
            t = gv * w * rs
            gi += t
            if j < nfree:
                grad[j] -= t
        E += Ei
        grad[i] += gi
    return 2.0 * E, 2.0 * grad


@numba.njit(cache=True)
def _dpow(X, Y, e):
    """``Y**e - X**e`` for ``X, Y >= 0`` without cancellation."""
    if X == Y:
        return 0.0
    ie = int(e)
    if ie == e and ie >= 1:
        acc = 0.0
        for k in range(ie):
            acc += _powi(Y, k) * _powi(X, ie - 1 - k)
        return (Y - X) * acc
    if X == 0.0:
        return Y**e
    return X**e * math.expm1(e * math.log1p((Y - X) / X))


@numba.njit(cache=True)
def _pair_delta(u, du, I, J, nfree, Ts, Tn, v, coefs, exps):
    n = u.size
    K = coefs.size
    dE = 0.0
    for i in range(nfree):
        ui = u[i]
        dui = du[i]
        ii = I[i]
        ji = J[i]
        vi = v[i]
        acc = 0.0
        for j in range(i + 1, n):
            a = abs(ii - I[j])
            b = abs(ji - J[j])
            rs = Ts[a, b]
            d0 = (ui - u[j]) * rs
            dj = du[j] if j < nfree else 0.0
            dd = (dui - dj) * rs
            d1 = d0 + dd
            X = abs(d0)
            Y = abs(d1)
            if d0 >= 0.0 and d1 >= 0.0:
                diff = dd
            elif d0 <= 0.0 and d1 <= 0.0:
                diff = -dd
            else:
                diff = Y - X
            if diff == 0.0:
                continue
            s_ = 0.0
            for k in range(K):
                e = exps[k]
                ie = int(e)
                if ie == e and ie >= 1:
                    poly = 0.0
                    for m in range(ie):
                        poly += _powi(Y, m) * _powi(X, ie - 1 - m)
                    s_ += coefs[k] * diff * poly / e
                else:
                    s_ += coefs[k] * _dpow(X, Y, e) / e
            acc += s_ * Tn[a, b] * vi * v[j]
        dE += acc
    return 2.0 * dE


@numba.njit(cache=True)
def _stiffness(I, J, nfree, Ts, Tn, v):
    n = I.size
    P = np.zeros((nfree, nfree))
    for i in range(nfree):
        for j in range(i + 1, n):
            a = abs(I[i] - I[j])
            b = abs(J[i] - J[j])
            w = 2.0 * Tn[a, b] * Ts[a, b] * Ts[a, b] * v[i] * v[j]
            P[i, i] += w
            if j < nfree:
                P[j, j] += w
                P[i, j] = -w
                P[j, i] = -w
    return P


def _dG_numpy(terms, a, da, G=None):
    """``G(a + da) - G(a)`` elementwise; cancellation-free for power sums."""
    b = a + da
    if not terms:
        return G(b) - G(a)
    X, Y = np.abs(a), np.abs(b)
    diff = np.where((a >= 0) & (b >= 0), da, np.where((a <= 0) & (b <= 0), -da, Y - X))
    out = np.zeros_like(a)
    for c, e in terms:
        out = out + c * _dpow_numpy(X, Y, diff, e) / e
    return out


def _dpow_numpy(X, Y, diff, e):
    ie = int(e)
    if ie == e and ie >= 1:
        poly = np.zeros_like(X)
        for k in range(ie):
            poly = poly + Y**k * X ** (ie - 1 - k)
        return diff * poly
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(X > 0, diff / np.where(X > 0, X, 1.0), 0.0)
        out = np.where(X > 0, X**e * np.expm1(e * np.log1p(rel)), Y**e)
    return out


class DiscreteForm:
    """Discrete modular, load pairing and preconditioner for one grid and domain."""

    def __init__(self, yf: YoungFunction, s: float, domain, lower, h: float, shape, n_theta: int = 128):
        self.yf = yf
        self.s = float(s)
        self.domain = domain
        self.lower = tuple(float(c) for c in lower)
        self.h = float(h)
        self.shape = tuple(int(m) for m in shape)
        self.dim = len(self.shape)
        n = self.dim
        axes = [lo + h * np.arange(m) for lo, m in zip(self.lower, self.shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=-1)
        dist = domain.signed_distance(nodes)
        vol = domain.cell_fractions(nodes, h) * h**n
        free = dist > 0
        fixed = (~free) & (vol > 0)
        order = np.concatenate([np.flatnonzero(free), np.flatnonzero(fixed)])
        self.flat_index = order
        self.nfree = int(free.sum())
        self.nodes = nodes[order]
        self.v = np.ascontiguousarray(vol[order])
        multi = np.unravel_index(order, self.shape)
        self.I = np.ascontiguousarray(multi[0].astype(np.int64))
        self.J = np.ascontiguousarray((multi[1] if n == 2 else np.zeros_like(multi[0])).astype(np.int64))

        A = np.arange(self.shape[0])
        B = np.arange(self.shape[1]) if n == 2 else np.zeros(1, dtype=int)
        r = h * np.hypot(A[:, None], B[None, :])
        r[0, 0] = 1.0
        self.Ts = r ** (-self.s)
        self.Tn = r ** (-float(n))
        self.Ts[0, 0] = 0.0
        self.Tn[0, 0] = 0.0

        if yf.terms:
            self.coefs = np.array([c for c, _ in yf.terms], dtype=float)
            self.exps = np.array([e for _, e in yf.terms], dtype=float)
        else:
            self.coefs = self.exps = None

        self._setup_exterior(n_theta)
        self._setup_diagonal()

    # -- geometry -----------------------------------------------------------

    def _setup_exterior(self, n_theta):
        x = self.nodes[: self.nfree]
        if self.dim == 1:
            dirs = np.array([[1.0], [-1.0]])
            w = np.ones(2)
        else:
            th = 2 * np.pi * np.arange(n_theta) / n_theta
            dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
            w = np.full(n_theta, 2 * np.pi / n_theta)
        rex = np.stack([self.domain.exit_distance(x, e) for e in dirs], axis=-1)
        self.ext_rho = rex ** (-self.s)  # (nfree, ndir)
        self.ext_w = w
        self.ext_coef = 2.0 * self.v[: self.nfree] / self.s

    def _setup_diagonal(self):
        """Interpolation weights from nodal values to 4 subcell centres per cell."""
        h = self.h
        if self.dim == 1:
            offs = np.array([[-3.0], [-1.0], [1.0], [3.0]]) * h / 8
        else:
            offs = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=float) * h / 4
        self.sub_pairs = [(a, b) for a in range(4) for b in range(a + 1, 4)]
        self.sub_r = np.array([np.linalg.norm(offs[a] - offs[b]) for a, b in self.sub_pairs])
        # position of each grid node in the active ordering, -1 if held at zero outside
        pos = -np.ones(int(np.prod(self.shape)), dtype=np.int64)
        pos[self.flat_index] = np.arange(self.flat_index.size)
        cells = np.flatnonzero(self._cell_touches_free())
        rows, cols, vals = [], [], []
        for a in range(4):
            pts = self.nodes[cells] + offs[a]
            idx = (pts - np.array(self.lower)) / h
            base = np.floor(idx).astype(int)
            frac = idx - base
            corners = [(0,), (1,)] if self.dim == 1 else [(0, 0), (1, 0), (0, 1), (1, 1)]
            for cnr in corners:
                wgt = np.ones(cells.size)
                ok = np.ones(cells.size, dtype=bool)
                mi = []
                for k, c in enumerate(cnr):
                    wgt = wgt * (frac[:, k] if c else 1 - frac[:, k])
                    q = base[:, k] + c
                    ok &= (q >= 0) & (q < self.shape[k])
                    mi.append(np.clip(q, 0, self.shape[k] - 1))
                flat = np.ravel_multi_index(tuple(mi), self.shape)
                p = pos[flat]
                keep = ok & (p >= 0) & (p < self.nfree) & (wgt != 0)
                rows.append(a * cells.size + np.flatnonzero(keep))
                cols.append(p[keep])
                vals.append(wgt[keep])
        from scipy import sparse

        self.sub_cells = cells
        self.sub_S = sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(4 * cells.size, self.nfree),
        )
        self.sub_w = (self.v[cells] / 4.0) ** 2

    def _cell_touches_free(self):
        near = np.zeros(self.flat_index.size, dtype=bool)
        near[: self.nfree] = True
        if self.nfree < self.flat_index.size:
            free_nodes = self.nodes[: self.nfree]
            lo = np.array(self.lower)
            fidx = np.round((free_nodes - lo) / self.h).astype(int)
            mask = np.zeros(self.shape, dtype=bool)
            mask[tuple(fidx.T)] = True
            pad = np.pad(mask, 1)
            grown = np.zeros_like(pad)
            for sh in np.ndindex(*([3] * self.dim)):
                sl = tuple(slice(c, c + m) for c, m in zip(sh, self.shape))
                grown[tuple(slice(1, 1 + m) for m in self.shape)] |= pad[sl]
            grown = grown[tuple(slice(1, 1 + m) for m in self.shape)]
            aidx = np.round((self.nodes - lo) / self.h).astype(int)
            near |= grown[tuple(aidx.T)]
        return near

    # -- conversions --------------------------------------------------------

    def free_values(self, u: LatticeFunction) -> np.ndarray:
        return np.ascontiguousarray(u.values.ravel()[self.flat_index[: self.nfree]], dtype=float)

    def to_lattice(self, x: np.ndarray) -> LatticeFunction:
        vals = np.zeros(int(np.prod(self.shape)))
        vals[self.flat_index[: self.nfree]] = x
        return LatticeFunction(vals.reshape(self.shape), self.lower, self.h)

    def full(self, x):
        out = np.zeros(self.flat_index.size)
        out[: self.nfree] = x
        return out

    # -- modular pieces -----------------------------------------------------

    def _pairs(self, x):
        u = self.full(x)
        if self.coefs is not None:
            return _pair_energy_grad(u, self.I, self.J, self.nfree, self.Ts, self.Tn, self.v, self.coefs, self.exps)
        E = 0.0
        grad = np.zeros(self.nfree)
        n = u.size
        for i0 in range(0, self.nfree, _CHUNK):
            for i in range(i0, min(i0 + _CHUNK, self.nfree)):
                j = np.arange(i + 1, n)
                a = np.abs(self.I[i] - self.I[j])
                b = np.abs(self.J[i] - self.J[j])
                rs = self.Ts[a, b]
                d = (u[i] - u[j]) * rs
                w = self.Tn[a, b] * self.v[i] * self.v[j]
                E += float(np.sum(self.yf.G(d) * w))
                t = self.yf.g(d) * w * rs
                grad[i] += t.sum()
                inner = j < self.nfree
                np.subtract.at(grad, j[inner], t[inner])
        return 2.0 * E, 2.0 * grad

    def _diagonal(self, x):
        if self.sub_cells.size == 0:
            return 0.0, np.zeros(self.nfree)
        U = (self.sub_S @ x).reshape(4, -1)
        E = 0.0
        dU = np.zeros_like(U)
        for (a, b), r in zip(self.sub_pairs, self.sub_r):
            d = (U[a] - U[b]) * r ** (-self.s)
            w = 2.0 * self.sub_w * r ** (-float(self.dim))
            E += float(np.sum(self.yf.G(d) * w))
            t = self.yf.g(d) * w * r ** (-self.s)
            dU[a] += t
            dU[b] -= t
        return E, self.sub_S.T @ dU.ravel()

    def _exterior(self, x):
        tau = np.abs(x)[:, None] * self.ext_rho
        E = float(np.sum(self.ext_coef * (self.yf.G_log_integral(tau) @ self.ext_w)))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(tau > 0, self.yf.G(tau) / np.where(tau > 0, tau, 1.0), 0.0) * self.ext_rho
        grad = self.ext_coef * (q @ self.ext_w) * np.sign(x)
        return E, grad

    def modular(self, x) -> float:
        return self.modular_and_grad(x)[0]

    def modular_and_grad(self, x):
        x = np.ascontiguousarray(x, dtype=float)
        E1, g1 = self._pairs(x)
        E2, g2 = self._diagonal(x)
        E3, g3 = self._exterior(x)
        return E1 + E2 + E3, g1 + g2 + g3

    def modular_delta(self, x, dx) -> float:
        """``modular(x + dx) - modular(x)`` summed term by term."""
        x = np.ascontiguousarray(x, dtype=float)
        dx = np.ascontiguousarray(dx, dtype=float)
        terms = self.yf.terms
        if self.coefs is not None:
            dE = _pair_delta(self.full(x), self.full(dx), self.I, self.J, self.nfree, self.Ts, self.Tn, self.v,
                             self.coefs, self.exps)
        else:
            dE = self._pairs(x + dx)[0] - self._pairs(x)[0]
        if self.sub_cells.size:
            U = (self.sub_S @ x).reshape(4, -1)
            dU = (self.sub_S @ dx).reshape(4, -1)
            for (a, b), r in zip(self.sub_pairs, self.sub_r):
                rs = r ** (-self.s)
                w = 2.0 * self.sub_w * r ** (-float(self.dim))
                dE += float(np.sum(_dG_numpy(terms, (U[a] - U[b]) * rs, (dU[a] - dU[b]) * rs, self.yf.G) * w))
        tau0 = np.abs(x)[:, None] * self.ext_rho
        tau1 = np.abs(x + dx)[:, None] * self.ext_rho
        if terms:
            # Ghat is a power sum with coefficients c/e^2
            dtau = tau1 - tau0
            same = np.sign(x) == np.sign(x + dx)
            dtau = np.where(same[:, None], (np.sign(x) * dx)[:, None] * self.ext_rho, dtau)
            dG = np.zeros_like(tau0)
            for c, e in terms:
                dG = dG + c * _dpow_numpy(tau0, tau1, dtau, e) / (e * e)
        else:
            dG = self.yf.G_log_integral(tau1) - self.yf.G_log_integral(tau0)
        dE += float(np.sum(self.ext_coef * (dG @ self.ext_w)))
        return dE

    def load_weights(self) -> np.ndarray:
        """Trapezoid weights ``v_i`` of the free nodes."""
        return self.v[: self.nfree].copy()

    def stiffness(self) -> np.ndarray:
        """Hessian of the modular for ``G(t) = t^2/2`` (linear fractional stiffness)."""
        P = _stiffness(self.I, self.J, self.nfree, self.Ts, self.Tn, self.v)
        ext = (self.v[: self.nfree] / self.s) * ((self.ext_rho**2) @ self.ext_w)
        P[np.diag_indices_from(P)] += ext
        return P


def box_domain(u: LatticeFunction):
    """The box of a lattice function as a domain object."""
    from .domains import Interval, Rectangle

    lo, hi = u.box
    if u.dim == 1:
        return Interval(lo[0], hi[0])
    return Rectangle(lo, hi)


def form_for(yf: YoungFunction, u: LatticeFunction, s: float, n_theta: int = 128) -> DiscreteForm:
    return DiscreteForm(yf, s, box_domain(u), u.lower, u.h, u.shape, n_theta)


__all__ = ["DiscreteForm", "box_domain", "form_for", "sphere_measure"]
