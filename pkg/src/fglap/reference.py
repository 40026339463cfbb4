"""Dense reference implementation of the 1D discrete fractional p-Laplacian.

Written independently of :mod:`fglap.discrete` (dense matrices, exact
Hessian, damped Newton) so the two can be compared on the same mesh.  Only
``G(t) = |t|^p / p`` on an interval is supported.
"""
from __future__ import annotations

import numpy as np


class DensePLaplacian1D:
    def __init__(self, p: float, s: float, a: float, b: float, mesh_n: int, f: float = 1.0):
        self.p, self.s = float(p), float(s)
        self.x = np.linspace(a, b, mesh_n)
        self.h = (b - a) / (mesh_n - 1)
        m = mesh_n
        self.vol = np.full(m, self.h)
        self.vol[[0, -1]] = self.h / 2
        self.free = np.arange(1, m - 1)
        r = np.abs(self.x[:, None] - self.x[None, :])
        np.fill_diagonal(r, 1.0)
        self.W = 2.0 * np.outer(self.vol, self.vol) / r  # pair weight incl. the factor 2
        np.fill_diagonal(self.W, 0.0)
        self.Rs = r ** (-self.s)
        np.fill_diagonal(self.Rs, 0.0)
        # subcell centres of each node's cell; values of the zero-extended interpolant
        offs = np.array([-3.0, -1.0, 1.0, 3.0]) * self.h / 8
        self.sub = [(self.x + o) for o in offs]
        eye = np.eye(m)
        self.S = [
            np.stack([np.interp(c, self.x, eye[:, k], left=0.0, right=0.0) for k in range(m)], axis=1) for c in self.sub
        ]
        self.sub_pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        self.rex = np.stack([b - self.x, self.x - a], axis=1)
        self.load = f * self.vol

    def _full(self, uf):
        u = np.zeros(self.x.size)
        u[self.free] = uf
        return u

    def energy_grad_hess(self, uf):
        p, s = self.p, self.s
        u = self._full(uf)
        D = (u[:, None] - u[None, :]) * self.Rs
        aD = np.abs(D)
        E = 0.5 * np.sum(aD**p / p * self.W)
        g_pair = np.sign(D) * aD ** (p - 1) * self.Rs * self.W
        grad = g_pair.sum(axis=1)
        Hoff = -(p - 1) * aD ** (p - 2) * self.Rs**2 * self.W
        np.fill_diagonal(Hoff, 0.0)
        H = Hoff.copy()
        H[np.diag_indices_from(H)] = -Hoff.sum(axis=1)
        for i, j in self.sub_pairs:
            r = abs(self.sub[i][0] - self.sub[j][0])
            w = 2.0 * (self.vol / 4) ** 2 / r
            Sd = self.S[i] - self.S[j]
            d = (Sd @ u) * r ** (-s)
            E += np.sum(np.abs(d) ** p / p * w)
            grad += Sd.T @ (np.sign(d) * np.abs(d) ** (p - 1) * w * r ** (-s))
            H += Sd.T @ (((p - 1) * np.abs(d) ** (p - 2) * w * r ** (-2 * s))[:, None] * Sd)
        fr = self.free
        rs = self.rex[fr] ** (-s)
        tau = np.abs(uf)[:, None] * rs
        cext = 2.0 * self.vol[fr] / s
        E += np.sum(cext * np.sum(tau**p, axis=1) / p**2)
        E -= self.load @ u
        grad = (grad - self.load)[fr] + cext * np.sum(tau ** (p - 1) * rs, axis=1) * np.sign(uf) / p
        H = H[np.ix_(fr, fr)]
        H[np.diag_indices_from(H)] += cext * (p - 1) / p * np.sum(tau ** (p - 2) * rs**2, axis=1)
        return E, grad, H

    def solve(self, tol: float = 1e-13, max_iter: int = 200):
        # start from the solution of the quadratic (p = 2 like) problem
        p_save = self.p
        self.p = 2.0
        _, g0, H0 = self.energy_grad_hess(np.zeros(self.free.size))
        self.p = p_save
        uf = np.linalg.solve(H0, -g0)
        uf = np.sign(uf) * np.abs(uf) ** (1.0 / (self.p - 1))
        for _ in range(max_iter):
            E, g, H = self.energy_grad_hess(uf)
            if np.max(np.abs(g)) / self.h <= tol:
                break
            step = np.linalg.solve(H + 1e-14 * np.eye(H.shape[0]) * np.trace(H) / H.shape[0], -g)
            t = 1.0
            while self.energy_grad_hess(uf + t * step)[0] > E + 1e-4 * t * (g @ step) and t > 1e-12:
                t *= 0.5
            uf = uf + t * step
        return self._full(uf)
