"""Euclidean reference for the three integrals, independent of the Finsler code.

Coordinates are hyperspherical: z = (r sin(chi) omega, r cos(chi)) with chi
measured from the t-axis, dz = r^(N-1) sin(chi)^(N-2) dr dchi domega and a
linear (not logarithmic) radial variable.  The test function is the bump
psi(|z|) exp(<v, z>/|z|) coded here from scratch.
"""

from dataclasses import dataclass

import numpy as np


def _gl(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _sphere(d, n):
    """Nodes and weights on S^d by nested polar angles.

    S^2 uses the cosine of the polar angle as variable (weight exactly 1);
    higher spheres use the angle itself, where the weight sin^(d-1) is smooth.
    """
    if d == 1:
        ang = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(ang), np.sin(ang)], axis=1), np.full(n, 2.0 * np.pi / n)
    sub, wsub = _sphere(d - 1, n)
    if d == 2:
        c, wlevel = np.polynomial.legendre.leggauss(n)
        s = np.sqrt(1.0 - c * c)
    else:
        ang, wang = _gl(n, 0.0, np.pi)
        c, s = np.cos(ang), np.sin(ang)
        wlevel = wang * s ** (d - 1)
    pts = np.concatenate(
        [np.repeat(c, len(wsub))[:, None], (s[:, None, None] * sub[None]).reshape(-1, d)], axis=1
    )
    return pts, np.outer(wlevel, wsub).ravel()


@dataclass(frozen=True)
class EuclideanBump:
    r1: float
    r2: float
    v: np.ndarray
    amplitude: float = 1.0

    def _psi(self, r):
        m = 0.5 * (self.r2 - self.r1)
        inside = (r > self.r1) & (r < self.r2)
        g = np.where(inside, (r - self.r1) * (self.r2 - r) / m**2, 0.0)
        dg = np.where(inside, (self.r1 + self.r2 - 2.0 * r) / m**2, 0.0)
        return g**3, 3.0 * g * g * dg

    def value_and_gradient(self, z):
        r = np.linalg.norm(z, axis=-1)
        psi, dpsi = self._psi(r)
        cosang = z @ self.v / r
        e = self.amplitude * np.exp(cosang)
        u = psi * e
        radial = z / r[..., None]
        d_cos = (self.v - cosang[..., None] * radial) / r[..., None]
        grad = e[..., None] * (dpsi[..., None] * radial + psi[..., None] * d_cos)
        return u, grad


def isotropic_integrals(bump, N, r_in, r_out, n_radial, n_angular, n_sphere):
    """(int |grad u|^2, int u^2/|z|^2, int u(x,0)^2/|x| dx) over r_in < |z| < r_out."""
    r, wr = _gl(n_radial, r_in, r_out)
    chi, wchi = _gl(n_angular, 0.0, 0.5 * np.pi)
    omega, womega = _sphere(N - 2, n_sphere)
    energy = 0.0
    weighted = 0.0
    for ri, wri in zip(r, wr):
        x = (ri * np.sin(chi))[:, None, None] * omega[None]
        t = np.broadcast_to((ri * np.cos(chi))[:, None, None], x.shape[:-1] + (1,))
        z = np.concatenate([x, t], axis=-1)
        u, g = bump.value_and_gradient(z)
        w = wri * ri ** (N - 1) * np.outer(wchi * np.sin(chi) ** (N - 2), womega)
        energy += np.sum(w * np.sum(g * g, axis=-1))
        weighted += np.sum(w * u * u) / ri**2
    boundary = 0.0
    for ri, wri in zip(r, wr):
        z = np.concatenate([ri * omega, np.zeros((len(omega), 1))], axis=1)
        u, _ = bump.value_and_gradient(z)
        boundary += wri * ri ** (N - 2) * np.sum(womega * u * u) / ri
    return float(energy), float(weighted), float(boundary)
