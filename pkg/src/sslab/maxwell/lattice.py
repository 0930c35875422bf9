"""Cubic lattice ball with staggered fields and a faceted boundary sphere.

Sites are integer points ``s`` with ``|s| <= R`` (spacing ``h``).  Scalars
live on sites, vector fields on the links between neighbouring sites.  A
site whose neighbour lies outside the ball owns a boundary face at
``s + e/2`` with outward normal ``e``; the normal electric field on such a
face is the boundary flux.  Plaquettes are kept only when all four links are
interior, which imposes vanishing tangential magnetic field at the wall.

Every cube face sits in a plane with positive distance to the origin along
its normal, so each ray from the centre leaves through exactly one face and
the exact face solid angles tile the unit sphere.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.special import sph_harm_y

AXES = np.eye(3, dtype=int)


def lm_pairs(l_max: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(l_max + 1) for m in range(-l, l + 1)]


def real_sph_harm(l: int, m: int, directions: np.ndarray) -> np.ndarray:
    """Orthonormal real spherical harmonic at unit vectors of shape (k, 3)."""
    d = np.asarray(directions, dtype=float)
    theta = np.arccos(np.clip(d[:, 2], -1.0, 1.0))
    phi = np.arctan2(d[:, 1], d[:, 0])
    if m == 0:
        return sph_harm_y(l, 0, theta, phi).real
    Y = sph_harm_y(l, abs(m), theta, phi)
    if m > 0:
        return np.sqrt(2) * (-1) ** m * Y.real
    return np.sqrt(2) * (-1) ** m * Y.imag


def triangle_solid_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Signed solid angle of triangles (rows) seen from the origin."""
    la, lb, lc = (np.linalg.norm(v, axis=-1) for v in (a, b, c))
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = (la * lb * lc + np.einsum("ij,ij->i", a, b) * lc
           + np.einsum("ij,ij->i", a, c) * lb + np.einsum("ij,ij->i", b, c) * la)
    return 2.0 * np.arctan2(num, den)


@dataclass(frozen=True)
class LatticeGeometry:
    """Lattice ball of radius ``radius`` sites and spacing ``h``."""

    radius: int = 12
    h: float = 1.0
    l_max: int = 2

    # -- sites -------------------------------------------------------------
    @cached_property
    def _index(self) -> np.ndarray:
        R = self.radius
        span = np.arange(-R - 1, R + 2)
        X, Y, Z = np.meshgrid(span, span, span, indexing="ij")
        inside = X ** 2 + Y ** 2 + Z ** 2 <= R * R
        idx = -np.ones(X.shape, dtype=np.int64)
        idx[inside] = np.arange(int(inside.sum()))
        return idx

    @cached_property
    def sites(self) -> np.ndarray:
        """Integer coordinates (n_sites, 3) in index order."""
        R = self.radius
        coords = np.argwhere(self._index >= 0) - (R + 1)
        order = self._index[tuple((coords + R + 1).T)]
        out = np.empty_like(coords)
        out[order] = coords
        return out

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def positions(self) -> np.ndarray:
        return self.h * self.sites

    def site_index(self, s) -> int:
        s = np.asarray(s, dtype=int) + self.radius + 1
        if np.any(s < 0) or np.any(s >= self._index.shape[0]):
            return -1
        return int(self._index[tuple(s)])

    def _lookup(self, coords: np.ndarray) -> np.ndarray:
        shifted = coords + self.radius + 1
        ok = np.all((shifted >= 0) & (shifted < self._index.shape[0]), axis=1)
        out = -np.ones(len(coords), dtype=np.int64)
        out[ok] = self._index[tuple(shifted[ok].T)]
        return out

    # -- links and faces ---------------------------------------------------
    @cached_property
    def _links(self):
        tails, heads, dirs = [], [], []
        for mu in range(3):
            nb = self._lookup(self.sites + AXES[mu])
            ok = nb >= 0
            tails.append(np.nonzero(ok)[0])
            heads.append(nb[ok])
            dirs.append(np.full(int(ok.sum()), mu))
        return np.concatenate(tails), np.concatenate(heads), np.concatenate(dirs)

    @property
    def link_tail(self) -> np.ndarray:
        return self._links[0]

    @property
    def link_head(self) -> np.ndarray:
        return self._links[1]

    @property
    def link_dir(self) -> np.ndarray:
        return self._links[2]

    @property
    def n_links(self) -> int:
        return len(self.link_tail)

    @cached_property
    def link_midpoints(self) -> np.ndarray:
        return self.h * (self.sites[self.link_tail] + 0.5 * AXES[self.link_dir])

    @cached_property
    def _faces(self):
        site, normal = [], []
        for mu in range(3):
            for sign in (1, -1):
                nb = self._lookup(self.sites + sign * AXES[mu])
                out = np.nonzero(nb < 0)[0]
                site.append(out)
                normal.append(np.tile(sign * AXES[mu], (len(out), 1)))
        return np.concatenate(site), np.concatenate(normal)

    @property
    def face_site(self) -> np.ndarray:
        return self._faces[0]

    @property
    def face_normal(self) -> np.ndarray:
        return self._faces[1]

    @property
    def n_faces(self) -> int:
        return len(self.face_site)

    @cached_property
    def face_centers(self) -> np.ndarray:
        return self.h * (self.sites[self.face_site] + 0.5 * self.face_normal)

    @cached_property
    def face_directions(self) -> np.ndarray:
        c = self.face_centers
        return c / np.linalg.norm(c, axis=1, keepdims=True)

    @cached_property
    def face_weights(self) -> np.ndarray:
        """Exact solid angle subtended by each boundary face from the centre."""
        n = self.face_normal.astype(float)
        # tangent pair (u, w) with u x w = n
        u = np.roll(n, 1, axis=1)
        w = np.cross(n, u)
        c = self.face_centers
        half = 0.5 * self.h
        v0 = c - half * u - half * w
        v1 = c + half * u - half * w
        v2 = c + half * u + half * w
        v3 = c - half * u + half * w
        return triangle_solid_angle(v0, v1, v2) + triangle_solid_angle(v0, v2, v3)

    # -- plaquettes --------------------------------------------------------
    @cached_property
    def _link_lookup(self) -> dict:
        return {(int(t), int(d)): i for i, (t, d) in enumerate(zip(self.link_tail, self.link_dir))}

    @cached_property
    def curl_incidence(self) -> sp.csr_matrix:
        """Oriented plaquette-link incidence (entries +-1)."""
        rows, cols, vals = [], [], []
        look = self._link_lookup
        p = 0
        for mu in range(3):
            for nu in range(mu + 1, 3):
                for s in range(self.n_sites):
                    a = look.get((s, mu))
                    b = look.get((s, nu))
                    if a is None or b is None:
                        continue
                    s_mu = int(self.link_head[a])
                    s_nu = int(self.link_head[b])
                    c = look.get((s_mu, nu))
                    d = look.get((s_nu, mu))
                    if c is None or d is None:
                        continue
                    rows += [p] * 4
                    cols += [a, c, d, b]
                    vals += [1.0, 1.0, -1.0, -1.0]
                    p += 1
        return sp.csr_matrix((vals, (rows, cols)), shape=(p, self.n_links))

    @property
    def n_plaquettes(self) -> int:
        return self.curl_incidence.shape[0]

    # -- discrete operators ------------------------------------------------
    @cached_property
    def grad(self) -> sp.csr_matrix:
        """(phi_head - phi_tail) / h on interior links."""
        L = self.n_links
        rows = np.concatenate([np.arange(L), np.arange(L)])
        cols = np.concatenate([self.link_head, self.link_tail])
        vals = np.concatenate([np.ones(L), -np.ones(L)]) / self.h
        return sp.csr_matrix((vals, (rows, cols)), shape=(L, self.n_sites))

    @cached_property
    def div(self) -> sp.csr_matrix:
        """Net outward flux through each site's dual cell from interior links."""
        return (-self.h ** 3 * self.grad.T).tocsr()

    @cached_property
    def boundary_div(self) -> sp.csr_matrix:
        """Outward flux per site from the boundary faces (normal E times h^2)."""
        F = self.n_faces
        return sp.csr_matrix((np.full(F, self.h ** 2), (self.face_site, np.arange(F))),
                             shape=(self.n_sites, F))

    @cached_property
    def curl(self) -> sp.csr_matrix:
        return (self.curl_incidence / self.h).tocsr()

    @cached_property
    def curlcurl(self) -> sp.csr_matrix:
        return (self.curl.T @ self.curl).tocsr()

    # -- boundary harmonics -----------------------------------------------
    @cached_property
    def lm(self) -> list[tuple[int, int]]:
        return lm_pairs(self.l_max)

    @cached_property
    def harmonics(self) -> np.ndarray:
        """Y_lm at face directions, shape (n_lm, n_faces)."""
        return np.stack([real_sph_harm(l, m, self.face_directions) for l, m in self.lm])

    def lm_index(self, l: int, m: int) -> int:
        return self.lm.index((l, m))

    def harmonic_gram_error(self) -> float:
        """max |sum_f w_f Y_a Y_b - delta_ab| over the shipped harmonics."""
        Y = self.harmonics
        gram = (Y * self.face_weights) @ Y.T
        return float(np.abs(gram - np.eye(len(self.lm))).max())

    def weight_sum_error(self) -> float:
        return float(abs(self.face_weights.sum() - 4 * np.pi))

    def div_curl_defect(self, seed=0) -> float:
        """max |div(curl^T B)| for a random plaquette field B."""
        B = np.random.default_rng(seed).standard_normal(self.n_plaquettes)
        return float(np.abs(self.div @ (self.curl.T @ B)).max())

    def curl_grad_defect(self, seed=0) -> float:
        phi = np.random.default_rng(seed).standard_normal(self.n_sites)
        return float(np.abs(self.curl @ (self.grad @ phi)).max())
