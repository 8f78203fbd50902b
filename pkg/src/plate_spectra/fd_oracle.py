"""Brute-force oracle for the cross-section operator.

Discretises the quadratic form of A^(4)(r) with piecewise-linear elements
on a uniform mesh of J = (-pi/2, pi/2) and solves the generalized
symmetric eigenproblem. Shares nothing with the secular-equation route.

For u = exp(i r x2) (u1, v2, v3)(x3) the form 2 int <eps(u), eps(u)> reads

    hat block:   2 int_J  r^2|v2|^2 + |v3'|^2 + 1/2 |v2' + i r v3|^2
    check block:   int_J  r^2|u1|^2 + |u1'|^2

Stress-free boundary conditions are natural for these forms, so no
boundary rows are needed. With v3 = i w3 (w3 real) the hat block is a real
symmetric problem. Parity (v2, u1 even; w3 odd) is enforced by working on
the half interval [0, pi/2] with w3(0) = 0, and the zero-mean condition
defining h4 is imposed by projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError

__all__ = [
    "FormDiscretization",
    "reduced_form",
    "assemble",
    "lowest_eigs",
    "hat_eigs",
    "observed_order",
]

SECTORS = ("hat", "check", "full_h4")
DENSE_LIMIT = 2048


@dataclass(frozen=True, eq=False)
class FormDiscretization:
    n: int
    h: float
    r: float
    sector: str
    stiffness: sp.csr_matrix = field(repr=False)
    mass: sp.csr_matrix = field(repr=False)
    constraints: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def form(self, x: np.ndarray) -> float:
        return float(x @ (self.stiffness @ x))


def _p1_matrices(m: int, h: float):
    """Stiffness K, mass M and coupling C_ij = int phi_i' phi_j on m uniform elements."""
    e = np.arange(m)
    rows = np.concatenate([e, e, e + 1, e + 1])
    cols = np.concatenate([e, e + 1, e, e + 1])
    shape = (m + 1, m + 1)
    k = sp.coo_matrix(
        (np.concatenate([np.full(m, 1 / h), np.full(m, -1 / h), np.full(m, -1 / h), np.full(m, 1 / h)]), (rows, cols)),
        shape,
    )
    mm = sp.coo_matrix(
        (np.concatenate([np.full(m, h / 3), np.full(m, h / 6), np.full(m, h / 6), np.full(m, h / 3)]), (rows, cols)),
        shape,
    )
    # element [[-1, -1], [1, 1]] / 2: row i differentiated, column j not
    c = sp.coo_matrix(
        (np.concatenate([np.full(m, -0.5), np.full(m, -0.5), np.full(m, 0.5), np.full(m, 0.5)]), (rows, cols)),
        shape,
    )
    return k.tocsr(), mm.tocsr(), c.tocsr()


def assemble(r: float, n: int, sector: str = "hat", project: bool = True) -> FormDiscretization:
    """Assemble the discrete form for ``n`` elements across J (h = pi/n).

    ``project=False`` drops the zero-mean (h4) constraint, which exposes the
    constant modes r^2 (check) and 2 r^2 (hat) of the h3 sector.
    """
    if sector not in SECTORS:
        raise DomainError(f"unknown sector {sector!r}")
    if n < 32 or n % 2:
        raise DomainError(f"grid size n={n} must be even and >= 32")
    r = float(r)
    h = math.pi / n
    m = n // 2
    k, mm, c = _p1_matrices(m, h)
    ones = mm @ np.ones(m + 1)

    blocks_a, blocks_m, cons = [], [], []
    if sector in ("hat", "full_h4"):
        inner = slice(1, None)  # w3(0) = 0
        a22 = 2 * r * r * mm + k
        a23 = -r * c[:, inner]
        a33 = (2 * k + r * r * mm)[inner, inner]
        blocks_a.append(sp.bmat([[a22, a23], [a23.T, a33]]))
        blocks_m.append(sp.block_diag([mm, mm[inner, inner]]))
        cons.append(np.concatenate([ones, np.zeros(m)]))
    if sector in ("check", "full_h4"):
        blocks_a.append(r * r * mm + k)
        blocks_m.append(mm)
        cons.append(ones.copy())

    a_mat = sp.block_diag(blocks_a, format="csr")
    m_mat = sp.block_diag(blocks_m, format="csr")
    con = None
    if project:
        sizes = [b.shape[0] for b in blocks_a]
        con = np.zeros((sum(sizes), len(cons)))
        off = 0
        for j, (vec, size) in enumerate(zip(cons, sizes)):
            con[off : off + size, j] = vec
            off += size
    return FormDiscretization(n, h, r, sector, a_mat, m_mat, con)


def _reflect(mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    """H mat H for the Householder reflector H = I - 2 v v^T / v^T v."""
    beta = 2.0 / (v @ v)
    w = mat @ v
    mat = mat - beta * (np.outer(v, w) + np.outer(w, v)) + beta * beta * (v @ w) * np.outer(v, v)
    return 0.5 * (mat + mat.T)


def _project(a: np.ndarray, b: np.ndarray, constraints: np.ndarray):
    """Restrict the pencil (a, b) to the complement of the constraint span."""
    q, _ = sla.qr(constraints, mode="economic")
    pivots = []
    for j in range(q.shape[1]):
        c = q[:, j]
        p = int(np.argmax(np.abs(c)))
        v = c.copy()
        v[p] += math.copysign(1.0, c[p])
        a = _reflect(a, v)
        b = _reflect(b, v)
        q = q - np.outer(v, (2.0 / (v @ v)) * (v @ q))
        pivots.append(p)
    keep = np.setdiff1d(np.arange(a.shape[0]), pivots)
    return a[np.ix_(keep, keep)], b[np.ix_(keep, keep)]


def lowest_eigs(disc: FormDiscretization, count: int = 1) -> np.ndarray:
    """Smallest ``count`` generalized eigenvalues, ascending."""
    nc = 0 if disc.constraints is None else disc.constraints.shape[1]
    if count < 1 or count > disc.size - nc:
        raise DomainError(f"count={count} outside [1, {disc.size - nc}]")
    if disc.n <= DENSE_LIMIT:
        a = disc.stiffness.toarray()
        b = disc.mass.toarray()
        if nc:
            a, b = _project(a, b, disc.constraints)
        return sla.eigh(a, b, eigvals_only=True, subset_by_index=[0, count - 1])

    # constant modes are exact discrete eigenvectors, so dropping them is
    # equivalent to the projection
    vals, vecs = spla.eigsh(disc.stiffness, k=count + nc, M=disc.mass, sigma=-1.0, which="LM")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    if nc:
        mnorm = np.sqrt(np.einsum("ij,ij->j", vecs, disc.mass @ vecs))
        cnorm = np.sqrt(np.einsum("ij,ij->j", disc.constraints, disc.constraints))
        overlap = np.abs(disc.constraints.T @ vecs) / np.outer(cnorm, mnorm)
        keep = overlap.max(axis=0) < 1e-6
        vals = vals[keep]
    if vals.size < count:
        raise RuntimeError("shift-invert eigensolver returned too few admissible modes")
    return vals[:count]


def hat_eigs(r: float, n: int = 64, count: int = 3) -> np.ndarray:
    return lowest_eigs(assemble(r, n, "hat"), count)


def reduced_form(r: float, v2, v3) -> float:
    """Exact hat-block form of the piecewise-linear interpolants of nodal
    values ``v2``, ``v3`` (complex allowed) on a uniform grid of J."""
    v2 = np.asarray(v2, dtype=complex)
    v3 = np.asarray(v3, dtype=complex)
    if v2.shape != v3.shape or v2.ndim != 1 or v2.size < 2:
        raise DomainError("v2 and v3 must be 1-D nodal arrays of equal length")
    h = math.pi / (v2.size - 1)

    def l2(u):
        a, b = u[:-1], u[1:]
        return h / 3 * np.sum(np.abs(a) ** 2 + (a * b.conj()).real + np.abs(b) ** 2)

    d2 = np.diff(v2) / h
    d3 = np.diff(v3) / h
    # |v2' + i r v3|^2 with v2' constant per element
    mean3 = 0.5 * (v3[:-1] + v3[1:])
    cross = 2 * h * np.sum((d2 * np.conj(1j * r * mean3)).real)
    coupling = h * np.sum(np.abs(d2) ** 2) + cross + r * r * l2(v3)
    return float(2 * (r * r * l2(v2) + h * np.sum(np.abs(d3) ** 2) + 0.5 * coupling))


def observed_order(values, exact: float | None = None) -> float:
    """Convergence order from successive refinements by a factor 2.

    With ``exact`` uses the last two errors; otherwise the last three values.
    """
    v = np.asarray(values, dtype=float)
    if exact is not None:
        e = np.abs(v - exact)
        return float(np.log2(e[-2] / e[-1]))
    return float(np.log2(abs(v[-3] - v[-2]) / abs(v[-2] - v[-1])))
