"""Recurrent classes, stationary densities and leading spectrum of a
discretized transfer operator.

Closed communicating classes of the support digraph are the discrete
ergodic components; each carries a unique stationary row vector, computed by
power iteration on the class-restricted matrix.  The top of the spectrum
feeds the metastability analysis: a simple unit eigenvalue plus a real
second eigenvalue xi close to 1 signals two long-lived regions, read off
the sign structure of the second left eigenvector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigs

from .errors import (
    ConvergenceError,
    MetastabilityStructureError,
    NumericalError,
)
from .ulam import TransferMatrix

SUPPORT_THRESHOLD = 1e-14
UNIT_TOL_UNPERTURBED = 1e-8
UNIT_TOL_PERTURBED = 1e-10
DENSE_LIMIT = 2048
DENSE_FALLBACK_LIMIT = 16384
DEFAULT_GAP_RADIUS = 0.8
DEFAULT_ISOLATION_DELTA = 0.1
# Eigenvector entries below this (relative to the max) are unreachable-cell
# float dust; the sign sets exclude them.
SIGN_DUST = 1e-9


@dataclass
class ErgodicComponent:
    """One closed class with its stationary density (full-length vector)."""

    support: np.ndarray  # sorted cell indices
    density: np.ndarray  # nonnegative, sums to 1, zero off the support

    def mass_on(self, cells: np.ndarray) -> float:
        return float(self.density[np.asarray(cells, dtype=int)].sum())

    @property
    def support_cells(self) -> np.ndarray:
        return self.support


def _matrix_of(P) -> sp.csr_matrix:
    return P.matrix if isinstance(P, TransferMatrix) else sp.csr_matrix(P)


def recurrent_classes(P, threshold: float = SUPPORT_THRESHOLD) -> list[np.ndarray]:
    """Closed communicating classes of the support digraph, in cell-index order.

    Entries below ``threshold`` are treated as zero.  The closed classes of a
    row-stochastic matrix are its recurrent classes, i.e. the supports of the
    discrete ergodic decomposition.
    """
    M = _matrix_of(P).tocoo()
    keep = np.abs(M.data) > threshold
    A = sp.coo_matrix(
        (np.ones(int(keep.sum())), (M.row[keep], M.col[keep])), shape=M.shape
    ).tocsr()
    ncomp, labels = connected_components(A, directed=True, connection="strong")
    crossing = labels[M.row[keep]] != labels[M.col[keep]]
    open_labels = np.unique(labels[M.row[keep]][crossing])
    is_closed = np.ones(ncomp, dtype=bool)
    is_closed[open_labels] = False
    classes = [np.flatnonzero(labels == l) for l in range(ncomp) if is_closed[l]]
    classes.sort(key=lambda c: int(c[0]))
    return classes


def stationary_densities(
    P,
    tol: float = 1e-12,
    max_iter: int = 500_000,
    classes: list[np.ndarray] | None = None,
) -> list[ErgodicComponent]:
    """Stationary row vector of every recurrent class.

    Power iteration from the uniform vector on the class, averaged with a
    half step (f <- (f + fP)/2) so period-2 structure cannot stall it; the
    residual reported and tested is ||f P - f||_1 on the plain matrix.
    """
    M = _matrix_of(P)
    n = M.shape[0]
    if classes is None:
        classes = recurrent_classes(P)
    out = []
    for cls in classes:
        sub = M[cls][:, cls].tocsr()
        f = np.full(cls.size, 1.0 / cls.size)
        residual = np.inf
        for _ in range(max_iter):
            g = f @ sub
            residual = float(np.abs(g - f).sum())
            if residual <= tol:
                f = g / g.sum()
                break
            f = 0.5 * (f + g)
            f /= f.sum()
        else:
            raise ConvergenceError(
                f"power iteration stalled at residual {residual:.3e} > {tol}",
                residual=residual,
            )
        dens = np.zeros(n)
        dens[cls] = f
        out.append(ErgodicComponent(support=cls, density=dens))
    return out


@dataclass
class SpectrumReport:
    """Leading eigenvalues of a discretized operator.

    ``eigenvalues`` is sorted by modulus (descending; conjugate pairs stay
    adjacent).  ``xi`` is set when a real second eigenvalue dominates the
    rest of the non-unit spectrum outside the gap disk of radius
    ``gap_radius``; the sign sets of its left eigenvector are then the two
    almost-invariant regions.
    """

    eigenvalues: np.ndarray
    merged: list[tuple[complex, int]]
    unit_multiplicity: int
    gap_radius: float = DEFAULT_GAP_RADIUS
    isolation_delta: float = DEFAULT_ISOLATION_DELTA
    xi: float | None = None
    second_eigvec: np.ndarray | None = None
    positive_cells: np.ndarray | None = None
    negative_cells: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "merged": [
                {"value": [float(z.real), float(z.imag)], "multiplicity": int(m)}
                for z, m in self.merged
            ],
            "unit_multiplicity": int(self.unit_multiplicity),
            "gap_radius": self.gap_radius,
            "isolation_delta": self.isolation_delta,
            "xi": None if self.xi is None else float(self.xi),
            "positive_cells": None
            if self.positive_cells is None
            else [int(c) for c in self.positive_cells],
            "negative_cells": None
            if self.negative_cells is None
            else [int(c) for c in self.negative_cells],
        }


def _sort_spectrum(w: np.ndarray, V: np.ndarray | None):
    order = np.lexsort((w.imag, -w.real, -np.abs(w)))
    return w[order], None if V is None else V[:, order]


def _merge(w: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    merged: list[list] = []
    for z in w:
        for entry in merged:
            if abs(z - entry[0]) < tol:
                entry[1] += 1
                break
        else:
            merged.append([complex(z), 1])
    return [(z, m) for z, m in merged]


def top_eigenvalues(
    P,
    k: int = 8,
    tol: float = 1e-9,
    unit_tol: float | None = None,
) -> SpectrumReport:
    """Top-k eigenvalues (by modulus) with left eigenvectors.

    Dense solve below n = 2048; implicitly restarted Arnoldi (ARPACK) above,
    with a dense fallback up to n = 16384 if Arnoldi breaks down.
    Eigenvalues closer than ``tol`` merge with multiplicity.
    """
    if k < 1 or k > 12:
        raise ValueError("k must be between 1 and 12")
    M = _matrix_of(P)
    n = M.shape[0]
    if unit_tol is None:
        perturbed = isinstance(P, TransferMatrix) and P.kind != "unperturbed"
        unit_tol = UNIT_TOL_PERTURBED if perturbed else UNIT_TOL_UNPERTURBED
    k_eff = min(k, n)

    def dense_solve():
        w, V = np.linalg.eig(M.toarray().T)
        return w, V

    if n < DENSE_LIMIT:
        w, V = dense_solve()
    else:
        try:
            w, V = eigs(M.T.tocsc(), k=k_eff, which="LM")
        except (ArpackNoConvergence, ArpackError):
            if n <= DENSE_FALLBACK_LIMIT:
                w, V = dense_solve()
            else:
                raise NumericalError(
                    f"Arnoldi failed and n = {n} is beyond the dense fallback bound"
                )
    w, V = _sort_spectrum(w, V)
    w, V = w[:k_eff], V[:, :k_eff]
    if np.any(np.abs(w) > 1.0 + 1e-8):
        raise NumericalError(f"eigenvalue modulus {np.abs(w).max()} exceeds 1 + 1e-8")
    unit_multiplicity = int(np.sum(np.abs(w - 1.0) < unit_tol))
    report = SpectrumReport(
        eigenvalues=w,
        merged=_merge(w, tol),
        unit_multiplicity=unit_multiplicity,
    )
    # stash the second eigenvector for the metastability reader
    outside = np.flatnonzero(np.abs(w - 1.0) >= unit_tol)
    if outside.size:
        report._second_idx = int(outside[0])
        report._vectors = V
    else:
        report._second_idx = None
        report._vectors = None
    return report


def _signed(v: np.ndarray) -> np.ndarray:
    v = np.real(v)
    i = int(np.argmax(np.abs(v)))
    if v[i] < 0:
        v = -v
    return v


def metastability_report(
    P,
    k: int = 8,
    gap_radius: float = DEFAULT_GAP_RADIUS,
    isolation_delta: float = DEFAULT_ISOLATION_DELTA,
    unit_tol: float = UNIT_TOL_PERTURBED,
) -> SpectrumReport:
    """Spectral metastability of a perturbed operator.

    Requires a simple unit eigenvalue.  If the second-largest modulus
    exceeds ``gap_radius`` the corresponding eigenvalue must be real and
    simple; it is reported as xi together with the sign sets of its left
    eigenvector (entries at float-dust level excluded, sign normalized so
    the largest-magnitude entry is positive).  If the whole non-unit
    spectrum sits inside the gap disk there is no metastable pair and xi is
    absent.
    """
    report = top_eigenvalues(P, k=k, unit_tol=unit_tol)
    report.gap_radius = gap_radius
    report.isolation_delta = isolation_delta
    if report.unit_multiplicity != 1:
        raise MetastabilityStructureError(
            f"unit eigenvalue multiplicity {report.unit_multiplicity} != 1 "
            "(no unique invariant density at this noise level)"
        )
    w = report.eigenvalues
    outside = np.flatnonzero(np.abs(w - 1.0) >= unit_tol)
    if outside.size == 0:
        return report
    i2 = int(outside[0])
    lam2 = w[i2]
    if abs(lam2) <= gap_radius:
        return report
    if abs(lam2.imag) > 1e-8:
        raise MetastabilityStructureError(
            f"second eigenvalue {lam2} outside the gap disk is not real"
        )
    near = np.sum(np.abs(w[outside] - lam2.real) < 1e-9)
    if near > 1:
        raise MetastabilityStructureError(
            f"second eigenvalue {lam2.real} is not simple (multiplicity {near})"
        )
    xi = float(lam2.real)
    if not (0.0 < xi < 1.0):
        raise MetastabilityStructureError(f"xi = {xi} outside (0, 1)")
    report.xi = xi
    V = report._vectors
    if V is not None:
        v = _signed(V[:, i2])
        cut = SIGN_DUST * np.abs(v).max()
        report.second_eigvec = v
        report.positive_cells = np.flatnonzero(v > cut)
        report.negative_cells = np.flatnonzero(v < -cut)
    return report
