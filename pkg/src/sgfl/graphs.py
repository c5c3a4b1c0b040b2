"""Graphs, Laplacians, spectra, and random edge sampling.

An undirected weighted graph carries one activation probability per edge.
Random realizations keep each edge independently with its probability
(the sampled graphs are subgraphs of the underlying one).  Laplacian
variants, their spectral decompositions, and the expected Laplacian of the
sampling process are all built here.

Laplacian kinds
---------------
``DISCRETE``                    D - W
``NORMALIZED``                  I - D^{-1/2} W D^{-1/2}
``TRANSLATED_DISCRETE``         (D - W) - (lambda_max / 2) I
``TRANSLATED_NORMALIZED``       (I - D^{-1/2} W D^{-1/2}) - I
``SCALED_TRANSLATED_DISCRETE``  (1 / lambda_max)(D - W) - 0.5 I

For the translated/scaled discrete kinds the shift and scale are frozen
from the underlying graph; realization matrices reuse them.  Normalized
kinds recompute degrees on each realization, and a node isolated within a
realization gets a zero row in the (untranslated) normalized Laplacian.
"""

import enum
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse.csgraph

from .rng import substream

__all__ = [
    "Graph",
    "LaplacianKind",
    "LaplacianSpec",
    "Spectrum",
    "EigendecompositionError",
    "NoClosedFormError",
    "generate_geometric_graph",
    "build_laplacian",
    "spectral_decompose",
    "gft",
    "inverse_gft",
    "sample_res",
    "res_laplacian",
    "expected_laplacian",
    "kind_lambda_range",
    "write_graph",
    "read_graph",
]

_SYMMETRY_TOL = 1e-12
_ORTHO_TOL = 1e-10
_RECON_TOL = 1e-8
_SIGN_TOL = 1e-9


class LaplacianKind(enum.Enum):
    DISCRETE = "discrete"
    NORMALIZED = "normalized"
    TRANSLATED_DISCRETE = "translated_discrete"
    TRANSLATED_NORMALIZED = "translated_normalized"
    SCALED_TRANSLATED_DISCRETE = "scaled_translated_discrete"

    @property
    def is_discrete_family(self) -> bool:
        return self in (
            LaplacianKind.DISCRETE,
            LaplacianKind.TRANSLATED_DISCRETE,
            LaplacianKind.SCALED_TRANSLATED_DISCRETE,
        )

    @property
    def is_normalized_family(self) -> bool:
        return not self.is_discrete_family


class EigendecompositionError(RuntimeError):
    """Symmetric eigensolver failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoClosedFormError(ValueError):
    """Requested an analytic expectation that has no closed form."""


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph with per-edge activation probabilities.

    Edges are stored once per unordered pair as parallel arrays
    ``(edge_i, edge_j, weights, probs)`` with ``edge_i < edge_j``.
    """

    n_nodes: int
    edge_i: np.ndarray
    edge_j: np.ndarray
    weights: np.ndarray
    probs: np.ndarray
    node_positions: np.ndarray | None = None
    connected: bool | None = None

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        ei = np.asarray(self.edge_i, dtype=np.intp)
        ej = np.asarray(self.edge_j, dtype=np.intp)
        w = np.asarray(self.weights, dtype=np.float64)
        p = np.asarray(self.probs, dtype=np.float64)
        if not (ei.shape == ej.shape == w.shape == p.shape):
            raise ValueError("edge arrays must have identical length")
        if np.any(ei == ej):
            raise ValueError("self loops are not allowed")
        # canonical order i < j, one row per unordered pair
        lo = np.minimum(ei, ej)
        hi = np.maximum(ei, ej)
        if np.any(lo < 0) or np.any(hi >= self.n_nodes):
            raise ValueError("edge endpoint out of range")
        keys = lo * self.n_nodes + hi
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate edges")
        if np.any(w <= 0):
            raise ValueError("edge weights must be positive")
        if np.any((p <= 0) | (p > 1)):
            raise ValueError("activation probabilities must lie in (0, 1]")
        object.__setattr__(self, "edge_i", lo)
        object.__setattr__(self, "edge_j", hi)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "probs", p)
        if self.node_positions is not None:
            pos = np.asarray(self.node_positions, dtype=np.float64)
            if pos.shape != (self.n_nodes, 2):
                raise ValueError("node_positions must have shape (n_nodes, 2)")
            object.__setattr__(self, "node_positions", pos)

    @property
    def n_edges(self) -> int:
        return len(self.edge_i)

    def with_uniform_p(self, p: float) -> "Graph":
        """Copy of the graph with every activation probability set to ``p``."""
        return replace(self, probs=np.full(self.n_edges, float(p)))

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n_nodes, self.n_nodes))
        W[self.edge_i, self.edge_j] = self.weights
        W[self.edge_j, self.edge_i] = self.weights
        return W

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def is_connected(self) -> bool:
        M = self.n_edges
        data = np.ones(M)
        adj = scipy.sparse.coo_matrix(
            (data, (self.edge_i, self.edge_j)), shape=(self.n_nodes, self.n_nodes)
        )
        n_comp, _ = scipy.sparse.csgraph.connected_components(adj, directed=False)
        return int(n_comp) == 1


@dataclass(frozen=True)
class LaplacianSpec:
    """A Laplacian variant of an underlying graph, with its spectral bound.

    ``rho`` upper-bounds the spectral norm of the matrix and of every
    realization matrix of the same kind.  ``edge_scale`` and ``diag_shift``
    reconstruct discrete-family matrices as
    ``edge_scale * (D - W) - diag_shift * I``; they are frozen from the
    underlying graph so realization matrices share the same translation.
    """

    kind: LaplacianKind
    matrix: np.ndarray
    lambda_min: float
    lambda_max: float
    rho: float
    edge_scale: float
    diag_shift: float

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("Laplacian matrix must be square")
        if np.max(np.abs(A - A.T)) > _SYMMETRY_TOL:
            raise ValueError("Laplacian matrix must be symmetric")
        object.__setattr__(self, "matrix", A)

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Spectrum:
    """Eigenpairs of a symmetric Laplacian: ascending eigenvalues and an
    orthonormal eigenvector matrix (columns are the graph Fourier basis)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        V = np.asarray(self.eigenvectors, dtype=np.float64)
        n = len(lam)
        if V.shape != (n, n):
            raise ValueError("eigenvector matrix shape mismatch")
        if np.any(np.diff(lam) < -1e-12):
            raise ValueError("eigenvalues must be ascending")
        if np.max(np.abs(V.T @ V - np.eye(n))) > _ORTHO_TOL:
            raise ValueError("eigenvectors are not orthonormal")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", V)

    @property
    def n_nodes(self) -> int:
        return len(self.eigenvalues)


def generate_geometric_graph(n: int, radius_fraction: float, rng_seed: int) -> Graph:
    """Random geometric graph: ``n`` nodes uniform in the unit square,
    unit-weight edge wherever the distance is at most
    ``radius_fraction * sqrt(2)`` (fraction of the square's diameter).

    All activation probabilities start at 1.  A disconnected result is
    returned as-is with ``connected=False``; it is never regenerated.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not (0 < radius_fraction <= 1):
        raise ValueError("radius_fraction must lie in (0, 1]")
    rng = substream(rng_seed)
    pos = rng.random((n, 2))
    diff = pos[:, None, :] - pos[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    thresh2 = (radius_fraction * np.sqrt(2.0)) ** 2
    iu, ju = np.triu_indices(n, k=1)
    keep = dist2[iu, ju] <= thresh2
    ei, ej = iu[keep], ju[keep]
    g = Graph(
        n_nodes=n,
        edge_i=ei,
        edge_j=ej,
        weights=np.ones(len(ei)),
        probs=np.ones(len(ei)),
        node_positions=pos,
    )
    return replace(g, connected=g.is_connected())


def _discrete_laplacian(g: Graph, weights: np.ndarray) -> np.ndarray:
    n = g.n_nodes
    L = np.zeros((n, n))
    np.add.at(L, (g.edge_i, g.edge_j), -weights)
    np.add.at(L, (g.edge_j, g.edge_i), -weights)
    deg = np.zeros(n)
    np.add.at(deg, g.edge_i, weights)
    np.add.at(deg, g.edge_j, weights)
    L[np.diag_indices(n)] = deg
    return L


def _normalized_from_adjacency(W: np.ndarray) -> np.ndarray:
    """Normalized Laplacian with unit diagonal for every node.

    An isolated node keeps diagonal 1, so after translation its row is
    exactly zero: a node with no active neighbors contributes an empty
    neighbor sum in the node-local recursions.
    """
    deg = W.sum(axis=1)
    present = deg > 0
    inv_sqrt = np.zeros_like(deg)
    inv_sqrt[present] = 1.0 / np.sqrt(deg[present])
    A = -inv_sqrt[:, None] * W * inv_sqrt[None, :]
    A[np.diag_indices(len(deg))] = 1.0
    return A


def build_laplacian(g: Graph, kind: LaplacianKind) -> LaplacianSpec:
    """Construct the requested Laplacian variant of ``g``.

    ``rho`` is the class-wide spectral bound: 2 for the normalized kind and
    1 for its translation; for the discrete family it comes from the
    computed extremal eigenvalues of the underlying graph.
    """
    if g.n_edges == 0:
        raise ValueError("graph has no edges")
    kind = LaplacianKind(kind)
    L_d = _discrete_laplacian(g, g.weights)
    if kind.is_discrete_family:
        w = np.linalg.eigvalsh(L_d)
        lam_max = float(w[-1])
        if kind is LaplacianKind.DISCRETE:
            scale, shift = 1.0, 0.0
        elif kind is LaplacianKind.TRANSLATED_DISCRETE:
            scale, shift = 1.0, lam_max / 2.0
        else:  # SCALED_TRANSLATED_DISCRETE
            scale, shift = 1.0 / lam_max, 0.5
        A = scale * L_d - shift * np.eye(g.n_nodes)
        lo = float(scale * w[0] - shift)
        hi = float(scale * w[-1] - shift)
        rho = max(abs(lo), abs(hi))
    else:
        if np.any(g.degrees() == 0):
            raise ValueError("isolated node: normalized Laplacian undefined")
        A = _normalized_from_adjacency(g.adjacency())
        scale = 1.0
        if kind is LaplacianKind.TRANSLATED_NORMALIZED:
            shift, rho = 1.0, 1.0
            A = A - np.eye(g.n_nodes)
        else:
            shift, rho = 0.0, 2.0
        w = np.linalg.eigvalsh(A)
        lo, hi = float(w[0]), float(w[-1])
    return LaplacianSpec(
        kind=kind,
        matrix=A,
        lambda_min=lo,
        lambda_max=hi,
        rho=rho,
        edge_scale=scale,
        diag_shift=shift,
    )


def kind_lambda_range(spec: LaplacianSpec) -> tuple[float, float]:
    """Frequency band a universal filter should be designed on.

    Normalized kinds use the kind-wide band ([0, 2], or [-1, 1] when
    translated); discrete kinds use the computed extremes of the graph.
    """
    if spec.kind is LaplacianKind.NORMALIZED:
        return (0.0, 2.0)
    if spec.kind is LaplacianKind.TRANSLATED_NORMALIZED:
        return (-1.0, 1.0)
    return (spec.lambda_min, spec.lambda_max)


def spectral_decompose(lap: LaplacianSpec) -> Spectrum:
    """Eigendecomposition with a deterministic sign convention: the first
    entry of each eigenvector larger than 1e-9 in magnitude is positive."""
    A = lap.matrix
    try:
        lam, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        off = A - np.diag(np.diag(A))
        raise EigendecompositionError(
            f"eigensolver failed to converge: {exc}",
            residual=float(np.linalg.norm(off)),
        ) from exc
    for c in range(V.shape[1]):
        col = V[:, c]
        idx = np.argmax(np.abs(col) > _SIGN_TOL)
        if col[idx] < 0:
            V[:, c] = -col
    recon = np.max(np.abs(V @ np.diag(lam) @ V.T - A))
    if recon > _RECON_TOL:
        raise EigendecompositionError(
            "eigendecomposition reconstruction residual too large",
            residual=float(recon),
        )
    return Spectrum(eigenvalues=lam, eigenvectors=V)


def gft(spec: Spectrum, x: np.ndarray) -> np.ndarray:
    """Forward graph Fourier transform (projection on the eigenbasis)."""
    x = np.asarray(x)
    if x.shape[-1] != spec.n_nodes:
        raise ValueError("signal length does not match spectrum size")
    return x @ spec.eigenvectors


def inverse_gft(spec: Spectrum, xhat: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform."""
    xhat = np.asarray(xhat)
    if xhat.shape[-1] != spec.n_nodes:
        raise ValueError("coefficient length does not match spectrum size")
    return xhat @ spec.eigenvectors.T


def sample_res(g: Graph, rng: np.random.Generator) -> Graph:
    """One random-edge-sampling realization: each edge is kept
    independently with its activation probability.  Weights, probabilities
    and the node set are unchanged; isolated nodes are permitted."""
    mask = rng.random(g.n_edges) < g.probs
    return Graph(
        n_nodes=g.n_nodes,
        edge_i=g.edge_i[mask],
        edge_j=g.edge_j[mask],
        weights=g.weights[mask],
        probs=g.probs[mask],
        node_positions=g.node_positions,
    )


def res_mask(g: Graph, rng: np.random.Generator) -> np.ndarray:
    """Boolean keep-mask over the edges of ``g`` for one realization."""
    return rng.random(g.n_edges) < g.probs


def res_laplacian(g: Graph, spec: LaplacianSpec, mask: np.ndarray) -> np.ndarray:
    """Laplacian matrix of the realization selected by ``mask``, with the
    translation/scale of ``spec`` (discrete family) or realization degrees
    (normalized family, zero rows for isolated nodes)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (g.n_edges,):
        raise ValueError("mask length does not match edge count")
    if spec.kind.is_discrete_family:
        L = _discrete_laplacian(g, np.where(mask, g.weights, 0.0))
        return spec.edge_scale * L - spec.diag_shift * np.eye(g.n_nodes)
    W = np.zeros((g.n_nodes, g.n_nodes))
    kw = np.where(mask, g.weights, 0.0)
    W[g.edge_i, g.edge_j] = kw
    W[g.edge_j, g.edge_i] = kw
    A = _normalized_from_adjacency(W)
    if spec.kind is LaplacianKind.TRANSLATED_NORMALIZED:
        A = A - np.eye(g.n_nodes)
    return A


def expected_laplacian(
    g: Graph,
    kind: LaplacianKind,
    mode: str = "analytic",
    n_samples: int = 1000,
    seed: int = 0,
) -> np.ndarray:
    """Expected Laplacian of the edge-sampling process.

    ``analytic`` is exact for the discrete family (entrywise expectation
    scales each edge by its probability); the normalized family has no
    closed form and must use ``monte_carlo``, which averages over
    ``n_samples`` independent realizations drawn from stream ``(seed,)``.
    """
    kind = LaplacianKind(kind)
    spec = build_laplacian(g, kind)
    if mode == "analytic":
        if not kind.is_discrete_family:
            raise NoClosedFormError(
                "no closed form for the expected normalized Laplacian"
            )
        L = _discrete_laplacian(g, g.probs * g.weights)
        return spec.edge_scale * L - spec.diag_shift * np.eye(g.n_nodes)
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    return _mc_expected_laplacian(g, spec, n_samples, seed)


def _mc_expected_laplacian(
    g: Graph, spec: LaplacianSpec, n_samples: int, seed: int
) -> np.ndarray:
    n, M = g.n_nodes, g.n_edges
    ei, ej, w = g.edge_i, g.edge_j, g.weights
    rng = substream(seed)
    off_sum = np.zeros(M)  # sum over samples of the (i, j) entry per edge
    diag_sum = np.zeros(n)
    chunk = max(1, min(n_samples, 65536))
    done = 0
    normalized = spec.kind.is_normalized_family
    incidence = None
    if normalized:
        incidence = np.zeros((M, n))
        incidence[np.arange(M), ei] = 1.0
        incidence[np.arange(M), ej] = 1.0
    while done < n_samples:
        s = min(chunk, n_samples - done)
        b = rng.random((s, M)) < g.probs
        bw = b * w
        if normalized:
            deg = bw @ incidence
            inv_sqrt = np.zeros_like(deg)
            np.divide(1.0, np.sqrt(deg, where=deg > 0), out=inv_sqrt, where=deg > 0)
            off_sum += (-bw * inv_sqrt[:, ei] * inv_sqrt[:, ej]).sum(axis=0)
            diag_sum += float(s)  # unit diagonal regardless of isolation
        else:
            off_sum += (-bw).sum(axis=0)
            dsum = np.zeros(n)
            np.add.at(dsum, ei, bw.sum(axis=0))
            np.add.at(dsum, ej, bw.sum(axis=0))
            diag_sum += dsum
        done += s
    A = np.zeros((n, n))
    A[ei, ej] = off_sum / n_samples
    A[ej, ei] = off_sum / n_samples
    A[np.diag_indices(n)] = diag_sum / n_samples
    if spec.kind.is_discrete_family:
        return spec.edge_scale * A - spec.diag_shift * np.eye(n)
    if spec.kind is LaplacianKind.TRANSLATED_NORMALIZED:
        return A - np.eye(n)
    return A


# ---------------------------------------------------------------------------
# plain-text edge-list serialization
# ---------------------------------------------------------------------------

def write_graph(g: Graph, path, comments: list[str] | None = None) -> None:
    """Write the edge-list format: optional ``#`` comment block, a
    ``nodes N`` header, optional ``pos i x y`` lines, then one
    ``i j weight p`` line per edge (LF endings, 17 significant digits)."""
    lines = []
    for c in comments or []:
        lines.append(f"# {c}")
    lines.append(f"nodes {g.n_nodes}")
    if g.node_positions is not None:
        for i, (x, y) in enumerate(g.node_positions):
            lines.append(f"pos {i} {x:.17g} {y:.17g}")
    for i, j, w, p in zip(g.edge_i, g.edge_j, g.weights, g.probs):
        lines.append(f"{i} {j} {w:.17g} {p:.17g}")
    data = "\n".join(lines) + "\n"
    with open(path, "w", newline="\n") as fh:
        fh.write(data)


def read_graph(path) -> Graph:
    """Read the edge-list format written by :func:`write_graph`."""
    n_nodes = None
    posnum = {}
    edges = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "nodes":
                n_nodes = int(parts[1])
            elif parts[0] == "pos":
                posnum[int(parts[1])] = (float(parts[2]), float(parts[3]))
            else:
                i, j = int(parts[0]), int(parts[1])
                w, p = float(parts[2]), float(parts[3])
                edges.append((i, j, w, p))
    if n_nodes is None:
        raise ValueError("missing 'nodes N' header")
    positions = None
    if posnum:
        positions = np.zeros((n_nodes, 2))
        for i, (x, y) in posnum.items():
            positions[i] = (x, y)
    arr = np.array(edges, dtype=np.float64).reshape(-1, 4)
    return Graph(
        n_nodes=n_nodes,
        edge_i=arr[:, 0].astype(np.intp),
        edge_j=arr[:, 1].astype(np.intp),
        weights=arr[:, 2],
        probs=arr[:, 3],
        node_positions=positions,
    )
