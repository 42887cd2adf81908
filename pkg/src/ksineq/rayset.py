"""Ray sets, their orthogonality graphs, and the orthogonal bases they contain.

Rays are stored normalized.  Indices are 0-based internally; anything that
faces a user (file formats, expression text, CLI output) is 1-based so that
index ``i`` lines up with the observable ``P<i+1>``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable

import numpy as np

NORM_TOLERANCE = 1e-12
DEFAULT_ORTHO_TOLERANCE = 1e-9


class RaySetError(ValueError):
    """Raised when a ray set fails validation or cannot be loaded."""


class VectorsRequiredError(RaySetError):
    """Raised when an operation needs ray vectors but only a graph was given."""


@dataclass(frozen=True)
class Ray:
    components: tuple[complex, ...]
    name: str | None = None

    @classmethod
    def from_components(cls, components: Iterable, name: str | None = None) -> "Ray":
        vec = np.asarray(list(components), dtype=complex)
        norm = float(np.linalg.norm(vec))
        if vec.size == 0 or norm <= NORM_TOLERANCE:
            raise RaySetError(f"ray {name!r} is the zero vector" if name else "zero ray")
        vec = vec / norm
        return cls(tuple(complex(c) for c in vec), name)

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.components, dtype=complex)

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.components)


@dataclass(frozen=True)
class OrthogonalityGraph:
    vertex_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for i, j in self.edges:
            if not (0 <= i < j < self.vertex_count):
                raise RaySetError(f"bad edge ({i + 1}, {j + 1})")

    def has_edge(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self) -> list[set[int]]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return adj


@dataclass(frozen=True)
class BasisList:
    bases: tuple[tuple[int, ...], ...]

    @property
    def L(self) -> int:
        return len(self.bases)

    def __iter__(self):
        return iter(self.bases)

    def __len__(self) -> int:
        return len(self.bases)

    def one_based(self) -> list[list[int]]:
        return [[k + 1 for k in basis] for basis in self.bases]


@dataclass(frozen=True)
class RaySet:
    """An ordered set of rays in ``dim`` dimensions.

    ``rays`` is None for graph-only ray sets, which carry ``graph_edges``
    instead.  Classical computations work on either kind; anything that
    needs operators raises :class:`VectorsRequiredError` on graph-only sets.
    """

    dim: int
    rays: tuple[Ray, ...] | None
    ortho_tolerance: float = DEFAULT_ORTHO_TOLERANCE
    source: str = ""
    vertex_count: int = 0
    graph_edges: frozenset[tuple[int, int]] | None = None
    names: tuple[str | None, ...] = field(default=())

    def __post_init__(self):
        if self.dim < 1:
            raise RaySetError("dimension must be a positive integer")
        if self.rays is not None:
            object.__setattr__(self, "vertex_count", len(self.rays))
            if not self.names:
                object.__setattr__(self, "names", tuple(r.name for r in self.rays))
        if self.vertex_count < 1:
            raise RaySetError("a ray set needs at least one ray")
        if self.rays is not None:
            self._validate_vectors()

    def _validate_vectors(self):
        for k, ray in enumerate(self.rays):
            if ray.dim != self.dim:
                raise RaySetError(
                    f"ray {k + 1} has dimension {ray.dim}, expected {self.dim}"
                )
        gram = np.abs(self.gram())
        for i, j in combinations(range(self.vertex_count), 2):
            if gram[i, j] >= 1 - self.ortho_tolerance:
                raise RaySetError(f"rays {i + 1} and {j + 1} are parallel (duplicate ray)")

    @property
    def mu(self) -> int:
        return self.vertex_count

    @property
    def has_vectors(self) -> bool:
        return self.rays is not None

    def require_vectors(self) -> tuple[Ray, ...]:
        if self.rays is None:
            raise VectorsRequiredError(
                f"ray set {self.source or '<graph>'} is graph-only; vectors required"
            )
        return self.rays

    def matrix(self) -> np.ndarray:
        """Rays as rows of a ``(mu, dim)`` complex array."""
        return np.array([r.components for r in self.require_vectors()], dtype=complex)

    def gram(self) -> np.ndarray:
        m = self.matrix()
        return m.conj() @ m.T

    def to_json(self) -> dict:
        doc: dict = {"dim": self.dim, "tolerance": self.ortho_tolerance}
        if self.rays is None:
            doc["graph"] = {
                "vertices": self.vertex_count,
                "edges": [[i + 1, j + 1] for i, j in sorted(self.graph_edges or ())],
            }
            return doc
        rays = []
        for k, ray in enumerate(self.rays):
            if ray.is_real:
                v = [c.real for c in ray.components]
            else:
                v = [[c.real, c.imag] for c in ray.components]
            rays.append({"name": ray.name or f"P{k + 1}", "v": v})
        doc["rays"] = rays
        return doc


def _parse_component(raw) -> complex:
    if isinstance(raw, bool):
        raise RaySetError(f"bad vector component {raw!r}")
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, (list, tuple)) and len(raw) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw
    ):
        return complex(raw[0], raw[1])
    raise RaySetError(f"bad vector component {raw!r}")


def rayset_from_json(doc: dict, source: str = "", tolerance: float | None = None) -> RaySet:
    """Build a validated :class:`RaySet` from the JSON document format."""
    if not isinstance(doc, dict) or "dim" not in doc:
        raise RaySetError("malformed ray-set document: missing 'dim'")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise RaySetError("malformed ray-set document: 'dim' must be a positive integer")
    tol = tolerance if tolerance is not None else doc.get("tolerance", DEFAULT_ORTHO_TOLERANCE)
    if not isinstance(tol, (int, float)) or not (0 <= tol < 1):
        raise RaySetError("malformed ray-set document: bad tolerance")
    if "rays" in doc:
        rays_doc = doc["rays"]
        if not isinstance(rays_doc, list) or not rays_doc:
            raise RaySetError("malformed ray-set document: 'rays' must be a non-empty list")
        rays = []
        for k, entry in enumerate(rays_doc):
            if isinstance(entry, dict):
                name, v = entry.get("name"), entry.get("v")
            else:
                name, v = None, entry
            if not isinstance(v, list):
                raise RaySetError(f"malformed ray {k + 1}: missing vector")
            if len(v) != dim:
                raise RaySetError(f"ray {k + 1} has dimension {len(v)}, expected {dim}")
            rays.append(Ray.from_components((_parse_component(c) for c in v), name))
        return RaySet(dim, tuple(rays), float(tol), source)
    if "graph" in doc:
        g = doc["graph"]
        try:
            mu = g["vertices"]
            raw_edges = g["edges"]
        except (TypeError, KeyError):
            raise RaySetError("malformed graph: need 'vertices' and 'edges'") from None
        if not isinstance(mu, int) or mu < 1:
            raise RaySetError("malformed graph: 'vertices' must be a positive integer")
        edges = set()
        for e in raw_edges:
            if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
                raise RaySetError(f"malformed edge {e!r}")
            i, j = e[0] - 1, e[1] - 1
            if i == j or not (0 <= i < mu and 0 <= j < mu):
                raise RaySetError(f"bad edge {e!r}")
            edges.add((min(i, j), max(i, j)))
        return RaySet(dim, None, float(tol), source, vertex_count=mu,
                      graph_edges=frozenset(edges))
    raise RaySetError("malformed ray-set document: need 'rays' or 'graph'")


def load_rayset(path_or_name: str | Path, tolerance: float | None = None) -> RaySet:
    """Load a corpus entry by key, or a ray-set JSON file by path."""
    from . import corpus

    key = str(path_or_name)
    if key in corpus.CORPUS:
        doc = corpus.corpus_document(key)
        return rayset_from_json(doc, source=key, tolerance=tolerance)
    path = Path(key)
    if not path.is_file():
        raise RaySetError(f"no corpus entry or file named {key!r}")
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RaySetError(f"cannot read {key}: {exc}") from exc
    return rayset_from_json(doc, source=key, tolerance=tolerance)


def build_orthogonality_graph(rayset: RaySet) -> OrthogonalityGraph:
    if rayset.rays is None:
        return OrthogonalityGraph(rayset.vertex_count, frozenset(rayset.graph_edges or ()))
    gram = np.abs(rayset.gram())
    edges = frozenset(
        (i, j)
        for i, j in combinations(range(rayset.mu), 2)
        if gram[i, j] <= rayset.ortho_tolerance
    )
    return OrthogonalityGraph(rayset.mu, edges)


def enumerate_bases(graph: OrthogonalityGraph, n: int) -> BasisList:
    """All cliques of exactly ``n`` vertices, sorted canonically.

    Candidates are extended in increasing index order, so each clique is
    produced once and already sorted.  In ``n`` dimensions
    ``n`` mutually orthogonal rays span the space, so these are exactly the
    orthogonal bases.
    """
    adj = graph.neighbors()
    found: list[tuple[int, ...]] = []

    def expand(clique: list[int], cand: list[int]):
        if len(clique) == n:
            found.append(tuple(clique))
            return
        for pos, v in enumerate(cand):
            rest = cand[pos + 1:]
            if len(clique) + 1 + len(rest) < n:
                break
            expand(clique + [v], [u for u in rest if u in adj[v]])

    if n >= 1:
        expand([], list(range(graph.vertex_count)))
    return BasisList(tuple(sorted(found)))


def rayset_summary(rayset: RaySet) -> tuple[OrthogonalityGraph, BasisList]:
    graph = build_orthogonality_graph(rayset)
    return graph, enumerate_bases(graph, rayset.dim)
