"""Sum-product network decoder on the relay-error-augmented Tanner graph.

Variables are the data bits ``u_i``, the relay error bits ``e_j`` of
fallible slots and the coded symbols ``c_j``.  Each slot contributes one
parity factor ``c_j + sum_i G[i, j] u_i + e_j = 0``.  Leaf evidence enters
as variable priors: 0 for data bits, the reliability log-odds for error
bits and the matched-filter LLR for coded symbols.

Messages are LLRs ``log p(0)/p(1)``.  A prior of ``+inf`` is allowed and
pins a bit to 0; the box-plus below treats it as the identity element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detect import DetectorInput, PosteriorMarginals
from .errors import DimensionError
from .network import NetworkCode

DEFAULT_ITERATIONS = 4
PE_ZERO_LLR = np.inf


def boxplus(a, b):
    """Exact check-node combination of two LLRs.

    Equal to ``2 atanh(tanh(a/2) tanh(b/2))`` but computed in the
    Jacobian-logarithm form, which stays accurate for large magnitudes.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        s = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        x = np.abs(a + b)
        z = np.abs(a - b)
    x = np.where(np.isnan(x), np.inf, x)
    z = np.where(np.isnan(z), np.inf, z)
    return s + np.log1p(np.exp(-x)) - np.log1p(np.exp(-z))


@dataclass(frozen=True, eq=False)
class TannerGraph:
    code: NetworkCode
    error_slots: tuple[int, ...]
    var_names: tuple[str, ...]
    edge_check: np.ndarray
    edge_var: np.ndarray
    has_cycle: bool
    # checks grouped by degree: (degree, (num_checks, degree) edge ids)
    _groups: tuple[tuple[int, np.ndarray], ...] = field(repr=False)

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_edges(self) -> int:
        return self.edge_var.size

    def u_index(self, i: int) -> int:
        return i

    def e_index(self, j: int) -> int:
        return self.k + self.error_slots.index(j)

    def c_index(self, j: int) -> int:
        return self.k + len(self.error_slots) + j

    def check_neighbors(self, j: int) -> list[str]:
        return [self.var_names[v] for v in self.edge_var[self.edge_check == j]]

    def dump(self) -> str:
        """Adjacency-list text, one parity factor per line."""
        lines = [
            f"# tanner graph k={self.k} n={self.n} error_nodes="
            + ",".join(f"e{j + 1}" for j in self.error_slots)
            + f" cycles={'yes' if self.has_cycle else 'no'}"
        ]
        for j in range(self.n):
            lines.append(f"chk{j + 1}: " + " ".join(self.check_neighbors(j)))
        return "\n".join(lines) + "\n"


def _has_cycle(num_nodes: int, edges: list[tuple[int, int]]) -> bool:
    parent = list(range(num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return True
        parent[ra] = rb
    return False


def build_graph(code: NetworkCode, p_e=None) -> TannerGraph:
    """Tanner graph with error nodes on slots where ``p_e > 0``.

    ``p_e`` may be a length-n vector or a batch ``(B, n)``; a slot gets an
    error node when any round reports it fallible.  With ``p_e=None`` the
    structurally fallible slots of ``code`` are used.
    """
    if p_e is None:
        error_slots = code.fallible
    else:
        p = np.atleast_2d(np.asarray(p_e, dtype=float))
        if p.shape[1] != code.n:
            raise DimensionError(f"p_e has {p.shape[1]} slots, code has n={code.n}")
        error_slots = tuple(int(j) for j in np.nonzero(np.any(p > 0, axis=0))[0])
    k, n = code.k, code.n
    names = [f"u{i + 1}" for i in range(k)]
    names += [f"e{j + 1}" for j in error_slots]
    names += [f"c{j + 1}" for j in range(n)]
    a = code.G.to_array()
    edge_check, edge_var = [], []
    by_check: list[list[int]] = []
    for j in range(n):
        ids = []
        members = [int(i) for i in np.nonzero(a[:, j])[0]]
        if j in error_slots:
            members.append(k + error_slots.index(j))
        members.append(k + len(error_slots) + j)
        for var in members:
            ids.append(len(edge_var))
            edge_check.append(j)
            edge_var.append(var)
        by_check.append(ids)
    nv = len(names)
    cyc = _has_cycle(nv + n, [(v, nv + c) for c, v in zip(edge_check, edge_var)])
    groups: dict[int, list[list[int]]] = {}
    for ids in by_check:
        groups.setdefault(len(ids), []).append(ids)
    return TannerGraph(
        code=code,
        error_slots=error_slots,
        var_names=tuple(names),
        edge_check=np.asarray(edge_check, dtype=np.int64),
        edge_var=np.asarray(edge_var, dtype=np.int64),
        has_cycle=cyc,
        _groups=tuple((d, np.asarray(ids, dtype=np.int64)) for d, ids in sorted(groups.items())),
    )


@dataclass
class LlrState:
    priors: np.ndarray
    c2v: np.ndarray
    iteration: int = 0
    clamp: float | None = None


def error_llr(p_e) -> np.ndarray:
    """Log-odds ``ln((1 - p)/p)``; ``p = 0`` maps to ``PE_ZERO_LLR``."""
    p = np.asarray(p_e, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(p > 0, np.log1p(-p) - np.log(np.where(p > 0, p, 1.0)), PE_ZERO_LLR)


def observation_llr(y, h, n0: float) -> np.ndarray:
    return 4.0 * np.real(np.conj(np.asarray(h)) * np.asarray(y)) / n0


def init_llrs(graph: TannerGraph, y, h, n0: float, p_e, clamp: float | None = None) -> LlrState:
    y = np.atleast_2d(np.asarray(y, dtype=complex))
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    p = np.atleast_2d(np.asarray(p_e, dtype=float))
    B, n = y.shape
    if n != graph.n or h.shape != y.shape or p.shape != y.shape:
        raise DimensionError(f"inputs y{y.shape} h{h.shape} p_e{p.shape} do not match n={graph.n}")
    missing = [j + 1 for j in range(n) if j not in graph.error_slots and np.any(p[:, j] > 0)]
    if missing:
        raise DimensionError(f"slots {missing} have p_e > 0 but no error node in the graph")
    priors = np.zeros((B, graph.num_vars))
    nerr = len(graph.error_slots)
    if nerr:
        priors[:, graph.k : graph.k + nerr] = error_llr(p[:, list(graph.error_slots)])
    priors[:, graph.k + nerr :] = observation_llr(y, h, n0)
    if clamp is not None:
        priors = np.clip(priors, -clamp, clamp)
    return LlrState(priors=priors, c2v=np.zeros((B, graph.num_edges)), clamp=clamp)


def _extrinsic_boxplus(msgs: np.ndarray) -> np.ndarray:
    """For (..., d) messages return, per position, the box-plus of the others."""
    d = msgs.shape[-1]
    prefix = np.empty_like(msgs)
    suffix = np.empty_like(msgs)
    prefix[..., 0] = np.inf
    suffix[..., d - 1] = np.inf
    for t in range(1, d):
        prefix[..., t] = boxplus(prefix[..., t - 1], msgs[..., t - 1])
    for t in range(d - 2, -1, -1):
        suffix[..., t] = boxplus(suffix[..., t + 1], msgs[..., t + 1])
    return boxplus(prefix, suffix)


def _var_sums(graph: TannerGraph, c2v: np.ndarray) -> np.ndarray:
    sums = np.zeros((c2v.shape[0], graph.num_vars))
    np.add.at(sums.T, graph.edge_var, c2v.T)
    return sums


def iterate(graph: TannerGraph, state: LlrState) -> None:
    """One flooding iteration: all variable-to-check, then all check-to-variable updates."""
    sums = _var_sums(graph, state.c2v)
    v2c = state.priors[:, graph.edge_var] + (sums[:, graph.edge_var] - state.c2v)
    if state.clamp is not None:
        v2c = np.clip(v2c, -state.clamp, state.clamp)
    c2v = np.empty_like(state.c2v)
    for _, ids in graph._groups:
        c2v[:, ids] = _extrinsic_boxplus(v2c[:, ids])
    if state.clamp is not None:
        c2v = np.clip(c2v, -state.clamp, state.clamp)
    state.c2v = c2v
    state.iteration += 1


def posterior_llrs(graph: TannerGraph, state: LlrState) -> np.ndarray:
    sums = _var_sums(graph, state.c2v)
    return state.priors + sums


def decode(graph: TannerGraph, state: LlrState, max_iters: int = DEFAULT_ITERATIONS) -> PosteriorMarginals:
    """Run ``max_iters`` flooding iterations (no early stopping) and read out the data bits."""
    for _ in range(max_iters):
        iterate(graph, state)
    return PosteriorMarginals(posterior_llrs(graph, state)[:, : graph.k])


def sumprod_detect(
    inp: DetectorInput,
    max_iters: int = DEFAULT_ITERATIONS,
    clamp: float | None = None,
    graph: TannerGraph | None = None,
) -> PosteriorMarginals:
    """Detector-interface wrapper: build (or reuse) the graph, initialize, decode."""
    if graph is None:
        slots = set(inp.code.fallible) | set(np.nonzero(np.any(inp.p_e > 0, axis=0))[0].tolist())
        mask = np.zeros(inp.code.n)
        mask[sorted(slots)] = 1.0
        graph = build_graph(inp.code, mask)
    state = init_llrs(graph, inp.y, inp.h, inp.n0, inp.p_e, clamp=clamp)
    return decode(graph, state, max_iters)
