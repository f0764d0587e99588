"""
Latent-action Monte Carlo tree search over the mapping x mode space
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from src.search.evaluators import Evaluation, Evaluator
from src.search.partition import HalfSpace, fit_boundary, kmeans_bipartition
from src.search.space import SearchPoint, SearchSpace
from src.search.value import NEG_INF, ValueWeights, is_feasible
from src.utils.errors import ConfigurationError, NoFeasibleMappingError, SplitRefusedError
from src.utils.logger import setup_logger

SAMPLERS = ("auto", "enumerate", "sample")
MAX_TREE_DEPTH = 8

logger = setup_logger("search.lamcts")


@dataclass(frozen=True)
class SearchBudget:
    max_evaluations: int = 64
    leaf_size: int = 20
    exploration: float = math.sqrt(2)
    batch_size: int = 8
    max_retries: int = 200
    enumeration_threshold: int = 500
    sampler: str = "auto"

    def __post_init__(self):
        for name in ("max_evaluations", "leaf_size", "batch_size", "max_retries"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"SearchBudget.{name} must be positive")
        if self.exploration <= 0:
            raise ConfigurationError("SearchBudget.exploration must be positive")
        if self.sampler not in SAMPLERS:
            raise ConfigurationError(f"Unknown sampler '{self.sampler}'; use one of {SAMPLERS}")


@dataclass(eq=False)
class SearchNode:
    """A region of the space; children split its samples by a learned half-space"""

    indices: np.ndarray
    depth: int = 0
    parent: Optional["SearchNode"] = None
    side: bool = True  # which side of the parent's boundary this node lies on
    boundary: Optional[HalfSpace] = None
    children: Tuple["SearchNode", ...] = ()

    @property
    def visits(self) -> int:
        return int(self.indices.size)

    def is_leaf(self) -> bool:
        return not self.children

    def constraints(self) -> List[Tuple[HalfSpace, bool]]:
        node, path = self, []
        while node.parent is not None:
            path.append((node.parent.boundary, node.side))
            node = node.parent
        return path

    def admits(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(features)
        inside = np.ones(features.shape[0], dtype=bool)
        for boundary, side in self.constraints():
            inside &= boundary.contains(features) == side
        return inside


def rank_key(evaluation: Evaluation) -> Tuple:
    """Higher value first, then lower power, then mapping order"""
    return (-evaluation.value, evaluation.power, evaluation.point.key())


@dataclass(frozen=True)
class SearchResult:
    best: Evaluation
    evaluations: int
    trace: Tuple[Tuple[int, float], ...] = ()
    ranked: Tuple[Evaluation, ...] = field(default=(), repr=False)

    @property
    def point(self) -> SearchPoint:
        return self.best.point

    @property
    def value(self) -> float:
        return self.best.value

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.trace), columns=["evaluations", "best_value"])


def _finish(evaluated: Sequence[Evaluation], trace: Sequence[Tuple[int, float]]) -> SearchResult:
    feasible = sorted((e for e in evaluated if is_feasible(e.value)), key=rank_key)
    if not feasible:
        raise NoFeasibleMappingError(
            f"All {len(evaluated)} evaluated candidates violate the power filter",
            evaluations=len(evaluated),
        )
    return SearchResult(
        best=feasible[0], evaluations=len(evaluated), trace=tuple(trace), ranked=tuple(feasible)
    )


def exhaustive_search(
    points: Sequence[SearchPoint], evaluator: Evaluator, weights: ValueWeights
) -> SearchResult:
    """Score every point in one batch"""
    evaluated = evaluator.evaluate(list(points), weights)
    trace, best = [], NEG_INF
    for count, evaluation in enumerate(evaluated, start=1):
        best = max(best, evaluation.value)
        trace.append((count, best))
    return _finish(evaluated, trace)


class LaMctsSearch:
    """
    Iterates: rebuild the region tree from all samples, descend by UCB to a
    leaf, draw a batch inside the leaf's region, evaluate it.
    """

    def __init__(
        self,
        space: SearchSpace,
        evaluator: Evaluator,
        weights: ValueWeights,
        budget: SearchBudget,
        rng: np.random.Generator,
    ):
        self.space = space
        self.evaluator = evaluator
        self.weights = weights
        self.budget = budget
        self.rng = rng
        self.logger = logger

        self.evaluated: List[Evaluation] = []
        self.features: List[np.ndarray] = []
        self.seen: Set[Tuple] = set()
        self.best: Optional[Evaluation] = None
        self.trace: List[Tuple[int, float]] = []

        self.pool: List[SearchPoint] = []
        self.pool_features = np.empty((0, 0))
        self.pool_alive = np.zeros(0, dtype=bool)
        self.pool_index: Dict[Tuple, int] = {}

    def _use_enumeration(self) -> bool:
        if self.budget.sampler == "enumerate":
            return True
        if self.budget.sampler == "sample":
            return False
        return self.space.size() <= self.budget.enumeration_threshold

    def _load_pool(self) -> None:
        cap = max(self.budget.enumeration_threshold, self.space.size())
        points = list(self.space.enumerate(cap=cap))
        order = self.rng.permutation(len(points))
        self.pool = [points[i] for i in order]
        self.pool_features = np.vstack([self.space.features(p) for p in self.pool])
        self.pool_alive = np.ones(len(self.pool), dtype=bool)
        self.pool_index = {p.key(): i for i, p in enumerate(self.pool)}

    def _record(self, points: Sequence[SearchPoint]) -> None:
        for evaluation in self.evaluator.evaluate(points, self.weights):
            key = evaluation.point.key()
            self.evaluated.append(evaluation)
            self.features.append(self.space.features(evaluation.point))
            self.seen.add(key)
            if self.pool:
                index = self.pool_index.get(key)
                if index is not None:
                    self.pool_alive[index] = False
            if is_feasible(evaluation.value) and (
                self.best is None or rank_key(evaluation) < rank_key(self.best)
            ):
                self.best = evaluation
            self.trace.append((len(self.evaluated), self.best.value if self.best else NEG_INF))

    def _build_tree(self) -> SearchNode:
        values = np.array([e.value for e in self.evaluated])
        features = np.vstack(self.features)
        root = SearchNode(indices=np.arange(len(self.evaluated)))
        stack = [root]
        while stack:
            node = stack.pop()
            if node.visits < self.budget.leaf_size or node.depth >= MAX_TREE_DEPTH:
                continue
            local = features[node.indices]
            try:
                good, bad = kmeans_bipartition(local, values[node.indices], self.rng)
                boundary = fit_boundary(local[good], local[bad])
            except SplitRefusedError:
                continue
            inside = boundary.contains(local)
            if inside.all() or not inside.any():
                continue
            node.boundary = boundary
            node.children = (
                SearchNode(node.indices[inside], node.depth + 1, parent=node, side=True),
                SearchNode(node.indices[~inside], node.depth + 1, parent=node, side=False),
            )
            stack.extend(node.children)
        return root

    def _normalized_values(self) -> np.ndarray:
        values = np.array([e.value for e in self.evaluated])
        finite = np.isfinite(values)
        if not finite.any():
            return np.zeros(values.size)
        low, high = values[finite].min(), values[finite].max()
        scaled = np.ones(values.size) if high == low else (values - low) / (high - low)
        return np.where(finite, scaled, 0.0)

    def _select(self, root: SearchNode) -> SearchNode:
        scores = self._normalized_values()
        node = root
        while not node.is_leaf():
            log_parent = math.log(node.visits)

            def ucb(child: SearchNode) -> float:
                exploit = float(scores[child.indices].mean())
                return exploit + self.budget.exploration * math.sqrt(2 * log_parent / child.visits)

            node = max(node.children, key=ucb)
        return node

    def _draw_from_pool(self, leaf: SearchNode, count: int) -> List[SearchPoint]:
        batch: List[int] = []
        node: Optional[SearchNode] = leaf
        while node is not None and len(batch) < count:
            mask = self.pool_alive & node.admits(self.pool_features)
            mask[batch] = False
            batch.extend(np.flatnonzero(mask)[: count - len(batch)].tolist())
            node = node.parent
        return [self.pool[i] for i in batch]

    def _node_best(self, node: SearchNode) -> Optional[Evaluation]:
        if node.visits == 0:
            return None
        return min((self.evaluated[i] for i in node.indices), key=rank_key)

    def _draw_by_rejection(self, leaf: SearchNode, count: int) -> List[SearchPoint]:
        batch: List[SearchPoint] = []
        batch_keys: Set[Tuple] = set()
        for _ in range(count):
            node: Optional[SearchNode] = leaf
            chosen = None
            while node is not None and chosen is None:
                anchor = self._node_best(node)
                for _ in range(self.budget.max_retries):
                    if anchor is not None and self.rng.random() < 0.5:
                        candidate = self.space.mutate(anchor.point, self.rng)
                    else:
                        candidate = self.space.sample(self.rng)
                    key = candidate.key()
                    if key in self.seen or key in batch_keys:
                        continue
                    if node.admits(self.space.features(candidate))[0]:
                        chosen = candidate
                        break
                if chosen is None:
                    node = node.parent
            if chosen is None:
                break
            batch.append(chosen)
            batch_keys.add(chosen.key())
        return batch

    def run(self, initial_points: Sequence[SearchPoint] = ()) -> SearchResult:
        if self._use_enumeration():
            self._load_pool()

        warm: List[SearchPoint] = []
        warm_keys: Set[Tuple] = set()
        for point in initial_points:
            if len(warm) >= self.budget.max_evaluations:
                break
            if point.key() not in warm_keys and self.space.contains(point):
                warm.append(point)
                warm_keys.add(point.key())
        if warm:
            self._record(warm)

        while len(self.evaluated) < self.budget.max_evaluations:
            count = min(self.budget.batch_size, self.budget.max_evaluations - len(self.evaluated))
            if self.evaluated:
                leaf = self._select(self._build_tree())
            else:
                leaf = SearchNode(indices=np.arange(0))
            if self.pool:
                batch = self._draw_from_pool(leaf, count)
            else:
                batch = self._draw_by_rejection(leaf, count)
            if not batch:
                self.logger.debug("Search space exhausted before the budget")
                break
            self._record(batch)

        result = _finish(self.evaluated, self.trace)
        self.logger.debug(
            f"Search finished after {result.evaluations} evaluations, best value {result.value:.4f}"
        )
        return result


def lamcts_search(
    space: SearchSpace,
    evaluator: Evaluator,
    weights: ValueWeights,
    budget: SearchBudget,
    rng: np.random.Generator,
    initial_points: Sequence[SearchPoint] = (),
) -> SearchResult:
    """
    Best feasible point found within budget; NoFeasibleMappingError when every
    evaluation hit the power filter.
    """
    return LaMctsSearch(space, evaluator, weights, budget, rng).run(initial_points)
