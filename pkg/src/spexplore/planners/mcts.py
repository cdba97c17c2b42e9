"""UCT Monte Carlo tree search for a single decision.

The search works with any model exposing ``actions(state)`` (ordered; the
order is the tie-break order) and ``step(state, action) -> (state, reward)``.
A model may also expose ``reverse(action)``, used to keep rollouts from
stepping straight back.

Statistics are kept per edge: ``N(s,a)`` and the running mean return
``Q(s,a)``. A freshly expanded edge records the return of its first rollout,
so every child has ``N(s,a) >= 1`` before UCB selection is reached.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NoValidActions


@dataclass(frozen=True)
class MctsParams:
    iterations: int = 500
    max_depth: int = 5
    gamma: float = 0.9
    kappa: float = 1.0
    # None: gamma ** (max_depth - 0.5), i.e. the cutoff fires at depth == max_depth
    epsilon: float | None = None
    rollout_no_reverse: bool = True

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.iterations < 1 or self.max_depth < 1:
            raise ValueError("iterations and max_depth must be >= 1")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")

    @property
    def cutoff(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return self.gamma ** (self.max_depth - 0.5)

    def horizon(self) -> int:
        """Number of steps a simulation can take before the cutoff."""
        depth = 0
        while self.gamma**depth >= self.cutoff:
            depth += 1
        return depth


class SearchNode:
    """Tree node: state, visit counts, per-action Q and children."""

    __slots__ = ("state", "depth", "reward", "visits", "untried", "children", "n", "q")

    def __init__(self, state, depth: int, actions, reward: float = 0.0):
        self.state = state
        self.depth = depth
        self.reward = reward  # reward received on entering this node
        self.visits = 0
        self.untried = list(actions)
        self.children: dict = {}
        self.n: dict = {}
        self.q: dict = {}

    def record(self, action, G: float) -> None:
        self.visits += 1
        n = self.n.get(action, 0) + 1
        self.n[action] = n
        q = self.q.get(action, 0.0)
        self.q[action] = q + (G - q) / n

    def best_action(self):
        """argmax_a Q(s, a); ties go to the earliest action."""
        best, best_q = None, -math.inf
        for a in sorted(self.q):
            if self.q[a] > best_q:
                best, best_q = a, self.q[a]
        return best

    def ucb_action(self, kappa: float):
        log_n = math.log(self.visits)
        best, best_score = None, -math.inf
        for a in sorted(self.children):
            score = self.q[a] + kappa * math.sqrt(log_n / self.n[a])
            if score > best_score:
                best, best_score = a, score
        return best


def rollout(state, depth: int, model, params: MctsParams, rng: np.random.Generator, prev=None) -> float:
    """Discounted return of a uniform random walk until the depth cutoff."""
    gamma, eps = params.gamma, params.cutoff
    reverse = getattr(model, "reverse", None) if params.rollout_no_reverse else None
    total, disc = 0.0, 1.0
    while gamma**depth >= eps:
        acts = model.actions(state)
        if not acts:
            break
        if reverse is not None and prev is not None:
            back = reverse(prev)
            alt = [a for a in acts if a != back]
            if len(alt) >= 2:
                acts = alt
        a = acts[int(rng.integers(len(acts)))]
        state, r = model.step(state, a)
        total += disc * r
        disc *= gamma
        depth += 1
        prev = a
    return total


def simulate(node: SearchNode, depth: int, model, params: MctsParams, rng: np.random.Generator) -> float:
    """One MCTS iteration below ``node``; returns the discounted return G."""
    if params.gamma**depth < params.cutoff:
        return 0.0
    if node.untried:
        a = node.untried.pop(int(rng.integers(len(node.untried))))
        nxt, r = model.step(node.state, a)
        node.children[a] = SearchNode(nxt, depth + 1, model.actions(nxt), r)
        G = r + params.gamma * rollout(nxt, depth + 1, model, params, rng, prev=a)
        node.record(a, G)
        return G
    if not node.children:
        return 0.0
    a = node.ucb_action(params.kappa)
    child = node.children[a]
    G = child.reward + params.gamma * simulate(child, depth + 1, model, params, rng)
    node.record(a, G)
    return G


def build_tree(root_state, model, params: MctsParams, rng: np.random.Generator) -> SearchNode:
    root = SearchNode(root_state, 0, model.actions(root_state))
    if not root.untried:
        raise NoValidActions("root state has no valid actions")
    for _ in range(params.iterations):
        simulate(root, 0, model, params, rng)
    return root


def mcts_search(root_state, model, params: MctsParams, rng: np.random.Generator):
    """Best root action after ``params.iterations`` simulations."""
    acts = model.actions(root_state)
    if not acts:
        raise NoValidActions("root state has no valid actions")
    if len(acts) == 1:
        return acts[0]
    return build_tree(root_state, model, params, rng).best_action()
