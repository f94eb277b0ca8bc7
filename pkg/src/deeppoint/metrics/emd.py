"""Earth mover's distance between equal-size clouds.

The matching cost is the mean Euclidean distance over a bijection. Small
clouds use the exact assignment solver; larger ones a forward auction with
epsilon scaling whose mean cost is within the final epsilon of optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import ApproxFailure, InvalidInput, SizeMismatch, TooLarge
from .chamfer import CloudLike, as_points, one_sided_chamfer, squared_distances

EXACT_GUARD = 2048
EPS_DIVISOR = 4.0
EPS_FLOOR = 1e-9
# stop once epsilon is this small relative to a lower bound on the mean cost
STOP_RATIO = 0.005


@dataclass(frozen=True)
class Matching:
    """``assignment[i]`` is the index in S2 matched to point i of S1."""

    assignment: np.ndarray
    cost: float
    exact: bool = True

    def __post_init__(self) -> None:
        phi = np.asarray(self.assignment, dtype=np.int64)
        n = phi.shape[0]
        if phi.ndim != 1 or not np.array_equal(np.sort(phi), np.arange(n)):
            raise InvalidInput("matching is not a bijection")
        phi.setflags(write=False)
        object.__setattr__(self, "assignment", phi)


def _pair(s1: CloudLike, s2: CloudLike) -> tuple[np.ndarray, np.ndarray]:
    a, b = as_points(s1), as_points(s2)
    if a.shape[0] != b.shape[0]:
        raise SizeMismatch(f"EMD needs equal sizes, got {a.shape[0]} and {b.shape[0]}")
    return a, b


def cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(squared_distances(a[:, None, :], b[None, :, :]))


def _mean_cost(costs: np.ndarray, phi: np.ndarray) -> float:
    return float(costs[np.arange(phi.shape[0]), phi].mean())


def emd_exact(s1: CloudLike, s2: CloudLike, *, max_points: int = EXACT_GUARD) -> Matching:
    a, b = _pair(s1, s2)
    if a.shape[0] > max_points:
        raise TooLarge(f"exact EMD is limited to {max_points} points, got {a.shape[0]}")
    costs = cost_matrix(a, b)
    _, cols = linear_sum_assignment(costs)
    return Matching(cols, _mean_cost(costs, cols), exact=True)


def _complete(assigned: np.ndarray) -> np.ndarray:
    """Give every unassigned row a free column, lowest first."""
    phi = assigned.copy()
    free = np.setdiff1d(np.arange(phi.shape[0]), phi[phi >= 0])
    phi[phi < 0] = free
    return phi


def emd_approx(
    s1: CloudLike,
    s2: CloudLike,
    *,
    max_iterations: int = 200_000,
    initial_eps: float | None = None,
    eps_divisor: float = EPS_DIVISOR,
    eps_floor: float = EPS_FLOOR,
) -> Matching:
    """Jacobi auction on ``-cost`` with epsilon scaling; deterministic for a given input order.

    All unassigned rows bid at once. Each column goes to its highest bid, the
    lowest row index winning ties. Prices carry over between phases while the
    assignment restarts. Raises ``ApproxFailure`` carrying a completed
    bijection when ``max_iterations`` bidding rounds are exceeded.
    """
    a, b = _pair(s1, s2)
    n = a.shape[0]
    costs = cost_matrix(a, b)
    if n == 1:
        return Matching(np.zeros(1, dtype=np.int64), float(costs[0, 0]), exact=True)
    max_cost = float(costs.max())
    if max_cost == 0.0:
        return Matching(np.arange(n), 0.0, exact=True)

    stop_eps = STOP_RATIO * one_sided_chamfer(a, b)
    eps = max_cost / 8.0 if initial_eps is None else initial_eps
    benefit = -costs
    prices = np.zeros(n)
    assigned = np.full(n, -1, dtype=np.int64)
    iterations = 0
    while True:
        assigned.fill(-1)
        owner = np.full(n, -1, dtype=np.int64)
        while True:
            bidders = np.flatnonzero(assigned < 0)
            if bidders.size == 0:
                break
            iterations += 1
            if iterations > max_iterations:
                phi = _complete(assigned)
                raise ApproxFailure(
                    f"auction did not converge within {max_iterations} rounds (eps={eps:.3g})",
                    matching=Matching(phi, _mean_cost(costs, phi), exact=False),
                )
            values = benefit[bidders] - prices
            rows = np.arange(bidders.size)
            best = np.argmax(values, axis=1)
            best_value = values[rows, best]
            values[rows, best] = -np.inf
            second = values.max(axis=1)
            bids = prices[best] + (best_value - second) + eps

            order = np.lexsort((bidders, -bids, best))
            objects = best[order]
            first = np.ones(order.size, dtype=bool)
            first[1:] = objects[1:] != objects[:-1]
            winners = order[first]

            won = best[winners]
            displaced = owner[won]
            assigned[displaced[displaced >= 0]] = -1
            owner[won] = bidders[winners]
            assigned[bidders[winners]] = won
            prices[won] = bids[winners]
        if eps <= stop_eps or eps <= eps_floor:
            break
        eps = max(eps / eps_divisor, eps_floor)
    return Matching(assigned.copy(), _mean_cost(costs, assigned), exact=False)


def emd(
    s1: CloudLike, s2: CloudLike, *, exact_max_points: int = 256, max_iterations: int = 200_000
) -> Matching:
    """Exact matching up to ``exact_max_points``, auction above."""
    a, b = _pair(s1, s2)
    if a.shape[0] <= exact_max_points:
        return emd_exact(a, b)
    return emd_approx(a, b, max_iterations=max_iterations)


def emd_grad(pred: CloudLike, ref: CloudLike, matching: Matching) -> np.ndarray:
    """Gradient of the mean matched distance wrt ``pred`` with the matching frozen.

    Coincident matched pairs get a zero row.
    """
    p, r = _pair(pred, ref)
    if matching.assignment.shape[0] != p.shape[0]:
        raise SizeMismatch("matching size does not match the clouds")
    delta = p - r[matching.assignment]
    dist = np.sqrt(squared_distances(delta, 0.0))
    grad = np.zeros_like(delta)
    moving = dist > 0.0
    grad[moving] = delta[moving] / dist[moving, None]
    return grad / p.shape[0]
