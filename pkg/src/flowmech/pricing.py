"""Exponential congestion pricing shared by the greedy solvers.

Each capacitated resource (edge or item) carries a price that starts at
1/capacity and grows by the factor exp(eps*B*d/capacity) every time demand d
is routed through it, i.e. the closed form

    price = (1/capacity) * exp(eps * B * load / capacity).

Prices are never stored raw: the ledger keeps loads and exponents and
evaluates prices on demand, shifted by a common exponent offset when the raw
values would overflow.  The classic stopping quantity sum(capacity * price)
is tracked in a shifted domain where it never overflows for any B: the
comparison against exp(eps*(B-1)) reduces to comparing a bounded running sum
against 1.
"""

from __future__ import annotations

import math


def edge_weight(load: float, capacity: float, epsilon: float, bound: float) -> float:
    """Price of a resource with the given load: (1/c) * exp(eps*B*load/c).

    Equals the product of all multiplicative updates applied to the initial
    price 1/c, exactly in exponent space.
    """
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    if load < 0:
        raise ValueError("load must be nonnegative")
    return math.exp(epsilon * bound * load / capacity) / capacity


class PriceLedger:
    """Loads, price exponents, and the threshold sum for one solver run."""

    def __init__(self, capacities, epsilon: float, bound: float):
        self.caps = [float(c) for c in capacities]
        self.epsilon = epsilon
        self.bound = bound
        m = len(self.caps)
        self.loads = [0.0] * m
        self.expo = [0.0] * m
        # threshold margin K: sum(c*y) <= exp(K) is the classic stop test
        self.margin = epsilon * (bound - 1.0)
        # shifted threshold sum: sum over resources of exp(expo - K).
        # Terms stay <= e^eps while loads respect capacities, so no overflow.
        self._tsum = self._fresh_tsum()
        # price evaluation shift; raised only when raw prices would overflow
        self.shift = 0.0
        self._max_expo = 0.0
        self.weights = [math.exp(-self.shift) / c for c in self.caps]

    def _fresh_tsum(self) -> float:
        return math.fsum(math.exp(x - self.margin) for x in self.expo)

    @property
    def threshold_ok(self) -> bool:
        """True while sum(c*y) <= exp(eps*(B-1))."""
        return self._tsum <= 1.0

    def residual(self, k: int) -> float:
        return self.caps[k] - self.loads[k]

    def fits(self, k: int, demand: float) -> bool:
        return self.loads[k] + demand <= self.caps[k]

    def route(self, resource_indices, demand: float):
        """Charge ``demand`` through the given resources and reprice them."""
        eps_b = self.epsilon * self.bound
        for k in resource_indices:
            c = self.caps[k]
            old = self.expo[k]
            new = old + eps_b * demand / c
            self.expo[k] = new
            self.loads[k] += demand
            self._tsum += math.exp(new - self.margin) - math.exp(old - self.margin)
            if new > self._max_expo:
                self._max_expo = new
            self.weights[k] = math.exp(new - self.shift) / c
        if self._max_expo - self.shift > 700.0:
            self.shift = self._max_expo - 350.0
            self.weights = [math.exp(x - self.shift) / c
                            for x, c in zip(self.expo, self.caps)]

    def log_price_total(self) -> float:
        """log of sum(capacity * price) over all resources."""
        if self._tsum > 0.0 and not math.isinf(self.margin):
            return self.margin + math.log(self._tsum)
        # all shifted terms underflowed (enormous B); fall back to a full pass
        top = max(self.expo)
        return top + math.log(math.fsum(math.exp(x - top) for x in self.expo))

    def price_total(self) -> float:
        """sum(capacity * price); inf when it exceeds the float range."""
        lg = self.log_price_total()
        return math.exp(lg) if lg < 709.0 else math.inf

    def raw_prices(self) -> list[float]:
        """Unshifted prices; only safe while exponents are moderate."""
        return [math.exp(x) / c for x, c in zip(self.expo, self.caps)]
