"""Revenue, cost and the long-term ratios reported by every run."""
from __future__ import annotations

from dataclasses import dataclass

from .embedding import Embedding
from .topology import VirtualNetworkRequest

CSV_COLUMNS = ("time", "arrived", "accepted", "acr", "lar", "lrc", "objective")


@dataclass(frozen=True)
class PricingConfig:
    alpha: float = 1.0  # price per vCPU
    beta: float = 1.0  # price per Mb/s

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("pricing: alpha and beta must be > 0")


@dataclass
class MetricTotals:
    arrived: int = 0
    accepted: int = 0
    revenue_sum: float = 0.0
    cost_sum: float = 0.0
    elapsed: float = 0.0

    def record_arrival(self, accepted: bool, rev: float = 0.0, cst: float = 0.0) -> None:
        self.arrived += 1
        if accepted:
            self.accepted += 1
            self.revenue_sum += rev
            self.cost_sum += cst

    def to_dict(self) -> dict:
        return {
            "arrived": self.arrived,
            "accepted": self.accepted,
            "revenue_sum": self.revenue_sum,
            "cost_sum": self.cost_sum,
            "elapsed": self.elapsed,
        }


def revenue(vnr: VirtualNetworkRequest, pricing: PricingConfig = PricingConfig()) -> float:
    return pricing.alpha * sum(n.cpu_demand for n in vnr.nodes) + pricing.beta * sum(
        l.bw_demand for l in vnr.links
    )


def cost(vnr: VirtualNetworkRequest, emb: Embedding) -> float:
    """Node CPU plus bandwidth charged once per substrate hop."""
    if len(emb.node_map) != len(vnr.nodes) or any(i not in emb.link_map for i in range(len(vnr.links))):
        raise ValueError(f"VNR {vnr.id}: cost needs a complete embedding")
    return float(
        sum(n.cpu_demand for n in vnr.nodes)
        + sum(l.bw_demand * len(emb.link_map[i]) for i, l in enumerate(vnr.links))
    )


def request_lrc(vnr: VirtualNetworkRequest, emb: Embedding, pricing: PricingConfig = PricingConfig()) -> float:
    """Revenue-to-cost ratio of a single embedded request (the DRL/MCTS reward).

    A request with all-zero demands costs nothing; it scores 1.0.
    """
    c = cost(vnr, emb)
    if c == 0:
        return 1.0
    return revenue(vnr, pricing) / c


def acceptance_ratio(totals: MetricTotals) -> float | None:
    if totals.arrived == 0:
        return None
    return totals.accepted / totals.arrived


def long_term_avg_revenue(totals: MetricTotals) -> float | None:
    if totals.elapsed <= 0:
        return None
    return totals.revenue_sum / totals.elapsed


def revenue_cost_ratio(totals: MetricTotals) -> float | None:
    if totals.cost_sum <= 0:
        return None
    return totals.revenue_sum / totals.cost_sum


def objective(acr: float | None, lar: float | None, lrc: float | None) -> float | None:
    # plain sum of three differently-scaled quantities; reporting only
    if acr is None or lar is None or lrc is None:
        return None
    return acr + lar + lrc


def snapshot_row(time: float, totals: MetricTotals) -> dict:
    acr = acceptance_ratio(totals)
    lar = long_term_avg_revenue(totals)
    lrc = revenue_cost_ratio(totals)
    return {
        "time": time,
        "arrived": totals.arrived,
        "accepted": totals.accepted,
        "acr": acr,
        "lar": lar,
        "lrc": lrc,
        "objective": objective(acr, lar, lrc),
    }
