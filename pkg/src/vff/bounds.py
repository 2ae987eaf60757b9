"""Certified lower bounds on the average fast-forwarded simulation fidelity.

Three relaxed quadratic bounds cover the data/cost variants (entangled-data
global cost, product-data global cost, product-data local cost); all share
the shape

    F >= 1 - 2 M^2 [ eps^2/(d+1) + (cost term) ] - M^2 (generalization term).

The generalization term hides an unproven big-O constant; every evaluator
takes it explicitly (c, default 1) and reports the c=0 value alongside, so a
certified-modulo-generalization number is always available.

The nested-radical bound is the un-relaxed rearrangement: with
X = eps/sqrt(2 d) + sqrt(1 - sqrt(1 - C_HST)), whenever M X <= 1,

    F >= 1 - d/(d+1) * M^2 X^2 (2 - M^2 X^2),

and the trivial bound 0 otherwise. It dominates the quadratic forms and is
exact enough to hold pointwise against measured fidelities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .costs import CostValue

__all__ = [
    "BoundInputs",
    "BoundReport",
    "generalization_term",
    "bound_product_global",
    "bound_product_local",
    "bound_entangled_global",
    "bound_nested_exact",
    "required_dataset_size",
    "remark_threshold",
]


@dataclass(frozen=True)
class BoundInputs:
    n: int
    m_steps: int
    trotter_eps: float
    cost: CostValue
    gate_count: int
    dataset_size: int
    delta: float = 0.05
    gen_constant: float = 1.0

    def __post_init__(self):
        if self.m_steps < 0:
            raise ValueError("number of fast-forwarding steps must be >= 0")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.trotter_eps < 0 or self.gen_constant < 0:
            raise ValueError("trotter_eps and gen_constant must be >= 0")

    @property
    def d(self) -> int:
        return 2**self.n


@dataclass(frozen=True)
class BoundReport:
    kind: str
    lower_bound: float  # clamped to [0, 1]
    raw: float  # unclamped, used for monotonicity checks
    trotter_term: float
    cost_term: float
    gen_term: float
    lower_bound_no_gen: float  # the c=0 value, clamped
    inputs: BoundInputs


def generalization_term(gate_count: int, dataset_size: int, delta: float, c: float = 1.0) -> float:
    """c * ( sqrt(K ln K / N) + sqrt(ln(1/delta) / N) ), natural logarithms."""
    if gate_count < 1 or dataset_size < 1:
        raise ValueError("gate count and dataset size must be >= 1")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    k, n = gate_count, dataset_size
    return c * (math.sqrt(k * math.log(k) / n) + math.sqrt(math.log(1.0 / delta) / n))


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _quadratic_bound(kind: str, inputs: BoundInputs, cost_factor: float, gen_factor: float) -> BoundReport:
    m2 = float(inputs.m_steps) ** 2
    trotter_term = 2.0 * m2 * inputs.trotter_eps**2 / (inputs.d + 1)
    cost_term = 2.0 * m2 * cost_factor * inputs.cost.value
    gen = m2 * gen_factor * generalization_term(
        inputs.gate_count, inputs.dataset_size, inputs.delta, inputs.gen_constant
    )
    raw = 1.0 - trotter_term - cost_term - gen
    return BoundReport(
        kind=kind,
        lower_bound=_clamp01(raw),
        raw=raw,
        trotter_term=trotter_term,
        cost_term=cost_term,
        gen_term=gen,
        lower_bound_no_gen=_clamp01(raw + gen),
        inputs=inputs,
    )


def bound_product_global(inputs: BoundInputs) -> BoundReport:
    """Fidelity bound from the global cost on product training data."""
    if inputs.cost.kind not in ("EMP_GLOBAL", "EXP_PRODUCT_G"):
        raise ValueError(f"product-global bound needs a product global cost, got {inputs.cost.kind}")
    return _quadratic_bound("PRODUCT_GLOBAL", inputs, cost_factor=4.0, gen_factor=1.0)


def bound_product_local(inputs: BoundInputs) -> BoundReport:
    """Fidelity bound from the local cost on product training data: the cost
    enters with a factor 4n and the generalization term with a factor n."""
    if inputs.cost.kind not in ("EMP_LOCAL", "EXP_PRODUCT_L_MC"):
        raise ValueError(f"product-local bound needs a local cost, got {inputs.cost.kind}")
    return _quadratic_bound(
        "PRODUCT_LOCAL", inputs, cost_factor=4.0 * inputs.n, gen_factor=float(inputs.n)
    )


def bound_entangled_global(inputs: BoundInputs) -> BoundReport:
    """Fidelity bound from the global cost on entangled (full-Haar) data."""
    if inputs.cost.kind not in ("EMP_GLOBAL", "EXP_ENTANGLED_G"):
        raise ValueError(f"entangled bound needs a global cost, got {inputs.cost.kind}")
    return _quadratic_bound("ENTANGLED_GLOBAL", inputs, cost_factor=2.0, gen_factor=1.0)


def bound_nested_exact(d: int, m_steps: int, trotter_eps: float, c_hst: float) -> float:
    """Un-relaxed fidelity lower bound (see module docstring). Returns the
    trivial bound 0 when M X > 1 and the rearrangement loses validity."""
    if not 0.0 <= c_hst <= 1.0:
        raise ValueError(f"c_hst must lie in [0, 1], got {c_hst}")
    if trotter_eps < 0 or m_steps < 0 or d < 2:
        raise ValueError("need trotter_eps >= 0, m_steps >= 0, d >= 2")
    x = trotter_eps / math.sqrt(2.0 * d) + math.sqrt(1.0 - math.sqrt(max(0.0, 1.0 - c_hst)))
    mx = m_steps * x
    if mx > 1.0:
        return 0.0
    mx2 = mx * mx
    return 1.0 - d / (d + 1.0) * mx2 * (2.0 - mx2)


def required_dataset_size(m0: int, gate_count: int, eps_target: float) -> int:
    """Training-set size sufficient for fidelity 1 - eps_target over M0 steps:
    ceil(M0^4 * K ln K / (eps_target/2)^2), with K ln K read as 1 when K = 1."""
    if m0 < 1 or gate_count < 1:
        raise ValueError("M0 and gate count must be >= 1")
    if eps_target <= 0:
        raise ValueError("eps_target must be positive")
    klogk = gate_count * math.log(gate_count) if gate_count > 1 else 1.0
    return math.ceil(m0**4 * klogk / (eps_target / 2.0) ** 2)


def remark_threshold(eps_target: float, m0: int, trotter_eps: float, d: int) -> float:
    """Cost threshold of the termination remark: eps/(8 M0^2) - eps_trot^2/(2(d+1)).
    Negative means the Trotter error alone blocks certification at this target."""
    if m0 < 1:
        raise ValueError("M0 must be >= 1")
    return eps_target / (8.0 * m0**2) - trotter_eps**2 / (2.0 * (d + 1.0))
