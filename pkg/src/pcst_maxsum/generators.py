"""Random instance families used for benchmarking.

All generators draw from ``numpy.random.Generator(PCG64(seed))`` so an
instance is a pure function of ``(spec, seed)``.

Families
--------
RSpec
    G(n, p) graph with ``p = min(1, 2 nu / (n - 1))``, so ``n nu`` edges
    and mean degree ``2 nu`` are expected; edge
    costs 1, 2 or 4 with equal probability (``costs="discrete"``) or
    uniform reals in [1, 4] (``costs="uniform"``), prizes uniform in [0, 1].
HypercubeSpec
    ``dim``-dimensional hypercube, integer costs in [1, 10], integer prizes
    in [0, maxprize] with ``maxprize`` defaulting to 4 * max edge cost.
I640Spec
    640 nodes, a prized subset K and ``|E|`` fixed by the size rules;
    costs are rounded normal samples (mean 100/200/300 for edges touching
    0/1/2 nodes of K, sd 5) clipped to [1, 500]; prizes of K drawn from the
    integers in [0, 4 * max edge cost].
CDESpec
    connected random graph with the requested average degree, integer costs
    in [1, 10], ``prized`` nodes with integer prizes in [1, maxprize].

Counts written ``[x]`` in the benchmark definitions use round-half-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .instance import Instance, check


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class RSpec:
    n: int
    nu: float
    lam: float
    costs: str = "discrete"


@dataclass(frozen=True)
class HypercubeSpec:
    dim: int
    maxprize: Optional[int] = None
    lam: float = 1.0


K_RULES = ("log2", "sqrt", "2sqrt", "quarter")
E_RULES = ("3n/2", "2n", "nlogn", "2nlogn", "n(n-1)/4")


@dataclass(frozen=True)
class I640Spec:
    k_rule: str
    e_rule: str
    n: int = 640
    lam: float = 1.0


@dataclass(frozen=True)
class CDESpec:
    n: int
    avg_degree: float
    prized: Union[int, str]
    maxprize: int
    lam: float = 1.0


ClassSpec = Union[RSpec, HypercubeSpec, I640Spec, CDESpec]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def generate(spec: ClassSpec, seed: int) -> Instance:
    """Draw one instance of ``spec``; deterministic in ``(spec, seed)``."""
    if isinstance(spec, RSpec):
        inst = _gen_r(spec, seed)
    elif isinstance(spec, HypercubeSpec):
        inst = _gen_hypercube(spec, seed)
    elif isinstance(spec, I640Spec):
        inst = _gen_i640(spec, seed)
    elif isinstance(spec, CDESpec):
        inst = _gen_cde(spec, seed)
    else:
        raise TypeError(f"unknown class spec {spec!r}")
    return check(inst)


def spec_from_dict(d: dict) -> ClassSpec:
    """Build a spec from ``{"family": "R", ...}`` (the bench suite format)."""
    d = dict(d)
    family = str(d.pop("family", d.pop("class", ""))).lower()
    if "lambda" in d:
        d["lam"] = d.pop("lambda")
    kinds = {"r": RSpec, "hypercube": HypercubeSpec, "h": HypercubeSpec,
             "i640": I640Spec, "cde": CDESpec}
    if family not in kinds:
        raise ValueError(f"unknown instance family {family!r}")
    try:
        return kinds[family](**d)
    except TypeError as exc:
        raise ValueError(f"bad parameters for family {family!r}: {exc}") from None


def spec_to_dict(spec: ClassSpec) -> dict:
    family = {RSpec: "R", HypercubeSpec: "hypercube", I640Spec: "i640",
              CDESpec: "cde"}[type(spec)]
    d = {"family": family}
    d.update(spec.__dict__)
    d["lambda"] = d.pop("lam")
    return d


def _gen_r(spec: RSpec, seed: int) -> Instance:
    n, nu = spec.n, spec.nu
    if n < 2:
        raise ValueError("R family needs n >= 2")
    if not nu > 0:
        raise ValueError("R family needs nu > 0")
    if spec.lam < 0:
        raise ValueError("lambda must be nonnegative")
    if spec.costs not in ("discrete", "uniform"):
        raise ValueError(f"unknown cost distribution {spec.costs!r}")
    rng = _rng(seed)
    p = min(1.0, 2.0 * nu / (n - 1))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    tails, heads = iu[keep], ju[keep]
    m = len(tails)
    if spec.costs == "discrete":
        costs = np.array([1.0, 2.0, 4.0])[rng.integers(0, 3, size=m)]
    else:
        costs = rng.uniform(1.0, 4.0, size=m)
    prizes = rng.random(n)
    return Instance(n, tails, heads, costs, costs, prizes, spec.lam,
                    f"R_n{n}_nu{nu:g}_l{spec.lam:g}_s{seed}")


def _gen_hypercube(spec: HypercubeSpec, seed: int) -> Instance:
    d = spec.dim
    if not 2 <= d <= 20:
        raise ValueError("hypercube dimension must be in [2, 20]")
    rng = _rng(seed)
    n = 1 << d
    nodes = np.arange(n)
    tails, heads = [], []
    for bit in range(d):
        lo = nodes[(nodes >> bit) & 1 == 0]
        tails.append(lo)
        heads.append(lo | (1 << bit))
    tails = np.concatenate(tails)
    heads = np.concatenate(heads)
    order = np.lexsort((heads, tails))
    tails, heads = tails[order], heads[order]
    costs = rng.integers(1, 11, size=len(tails)).astype(float)
    maxprize = spec.maxprize if spec.maxprize is not None else int(4 * costs.max())
    if maxprize < 0:
        raise ValueError("maxprize must be nonnegative")
    prizes = rng.integers(0, maxprize + 1, size=n).astype(float)
    return Instance(n, tails, heads, costs, costs, prizes, spec.lam, f"hc{d}_s{seed}")


def _random_connected(n: int, m: int, rng: np.random.Generator):
    """Uniform random spanning tree skeleton plus ``m - n + 1`` extra pairs."""
    if n < 1:
        raise ValueError("need at least one node")
    if not n - 1 <= m <= n * (n - 1) // 2:
        raise ValueError(f"cannot build a connected simple graph with n={n}, m={m}")
    perm = rng.permutation(n)
    attach = np.array([rng.integers(0, k) for k in range(1, n)], dtype=np.int64)
    a, b = perm[1:], perm[attach]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    tree_ids = lo * n + hi
    extra = m - (n - 1)
    if extra > 0:
        iu, ju = np.triu_indices(n, k=1)
        all_ids = iu * n + ju
        free = np.setdiff1d(all_ids, tree_ids, assume_unique=True)
        chosen = rng.choice(free, size=extra, replace=False)
        ids = np.sort(np.concatenate([tree_ids, chosen]))
    else:
        ids = np.sort(tree_ids)
    return ids // n, ids % n


def k_count(rule: str, n: int) -> int:
    if rule == "log2":
        return round_half_up(math.log2(n))
    if rule == "sqrt":
        return round_half_up(math.sqrt(n))
    if rule == "2sqrt":
        return round_half_up(2 * math.sqrt(n))
    if rule == "quarter":
        return round_half_up(n / 4)
    raise ValueError(f"unknown k rule {rule!r}; expected one of {K_RULES}")


def e_count(rule: str, n: int) -> int:
    if rule == "3n/2":
        return round_half_up(3 * n / 2)
    if rule == "2n":
        return 2 * n
    if rule == "nlogn":
        return round_half_up(n * math.log(n))
    if rule == "2nlogn":
        return round_half_up(2 * n * math.log(n))
    if rule == "n(n-1)/4":
        return round_half_up(n * (n - 1) / 4)
    raise ValueError(f"unknown edge rule {rule!r}; expected one of {E_RULES}")


def _gen_i640(spec: I640Spec, seed: int) -> Instance:
    n = spec.n
    if n < 4:
        raise ValueError("i640 family needs n >= 4")
    k = k_count(spec.k_rule, n)
    m = e_count(spec.e_rule, n)
    rng = _rng(seed)
    tails, heads = _random_connected(n, m, rng)
    in_k = np.zeros(n, dtype=bool)
    in_k[rng.choice(n, size=k, replace=False)] = True
    touching = in_k[tails].astype(int) + in_k[heads].astype(int)
    mean = np.array([100.0, 200.0, 300.0])[touching]
    r = rng.normal(mean, 5.0)
    costs = np.clip(np.floor(r + 0.5), 1, 500)
    top = int(4 * costs.max())
    prizes = np.where(in_k, rng.integers(0, top + 1, size=n), 0).astype(float)
    return Instance(n, tails, heads, costs, costs, prizes, spec.lam,
                    f"i{n}_{spec.k_rule}_{spec.e_rule}_s{seed}")


def _prized_count(rule, n):
    if isinstance(rule, int) or (isinstance(rule, str) and rule.isdigit()):
        return int(rule)
    fractions = {"n/6": 6, "n/4": 4, "n/2": 2}
    if rule not in fractions:
        raise ValueError(f"unknown prized-count rule {rule!r}")
    return n // fractions[rule]


def _gen_cde(spec: CDESpec, seed: int) -> Instance:
    n = spec.n
    if n < 2 or spec.avg_degree <= 0:
        raise ValueError("CDE family needs n >= 2 and avg_degree > 0")
    if spec.maxprize < 1:
        raise ValueError("maxprize must be >= 1")
    k = _prized_count(spec.prized, n)
    if not 0 <= k <= n:
        raise ValueError(f"prized count {k} out of range")
    m = max(n - 1, round_half_up(n * spec.avg_degree / 2))
    rng = _rng(seed)
    tails, heads = _random_connected(n, m, rng)
    costs = rng.integers(1, 11, size=len(tails)).astype(float)
    prizes = np.zeros(n)
    chosen = rng.choice(n, size=k, replace=False)
    prizes[chosen] = rng.integers(1, spec.maxprize + 1, size=k)
    return Instance(n, tails, heads, costs, costs, prizes, spec.lam,
                    f"cde_n{n}_d{spec.avg_degree:g}_k{k}_s{seed}")
