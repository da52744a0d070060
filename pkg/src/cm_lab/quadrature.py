"""Exactness scans of quadrature rules and the node-count audit built on them.

A rule that integrates phi_0..phi_X exactly satisfies 1 = sum over m <= X of |sum_j a_j phi_m(x_j)|^2,
and the lower bound on that sum forces N >= C X.
"""

import math
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from cm_lab.errors import InvalidPointError, WeightSumError
from cm_lab.functional import spectral_coefficients
from cm_lab.integration import gauss_legendre
from cm_lab.parallel import exact_sum
from cm_lab.reports import read_point_file
from cm_lab.spectra import ManifoldKind, as_points, enumerate_spectrum


MIN_TOL = 1e-12
MAX_TOL = 1e-6


@dataclass
class QuadratureRule:
    manifold: ManifoldKind
    nodes: np.ndarray
    weights: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        self.nodes = as_points(self.manifold, self.nodes)
        self.weights = np.asarray(self.weights, dtype=np.float64).ravel()

        if self.nodes.shape[0] < 1:
            raise InvalidPointError("a quadrature rule needs at least one node")
        if self.weights.size != self.nodes.shape[0]:
            raise InvalidPointError(f"{self.nodes.shape[0]} nodes but {self.weights.size} weights")
        # Signed weights are allowed, only finiteness is required
        if not np.all(np.isfinite(self.weights)):
            raise InvalidPointError("quadrature weights must be finite")

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def positive(self):
        return bool(np.all(self.weights > 0.0))

    @property
    def weight_sum(self):
        return exact_sum(self.weights)


def trapezoid_rule(num_points, dimension=1):
    """Nodes j / N with weights 1 / N, as a tensor grid of N^d nodes on the d-torus."""
    if num_points < 1:
        raise ValueError("the trapezoid rule needs N >= 1")

    axis = np.arange(num_points) / num_points
    nodes = np.stack(np.meshgrid(*([axis] * dimension), indexing="ij"), axis=-1).reshape(-1, dimension)
    weights = np.full(nodes.shape[0], 1.0 / nodes.shape[0])

    return QuadratureRule(ManifoldKind.torus(dimension), nodes, weights, name=f"trapezoid:{num_points}")


def sphere_product_rule(n_theta):
    """Gauss-Legendre in cos(theta) with n_theta nodes times 2 n_theta equispaced azimuths."""
    if n_theta < 1:
        raise ValueError("the product rule needs n_theta >= 1")

    cos_nodes, cos_weights = gauss_legendre(n_theta)
    n_phi = 2 * n_theta
    azimuth = 2.0 * np.pi * np.arange(n_phi) / n_phi

    cos_theta, phi = np.meshgrid(cos_nodes, azimuth, indexing="ij")
    sin_theta = np.sqrt(1.0 - cos_theta**2)
    nodes = np.stack([sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta], axis=-1).reshape(-1, 3)
    weights = np.repeat(cos_weights / (2.0 * n_phi), n_phi)

    return QuadratureRule(ManifoldKind.sphere2(), nodes, weights, name=f"gauss-product:{n_theta}")


def parse_rule(text, manifold):
    """``trapezoid:N``, ``gauss-product:n`` or the path of a point file with a weight column."""
    name, _, arg = text.partition(":")
    if name in ("trapezoid", "gauss-product") and arg.isdigit():
        if name == "trapezoid":
            if not manifold.is_flat:
                raise ValueError("the trapezoid rule lives on tori")
            return trapezoid_rule(int(arg), manifold.dimension)
        if manifold.is_flat:
            raise ValueError("the Gauss product rule lives on the sphere")
        return sphere_product_rule(int(arg))

    declared, nodes, weights = read_point_file(text, manifold, require_weights=True)
    return QuadratureRule(declared, nodes, weights, name=os.path.basename(text))


@dataclass
class ExactnessCertificate:
    rule: str
    manifold: str
    N: int
    X_probe: int
    tol: float
    X_max: int
    residuals: list
    weight_sum: float
    sum_w2: float
    c_hat: Optional[float]
    node_ratio: Optional[float]
    proof_identity: float
    proof_identity_ok: bool
    positive_weights: bool
    exhausted: bool
    meta: dict = field(default_factory=dict)

    def to_record(self):
        return asdict(self)


def exactness_scan(rule, X_probe, tol=1e-10):
    """Largest X such that the rule reproduces the integral of every phi_m with m <= X.

    ``exhausted`` means no residual failed up to X_probe, so X_max is only a lower bound.
    """
    if not MIN_TOL <= tol <= MAX_TOL:
        raise ValueError(f"tol must lie in [{MIN_TOL}, {MAX_TOL}]")
    if X_probe < 1:
        raise ValueError("X_probe must be at least 1")

    spectrum = enumerate_spectrum(rule.manifold, X_probe + 1)
    coefficients = spectral_coefficients(rule.manifold, spectrum, rule.nodes, rule.weights)

    target = np.zeros_like(coefficients)
    target[0] = 1.0
    residuals = np.abs(coefficients - target)
    if residuals[0] >= tol:
        raise WeightSumError(f"weights sum to {rule.weight_sum!r}, the constant is not integrated exactly")

    failing = np.flatnonzero(residuals >= tol)
    exhausted = failing.size == 0
    X_max = int(X_probe) if exhausted else int(failing[0]) - 1

    sum_w2 = exact_sum(rule.weights**2)
    proof_identity = exact_sum(coefficients[: X_max + 1] ** 2)

    return ExactnessCertificate(
        rule=rule.name,
        manifold=rule.manifold.name,
        N=rule.size,
        X_probe=int(X_probe),
        tol=float(tol),
        X_max=X_max,
        residuals=residuals.tolist(),
        weight_sum=rule.weight_sum,
        sum_w2=sum_w2,
        c_hat=1.0 / (X_max * sum_w2) if X_max >= 1 else None,
        node_ratio=rule.size / X_max if X_max >= 1 else None,
        proof_identity=proof_identity,
        proof_identity_ok=abs(proof_identity - 1.0) <= 10.0 * tol,
        positive_weights=rule.positive,
        exhausted=exhausted,
    )


def corollary_audit(rules, tol=1e-10, X_probe=None):
    """Per-rule N, X_max, sum a_j^2, c_hat and N / X_max over a family of rules."""
    rows = []
    for rule in rules:
        probe = X_probe if X_probe is not None else 4 * rule.size + 4
        certificate = exactness_scan(rule, probe, tol)
        if certificate.X_max < 1:
            raise ValueError(f"rule {rule.name} is not exact beyond the constant, X_max = {certificate.X_max}")

        rows.append(
            {
                "rule": rule.name,
                "N": certificate.N,
                "X_max": certificate.X_max,
                "sum_w2": certificate.sum_w2,
                "c_hat": certificate.c_hat,
                "node_ratio": certificate.node_ratio,
                "proof_identity": certificate.proof_identity,
                "cauchy_schwarz_ok": certificate.sum_w2 >= 1.0 / certificate.N - 1e-12,
                "exhausted": certificate.exhausted,
            }
        )

    ratios = [row["node_ratio"] for row in rows]
    ordered = [row["node_ratio"] for row in sorted(rows, key=lambda row: row["N"])]
    summary = {
        "rules": len(rows),
        "min_node_ratio": min(ratios) if ratios else math.nan,
        "node_ratio_monotone": all(a >= b for a, b in zip(ordered, ordered[1:])),
        "cauchy_schwarz_ok": all(row["cauchy_schwarz_ok"] for row in rows),
    }

    return {"rows": rows, "summary": summary}
