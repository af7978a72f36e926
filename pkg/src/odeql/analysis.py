"""Empirical verification of every norm, error and probability bound.

Each checker measures a quantity on a concrete system and compares it with
its claimed bound, reporting the worst observed ratio (oriented so that
ratio <= 1 means the claim holds; a 1e-9 relative slack absorbs the floating
point evaluation of the bound constants themselves). Hypothesis violations
raise :class:`~odeql.errors.HypothesisError` instead of producing a verdict,
so sweeps over invalid corners cannot pollute reports.

The bounds covered:

* inverse-column norms of the scalar system:  ||C(lam)^{-1} e_l|| and entries
* matrix norm:        ||C|| <= 2 sqrt(k), with its three-part decomposition
* inverse norm:       ||C^{-1}|| <= 3 kappa_V sqrt(k) (m+p)
* condition number:   kappa_C <= 6 kappa_V k (m+p)
* solution error:     ||x(jh) - x_{j,0}|| <= 2.8 kappa_V j (|x_in| + mh|b|) / (k+1)!
* measurement:        ||x_{m,j}|| / ||x|| >= 1 / sqrt(p + 77 m g^2)
* three state-distance inequalities reused by the pipeline error accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from .encoder import EncodedSystem, TaylorParams
from .errors import (
    DegenerateInputError,
    HypothesisError,
    ParameterError,
)
from .numerics import (
    POWER_SEED,
    Instance,
    _sigma_max,
    reference_solution,
    spectral_norm,
)
from .solver import BlockSolution

# Relative slack accepted on every bound check; absorbs floating-point
# evaluation of the bound constants (e, I_0(2), log-space factorials).
PASS_SLACK = 1e-9


def bessel_i0_2() -> float:
    """I_0(2) = sum_j 1/(j!)^2 by its own series, to 1e-15."""
    total, j, term = 0.0, 0, 1.0
    while term > 1e-17:
        term = 1.0 / math.factorial(j) ** 2
        total += term
        j += 1
    return total


_I02 = bessel_i0_2()

# Entrywise ceiling on columns of the scalar inverse.
COLUMN_ENTRY_BOUND = math.sqrt(1.04 * math.e)


def column_norm_bound(m: int, p: int) -> float:
    """sqrt(1.04 e I_0(2) (m+p)), the inverse-column norm bound."""
    return math.sqrt(1.04 * math.e * _I02 * (m + p))


@dataclass
class BoundReport:
    """Outcome of checking one bound over one or more instances.

    worst_ratio is observed/bound for upper bounds and bound/observed for
    lower bounds, so a value <= 1 (+ slack) always means the claim holds.
    hypotheses_ok is False only for reports synthesized from sweeps whose
    hypotheses failed; such reports carry the verdict "not claimed".
    """

    bound_name: str
    instances_checked: int
    worst_ratio: float
    argmax_instance: str
    hypotheses_ok: bool = True
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.hypotheses_ok and self.worst_ratio <= 1.0 + PASS_SLACK

    @property
    def verdict(self) -> str:
        if not self.hypotheses_ok:
            return "not claimed"
        return "pass" if self.passed else "fail"

    def to_json_dict(self) -> dict:
        return {
            "bound": self.bound_name,
            "instances_checked": self.instances_checked,
            "worst_ratio": self.worst_ratio,
            "argmax_instance": self.argmax_instance,
            "hypotheses_ok": self.hypotheses_ok,
            "verdict": self.verdict,
            "details": self.details,
        }


def merge_reports(reports) -> BoundReport:
    """Associative merge of reports for the same bound (worst ratio wins)."""
    reports = list(reports)
    if not reports:
        raise ParameterError("cannot merge an empty report list")
    name = reports[0].bound_name
    if any(r.bound_name != name for r in reports):
        raise ParameterError("cannot merge reports for different bounds")
    worst = max(reports, key=lambda r: r.worst_ratio)
    return BoundReport(
        bound_name=name,
        instances_checked=sum(r.instances_checked for r in reports),
        worst_ratio=worst.worst_ratio,
        argmax_instance=worst.argmax_instance,
        hypotheses_ok=all(r.hypotheses_ok for r in reports),
        details={"merged": len(reports)},
    )


@dataclass(frozen=True)
class DecayProfile:
    """Norm history of the true solution on the step grid.

    q is ||x(T)||; g_grid = max_i ||x(ih)|| / q over the step grid (the
    quantity the measurement bound actually consumes); g_refined is the same
    maximum on an 8x refined grid, reported for information only.
    """

    step_norms: np.ndarray
    q: float
    g_grid: float
    g_refined: float


def decay_profile(inst: Instance, T: float, m: int, refine: int = 8,
                  tol: float = 1e-13) -> DecayProfile:
    """Evaluate ||x(ih)|| on the step grid (plus a refined grid) via the oracle."""
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    h = T / m
    step_norms = np.array(
        [np.linalg.norm(reference_solution(inst, i * h, tol)) for i in range(m + 1)]
    )
    q = float(step_norms[-1])
    if q < 1e-300:
        raise DegenerateInputError("||x(T)|| vanishes; decay ratio undefined")
    g_grid = float(step_norms.max() / q)

    g_refined = g_grid
    if refine > 1:
        sub = np.arange(1, refine) / refine
        extra = [
            np.linalg.norm(reference_solution(inst, (i + s) * h, tol))
            for i in range(m)
            for s in sub
        ]
        if extra:
            g_refined = float(max(g_grid, max(extra) / q))
    return DecayProfile(step_norms=step_norms, q=q, g_grid=g_grid, g_refined=g_refined)


# ---------------------------------------------------------------------------
# scalar inverse columns
# ---------------------------------------------------------------------------

def _scalar_inverse(lam: complex, params: TaylorParams) -> np.ndarray:
    """All columns of C_{m,k,p}(lam)^{-1} by forward substitution on I.

    Returns X with X[:, l] the solution of C x = e_l; rows are flat block
    indices. Vectorized over columns, O(d^2) work.
    """
    m, k, p = params.m, params.k, params.p
    d = params.d
    X = np.zeros((d + 1, d + 1), dtype=complex)
    X[0, 0] = 1.0
    body = m * (k + 1)
    for l in range(1, d + 1):
        if l <= body and l % (k + 1) == 0:
            i = l // (k + 1) - 1
            X[l] = X[i * (k + 1):i * (k + 1) + k + 1].sum(axis=0)
        elif l > body:
            X[l] = X[l - 1]
        else:
            j = l % (k + 1)
            X[l] = (lam / j) * X[l - 1]
        X[l, l] += 1.0
    return X


def scalar_inverse_columns(lam: complex, params: TaylorParams) -> BoundReport:
    """Check both inverse-column bounds of the scalar (N = 1) system.

    For every column l, the solution of C(lam) x = e_l must satisfy
    ||x|| <= sqrt(1.04 e I_0(2) (m+p)) and max_n |x_n| <= sqrt(1.04 e),
    provided |lam| <= 1, Re(lam) <= 0, k >= 5 and (k+1)! >= 2m.
    """
    lam = complex(lam)
    if abs(lam) > 1.0 + 1e-12:
        raise HypothesisError(f"|lambda| = {abs(lam):.6g} > 1; bound not claimed")
    if lam.real > 0.0:
        raise HypothesisError(f"Re(lambda) = {lam.real:.6g} > 0; bound not claimed")
    params.require_bound_hypotheses()

    X = _scalar_inverse(lam, params)
    col_norms = np.linalg.norm(X, axis=0)
    norm_bound = column_norm_bound(params.m, params.p)
    entry_max = float(np.abs(X).max())

    norm_ratio = float(col_norms.max() / norm_bound)
    entry_ratio = entry_max / COLUMN_ENTRY_BOUND
    worst_col = int(np.argmax(col_norms))
    label = f"lambda={lam:.6g}, m={params.m}, k={params.k}, p={params.p}"
    return BoundReport(
        bound_name="inverse-columns",
        instances_checked=1,
        worst_ratio=max(norm_ratio, entry_ratio),
        argmax_instance=label,
        details={
            "column_norm_ratio": norm_ratio,
            "entry_ratio": entry_ratio,
            "worst_column": worst_col,
            "column_norm_bound": norm_bound,
            "entry_bound": COLUMN_ENTRY_BOUND,
        },
    )


# ---------------------------------------------------------------------------
# matrix norm, inverse norm, condition number
# ---------------------------------------------------------------------------

def _component_split(system: EncodedSystem):
    """Split C = C1 + C2 + C3: identity, collectors, subdiagonal blocks."""
    params, N = system.params, system.N
    m, k = params.m, params.k
    d = params.d
    dim = (d + 1) * N
    C1 = sp.identity(dim, dtype=complex, format="csr")

    pattern = sp.lil_matrix((d + 1, d + 1), dtype=complex)
    for i in range(m):
        for j in range(k + 1):
            pattern[(i + 1) * (k + 1), i * (k + 1) + j] = -1.0
    C2 = sp.kron(pattern.tocsr(), sp.identity(N, dtype=complex, format="csr"),
                 format="csr")
    C3 = (system.matrix - C1 - C2).tocsr()
    return C1, C2, C3


def matrix_norm_bounds(system: EncodedSystem, components: bool = True) -> BoundReport:
    """Check ||C|| <= 2 sqrt(k) and (optionally) the three component norms.

    The components satisfy ||C1|| = 1, ||C2|| = sqrt(k+1) and
    ||C3|| = max(||Ah||, 1); each is verified by power iteration and must
    match its closed form to 5e-4 relative (power-iteration accuracy).
    """
    params = system.params
    if params.k < 5:
        raise HypothesisError(f"norm bound requires k >= 5, got k={params.k}")
    k = params.k
    tol = 1e-6

    norm_C = spectral_norm(system.matrix, tol)
    bound = 2.0 * math.sqrt(k)
    details = {"norm": norm_C, "bound": bound}

    if components:
        _, C2, C3 = _component_split(system)
        norm_C2 = spectral_norm(C2, tol)
        norm_C3 = spectral_norm(C3, tol)
        # ||Ah|| read off the first subdiagonal block, which stores -(Ah)/1.
        N = system.N
        norm_Ah = spectral_norm(system.matrix[N:2 * N, :N].tocsr(), tol)
        expected_C2 = math.sqrt(k + 1.0)
        expected_C3 = max(norm_Ah, 1.0)
        details.update({
            "component_identity": 1.0,
            "component_collector": norm_C2,
            "component_collector_expected": expected_C2,
            "component_subdiagonal": norm_C3,
            "component_subdiagonal_expected": expected_C3,
            "components_ok": bool(
                abs(norm_C2 - expected_C2) <= 5e-4 * expected_C2
                and abs(norm_C3 - expected_C3) <= 5e-4 * expected_C3
            ),
        })

    label = f"m={params.m}, k={k}, p={params.p}, N={system.N}"
    return BoundReport(
        bound_name="matrix-norm",
        instances_checked=1,
        worst_ratio=float(norm_C / bound),
        argmax_instance=label,
        details=details,
    )


def inverse_norm(system: EncodedSystem, tol: float = 1e-6,
                 max_iter: int = 10_000, seed: int = POWER_SEED) -> float:
    """||C^{-1}|| = 1/sigma_min(C) by power iteration on the inverse Gram map.

    Each iteration applies C^{-1} by sparse forward substitution and
    C^{-dagger} by back substitution; the matrix is never inverted.
    """
    C = system.matrix
    CH = C.conj().T.tocsr()
    return _sigma_max(
        lambda x: spsolve_triangular(C, x, lower=True),
        lambda y: spsolve_triangular(CH, y, lower=False),
        C.shape[0], tol, max_iter, seed,
    )


def _require_eigenvalue_hypotheses(eigenvalues, h: float) -> None:
    if eigenvalues is None:
        return
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    if np.any(eigenvalues.real > 0):
        raise HypothesisError("Re(lambda) > 0 for some eigenvalue; bound not claimed")
    if np.any(np.abs(eigenvalues) * h > 1.0 + 1e-9):
        raise HypothesisError("|lambda h| > 1 for some eigenvalue; bound not claimed")


def inverse_norm_bound(system: EncodedSystem, kappa_V: float,
                       eigenvalues=None) -> BoundReport:
    """Check ||C^{-1}|| <= 3 kappa_V sqrt(k) (m+p).

    If eigenvalues are supplied, the hypotheses Re(lambda) <= 0 and
    |lambda h| <= 1 are verified; otherwise the caller certifies them.
    """
    params = system.params
    params.require_bound_hypotheses()
    _require_eigenvalue_hypotheses(eigenvalues, params.h)

    measured = inverse_norm(system)
    bound = 3.0 * kappa_V * math.sqrt(params.k) * (params.m + params.p)
    label = f"m={params.m}, k={params.k}, p={params.p}, N={system.N}, kappa_V={kappa_V:.4g}"
    return BoundReport(
        bound_name="inverse-norm",
        instances_checked=1,
        worst_ratio=float(measured / bound),
        argmax_instance=label,
        details={"norm": measured, "bound": bound},
    )


def condition_number_bound(system: EncodedSystem, kappa_V: float,
                           eigenvalues=None) -> BoundReport:
    """Check kappa_C = ||C|| ||C^{-1}|| <= 6 kappa_V k (m+p)."""
    fwd = matrix_norm_bounds(system, components=False)
    inv = inverse_norm_bound(system, kappa_V, eigenvalues)
    params = system.params
    kappa_C = fwd.details["norm"] * inv.details["norm"]
    bound = 6.0 * kappa_V * params.k * (params.m + params.p)
    return BoundReport(
        bound_name="condition-number",
        instances_checked=1,
        worst_ratio=float(kappa_C / bound),
        argmax_instance=inv.argmax_instance,
        details={
            "kappa_C": kappa_C,
            "bound": bound,
            "norm": fwd.details["norm"],
            "inverse_norm": inv.details["norm"],
        },
    )


# ---------------------------------------------------------------------------
# solution error and measurement probability
# ---------------------------------------------------------------------------

def solution_error_report(inst: Instance, params: TaylorParams,
                          sol: BlockSolution) -> BoundReport:
    """Check ||x(jh) - x_{j,0}|| <= 2.8 kappa_V j (|x_in| + mh|b|)/(k+1)! for all j.

    The oracle trajectory is evaluated at every step; (k+1)! enters in
    log space. j = 0 shares the initial condition exactly and is checked
    for literal equality.
    """
    params.require_bound_hypotheses()
    _require_eigenvalue_hypotheses(inst.eigenvalues, params.h)

    m, h = params.m, params.h
    weight = float(np.linalg.norm(inst.x_in) + m * h * np.linalg.norm(inst.b))
    if weight == 0.0:
        raise DegenerateInputError("x_in and b both vanish; the bound degenerates")
    log_scale = math.log(2.8 * inst.kappa_V * weight) - math.lgamma(params.k + 2)

    history = sol.step_states()
    errors = np.empty(m + 1)
    for j in range(m + 1):
        errors[j] = np.linalg.norm(reference_solution(inst, j * h) - history[j])
    if errors[0] != 0.0:
        raise ParameterError("block (0,0) does not equal x_in; solver integrity broken")

    ratios = np.zeros(m + 1)
    for j in range(1, m + 1):
        ratios[j] = errors[j] / math.exp(log_scale + math.log(j))
    worst_j = int(np.argmax(ratios))
    label = f"{inst.label or 'instance'}, m={m}, k={params.k}"
    return BoundReport(
        bound_name="solution-error",
        instances_checked=1,
        worst_ratio=float(ratios.max()),
        argmax_instance=f"{label}, j={worst_j}",
        details={
            "errors": errors.tolist(),
            "worst_step": worst_j,
            "bound_at_worst": math.exp(log_scale + math.log(max(worst_j, 1))),
        },
    )


def success_probability_report(inst: Instance, params: TaylorParams,
                               sol: BlockSolution,
                               decay: DecayProfile | None = None) -> BoundReport:
    """Check the measurement bound ||x_{m,0}|| / ||x|| >= 1/sqrt(p + 77 m g^2).

    g is the step-grid decay ratio (the proof consumes only grid values).
    Requires the truncation condition (k+1)! >= 70 kappa_V m (|x_in|+mh|b|)/q,
    checked in log space; when p = m the implied squared success probability
    over the padded blocks is at least 1/(78 g^2), recorded in the details.
    """
    m, p, h = params.m, params.p, params.h
    if decay is None:
        decay = decay_profile(inst, params.T, m, refine=0)
    weight = float(np.linalg.norm(inst.x_in) + m * h * np.linalg.norm(inst.b))
    log_needed = math.log(70.0 * inst.kappa_V * m * weight) - math.log(decay.q)
    if math.lgamma(params.k + 2) < log_needed:
        raise HypothesisError(
            f"(k+1)! < 70 kappa_V m (|x_in|+mh|b|)/||x(T)|| at k={params.k}; "
            "bound not claimed"
        )

    g = decay.g_grid
    block_ratio = float(np.linalg.norm(sol.final_state())
                        / np.linalg.norm(sol.vector()))
    bound = 1.0 / math.sqrt(p + 77.0 * m * g * g)
    success_prob = (p + 1) * block_ratio**2

    details = {
        "block_ratio": block_ratio,
        "bound": bound,
        "g_grid": g,
        "success_prob": success_prob,
    }
    if p == m:
        details["success_prob_floor"] = 1.0 / (78.0 * g * g)
    label = f"{inst.label or 'instance'}, m={m}, k={params.k}, p={p}"
    return BoundReport(
        bound_name="success-probability",
        instances_checked=1,
        worst_ratio=bound / block_ratio,
        argmax_instance=label,
        details=details,
    )


# ---------------------------------------------------------------------------
# state-distance predicates (reused by the pipeline error accounting)
# ---------------------------------------------------------------------------

def normalized_distance_bound(alpha: float, beta: float) -> float:
    """Bound 2 beta / alpha on the distance between normalized vectors, given
    ||psi|| >= alpha > 0 and ||psi - phi|| <= beta."""
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    return 2.0 * beta / alpha


def conditional_distance_bound(alpha: float, delta: float) -> float:
    """Bound 2 delta / (alpha - delta) on the distance between selected
    sub-states of two close two-component states; requires delta < alpha."""
    if not 0 <= delta < alpha:
        raise ParameterError(f"need 0 <= delta < alpha, got delta={delta}, alpha={alpha}")
    return 2.0 * delta / (alpha - delta)


def perturbed_amplitude_floor(alpha: float, delta: float) -> float:
    """Floor alpha - delta on the selected amplitude of the perturbed state."""
    if not 0 <= delta < alpha:
        raise ParameterError(f"need 0 <= delta < alpha, got delta={delta}, alpha={alpha}")
    return alpha - delta


def _random_unit(rng, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def state_distance_checks(trials: int, seed: int, dim: int = 6) -> dict:
    """Empirically verify the three state-distance inequalities.

    Draws `trials` random hypothesis-satisfying pairs for each inequality
    (rejection-sampling the two-component cases to delta < alpha) and
    records the worst slack; any violation beyond 1e-12 is listed with its
    counterexample.
    """
    if trials < 1:
        raise ParameterError(f"need at least one trial, got {trials}")
    rng = np.random.default_rng(seed)
    worst = {"normalized_distance": math.inf,
             "conditional_distance": math.inf,
             "amplitude_floor": math.inf}
    violations = []

    # Inequality 1: distance between normalized vectors.
    done = 0
    while done < trials:
        psi = (rng.normal(size=dim) + 1j * rng.normal(size=dim)) * rng.uniform(0.05, 2.0)
        norm_psi = np.linalg.norm(psi)
        phi = psi + _random_unit(rng, dim) * rng.uniform(0.0, 1.5) * norm_psi
        norm_phi = np.linalg.norm(phi)
        if norm_phi < 1e-9 * norm_psi:
            continue
        alpha, beta = norm_psi, np.linalg.norm(psi - phi)
        dist = np.linalg.norm(psi / norm_psi - phi / norm_phi)
        slack = normalized_distance_bound(alpha, beta) - dist
        worst["normalized_distance"] = min(worst["normalized_distance"], slack)
        if slack < -1e-12:
            violations.append({"bound": "normalized_distance", "slack": slack,
                               "alpha": alpha, "beta": float(beta)})
        done += 1

    # Inequalities 2 and 3: two-component states with delta < alpha.
    done = 0
    while done < trials:
        alpha = rng.uniform(0.05, 1.0)
        psi0, psi1 = _random_unit(rng, dim), _random_unit(rng, dim)
        sigma = rng.uniform(0.0, 0.3)
        beta = min(1.0, max(0.0, alpha + sigma * rng.normal()))
        phi0 = psi0 + sigma * (rng.normal(size=dim) + 1j * rng.normal(size=dim))
        phi1 = psi1 + sigma * (rng.normal(size=dim) + 1j * rng.normal(size=dim))
        phi0 /= np.linalg.norm(phi0)
        phi1 /= np.linalg.norm(phi1)
        psi = np.concatenate([alpha * psi0, math.sqrt(1 - alpha**2) * psi1])
        phi = np.concatenate([beta * phi0, math.sqrt(1 - beta**2) * phi1])
        delta = float(np.linalg.norm(psi - phi))
        if delta >= alpha:
            continue
        dist0 = np.linalg.norm(phi0 - psi0)
        slack2 = conditional_distance_bound(alpha, delta) - dist0
        slack3 = beta - perturbed_amplitude_floor(alpha, delta)
        worst["conditional_distance"] = min(worst["conditional_distance"], slack2)
        worst["amplitude_floor"] = min(worst["amplitude_floor"], slack3)
        for name, slack in (("conditional_distance", slack2), ("amplitude_floor", slack3)):
            if slack < -1e-12:
                violations.append({"bound": name, "slack": float(slack),
                                   "alpha": alpha, "delta": delta})
        done += 1

    return {
        "schema": 1,
        "trials": trials,
        "seed": seed,
        "worst_slack": worst,
        "violations": violations,
        "passed": not violations,
    }
