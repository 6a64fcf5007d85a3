"""Completion engines: full-covariance, PPCA, and factor-analysis models.

All three share the same block coordinate descent driver: impute the hidden
blocks of every view from the current model matrix, average the completed
kernels, refit the model, and repeat until the objective (a sum of LogDet
divergences) stops moving.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, NotPositiveDefiniteError, NumericalError
from .linalg import cholesky_lower, eigh_sorted, logdet, symmetrize
from .views import Fill, PartitionedView, VisibilityPattern, apply_mask, partition

METHOD_FC = "fc"
METHOD_PCA = "pca"
METHOD_FA = "fa"
METHODS = (METHOD_FC, METHOD_PCA, METHOD_FA)

CRITERION_GK = "gk"
CRITERION_KAISER = "kaiser"

# Relative floor keeping noise variances strictly positive in the FA update.
PSI_FLOOR_REL = 1e-10


@dataclass(frozen=True)
class FullModel:
    """Unrestricted model matrix."""

    matrix: np.ndarray

    kind = METHOD_FC

    def materialize(self) -> np.ndarray:
        return self.matrix


@dataclass(frozen=True)
class PcaModel:
    """Low-rank plus isotropic noise: W W^T + sigma2 I."""

    W: np.ndarray
    sigma2: float

    kind = METHOD_PCA

    def materialize(self) -> np.ndarray:
        return symmetrize(self.W @ self.W.T + self.sigma2 * np.eye(self.W.shape[0]))


@dataclass(frozen=True)
class FaModel:
    """Low-rank plus diagonal noise: W W^T + diag(psi)."""

    W: np.ndarray
    psi: np.ndarray

    kind = METHOD_FA

    def materialize(self) -> np.ndarray:
        return symmetrize(self.W @ self.W.T + np.diag(self.psi))


ModelParams = Union[FullModel, PcaModel, FaModel]


@dataclass(frozen=True)
class CompletionConfig:
    """Driver settings; ``rank``/``rank_criterion`` apply to pca/fa only."""

    method: str = METHOD_FC
    rank: Optional[int] = None
    rank_criterion: Optional[str] = None
    tol: float = 1e-8
    max_iters: int = 500
    reg_epsilon: float = 1e-3
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.reg_epsilon < 0:
            raise ValueError("reg_epsilon must be nonnegative")
        if self.rank_criterion is not None and self.rank_criterion not in (
            CRITERION_GK,
            CRITERION_KAISER,
        ):
            raise ValueError(f"unknown rank criterion {self.rank_criterion!r}")


@dataclass
class CompletionResult:
    completed: list[np.ndarray]
    model: ModelParams
    trace: list[float]
    iterations: int
    converged: bool
    dof: int
    rank: Optional[int] = None
    iter_ms: list[float] = field(default_factory=list)


def average_kernel(qs: Sequence[np.ndarray]) -> np.ndarray:
    """Entrywise mean of K same-sized symmetric matrices."""
    if len(qs) < 1:
        raise ValueError("need at least one matrix")
    shape = qs[0].shape
    for q in qs[1:]:
        if q.shape != shape:
            raise DimensionError(f"dimension mismatch: {shape} vs {q.shape}")
    out = np.zeros(shape)
    for q in qs:  # fixed order, independent of any parallel imputation
        out += q
    return out / len(qs)


def regularize(s: np.ndarray, n_views: int, eps: float) -> np.ndarray:
    """Numerical-stability transform (K*S + eps*I) / (K + eps)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return s
    return (n_views * s + eps * np.eye(s.shape[0])) / (n_views + eps)


def impute_view(q_vv: np.ndarray, m_parts: PartitionedView) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian conditional-moment re-estimation of one view's hidden blocks.

    With the model blocks M_vv, M_vh, M_hh under this view's permutation:

        Q_vh = Q_vv M_vv^{-1} M_vh
        Q_hh = M_hh - M_hv M_vv^{-1} M_vh + M_hv M_vv^{-1} Q_vv M_vv^{-1} M_vh

    Inverses are realized by Cholesky solves; Q_hh is symmetrized.
    """
    if q_vv.shape != m_parts.q_vv.shape:
        raise DimensionError(
            f"visible block {q_vv.shape} does not match model block {m_parts.q_vv.shape}"
        )
    try:
        chol = cholesky_lower(m_parts.q_vv)
        x = sla.cho_solve((chol, True), m_parts.q_vh)  # M_vv^{-1} M_vh
    except NotPositiveDefiniteError as exc:
        raise NumericalError(f"model visible block is numerically singular: {exc}") from exc
    q_vh = q_vv @ x
    q_hh = m_parts.q_hh - m_parts.q_vh.T @ x + x.T @ q_vv @ x
    return q_vh, symmetrize(q_hh)


def fc_model_update(s_reg: np.ndarray) -> FullModel:
    """Full-covariance M-step: the model matrix is the average kernel itself."""
    cholesky_lower(s_reg)  # reject non-PD input up front
    return FullModel(matrix=s_reg)


def pca_model_update(s_reg: np.ndarray, q: int) -> PcaModel:
    """Closed-form joint optimum of (W, sigma2) for the PPCA model.

    sigma2 is the mean of the trailing ell-q eigenvalues of the average
    kernel; W spans the top-q eigenvectors scaled by sqrt(lambda_j - sigma2),
    with the arbitrary rotation fixed to the identity.
    """
    ell = s_reg.shape[0]
    if not 1 <= q <= ell - 1:
        raise ValueError(f"rank q={q} out of range [1, {ell - 1}]")
    eig = eigh_sorted(s_reg)
    sigma2 = float(np.mean(eig.eigenvalues[q:]))
    gap = np.clip(eig.eigenvalues[:q] - sigma2, 0.0, None)
    w = eig.eigenvectors[:, :q] * np.sqrt(gap)
    return PcaModel(W=w, sigma2=sigma2)


def fa_estep(s: np.ndarray, w: np.ndarray, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Latent second moments (S_xz, S_zz) given current FA parameters.

    Uses the Woodbury form of (W W^T + diag(psi))^{-1} so only a q x q system
    is factored.
    """
    q = w.shape[1]
    psi_inv = 1.0 / psi
    f = w.T * psi_inv  # W^T diag(psi)^{-1}
    c = np.eye(q) + f @ w
    try:
        c_chol = cholesky_lower(symmetrize(c))
        b = f - (f @ w) @ sla.cho_solve((c_chol, True), f)  # W^T M^{-1}
    except NotPositiveDefiniteError as exc:
        raise NumericalError("FA E-step capacitance matrix is singular") from exc
    s_xz = s @ b.T
    s_zz = np.eye(q) - b @ w + b @ s_xz
    return s_xz, s_zz


def fa_model_update(s_reg: np.ndarray, prev: FaModel) -> FaModel:
    """One EM step for the factor-analysis model.

    W_new = S_xz S_zz^{-1}, psi_new = diag(S - S_xz S_zz^{-1} S_xz^T); the
    noise variances are floored to stay strictly positive.
    """
    if np.any(prev.psi <= 0):
        raise ValueError("previous noise variances must be positive")
    ell = s_reg.shape[0]
    s_xz, s_zz = fa_estep(s_reg, prev.W, prev.psi)
    try:
        w_new = np.linalg.solve(s_zz.T, s_xz.T).T  # S_xz S_zz^{-1}
    except np.linalg.LinAlgError as exc:
        raise NumericalError("FA M-step latent covariance is singular") from exc
    psi_new = np.diag(s_reg) - np.einsum("ij,ij->i", s_xz, w_new)
    floor = PSI_FLOOR_REL * np.trace(s_reg) / ell
    psi_new = np.maximum(psi_new, floor)
    return FaModel(W=w_new, psi=psi_new)


def objective(qs: Sequence[np.ndarray], model: ModelParams) -> float:
    """Sum over views of LogDet(Q^(k), M) with the model matrix materialized."""
    m = model.materialize()
    ell = m.shape[0]
    chol_m = cholesky_lower(m)
    logdet_m = float(2.0 * np.sum(np.log(np.diag(chol_m))))
    total = 0.0
    for q in qs:
        if q.shape != m.shape:
            raise DimensionError(f"dimension mismatch: {q.shape} vs {m.shape}")
        minv_q = sla.cho_solve((chol_m, True), q)
        total += 0.5 * (logdet_m - logdet(q) + float(np.trace(minv_q)) - ell)
    return total


def select_rank(s: np.ndarray, criterion: str) -> int:
    """Guttman-Kaiser (above the spectrum mean) or Kaiser (above one) count.

    The raw count is clamped into [1, ell-1].
    """
    vals = eigh_sorted(s).eigenvalues
    ell = len(vals)
    if criterion == CRITERION_GK:
        count = int(np.sum(vals > np.mean(vals)))
    elif criterion == CRITERION_KAISER:
        count = int(np.sum(vals > 1.0))
    else:
        raise ValueError(f"unknown rank criterion {criterion!r}")
    return max(1, min(count, ell - 1))


def degrees_of_freedom(method: str, ell: int, q: Optional[int] = None) -> int:
    """Parameter count of each covariance model."""
    if method == METHOD_FC:
        return (ell + 1) * ell // 2
    if q is None or not 1 <= q <= ell - 1:
        raise ValueError(f"rank q={q} out of range [1, {ell - 1}]")
    if method == METHOD_PCA:
        return ell * q + 1 - (q - 1) * q // 2
    if method == METHOD_FA:
        return ell * q + ell - (q - 1) * q // 2
    raise ValueError(f"unknown method {method!r}")


def _initial_model(method: str, s_reg: np.ndarray, q: Optional[int]) -> ModelParams:
    if method == METHOD_FC:
        return fc_model_update(s_reg)
    if method == METHOD_PCA:
        return pca_model_update(s_reg, q)
    # FA has no closed-form fit; seed it with the PPCA optimum.
    pca = pca_model_update(s_reg, q)
    return FaModel(W=pca.W, psi=np.full(s_reg.shape[0], pca.sigma2))


def _model_update(method: str, s_reg: np.ndarray, q: Optional[int], prev: ModelParams) -> ModelParams:
    if method == METHOD_FC:
        return fc_model_update(s_reg)
    if method == METHOD_PCA:
        return pca_model_update(s_reg, q)
    return fa_model_update(s_reg, prev)


def run_completion(
    qs_masked: Sequence[np.ndarray],
    pattern: VisibilityPattern,
    cfg: CompletionConfig,
    on_iteration: Optional[Callable[[int, list[np.ndarray], ModelParams], None]] = None,
) -> CompletionResult:
    """Block coordinate descent completing all K views against one model.

    Hidden blocks are zero-initialized, the model starts from the (regularized)
    average kernel, and each iteration imputes every view from the current
    model matrix before a single model update. Stops when the relative change
    of the objective drops below ``cfg.tol``. Visible entries of the inputs
    are never modified. ``on_iteration`` is invoked after every model update
    with (iteration, completed matrices, model) for inspection.
    """
    n_views = pattern.n_views
    if len(qs_masked) != n_views:
        raise DimensionError(
            f"{len(qs_masked)} matrices but pattern has {n_views} views"
        )
    ell = pattern.ell
    for k, q in enumerate(qs_masked):
        if q.shape != (ell, ell):
            raise DimensionError(f"view {k}: expected shape {(ell, ell)}, got {q.shape}")

    # Zero-initialize hidden blocks (also validates the visible blocks).
    completed = [apply_mask(q, h, Fill.ZERO) for q, h in zip(qs_masked, pattern.hidden)]
    for k, h in enumerate(pattern.hidden):
        vis_block = partition(completed[k], h).q_vv
        try:
            cholesky_lower(vis_block)
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(
                f"view {k}: visible block is not positive definite"
            ) from exc

    s0 = average_kernel(completed)
    s0_reg = regularize(s0, n_views, cfg.reg_epsilon)

    rank: Optional[int] = None
    if cfg.method in (METHOD_PCA, METHOD_FA):
        if cfg.rank is not None:
            rank = int(cfg.rank)
        else:
            criterion = cfg.rank_criterion or CRITERION_GK
            rank = select_rank(s0_reg, criterion)
        if not 1 <= rank <= ell - 1:
            raise ValueError(f"rank q={rank} out of range [1, {ell - 1}]")
    dof = degrees_of_freedom(cfg.method, ell, rank)

    if pattern.total_hidden == 0:
        # Imputation is vacuous: fit the model once and stop.
        model = _initial_model(cfg.method, s0_reg, rank)
        if cfg.method == METHOD_FA:
            model = fa_model_update(s0_reg, model)
        trace = [objective(completed, model)]
        return CompletionResult(
            completed=completed,
            model=model,
            trace=trace,
            iterations=1,
            converged=True,
            dof=dof,
            rank=rank,
        )

    model_matrix = s0_reg  # Algorithm start: model matrix = average kernel
    fa_prev = _initial_model(METHOD_FA, s0_reg, rank) if cfg.method == METHOD_FA else None

    vis_idx = []
    hid_idx = []
    for h in pattern.hidden:
        hid = np.array(h, dtype=int)
        hid_idx.append(hid)
        vis_idx.append(np.array(sorted(set(range(ell)) - set(h)), dtype=int))

    def impute_one(k: int):
        if hid_idx[k].size == 0:
            return None
        m_parts = partition(model_matrix, pattern.hidden[k])
        q_vv = completed[k][np.ix_(vis_idx[k], vis_idx[k])]
        return impute_view(q_vv, m_parts)

    trace: list[float] = []
    iter_ms: list[float] = []
    converged = False
    model: ModelParams = FullModel(matrix=model_matrix)
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else None
    try:
        for it in range(1, cfg.max_iters + 1):
            t0 = time.perf_counter()
            try:
                if pool is not None:
                    results = list(pool.map(impute_one, range(n_views)))
                else:
                    results = [impute_one(k) for k in range(n_views)]
                for k, res in enumerate(results):
                    if res is None:
                        continue
                    q_vh, q_hh = res
                    completed[k][np.ix_(vis_idx[k], hid_idx[k])] = q_vh
                    completed[k][np.ix_(hid_idx[k], vis_idx[k])] = q_vh.T
                    completed[k][np.ix_(hid_idx[k], hid_idx[k])] = q_hh

                s = average_kernel(completed)
                s_reg = regularize(s, n_views, cfg.reg_epsilon)
                prev = fa_prev if cfg.method == METHOD_FA else model
                model = _model_update(cfg.method, s_reg, rank, prev)
                if cfg.method == METHOD_FA:
                    fa_prev = model
                model_matrix = model.materialize()
                j = objective(completed, model)
            except (NumericalError, NotPositiveDefiniteError) as exc:
                raise NumericalError(f"iteration {it}: {exc}") from exc
            iter_ms.append((time.perf_counter() - t0) * 1e3)
            trace.append(j)
            if on_iteration is not None:
                on_iteration(it, completed, model)
            if len(trace) >= 2:
                prev_j = trace[-2]
                if abs(j - prev_j) / max(1.0, abs(prev_j)) < cfg.tol:
                    converged = True
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    return CompletionResult(
        completed=completed,
        model=model,
        trace=trace,
        iterations=len(trace),
        converged=converged,
        dof=dof,
        rank=rank,
        iter_ms=iter_ms,
    )
