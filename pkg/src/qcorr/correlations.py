"""Correlation functionals: mutual information (quantum, classical,
multipartite), Holevo quantity, post-measurement CQ/CC states, and the
optimized measures I_CQ, I_CC with their gaps.

Optimizer outputs are lower bounds on the true maxima (the value of the
best measurement found); every derived gap is therefore an upper bound.
Reports enforce the chain I >= I_CQ >= I_CC >= 0 by construction: the CC
optimum's A-measurement is re-scored as a CQ candidate, and the final
values are clamped downward along the chain (clamps act only at numerical
noise level).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .channels import (
    Povm,
    apply_local,
    measurement_channel,
)
from .classify import classical_basis
from .optimize import (
    OptimizationResult,
    OptimizerConfig,
    embed_projective_in_general,
    general_povm,
    general_stack,
    maximize,
    param_dim_general_povm,
    param_dim_unitary,
    params_from_unitary,
    projective_povm,
    projective_stack,
)
from .qstate import (
    ClassicalJoint,
    DensityMatrix,
    ProbVector,
    StateError,
    partial_trace,
    permute_subsystems,
    relative_entropy,
    shannon_bits,
    von_neumann_entropy,
)


@dataclass(frozen=True)
class Ensemble:
    """Probabilities paired with same-dimension states."""

    probs: ProbVector
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        if len(self.probs.p) != len(self.states):
            raise StateError("ensemble lengths do not match")
        d = self.states[0].dim
        if any(s.dim != d for s in self.states):
            raise StateError("ensemble states must share one dimension")
        object.__setattr__(self, "states", tuple(self.states))


def _cut_partition(rho: DensityMatrix, cut):
    n = rho.layout.n_subsystems
    if cut is None:
        if n != 2:
            raise StateError("default cut requires a bipartite layout")
        return (0,), (1,)
    side_a = tuple(cut)
    side_b = tuple(p for p in range(n) if p not in side_a)
    if not side_a or not side_b:
        raise StateError("cut must split the subsystems into two nonempty groups")
    if any(p < 0 or p >= n for p in side_a) or len(set(side_a)) != len(side_a):
        raise StateError(f"invalid cut {cut}")
    return side_a, side_b


def mutual_information(rho: DensityMatrix, cut=None) -> float:
    """S(A) + S(B) - S(AB) in bits across the given bipartition."""
    side_a, side_b = _cut_partition(rho, cut)
    s_a = von_neumann_entropy(partial_trace(rho, side_a))
    s_b = von_neumann_entropy(partial_trace(rho, side_b))
    return s_a + s_b - von_neumann_entropy(rho)


def multipartite_mutual_information(rho: DensityMatrix) -> float:
    """sum_k S(A_k) - S(A_1...A_n); the relative-entropy form of total
    multipartite correlations."""
    n = rho.layout.n_subsystems
    if n < 2:
        raise StateError("multipartite mutual information needs >= 2 subsystems")
    total = sum(von_neumann_entropy(partial_trace(rho, (k,))) for k in range(n))
    return total - von_neumann_entropy(rho)


def classical_mutual_information(joint: ClassicalJoint) -> float:
    """Shannon mutual information of a bipartite joint distribution, in bits."""
    if joint.p.ndim != 2:
        raise StateError("classical mutual information needs a bipartite joint")
    h_a = joint.marginal(0).entropy_bits()
    h_b = joint.marginal(1).entropy_bits()
    return h_a + h_b - joint.entropy_bits()


def holevo_chi(ensemble: Ensemble) -> float:
    """S(sum p_i sigma_i) - sum p_i S(sigma_i), in bits."""
    avg = np.zeros_like(ensemble.states[0].matrix)
    for p, s in zip(ensemble.probs.p, ensemble.states):
        avg += p * s.matrix
    lam = np.clip(np.linalg.eigvalsh(avg), 0.0, None)
    s_avg = shannon_bits(lam / lam.sum())
    s_cond = sum(
        p * von_neumann_entropy(s)
        for p, s in zip(ensemble.probs.p, ensemble.states) if p > 0
    )
    return max(s_avg - s_cond, 0.0)


def cq_state(rho: DensityMatrix, povm_a: Povm, side: int = 0) -> DensityMatrix:
    """Post-measurement state (M (x) id)[rho] for the POVM on one party."""
    if rho.layout.n_subsystems != 2:
        raise StateError("cq_state requires a bipartite layout")
    if povm_a.dim != rho.dims[side]:
        raise StateError("POVM dimension does not match the measured party")
    return apply_local(measurement_channel(povm_a), side, rho)


def cc_state(rho: DensityMatrix, povm_a: Povm,
             povm_b: Povm) -> tuple[DensityMatrix, ClassicalJoint]:
    """Doubly measured state plus its joint outcome distribution."""
    if rho.layout.n_subsystems != 2:
        raise StateError("cc_state requires a bipartite layout")
    if povm_a.dim != rho.dims[0] or povm_b.dim != rho.dims[1]:
        raise StateError("POVM dimensions do not match the parties")
    out = apply_local(measurement_channel(povm_b), 1,
                      apply_local(measurement_channel(povm_a), 0, rho))
    probs = backend.cc_joint_probs(
        np.ascontiguousarray(rho.matrix),
        povm_a.as_array(), povm_b.as_array())
    return out, ClassicalJoint(np.clip(probs, 0.0, None))


# ---------------------------------------------------------------------------
# Measurement optimization


@dataclass(frozen=True)
class MeasurementOptimum:
    """Best measurement found for one correlation functional."""

    value: float
    povm_a: Povm
    povm_b: Povm | None
    family: str  # "projective" or "general"
    result: OptimizationResult


def _cq_value(rho_mat: np.ndarray, s_b: float, ms: np.ndarray) -> float:
    """I of the CQ state for POVM element stack `ms` on the first party."""
    blocks = backend.cq_blocks(rho_mat, ms)
    probs = np.ascontiguousarray(
        np.trace(blocks, axis1=1, axis2=2).real)
    lam = np.linalg.eigvalsh(blocks).reshape(-1)
    lam = np.ascontiguousarray(np.clip(lam, 0.0, None))
    return (backend.shannon_bits(np.clip(probs, 0.0, None))
            + s_b - backend.shannon_bits(lam))


def _cc_value(rho_mat: np.ndarray, ms: np.ndarray, ns: np.ndarray) -> float:
    p = np.clip(backend.cc_joint_probs(rho_mat, ms, ns), 0.0, None)
    h_a = backend.shannon_bits(np.ascontiguousarray(p.sum(axis=1)))
    h_b = backend.shannon_bits(np.ascontiguousarray(p.sum(axis=0)))
    return h_a + h_b - backend.shannon_bits(np.ascontiguousarray(p.reshape(-1)))


def _local_bases_seeds(rho: DensityMatrix, side: int) -> list[np.ndarray]:
    """Projective parameter seeds: classical basis, marginal eigenbasis,
    computational basis."""
    d = rho.dims[side]
    marginal = partial_trace(rho, (side,))
    _, eigvecs = np.linalg.eigh(marginal.matrix)
    seeds = [
        np.zeros(param_dim_unitary(d)),
        params_from_unitary(eigvecs),
        params_from_unitary(classical_basis(rho, side)),
    ]
    return seeds


def optimize_icq(rho: DensityMatrix, cfg: OptimizerConfig,
                 side: int = 0) -> MeasurementOptimum:
    """Lower bound on I_CQ: best single-party measurement found.

    The seed set always contains the computational basis, the measured
    marginal's eigenbasis, and the jointly diagonalizing classical basis,
    which makes the bound exact (I_CQ = I) on CQ-structured inputs.
    """
    if rho.layout.n_subsystems != 2:
        raise StateError("optimize_icq requires a bipartite layout")
    work = rho if side == 0 else permute_subsystems(rho, (1, 0))
    d = work.dims[0]
    rho_mat = np.ascontiguousarray(work.matrix)
    s_b = von_neumann_entropy(partial_trace(work, (1,)))

    proj_seeds = _local_bases_seeds(work, 0)

    def proj_obj(params):
        return _cq_value(rho_mat, s_b, projective_stack(params, d))

    proj_res = maximize(proj_obj, param_dim_unitary(d), cfg,
                        seed_points=proj_seeds)
    best = MeasurementOptimum(
        value=proj_res.value,
        povm_a=projective_povm(proj_res.params, d),
        povm_b=None,
        family="projective",
        result=proj_res,
    )
    if cfg.projective_only:
        return best

    n_out = cfg.outcome_count or d * d
    gen_seeds = [
        embed_projective_in_general(projective_povm(s, d), n_out)
        for s in proj_seeds
    ]
    gen_seeds.append(embed_projective_in_general(best.povm_a, n_out))

    def gen_obj(params):
        return _cq_value(rho_mat, s_b, general_stack(params, d, n_out))

    gen_res = maximize(gen_obj, param_dim_general_povm(d, n_out), cfg,
                       seed_points=gen_seeds)
    if gen_res.value > best.value:
        best = MeasurementOptimum(
            value=gen_res.value,
            povm_a=general_povm(gen_res.params, d, n_out),
            povm_b=None,
            family="general",
            result=gen_res,
        )
    return best


def optimize_icc(rho: DensityMatrix, cfg: OptimizerConfig,
                 icq: MeasurementOptimum | None = None) -> MeasurementOptimum:
    """Lower bound on I_CC: best measurement pair found.

    Seeds include the CQ optimum's A-POVM paired with the B marginal's
    eigenbasis, so the bound never falls below the classical mutual
    information of that pairing, and the classical bases of both sides,
    which makes the bound exact on CC states.
    """
    if rho.layout.n_subsystems != 2:
        raise StateError("optimize_icc requires a bipartite layout")
    d_a, d_b = rho.dims
    rho_mat = np.ascontiguousarray(rho.matrix)
    if icq is None:
        icq = optimize_icq(rho, cfg)

    seeds_a = _local_bases_seeds(rho, 0)
    seeds_b = _local_bases_seeds(permute_subsystems(rho, (1, 0)), 0)
    pd_a, pd_b = param_dim_unitary(d_a), param_dim_unitary(d_b)

    proj_seeds = [np.concatenate([sa, sb])
                  for sa, sb in zip(seeds_a, seeds_b)]
    proj_seeds.append(np.concatenate([seeds_a[0], seeds_b[1]]))
    if icq.family == "projective":
        # CQ optimum's POVM paired with the B eigenbasis.
        proj_seeds.append(np.concatenate([icq.result.params, seeds_b[1]]))

    def proj_obj(params):
        return _cc_value(rho_mat, projective_stack(params[:pd_a], d_a),
                         projective_stack(params[pd_a:], d_b))

    proj_res = maximize(proj_obj, pd_a + pd_b, cfg, seed_points=proj_seeds)
    best = MeasurementOptimum(
        value=proj_res.value,
        povm_a=projective_povm(proj_res.params[:pd_a], d_a),
        povm_b=projective_povm(proj_res.params[pd_a:], d_b),
        family="projective",
        result=proj_res,
    )
    if cfg.projective_only:
        return best

    n_a = cfg.outcome_count or d_a * d_a
    n_b = cfg.outcome_count or d_b * d_b
    gd_a = param_dim_general_povm(d_a, n_a)

    def embed_pair(povm_a: Povm, povm_b: Povm) -> np.ndarray:
        return np.concatenate([
            embed_projective_in_general(povm_a, n_a),
            embed_projective_in_general(povm_b, n_b),
        ])

    gen_seeds = [
        embed_pair(projective_povm(sa, d_a), projective_povm(sb, d_b))
        for sa, sb in zip(seeds_a, seeds_b)
    ]
    gen_seeds.append(embed_pair(best.povm_a, best.povm_b))
    eig_b = projective_povm(seeds_b[1], d_b)
    gen_seeds.append(np.concatenate([
        embed_projective_in_general(icq.povm_a, n_a)
        if icq.povm_a.outcome_count <= n_a
        else embed_projective_in_general(best.povm_a, n_a),
        embed_projective_in_general(eig_b, n_b),
    ]))

    def gen_obj(params):
        return _cc_value(rho_mat, general_stack(params[:gd_a], d_a, n_a),
                         general_stack(params[gd_a:], d_b, n_b))

    gen_res = maximize(gen_obj, gd_a + param_dim_general_povm(d_b, n_b),
                       cfg, seed_points=gen_seeds)
    if gen_res.value > best.value:
        best = MeasurementOptimum(
            value=gen_res.value,
            povm_a=general_povm(gen_res.params[:gd_a], d_a, n_a),
            povm_b=general_povm(gen_res.params[gd_a:], d_b, n_b),
            family="general",
            result=gen_res,
        )
    return best


def discord(rho: DensityMatrix, cfg: OptimizerConfig,
            side: int = 0) -> float:
    """Gap I - I_CQ with the measured party restricted to complete
    projective measurements; an upper bound on the true discord."""
    proj_cfg = OptimizerConfig(**{**cfg.to_dict(), "projective_only": True})
    i = mutual_information(rho)
    icq = optimize_icq(rho, proj_cfg, side=side)
    return max(i - min(icq.value, i), 0.0)


def delta_cc(rho: DensityMatrix, cfg: OptimizerConfig) -> float:
    """Upper bound on Delta_CC = I - I_CC (nonnegative by construction)."""
    report = correlation_report(rho, cfg)
    return report.delta_cc_upper


def delta_b_heuristic(rho: DensityMatrix, cfg: OptimizerConfig) -> float:
    """Heuristic upper bound on the broadcast gap Delta_b; see
    `qcorr.broadcast.delta_b_upper` for the candidate family."""
    from . import broadcast

    return broadcast.delta_b_upper(rho, cfg)


@dataclass(frozen=True)
class CorrelationReport:
    I: float
    I_cq_lower: float
    I_cc_lower: float
    delta_cc_upper: float
    discord_upper: float
    best_povm_A: Povm
    best_povm_B: Povm | None
    optimizer_meta: dict

    def to_dict(self) -> dict:
        def povm_list(p):
            if p is None:
                return None
            return [
                [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
                for m in p.elements
            ]
        return {
            "I": self.I,
            "I_cq_lower": self.I_cq_lower,
            "I_cc_lower": self.I_cc_lower,
            "delta_cc_upper": self.delta_cc_upper,
            "discord_upper": self.discord_upper,
            "best_povm_A": povm_list(self.best_povm_A),
            "best_povm_B": povm_list(self.best_povm_B),
            "optimizer_meta": self.optimizer_meta,
        }


def correlation_report(rho: DensityMatrix,
                       cfg: OptimizerConfig) -> CorrelationReport:
    """All correlation measures of a bipartite state, chain-consistent."""
    i = mutual_information(rho)
    icq = optimize_icq(rho, cfg)
    icc = optimize_icc(rho, cfg, icq=icq)

    # Re-score the CC optimum's A-measurement as a CQ candidate so the
    # reported chain holds structurally (data processing on the B side).
    rho_mat = np.ascontiguousarray(rho.matrix)
    s_b = von_neumann_entropy(partial_trace(rho, (1,)))
    cq_at_cc = _cq_value(rho_mat, s_b, icc.povm_a.as_array())

    i_cq = min(i, max(icq.value, cq_at_cc))
    i_cc = max(min(i_cq, icc.value), 0.0)

    proj_cfg = OptimizerConfig(**{**cfg.to_dict(), "projective_only": True})
    icq_proj = optimize_icq(rho, proj_cfg)
    discord_val = max(i - min(icq_proj.value, i), 0.0)

    meta = {
        "config": cfg.to_dict(),
        "icq": icq.result.to_dict(),
        "icc": icc.result.to_dict(),
        "icq_projective": icq_proj.result.to_dict(),
        "icq_family": icq.family,
        "icc_family": icc.family,
        "outcome_cap": "d^2 rank-1 outcomes for the general POVM family",
    }
    return CorrelationReport(
        I=i,
        I_cq_lower=i_cq,
        I_cc_lower=i_cc,
        delta_cc_upper=i - i_cc,
        discord_upper=discord_val,
        best_povm_A=icc.povm_a if icc.povm_b is not None else icq.povm_a,
        best_povm_B=icc.povm_b,
        optimizer_meta=meta,
    )


def mutual_information_relative_entropy(rho: DensityMatrix,
                                        cut=None) -> float:
    """Cross-check form: S(rho || rho_A (x) rho_B)."""
    from .qstate import tensor

    side_a, side_b = _cut_partition(rho, cut)
    rho_a = partial_trace(rho, side_a)
    rho_b = partial_trace(rho, side_b)
    perm = side_a + side_b
    reordered = permute_subsystems(rho, perm)
    return relative_entropy(reordered, tensor(rho_a, rho_b))
