"""Shared builders for experiment configurations used across test modules."""

from gpucb import BetaKind, BetaSchedule, KernelFamily, KernelSpec
from gpucb.config import ExperimentConfig, ObjectiveSpec
from gpucb.rkhs import Box


def make_config(
    family=KernelFamily.MATERN,
    nu=1.5,
    lengthscale=0.5,
    dim=1,
    rho=1.0,
    noise_kind="normal",
    noise_sigma=0.1,
    horizon=64,
    beta_kind=BetaKind.LOG_PRODUCT,
    delta=0.1,
    c0=1.0,
    c_subg=1.0,
    constant_value=1.0,
    candidates_count=64,
    candidates_method="lattice",
    eval_grid_count=64,
    objective_kind="random",
    m=20,
    B=2.0,
    centers=None,
    coeffs=None,
    seeds=(0,),
    grid_gap=0.0,
) -> ExperimentConfig:
    kernel = KernelSpec(family, nu=nu if family is KernelFamily.MATERN else None,
                        lengthscale=lengthscale)
    config = ExperimentConfig(
        kernel=kernel,
        domain=Box((0.0,) * dim, (1.0,) * dim),
        rho=rho,
        noise_kind=noise_kind,
        noise_sigma=noise_sigma,
        horizon=horizon,
        beta=BetaSchedule(
            kind=beta_kind, delta=delta, c0=c0, c_subg=c_subg, constant_value=constant_value
        ),
        candidates_count=candidates_count,
        candidates_method=candidates_method,
        eval_grid_count=eval_grid_count,
        objective=ObjectiveSpec(kind=objective_kind, m=m, B=B, centers=centers, coeffs=coeffs),
        seeds=tuple(seeds),
        grid_gap=grid_gap,
    )
    config.validate()
    return config
