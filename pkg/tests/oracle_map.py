"""Quadrature counterpart of every closed-form oracle key."""

from hardy_verify.functionals import (
    BoundaryWeight, KernelKind, eval_K0, eval_K1, eval_L, eval_prop3_split,
)

_K1 = {
    "K_m_positive": KernelKind.EXTERIOR_M_POSITIVE,
    "K_outer": KernelKind.EXTERIOR_OUTER,
    "K_inner": KernelKind.EXTERIOR_INNER,
    "K_log_plain": KernelKind.EXTERIOR_LOG_PLAIN,
}
_K0 = {
    "K0_inner_r1n": BoundaryWeight.INNER_R1N,
    "K0_inner_r1p": BoundaryWeight.INNER_R1P,
    "K0_outer_r1n_limit": BoundaryWeight.OUTER_R1N_LIMIT,
    "K0_split": BoundaryWeight.SPLIT_GAMMA,
}


def quadrature_value(key, family):
    u, P = family.profile, family.params
    if key == "L":
        return eval_L(u, P).value
    if key in _K1:
        return eval_K1(u, P, _K1[key]).value
    if key in _K0:
        return eval_K0(u, P, _K0[key]).value
    return getattr(eval_prop3_split(u, P), key)
