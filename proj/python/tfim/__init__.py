"""Transverse-field Ising model in space-time: Python front end to the C++ core."""

from ._tfim import (
    E_function,
    EstimationError,
    check_config,
    constant_A,
    constant_B,
    gap_crossing,
    lambda_c_1d,
    rn_bound,
    rn_density,
    ring_gap,
    run_config,
)

__all__ = [
    "E_function",
    "EstimationError",
    "check_config",
    "constant_A",
    "constant_B",
    "correlation",
    "gap_crossing",
    "lambda_c_1d",
    "rn_bound",
    "rn_density",
    "ring_gap",
    "run_config",
]


def correlation(points, *, N=1, beta=1.0, lam=1.0, delta=1.0, space="f", time="f",
                method="oracle", n_samples=100000, seed=1):
    """<prod sigma3> at space-time points [(x, t), ...] on a d = 1 chain.

    Returns (estimate, stderr); stderr is 0 for the exact oracle.
    """
    pts = "; ".join(f"{x}@{t!r}" for x, t in points)
    b = "inf" if beta == float("inf") else repr(float(beta))
    text = (f"kind = correlation\nN = {N}\nbeta = {b}\nspace = {space}\ntime = {time}\n"
            f"lambda = {lam!r}\ndelta = {delta!r}\nmethod = {method}\npoints = {pts}\n"
            f"n_samples = {n_samples}\nseed = {seed}\n")
    table = run_config(text)["tables"]["correlation"]
    row = dict(zip(table["columns"], table["rows"][0]))
    return float(row["estimate"]), float(row["stderr"])
