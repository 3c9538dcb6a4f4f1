"""Random-input comparison of the package control laws against tests/oracles.py."""

import math

import numpy as np

import oracles
from bctrack import controller as C


def random_gains(rng, n):
    return C.ControllerGains(
        k=rng.uniform(0.5, 10, n), lam=rng.uniform(0.1, 2, n),
        eps=rng.uniform(0.1, 3, (n, 4)), eps5=rng.uniform(0.01, 2), tau=rng.uniform(0.001, 0.1, n - 1),
        delta=rng.uniform(0.1, 5), delta_bar=rng.uniform(0.1, 5), Gamma=rng.uniform(0.1, 5),
        Gamma_bar=rng.uniform(0.1, 5), Psi=rng.uniform(0.1, 5), Psi_bar=rng.uniform(0.1, 5),
        epsilon_tanh=rng.uniform(0.01, 2))


def _rel(pkg, oracle):
    val, scale = oracle
    return abs(pkg - val) / max(scale, 1e-300)


def sample_errors(rng):
    """Relative discrepancy of every law at one random input."""
    n = 3
    g = random_gains(rng, n)
    r = lambda lo=-2.0, hi=2.0: float(rng.uniform(lo, hi))
    phi = lambda: rng.uniform(0, 1, rng.integers(2, 8))
    xi, q = r(1, 30), r(0.5, 4)
    zeta, zb, es, sd, b, dyr, th = r(), r(), r(), r(-5, 0), r(), r(), r(0.1, 5)
    p11, p12, p1, p2 = phi(), phi(), phi(), phi()
    ad = C.AdaptiveState(r(0.1, 5), r(0.1, 5), r(0.1, 5))
    out = {}

    out["bipartite_error"] = []
    ys = rng.normal(size=3)
    a = rng.choice([-1, 1], 3) * rng.uniform(0.1, 2, 3)
    v = C.NeighborhoodView(np.array([ys[0], 0.0]), tuple(np.array([y, 0.0]) for y in ys[1:]),
                           tuple(a[1:]), float(a[0]), r(), r())
    out["bipartite_error"] = _rel(C.bipartite_error(v),
                                  oracles.bipartite_error(ys[0], ys[1:], a[1:], a[0], v.y_r))
    out["alpha1"] = _rel(C.virtual_control_1(zeta, zb, es, sd, xi, q, b, dyr, p11, p12, th, g),
                         oracles.alpha1(g.k[0], xi, q, zeta, b, dyr, es, sd, g.eps[0], th, p11, p12, zb))
    eta_prev, dast = r(), r(-20, 20)
    out["alpha2"] = _rel(C.virtual_control_mid(2, zeta, zb, eta_prev, dast, p1, p2, th, g, xi=xi, q=q),
                         oracles.alpha2(g.k[1], zeta, dast, g.eps[1], th, p1, p2, zb, xi, q, eta_prev))
    g4 = random_gains(rng, 4)
    out["alpha_mid"] = _rel(C.virtual_control_mid(3, zeta, zb, eta_prev, dast, p1, p2, th, g4),
                            oracles.alpha_mid(g4.k[2], zeta, dast, g4.eps[2], th, p1, p2, zb, eta_prev))
    ub = C.intermediate_control(zeta, zb, eta_prev, dast, p1, p2, ad, g)
    out["ubar"] = _rel(ub, oracles.ubar(g.k[2], zeta, zb, g.eps[2], ad.Theta_hat, p1, p2, dast,
                                        eta_prev, ad.vartheta_hat, g.epsilon_tanh))
    u = C.actuator_commands(zb, ad.varphi_hat, ub, [1.0], g.eps5)[0]
    out["alpha_bar"] = _rel(u, oracles.alpha_bar(zb, ad.varphi_hat, ub, g.eps5))

    eta = rng.uniform(-1, 1, n)
    fe = rng.uniform(-1, 1, n - 1)
    ast = rng.uniform(-1, 1, n - 1)
    al = ast - fe
    d = C.compensation_derivatives(eta, fe, xi, q, g)
    out["eta1_dot"] = _rel(d[0], oracles.eta1_dot(g.k[0], eta[0], xi, q, ast[0], al[0], eta[1], g.lam[0]))
    out["eta_mid_dot"] = _rel(d[1], oracles.eta_mid_dot(g.k[1], eta[1], ast[1], al[1], eta[0], eta[2],
                                                        g.lam[1], xi, q, second=True))
    out["eta_last_dot"] = _rel(d[2], oracles.eta_last_dot(g.k[2], eta[2], eta[1], g.lam[2]))

    Delta = r(0, 10)
    pkg = C.adaptive_derivatives(Delta, zb, ub, g, ad)
    ref = oracles.adaptive(Delta, g.delta_bar, ad.Theta_hat, g.Gamma, g.Gamma_bar, ad.vartheta_hat,
                           g.Psi, g.Psi_bar, ad.varphi_hat, zb, ub, g.epsilon_tanh)
    out["adaptive"] = max(_rel(a_, b_) for a_, b_ in zip(pkg, ref))
    zbars = rng.uniform(-2, 2, n)
    phis = [(phi(), phi()) for _ in range(n)]
    out["delta"] = _rel(C.delta_accumulate(zbars, phis, xi, g),
                        oracles.delta(g.delta, zbars, phis, g.eps, xi))
    out["filter_rate"] = _rel(C.filter_derivative(ast[0], al[0], g.tau[0]),
                              oracles.filter_rate(ast[0], al[0], g.tau[0]))
    return out


def worst_errors(n_samples=1000, seed=0):
    rng = np.random.default_rng(seed)
    worst = {}
    for _ in range(n_samples):
        for k, e in sample_errors(rng).items():
            worst[k] = max(worst.get(k, 0.0), e if math.isfinite(e) else math.inf)
    return worst
