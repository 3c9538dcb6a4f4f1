"""Compiled closed-loop stepper for second-order built-in plants.

Mirrors ``controller.agent_step`` plus the plant update line for line; the
reference path in ``engine`` is the executable definition and a test keeps
the two in agreement.
"""

import math

import numpy as np
from numba import njit

# gains columns
K1, K2, LAM1, LAM2, EPS1, EPS2, EPS5, TAU, DELTA, DBAR, GAM, GBAR, PSI, PBAR, EPST = (
    0, 1, 2, 3, 4, 8, 12, 13, 14, 15, 16, 17, 18, 19, 20)
N_GAINS = 21

PLANT_NUMERICAL = 0
PLANT_VEHICLE = 1

OK = 0
BOUNDARY = 1
NONFINITE = 2
DEGENERATE = 3

COMPONENTS = ("x", "eta", "filter", "Theta_hat", "vartheta_hat", "varphi_hat")
_LOG_TINY = math.log(2.2250738585072014e-308)


@njit(cache=True, error_model="numpy")
def _sq_basis_norm(xs, nx, c, width):
    """Squared norm of the normalised basis on a diagonal grid; -1 if degenerate."""
    P = c.shape[0]
    w = np.empty(P)
    tot = 0.0
    for k in range(P):
        acc = 0.0
        for j in range(nx):
            d = xs[j] - c[k]
            acc += d * d
        w[k] = math.exp(-0.5 * acc / (width * width))
        tot += w[k]
    if not tot > 0.0:
        return -1.0
    r = 0.0
    for k in range(P):
        v = w[k] / tot
        r += v * v
    return r


@njit(cache=True, error_model="numpy")
def _sigma(prof, t):
    s0, sinf, vs, Ts = prof[0], prof[1], prof[2], prof[3]
    if t >= Ts:
        return sinf, 0.0
    d = t - Ts
    a = vs * t / d
    e = 0.0 if a < _LOG_TINY else math.exp(a)
    return (s0 - sinf) * e + sinf, (s0 - sinf) * (-vs * Ts / (d * d)) * e


@njit(cache=True, error_model="numpy")
def _sgn(v):
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


@njit(cache=True, error_model="numpy")
def advance(n0, n1, total, dt, dW, dec,
            A, b, q, l, gains, reg, prof, leader, c1, c2, width,
            plant, pp, noise_scale,
            fk, fs, fe, fv, fcount, period,
            x, eta, ast, adapt, initialised,
            rec_t, rec_x, rec_z, rec_es, rec_zb, rec_eta, rec_ad, rec_u, rec_w, rec_sig, rec_i):
    """Process steps ``n0..n1-1``; row ``n - n0`` of ``dW`` drives step ``n``.

    Step ``total`` is evaluated and recorded but not integrated.  Returns
    ``(status, step, agent, component, rec_i)``.
    """
    N = A.shape[0]
    M = l.shape[1]
    nx = np.empty((N, 2))
    X = np.empty(1 + 2 * N)
    u = np.empty(M)
    w = np.empty(M)
    for n in range(n0, n1):
        t = n * dt
        s, sd = _sigma(prof, t)
        yr = leader[0] * math.sin(leader[1] * t)
        dyr = leader[0] * leader[1] * math.cos(leader[1] * t)
        last = n == total
        record = n % dec == 0 or last
        if record:
            rec_t[rec_i] = t
            rec_sig[rec_i] = s
        tm = np.fmod(t, period) if period > 0.0 else t
        for i in range(N):
            g = gains[i]
            x1 = x[i, 0]
            x2 = x[i, 1]
            z = abs(b[i]) * (x1 - _sgn(b[i]) * yr)
            for m in range(N):
                if A[i, m] != 0.0:
                    z += abs(A[i, m]) * (x1 - _sgn(A[i, m]) * x[m, 0])
            if abs(z) >= (1.0 - 1e-12) * s:
                return BOUNDARY, n, i, -1, rec_i
            es = math.tan(math.pi * z / (2.0 * s))
            xi = math.pi * (1.0 + es * es) / (2.0 * s)
            mu = 2.0 / math.pi * math.atan(es)
            qi = q[i]
            xq = xi * qi
            # step-1 bases: X11 = [x_i1, (x_m1, x_m2)...], X12 = [x_i1, x_m1...]
            X[0] = x1
            j = 1
            for m in range(N):
                if A[i, m] != 0.0:
                    X[j] = x[m, 0]
                    X[j + 1] = x[m, 1]
                    j += 2
            n11 = _sq_basis_norm(X, j, c1, width)
            X[0] = x1
            j = 1
            for m in range(N):
                if A[i, m] != 0.0:
                    X[j] = x[m, 0]
                    j += 1
            n12 = _sq_basis_norm(X, j, c2, width)
            X[0] = x1
            X[1] = x2
            n21 = _sq_basis_norm(X, 2, c1, width)
            n22 = _sq_basis_norm(X, 2, c2, width)
            if n11 < 0.0 or n12 < 0.0 or n21 < 0.0 or n22 < 0.0:
                return DEGENERATE, n, i, -1, rec_i
            p11 = n11 ** (2.0 / 3.0)
            p21 = n21 ** (2.0 / 3.0)
            Th = adapt[i, 0]
            vt = adapt[i, 1]
            ph = adapt[i, 2]
            e11, e12, e13, e14 = g[EPS1], g[EPS1 + 1], g[EPS1 + 2], g[EPS1 + 3]
            e21, e22, e23, e24 = g[EPS2], g[EPS2 + 1], g[EPS2 + 2], g[EPS2 + 3]

            a0 = -(g[K1] + 1.0) / (xi * qi) * es + (b[i] * dyr + mu * sd) / qi
            G = (0.75 * e11 ** (4.0 / 3.0) * xi ** reg[0] * Th * p11
                 + 0.75 * e13 ** 2 * xi ** reg[1] * Th * n12
                 + 0.75 * xi ** reg[2]
                 + 0.75 * e12 ** (4.0 / 3.0) * xi ** reg[3]
                 + 0.75 * e14 ** 2 * xi ** reg[4]) / qi
            if not initialised:
                ast[i] = a0 - G * (es - eta[i, 0])
            rhs = eta[i, 0] + dt * (xq * (ast[i] - a0 + G * es) + xq * eta[i, 1]
                                    - g[LAM1] * xq * _sgn(eta[i, 0]))
            eta1n = rhs / (1.0 + dt * (g[K1] + 1.0) + dt * xq * G)
            zb1 = es - eta1n
            al = a0 - G * zb1
            dast = (al - ast[i]) / g[TAU]
            zeta2 = x2 - ast[i]
            zb2 = zeta2 - eta[i, 1]
            ub = ((g[K2] + 1.0) * zeta2
                  + (0.75 * e21 ** (4.0 / 3.0) * zb2 * Th * p21
                     + 0.75 * e23 ** 2 * zb2 * Th * n22
                     + 0.75 * e22 ** (4.0 / 3.0) * zb2
                     + 0.75 * e24 ** 2 * zb2)
                  + 27.0 / 256.0 * zb2
                  - dast + eta1n
                  + vt * math.tanh(zb2 ** 3 / g[EPST]))
            s3 = zb2 ** 3
            P = ph * ph * ub * ub
            abar = -s3 * P / math.sqrt(s3 * s3 * P + g[EPS5] * g[EPS5])
            lw = 0.0
            for h in range(M):
                u[h] = _sgn(l[i, h]) * abar
                w[h] = u[h]
                for k in range(fcount[i, h]):
                    if fs[i, h, k] <= tm < fe[i, h, k]:
                        if fk[i, h, k] == 1:
                            w[h] = fv[i, h, k] * u[h]
                        elif fk[i, h, k] == 2:
                            w[h] = fv[i, h, k]
                        break
                lw += l[i, h] * w[h]

            if record:
                rec_x[rec_i, i, 0] = x1
                rec_x[rec_i, i, 1] = x2
                rec_z[rec_i, i] = z
                rec_es[rec_i, i] = es
                rec_zb[rec_i, i, 0] = zb1
                rec_zb[rec_i, i, 1] = zb2
                rec_eta[rec_i, i, 0] = eta1n
                rec_eta[rec_i, i, 1] = eta[i, 1]
                rec_ad[rec_i, i, 0] = Th
                rec_ad[rec_i, i, 1] = vt
                rec_ad[rec_i, i, 2] = ph
                for h in range(M):
                    rec_u[rec_i, i, h] = u[h]
                    rec_w[rec_i, i, h] = w[h]
            if last:
                continue

            if plant == PLANT_NUMERICAL:
                f1 = 0.2 * x1
                g1 = 0.2 * math.sin(6.0 * x1)
                f2 = 0.2 * x1 * x2
                g2 = 0.2 * math.sin(6.0 * x1 * x2)
            else:
                f1 = 0.0
                g1 = 0.0
                f2 = -pp[0] * x2 - pp[1]
                g2 = pp[2]
            dw = dW[n - n0, i] * noise_scale
            nx[i, 0] = x1 + (x2 + f1) * dt + g1 * dw
            nx[i, 1] = x2 + (lw + f2) * dt + g2 * dw

            D = 0.75 * g[DELTA] * (e11 ** (4.0 / 3.0) * zb1 ** 4 * xi ** reg[5] * p11
                                   + e13 ** 2 * zb1 ** 4 * xi ** reg[6] * n12
                                   + e21 ** (4.0 / 3.0) * zb2 ** 4 * p21
                                   + e23 ** 2 * zb2 ** 4 * n22)
            back = 1.0 if reg[7] > 0.0 else xq
            deta2 = -(g[K2] + 1.0) * eta[i, 1] - back * eta1n - g[LAM2] * _sgn(eta[i, 1])
            adapt[i, 0] = Th + dt * (D - g[DBAR] * Th)
            adapt[i, 1] = vt + dt * (g[GAM] * s3 * math.tanh(s3 / g[EPST]) - g[GBAR] * vt)
            adapt[i, 2] = ph + dt * (g[PSI] * s3 * ub - g[PBAR] * ph)
            eta[i, 0] = eta1n
            eta[i, 1] = eta[i, 1] + dt * deta2
            ast[i] = ast[i] + dt * dast
        if record:
            rec_i += 1
        if last:
            break
        initialised = True
        for i in range(N):
            x[i, 0] = nx[i, 0]
            x[i, 1] = nx[i, 1]
            if not (np.isfinite(x[i, 0]) and np.isfinite(x[i, 1])):
                return NONFINITE, n + 1, i, 0, rec_i
            if not (np.isfinite(eta[i, 0]) and np.isfinite(eta[i, 1])):
                return NONFINITE, n + 1, i, 1, rec_i
            if not np.isfinite(ast[i]):
                return NONFINITE, n + 1, i, 2, rec_i
            for c in range(3):
                if not np.isfinite(adapt[i, c]):
                    return NONFINITE, n + 1, i, 3 + c, rec_i
    return OK, n1, -1, -1, rec_i
