# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Twin of ``_pycore.py``; keep the two in sync."""

from libc.math cimport sqrt, log, pow, cos, acos, fabs, isfinite, INFINITY, NAN
from libc.stdlib cimport malloc, free

cdef int NEWTON_MAX = 60
cdef int BISECT_MAX = 400
cdef double STEP_MAX = 1.0 - 1e-9
cdef double BRACKET_FAIL_C = -1.0

NEWTON_MAX_PY = NEWTON_MAX
BRACKET_FAIL = BRACKET_FAIL_C
CARDANO = 0
REPEATED = 1
TRIGONOMETRIC = 2


cdef inline double _cbrt(double x) nogil:
    cdef double r
    if x == 0.0:
        return 0.0
    r = pow(fabs(x), 1.0 / 3.0)
    if x > 0.0:
        return r
    return -r


def cubic_branch(double a, double b, double mu):
    cdef double k = mu / (2.0 * b)
    cdef double m = -a / (2.0 * b)
    cdef double p = -k * k / 3.0
    cdef double q = 2.0 * k * k * k / 27.0 + m
    cdef double disc = q * q / 4.0 + p * p * p / 27.0
    if disc > 0.0:
        return CARDANO
    if disc == 0.0:
        return REPEATED
    return TRIGONOMETRIC


cdef double _cubic_root(double a, double b, double mu) nogil:
    cdef double k = mu / (2.0 * b)
    cdef double m = -a / (2.0 * b)
    cdef double p = -k * k / 3.0
    cdef double q = 2.0 * k * k * k / 27.0 + m
    cdef double disc = q * q / 4.0 + p * p * p / 27.0
    cdef double sd, w, u, y, y2, r, arg, x, xu, xs, g, dg, dx, xn
    cdef int i
    if disc > 0.0:
        sd = sqrt(disc)
        if q >= 0.0:
            w = -q / 2.0 - sd
        else:
            w = -q / 2.0 + sd
        u = _cbrt(w)
        if u != 0.0:
            y = u - p / (3.0 * u)
        else:
            y = 0.0
    elif disc == 0.0:
        if p == 0.0:
            y = 0.0
        else:
            y = 3.0 * q / p
            y2 = -3.0 * q / (2.0 * p)
            if y2 > y:
                y = y2
    else:
        r = 2.0 * sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * sqrt(-3.0 / p)
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        y = r * cos(acos(arg) / 3.0)
    x = y - k / 3.0

    xu = _cbrt(a / (2.0 * b))
    if mu > 0.0:
        xs = sqrt(a / mu)
        if xs < xu:
            xu = xs
    if not (x > 0.0) or x > xu * (1.0 + 1e-12):
        x = xu

    for i in range(NEWTON_MAX):
        g = (2.0 * b * x + mu) * x * x - a
        dg = (6.0 * b * x + 2.0 * mu) * x
        if dg <= 0.0:
            break
        dx = g / dg
        xn = x - dx
        if xn <= 0.0:
            xn = 0.5 * x
        if fabs(dx) <= 4e-16 * x:
            x = xn
            break
        x = xn
    return x


def cubic_root(double a, double b, double mu):
    return _cubic_root(a, b, mu)


cdef inline double _dstat(double x, double a, double b, double mu, double zeta) nogil:
    return -a / (x * x) + (zeta - 1.0) * b * pow(x, zeta - 2.0) + mu


cdef double _bisect_root(double a, double b, double mu, double zeta, double lo, double hi) nogil:
    cdef double dh = _dstat(hi, a, b, mu, zeta)
    cdef double dl = _dstat(lo, a, b, mu, zeta)
    cdef double left, right, mid, dm
    cdef int i
    if dh != dh or dl != dl:
        return BRACKET_FAIL_C
    if dh <= 0.0:
        return hi
    if dl >= 0.0:
        return lo
    left = lo
    right = hi
    for i in range(BISECT_MAX):
        if right <= 2.0 * left:
            mid = 0.5 * (left + right)
        else:
            mid = sqrt(left * right)
        if mid <= left or mid >= right:
            break
        dm = _dstat(mid, a, b, mu, zeta)
        if dm != dm:
            return BRACKET_FAIL_C
        if dm > 0.0:
            right = mid
        else:
            left = mid
    return 0.5 * (left + right)


def bisect_root(double a, double b, double mu, double zeta, double lo, double hi):
    return _bisect_root(a, b, mu, zeta, lo, hi)


cdef double _argmin_inv_pow(double a, double b, double mu, double zeta,
                            double lo, double hi, bint exact) nogil:
    cdef double x
    if a <= 0.0:
        if b <= 0.0 and mu <= 0.0:
            return NAN
        return lo
    if b <= 0.0:
        if mu <= 0.0:
            return hi
        x = sqrt(a / mu)
    elif exact and zeta == 3.0:
        x = _cubic_root(a, b, mu)
    else:
        x = _bisect_root(a, b, mu, zeta, lo, hi)
        if x == BRACKET_FAIL_C:
            return x
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


def argmin_inv_pow(double a, double b, double mu, double zeta, double lo, double hi, bint exact):
    return _argmin_inv_pow(a, b, mu, zeta, lo, hi, exact)


cdef void _sort_desc(double* u, int n) nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = u[i]
        j = i - 1
        while j >= 0 and u[j] < key:
            u[j + 1] = u[j]
            j -= 1
        u[j + 1] = key


cdef void _project_simplex(double* v, double* u, int n) nogil:
    cdef int i, j
    cdef double css = 0.0, shift = 0.0, t, w
    for i in range(n):
        u[i] = v[i]
    _sort_desc(u, n)
    for j in range(n):
        css += u[j]
        t = (css - 1.0) / (j + 1.0)
        if u[j] - t > 0.0:
            shift = t
    for i in range(n):
        w = v[i] - shift
        v[i] = w if w > 0.0 else 0.0


def project_simplex(double[::1] v):
    cdef int n = v.shape[0]
    cdef double* u = <double*> malloc(max(n, 1) * sizeof(double))
    try:
        _project_simplex(&v[0], u, n)
    finally:
        free(u)


def dual_ascent(const double[::1] tau, const double[::1] rho, const double[::1] zeta,
                const double[::1] fmax, const double[::1] tmax, const double[::1] cu,
                const double[::1] pcap, const double[::1] wt, const double[::1] we, double kf,
                double[::1] lam, double[::1] beta, double[::1] mu, double[::1] phi,
                double step_scale, double tol, int max_iter, double feas_tol,
                double f_floor, double s_floor, bint exact,
                double[::1] best_p, double[::1] best_f, double[::1] best_cost,
                double[::1] least_p, double[::1] least_f, double[::1] least_viol,
                double[::1] dual_trace, double[::1] primal_trace):
    cdef int n = tau.shape[0]
    cdef int i, it = 0, converged = 0, status = 0
    cdef double q, xi, wk, fi, si, pi, lat, energy, c, qi, worst, step, w
    cdef double d_lam, d_beta, d_mu, d_phi
    cdef double* buf = <double*> malloc(6 * max(n, 1) * sizeof(double))
    cdef double* cost = buf
    cdef double* glat = buf + n
    cdef double* gp = buf + 2 * n
    cdef double* gf = buf + 3 * n
    cdef double* v = buf + 4 * n
    cdef double* work = buf + 5 * n
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                best_cost[i] = INFINITY
                best_p[i] = 0.0
                best_f[i] = 0.0
                least_viol[i] = INFINITY
                least_p[i] = 0.0
                least_f[i] = 0.0
            _project_simplex(&phi[0], work, n)
            while it < max_iter:
                q = 0.0
                xi = -INFINITY
                for i in range(n):
                    wk = wt[i] * kf + lam[i]
                    fi = _argmin_inv_pow(wk * tau[i], we[i] * kf * rho[i] * tau[i], mu[i],
                                         zeta[i], f_floor, fmax[i], exact)
                    si = _argmin_inv_pow(wk * cu[i], beta[i], we[i] * kf * cu[i],
                                         3.0, s_floor, sqrt(pcap[i]), exact)
                    if fi != fi or si != si:
                        status = 1
                        break
                    if fi == BRACKET_FAIL_C or si == BRACKET_FAIL_C:
                        status = 2
                        break
                    pi = si * si
                    lat = tau[i] / fi + cu[i] / si
                    energy = rho[i] * tau[i] * pow(fi, zeta[i] - 1.0) + cu[i] * si
                    c = kf * (wt[i] * lat + we[i] * energy)
                    qi = c + lam[i] * (lat - tmax[i]) + beta[i] * (pi - pcap[i]) + mu[i] * (fi - fmax[i])
                    q += phi[i] * qi
                    if c > xi:
                        xi = c
                    cost[i] = c
                    glat[i] = lat - tmax[i]
                    gp[i] = pi - pcap[i]
                    gf[i] = fi - fmax[i]
                    if glat[i] <= feas_tol * (1.0 + tmax[i]) and c < best_cost[i]:
                        best_cost[i] = c
                        best_p[i] = pi
                        best_f[i] = fi
                    if glat[i] < least_viol[i]:
                        least_viol[i] = glat[i]
                        least_p[i] = pi
                        least_f[i] = fi
                if status != 0:
                    break

                worst = -INFINITY
                for i in range(n):
                    if best_cost[i] > worst:
                        worst = best_cost[i]
                dual_trace[it] = q
                primal_trace[it] = worst

                step = step_scale / sqrt(it + 1.0)
                if step > STEP_MAX:
                    step = STEP_MAX
                d_lam = 0.0
                d_beta = 0.0
                d_mu = 0.0
                d_phi = 0.0
                for i in range(n):
                    w = lam[i] + step * glat[i]
                    w = w if w > 0.0 else 0.0
                    if fabs(w - lam[i]) > d_lam:
                        d_lam = fabs(w - lam[i])
                    lam[i] = w
                    w = beta[i] + step * gp[i]
                    w = w if w > 0.0 else 0.0
                    if fabs(w - beta[i]) > d_beta:
                        d_beta = fabs(w - beta[i])
                    beta[i] = w
                    w = mu[i] + step * gf[i]
                    w = w if w > 0.0 else 0.0
                    if fabs(w - mu[i]) > d_mu:
                        d_mu = fabs(w - mu[i])
                    mu[i] = w
                    v[i] = phi[i] + step * (cost[i] - xi)
                _project_simplex(v, work, n)
                for i in range(n):
                    if fabs(v[i] - phi[i]) > d_phi:
                        d_phi = fabs(v[i] - phi[i])
                    phi[i] = v[i]
                it += 1
                if d_lam < tol and d_beta < tol and d_mu < tol and d_phi < tol:
                    converged = 1
                    break
    finally:
        free(buf)
    return it, converged, status


cdef double _penalized_value(double theta, const double[::1] A, const double[::1] Bc,
                             const double[::1] L, const double[::1] U,
                             double eps, double inv_delta) nogil:
    cdef double lg = -log(theta)
    cdef double k = eps / (1.0 - theta)
    cdef double worst = -INFINITY, pen = 0.0, c, v
    cdef int i
    for i in range(A.shape[0]):
        c = k * (lg * A[i] + Bc[i])
        if c > worst:
            worst = c
        v = lg * L[i] + U[i]
        if v > 0.0:
            pen += v
    return worst + inv_delta * pen


def penalized_value(double theta, const double[::1] A, const double[::1] Bc,
                    const double[::1] L, const double[::1] U, double eps, double inv_delta):
    return _penalized_value(theta, A, Bc, L, U, eps, inv_delta)


cdef inline void _extremes(double* vals, int hms, int* best, int* worst) nogil:
    cdef int j
    best[0] = 0
    worst[0] = 0
    for j in range(1, hms):
        if vals[j] < vals[best[0]]:
            best[0] = j
        if vals[j] > vals[worst[0]]:
            worst[0] = j


def harmony_penalized(const double[::1] A, const double[::1] Bc, const double[::1] L,
                      const double[::1] U, double eps, double inv_delta,
                      double lo, double hi, double bw_min, double bw_max, int n_improv,
                      const double[::1] init, const double[::1] hmcr, const double[::1] par,
                      const double[::1] uni, double[::1] slots, double[::1] values,
                      double[::1] trace):
    cdef int hms = init.shape[0]
    cdef int j, t, h, base, best = 0, worst = 0
    cdef int status = 0
    cdef double bad = 0.0
    cdef double val, cand, bw, tt
    cdef double half = n_improv / 2.0
    with nogil:
        for j in range(hms):
            slots[j] = init[j]
            val = _penalized_value(slots[j], A, Bc, L, U, eps, inv_delta)
            if not isfinite(val):
                status = 1
                bad = slots[j]
                break
            values[j] = val
        if status == 0:
            _extremes(&values[0], hms, &best, &worst)
            for t in range(n_improv):
                tt = t + 1.0
                if tt < half:
                    bw = bw_max - (bw_max - bw_min) / n_improv * 2.0 * tt
                else:
                    bw = bw_min
                base = 5 * t
                if uni[base] < hmcr[t]:
                    h = <int> (uni[base + 1] * hms)
                    if h >= hms:
                        h = hms - 1
                    if uni[base + 2] < 0.5:
                        cand = slots[h] + uni[base + 3] * bw
                    else:
                        cand = slots[h] - uni[base + 3] * bw
                    if uni[base + 4] < par[t]:
                        cand = slots[best]
                else:
                    cand = lo + uni[base + 3] * (hi - lo)
                if cand < lo:
                    cand = lo
                if cand > hi:
                    cand = hi
                val = _penalized_value(cand, A, Bc, L, U, eps, inv_delta)
                if not isfinite(val):
                    status = 1
                    bad = cand
                    break
                if val < values[worst]:
                    slots[worst] = cand
                    values[worst] = val
                    _extremes(&values[0], hms, &best, &worst)
                trace[t] = values[best]
    return status, bad
