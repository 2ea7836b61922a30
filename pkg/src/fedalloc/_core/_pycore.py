"""Pure-Python kernels.

Line-for-line twin of ``_ccore.pyx``: same operations in the same order on
IEEE doubles, so both backends agree to the last bit on x86-64 when the
extension is built without floating-point contraction. Keep the two files in
sync.
"""

import math

NEWTON_MAX = 60
BISECT_MAX = 400
STEP_MAX = 1.0 - 1e-9
BRACKET_FAIL = -1.0

# branch labels for the stationarity cubic
CARDANO = 0
REPEATED = 1
TRIGONOMETRIC = 2


def _cbrt(x):
    if x == 0.0:
        return 0.0
    r = math.fabs(x) ** (1.0 / 3.0)
    if x > 0.0:
        return r
    return -r


def cubic_branch(a, b, mu):
    k = mu / (2.0 * b)
    m = -a / (2.0 * b)
    p = -k * k / 3.0
    q = 2.0 * k * k * k / 27.0 + m
    disc = q * q / 4.0 + p * p * p / 27.0
    if disc > 0.0:
        return CARDANO
    if disc == 0.0:
        return REPEATED
    return TRIGONOMETRIC


def cubic_root(a, b, mu):
    """Positive root of ``2*b*x**3 + mu*x**2 - a`` for a > 0, b > 0, mu >= 0.

    Closed form on the depressed cubic, then Newton polishing from the
    analytic value (or from a guaranteed upper bound when cancellation wrecks
    it). The polynomial is convex and increasing on x > 0, so the polish
    cannot leave the root's basin.
    """
    k = mu / (2.0 * b)
    m = -a / (2.0 * b)
    p = -k * k / 3.0
    q = 2.0 * k * k * k / 27.0 + m
    disc = q * q / 4.0 + p * p * p / 27.0
    if disc > 0.0:
        sd = math.sqrt(disc)
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
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        y = r * math.cos(math.acos(arg) / 3.0)
    x = y - k / 3.0

    xu = _cbrt(a / (2.0 * b))
    if mu > 0.0:
        xs = math.sqrt(a / mu)
        if xs < xu:
            xu = xs
    if not (x > 0.0) or x > xu * (1.0 + 1e-12):
        x = xu

    for _ in range(NEWTON_MAX):
        g = (2.0 * b * x + mu) * x * x - a
        dg = (6.0 * b * x + 2.0 * mu) * x
        if dg <= 0.0:
            break
        dx = g / dg
        xn = x - dx
        if xn <= 0.0:
            xn = 0.5 * x
        if math.fabs(dx) <= 4e-16 * x:
            x = xn
            break
        x = xn
    return x


def _dstat(x, a, b, mu, zeta):
    return -a / (x * x) + (zeta - 1.0) * b * x ** (zeta - 2.0) + mu


def bisect_root(a, b, mu, zeta, lo, hi):
    """Minimizer of ``a/x + b*x**(zeta-1) + mu*x`` on [lo, hi] by bisection on the derivative."""
    dh = _dstat(hi, a, b, mu, zeta)
    dl = _dstat(lo, a, b, mu, zeta)
    if dh != dh or dl != dl:
        return BRACKET_FAIL
    if dh <= 0.0:
        return hi
    if dl >= 0.0:
        return lo
    left = lo
    right = hi
    for _ in range(BISECT_MAX):
        if right <= 2.0 * left:
            mid = 0.5 * (left + right)
        else:
            mid = math.sqrt(left * right)
        if mid <= left or mid >= right:
            break
        dm = _dstat(mid, a, b, mu, zeta)
        if dm != dm:
            return BRACKET_FAIL
        if dm > 0.0:
            right = mid
        else:
            left = mid
    return 0.5 * (left + right)


def argmin_inv_pow(a, b, mu, zeta, lo, hi, exact):
    """Minimizer of ``a/x + b*x**(zeta-1) + mu*x`` over [lo, hi].

    Returns NaN when a = b = mu = 0 (every point minimizes) and
    ``BRACKET_FAIL`` when the derivative cannot be evaluated.
    """
    if a <= 0.0:
        if b <= 0.0 and mu <= 0.0:
            return math.nan
        return lo
    if b <= 0.0:
        if mu <= 0.0:
            return hi
        x = math.sqrt(a / mu)
    elif exact and zeta == 3.0:
        x = cubic_root(a, b, mu)
    else:
        x = bisect_root(a, b, mu, zeta, lo, hi)
        if x == BRACKET_FAIL:
            return x
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


def project_simplex(v):
    """Euclidean projection of ``v`` (list, modified in place) onto the probability simplex."""
    n = len(v)
    u = sorted(v, reverse=True)
    css = 0.0
    shift = 0.0
    for j in range(n):
        css += u[j]
        t = (css - 1.0) / (j + 1.0)
        if u[j] - t > 0.0:
            shift = t
    for i in range(n):
        w = v[i] - shift
        v[i] = w if w > 0.0 else 0.0


def dual_ascent(tau, rho, zeta, fmax, tmax, cu, pcap, wt, we, kf,
                lam, beta, mu, phi,
                step_scale, tol, max_iter, feas_tol, f_floor, s_floor, exact,
                best_p, best_f, best_cost, least_p, least_f, least_viol,
                dual_trace, primal_trace):
    """Projected-subgradient loop of the fixed-accuracy block.

    Arrays ``lam, beta, mu, phi`` are updated in place; ``best_*`` and
    ``least_*`` receive the per-device best feasible and least-violating
    points. Returns ``(iterations, converged, status)`` with status 0 on
    success, 1 for a degenerate sub-problem and 2 for a bracket failure.
    """
    n = len(tau)
    tau_l = list(tau); rho_l = list(rho); zeta_l = list(zeta); fmax_l = list(fmax)
    tmax_l = list(tmax); cu_l = list(cu); pcap_l = list(pcap); wt_l = list(wt); we_l = list(we)
    lam_l = list(lam); beta_l = list(beta); mu_l = list(mu); phi_l = list(phi)
    bp = [0.0] * n; bf = [0.0] * n; bc = [math.inf] * n
    lp = [0.0] * n; lf = [0.0] * n; lv = [math.inf] * n
    cost = [0.0] * n; glat = [0.0] * n; gp = [0.0] * n; gf = [0.0] * n
    v = [0.0] * n

    project_simplex(phi_l)
    status = 0
    it = 0
    converged = 0
    while it < max_iter:
        q = 0.0
        xi = -math.inf
        for i in range(n):
            wk = wt_l[i] * kf + lam_l[i]
            fi = argmin_inv_pow(wk * tau_l[i], we_l[i] * kf * rho_l[i] * tau_l[i], mu_l[i],
                                zeta_l[i], f_floor, fmax_l[i], exact)
            si = argmin_inv_pow(wk * cu_l[i], beta_l[i], we_l[i] * kf * cu_l[i],
                                3.0, s_floor, math.sqrt(pcap_l[i]), exact)
            if fi != fi or si != si:
                status = 1
                break
            if fi == BRACKET_FAIL or si == BRACKET_FAIL:
                status = 2
                break
            pi = si * si
            lat = tau_l[i] / fi + cu_l[i] / si
            energy = rho_l[i] * tau_l[i] * fi ** (zeta_l[i] - 1.0) + cu_l[i] * si
            c = kf * (wt_l[i] * lat + we_l[i] * energy)
            qi = c + lam_l[i] * (lat - tmax_l[i]) + beta_l[i] * (pi - pcap_l[i]) + mu_l[i] * (fi - fmax_l[i])
            q += phi_l[i] * qi
            if c > xi:
                xi = c
            cost[i] = c
            glat[i] = lat - tmax_l[i]
            gp[i] = pi - pcap_l[i]
            gf[i] = fi - fmax_l[i]
            if glat[i] <= feas_tol * (1.0 + tmax_l[i]) and c < bc[i]:
                bc[i] = c
                bp[i] = pi
                bf[i] = fi
            if glat[i] < lv[i]:
                lv[i] = glat[i]
                lp[i] = pi
                lf[i] = fi
        if status != 0:
            break

        worst = -math.inf
        for i in range(n):
            if bc[i] > worst:
                worst = bc[i]
        dual_trace[it] = q
        primal_trace[it] = worst

        step = step_scale / math.sqrt(it + 1.0)
        if step > STEP_MAX:
            step = STEP_MAX
        d_lam = 0.0; d_beta = 0.0; d_mu = 0.0; d_phi = 0.0
        for i in range(n):
            w = lam_l[i] + step * glat[i]
            w = w if w > 0.0 else 0.0
            if math.fabs(w - lam_l[i]) > d_lam:
                d_lam = math.fabs(w - lam_l[i])
            lam_l[i] = w
            w = beta_l[i] + step * gp[i]
            w = w if w > 0.0 else 0.0
            if math.fabs(w - beta_l[i]) > d_beta:
                d_beta = math.fabs(w - beta_l[i])
            beta_l[i] = w
            w = mu_l[i] + step * gf[i]
            w = w if w > 0.0 else 0.0
            if math.fabs(w - mu_l[i]) > d_mu:
                d_mu = math.fabs(w - mu_l[i])
            mu_l[i] = w
            v[i] = phi_l[i] + step * (cost[i] - xi)
        project_simplex(v)
        for i in range(n):
            if math.fabs(v[i] - phi_l[i]) > d_phi:
                d_phi = math.fabs(v[i] - phi_l[i])
            phi_l[i] = v[i]
        it += 1
        if d_lam < tol and d_beta < tol and d_mu < tol and d_phi < tol:
            converged = 1
            break

    for i in range(n):
        lam[i] = lam_l[i]; beta[i] = beta_l[i]; mu[i] = mu_l[i]; phi[i] = phi_l[i]
        best_p[i] = bp[i]; best_f[i] = bf[i]; best_cost[i] = bc[i]
        least_p[i] = lp[i]; least_f[i] = lf[i]; least_viol[i] = lv[i]
    return it, converged, status


def penalized_value(theta, A, Bc, L, U, eps, inv_delta):
    """Worst round-scaled cost plus the latency hinge penalty, at fixed (p, f)."""
    lg = -math.log(theta)
    k = eps / (1.0 - theta)
    worst = -math.inf
    pen = 0.0
    for i in range(len(A)):
        c = k * (lg * A[i] + Bc[i])
        if c > worst:
            worst = c
        v = lg * L[i] + U[i]
        if v > 0.0:
            pen += v
    return worst + inv_delta * pen


def _extremes(values):
    best = 0
    worst = 0
    for j in range(1, len(values)):
        if values[j] < values[best]:
            best = j
        if values[j] > values[worst]:
            worst = j
    return best, worst


def harmony_penalized(A, Bc, L, U, eps, inv_delta, lo, hi, bw_min, bw_max, n_improv,
                      init, hmcr, par, uni, slots, values, trace):
    """Harmony search on the penalized accuracy objective.

    ``uni`` holds five uniforms per improvisation in the order
    (memory test, slot pick, sign, step length, pitch test). Returns
    ``(status, theta)``: status 1 flags a non-finite objective at ``theta``.
    """
    A = list(A); Bc = list(Bc); L = list(L); U = list(U)
    hmcr = list(hmcr); par = list(par); uni = list(uni)
    hms = len(init)
    sl = [0.0] * hms
    vals = [0.0] * hms
    for j in range(hms):
        sl[j] = float(init[j])
        val = penalized_value(sl[j], A, Bc, L, U, eps, inv_delta)
        if not math.isfinite(val):
            return 1, sl[j]
        vals[j] = val
    best, worst = _extremes(vals)
    half = n_improv / 2.0
    for t in range(n_improv):
        tt = t + 1.0
        if tt < half:
            bw = bw_max - (bw_max - bw_min) / n_improv * 2.0 * tt
        else:
            bw = bw_min
        base = 5 * t
        if uni[base] < hmcr[t]:
            h = int(uni[base + 1] * hms)
            if h >= hms:
                h = hms - 1
            if uni[base + 2] < 0.5:
                cand = sl[h] + uni[base + 3] * bw
            else:
                cand = sl[h] - uni[base + 3] * bw
            if uni[base + 4] < par[t]:
                cand = sl[best]
        else:
            cand = lo + uni[base + 3] * (hi - lo)
        if cand < lo:
            cand = lo
        if cand > hi:
            cand = hi
        val = penalized_value(cand, A, Bc, L, U, eps, inv_delta)
        if not math.isfinite(val):
            return 1, cand
        if val < vals[worst]:
            sl[worst] = cand
            vals[worst] = val
            best, worst = _extremes(vals)
        trace[t] = vals[best]
    for j in range(hms):
        slots[j] = sl[j]
        values[j] = vals[j]
    return 0, 0.0
