# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Scalar math kernels, compiled edition.

Function-for-function mirror of ``_purecore.py``; keep the two in sync.
See that module for the documentation of the formulas and conventions.
"""

from libc.math cimport cos, fabs, hypot, isfinite, sin, sqrt

SERIES_THRESHOLD = 1e-4
SMOOTH_THRESHOLD = 0.05

cdef double _SERIES = 1e-4
cdef double _SMOOTH = 0.05
cdef double _HALF_PI = 1.5707963267948966
cdef int _MAX_TENDONS = 16


cdef inline void _arc_terms(double theta, double* h, double* s,
                            double* g, double* w) nogil:
    cdef double t2, st, ct
    if fabs(theta) < _SERIES:
        t2 = theta * theta
        h[0] = theta * (0.5 - t2 / 24.0 + t2 * t2 / 720.0)
        s[0] = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        g[0] = 0.5 - t2 / 8.0 + t2 * t2 / 144.0
        w[0] = theta * (-1.0 / 3.0 + t2 / 30.0)
    else:
        st = sin(theta)
        ct = cos(theta)
        t2 = theta * theta
        h[0] = (1.0 - ct) / theta
        s[0] = st / theta
        g[0] = (theta * st + ct - 1.0) / t2
        w[0] = (theta * ct - st) / t2


def arc_terms(double theta):
    cdef double h, s, g, w
    _arc_terms(theta, &h, &s, &g, &w)
    return h, s, g, w


def rotation(double theta, double delta):
    cdef double st = sin(theta)
    cdef double ct = cos(theta)
    cdef double sd = sin(delta)
    cdef double cd = cos(delta)
    return (
        cd * cd * ct + sd * sd, cd * sd * (ct - 1.0), cd * st,
        sd * cd * (ct - 1.0), sd * sd * ct + cd * cd, sd * st,
        -st * cd, -st * sd, ct,
    )


def position(double length, double theta, double delta):
    cdef double h, s, g, w
    _arc_terms(theta, &h, &s, &g, &w)
    cdef double sd = sin(delta)
    cdef double cd = cos(delta)
    return (length * cd * h, length * sd * h, length * s)


def jac_v(double length, double theta, double delta):
    cdef double h, s, g, w
    _arc_terms(theta, &h, &s, &g, &w)
    cdef double sd = sin(delta)
    cdef double cd = cos(delta)
    return (
        length * cd * g, -length * sd * h,
        length * sd * g, length * cd * h,
        length * w, 0.0,
    )


def jac_w(double theta, double delta):
    cdef double st = sin(theta)
    cdef double ct = cos(theta)
    cdef double sd = sin(delta)
    cdef double cd = cos(delta)
    return (-sd, -cd * st, cd, -sd * st, 0.0, 1.0 - ct)


cdef inline void _bend_position(double length, double wx, double wy,
                                double* px, double* py, double* pz) nogil:
    cdef double theta = hypot(wx, wy)
    cdef double t2 = theta * theta
    cdef double a, s
    if theta < _SERIES:
        a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
    else:
        a = (1.0 - cos(theta)) / t2
        s = sin(theta) / theta
    px[0] = length * wx * a
    py[0] = length * wy * a
    pz[0] = length * s


def bend_position(double length, double wx, double wy):
    cdef double px, py, pz
    _bend_position(length, wx, wy, &px, &py, &pz)
    return px, py, pz


cdef inline void _bend_position_jacobian(double length, double wx, double wy,
                                         double* jp) nogil:
    cdef double theta = hypot(wx, wy)
    cdef double t2 = theta * theta
    cdef double a, b, c, st, ct
    if theta < _SERIES:
        a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
    else:
        a = (1.0 - cos(theta)) / t2
    if theta < _SMOOTH:
        b = -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0
        c = -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0
    else:
        st = sin(theta)
        ct = cos(theta)
        b = (theta * st - 2.0 + 2.0 * ct) / (t2 * t2)
        c = (theta * ct - st) / (t2 * theta)
    jp[0] = length * (a + wx * wx * b)
    jp[1] = length * wx * wy * b
    jp[2] = jp[1]
    jp[3] = length * (a + wy * wy * b)
    jp[4] = length * wx * c
    jp[5] = length * wy * c


def bend_position_jacobian(double length, double wx, double wy):
    cdef double jp[6]
    _bend_position_jacobian(length, wx, wy, jp)
    return jp[0], jp[1], jp[2], jp[3], jp[4], jp[5]


def tendon_cos_sin(double beta, int count, double delta):
    cdef double cd = cos(delta)
    cdef double sd = sin(delta)
    cdef int i
    if count == 4 and beta == _HALF_PI:
        return (cd, -sd, -cd, sd), (sd, cd, -sd, -cd)
    cos_v = tuple(cos(delta + i * beta) for i in range(count))
    sin_v = tuple(sin(delta + i * beta) for i in range(count))
    return cos_v, sin_v


def tendon_phase_cos_sin(double beta, int count):
    cdef int i
    if count == 4 and beta == _HALF_PI:
        return (1.0, 0.0, -1.0, 0.0), (0.0, 1.0, 0.0, -1.0)
    return (
        tuple(cos(i * beta) for i in range(count)),
        tuple(sin(i * beta) for i in range(count)),
    )


def tendon_displacements(double radius, double beta, int count,
                         double theta, double delta):
    cdef double rt = radius * theta
    cos_v, _ = tendon_cos_sin(beta, count, delta)
    return tuple(rt * c for c in cos_v)


cdef inline void _deflection_residual(double length, double radius,
                                      double k_bend, double k_tendon,
                                      int count, double* cphi, double* sphi,
                                      double* q_cmd, double* tau0,
                                      double fx, double fy, double fz,
                                      double wx, double wy,
                                      double* rx, double* ry) nogil:
    cdef double jp[6]
    cdef double gx = 0.0
    cdef double gy = 0.0
    cdef double q, t
    cdef int i
    _bend_position_jacobian(length, wx, wy, jp)
    for i in range(count):
        q = radius * (cphi[i] * wx - sphi[i] * wy)
        t = tau0[i] - k_tendon * (q - q_cmd[i])
        if t < 0.0:
            t = 0.0
        gx += t * radius * cphi[i]
        gy -= t * radius * sphi[i]
    rx[0] = k_bend * wx - gx - (jp[0] * fx + jp[2] * fy + jp[4] * fz)
    ry[0] = k_bend * wy - gy - (jp[1] * fx + jp[3] * fy + jp[5] * fz)


cdef inline double _psi_residual_norm(double rx, double ry,
                                      double wx, double wy) nogil:
    cdef double theta = hypot(wx, wy)
    cdef double r1, r2
    if theta == 0.0:
        return hypot(rx, ry)
    r1 = (wx * rx + wy * ry) / theta
    r2 = wx * ry - wy * rx
    return hypot(r1, r2)


def solve_deflection(double length, double radius, double beta, int count,
                     double flexural, double k_tendon,
                     q_cmd, tau0, double fx, double fy, double fz,
                     double wx0, double wy0, double tol, int max_iter,
                     double backtrack=0.5):
    """Newton solve of the locked-motor bending equilibrium under a tip force.

    Same algorithm as the pure-Python twin: damped Newton with a
    finite-difference 2x2 Jacobian and backtracking line search.
    Returns (wx, wy, iterations, residual_norm, converged).
    """
    if count > _MAX_TENDONS:
        raise ValueError("kernel supports at most %d tendons" % _MAX_TENDONS)
    cdef double cphi[16]
    cdef double sphi[16]
    cdef double qc[16]
    cdef double t0[16]
    cdef int i
    phases_c, phases_s = tendon_phase_cos_sin(beta, count)
    for i in range(count):
        cphi[i] = phases_c[i]
        sphi[i] = phases_s[i]
        qc[i] = q_cmd[i]
        t0[i] = tau0[i]

    cdef double k_bend = flexural / length
    cdef double wx = wx0
    cdef double wy = wy0
    cdef double rx, ry, res, hx, hy
    cdef double axp, ayp, axm, aym, bxp, byp, bxm, bym
    cdef double j11, j12, j21, j22, det, dx, dy
    cdef double phi0, alpha, nwx, nwy, nrx, nry
    cdef int iters = 0
    cdef int k
    cdef bint accepted

    _deflection_residual(length, radius, k_bend, k_tendon, count, cphi, sphi,
                         qc, t0, fx, fy, fz, wx, wy, &rx, &ry)
    while True:
        res = _psi_residual_norm(rx, ry, wx, wy)
        if res < tol:
            return wx, wy, iters, res, 1
        if iters >= max_iter:
            return wx, wy, iters, res, 0
        hx = 1e-7 * (1.0 + fabs(wx))
        hy = 1e-7 * (1.0 + fabs(wy))
        _deflection_residual(length, radius, k_bend, k_tendon, count, cphi, sphi,
                             qc, t0, fx, fy, fz, wx + hx, wy, &axp, &ayp)
        _deflection_residual(length, radius, k_bend, k_tendon, count, cphi, sphi,
                             qc, t0, fx, fy, fz, wx - hx, wy, &axm, &aym)
        _deflection_residual(length, radius, k_bend, k_tendon, count, cphi, sphi,
                             qc, t0, fx, fy, fz, wx, wy + hy, &bxp, &byp)
        _deflection_residual(length, radius, k_bend, k_tendon, count, cphi, sphi,
                             qc, t0, fx, fy, fz, wx, wy - hy, &bxm, &bym)
        j11 = (axp - axm) / (2.0 * hx)
        j21 = (ayp - aym) / (2.0 * hx)
        j12 = (bxp - bxm) / (2.0 * hy)
        j22 = (byp - bym) / (2.0 * hy)
        det = j11 * j22 - j12 * j21
        if not isfinite(det) or fabs(det) < 1e-300:
            return wx, wy, iters, res, 0
        dx = -(j22 * rx - j12 * ry) / det
        dy = -(j11 * ry - j21 * rx) / det
        phi0 = rx * rx + ry * ry
        alpha = 1.0
        accepted = False
        for k in range(40):
            nwx = wx + alpha * dx
            nwy = wy + alpha * dy
            _deflection_residual(length, radius, k_bend, k_tendon, count, cphi, sphi,
                                 qc, t0, fx, fy, fz, nwx, nwy, &nrx, &nry)
            if nrx * nrx + nry * nry <= phi0 * (1.0 - 1e-4 * alpha):
                wx = nwx
                wy = nwy
                rx = nrx
                ry = nry
                accepted = True
                break
            alpha *= backtrack
        if not accepted:
            return wx, wy, iters, res, 0
        iters += 1


def solve_tip_constraint(double length, double wx0, double wy0,
                         double tx, double ty, double tz,
                         double damping, double tol, int max_iter):
    """Least-squares positional IK in bend-vector coordinates.

    Same damped Gauss-Newton scheme as the pure-Python twin.
    Returns (wx, wy, iterations, reachable_residual, converged).
    """
    cdef double wx = wx0
    cdef double wy = wy0
    cdef double lam = damping
    cdef int iters = 0
    cdef double px, py, pz, ex, ey, ez, err2
    cdef double jp[6]
    cdef double a11, a12, a22, g1, g2, mu, det0, u1, u2
    cdef double qx, qy, qz, reach, det, dx, dy
    cdef double nwx, nwy, npx, npy, npz, nex, ney, nez, nerr2
    cdef int k
    cdef bint stepped

    _bend_position(length, wx, wy, &px, &py, &pz)
    ex = tx - px
    ey = ty - py
    ez = tz - pz
    err2 = ex * ex + ey * ey + ez * ez
    while True:
        _bend_position_jacobian(length, wx, wy, jp)
        a11 = jp[0] * jp[0] + jp[2] * jp[2] + jp[4] * jp[4]
        a12 = jp[0] * jp[1] + jp[2] * jp[3] + jp[4] * jp[5]
        a22 = jp[1] * jp[1] + jp[3] * jp[3] + jp[5] * jp[5]
        g1 = jp[0] * ex + jp[2] * ey + jp[4] * ez
        g2 = jp[1] * ex + jp[3] * ey + jp[5] * ez
        mu = 1e-12 * (a11 + a22) + 1e-300
        det0 = (a11 + mu) * (a22 + mu) - a12 * a12
        u1 = ((a22 + mu) * g1 - a12 * g2) / det0
        u2 = ((a11 + mu) * g2 - a12 * g1) / det0
        qx = jp[0] * u1 + jp[1] * u2
        qy = jp[2] * u1 + jp[3] * u2
        qz = jp[4] * u1 + jp[5] * u2
        reach = sqrt(qx * qx + qy * qy + qz * qz)
        if reach < tol:
            return wx, wy, iters, reach, 1
        if iters >= max_iter:
            return wx, wy, iters, reach, 0
        stepped = False
        for k in range(25):
            det = (a11 + lam) * (a22 + lam) - a12 * a12
            if fabs(det) < 1e-300:
                lam = lam * 10.0 + 1e-12
                continue
            dx = ((a22 + lam) * g1 - a12 * g2) / det
            dy = ((a11 + lam) * g2 - a12 * g1) / det
            nwx = wx + dx
            nwy = wy + dy
            _bend_position(length, nwx, nwy, &npx, &npy, &npz)
            nex = tx - npx
            ney = ty - npy
            nez = tz - npz
            nerr2 = nex * nex + ney * ney + nez * nez
            if nerr2 <= err2:
                wx = nwx
                wy = nwy
                ex = nex
                ey = ney
                ez = nez
                err2 = nerr2
                lam = max(damping, lam * 0.25)
                stepped = True
                break
            lam = lam * 10.0 + 1e-12
        if not stepped:
            return wx, wy, iters, reach, 1 if reach < tol else 0
        iters += 1
