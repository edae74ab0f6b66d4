"""Hot-path kernels: forward kinematics, quartic roots, branch enumeration.

Plain-Python bodies kept inside the numba-supported subset (float scalars,
fixed-size float64 arrays, math.*). ``armik._kernels`` imports this module
twice: one copy stays pure Python, the other is rebound through numba.njit
when available. Do not add Python objects, strings, or exceptions here;
failures are reported through integer status codes.
"""

import math

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi

# zero offsets of the solver's internal joint coordinates
BASE_OFFSETS = np.array([0.0, -HALF_PI, HALF_PI, 0.0, HALF_PI, HALF_PI, 0.0])

# status codes
OK = 0
ERR_ZERO_SC = 1
ERR_AXIS_PARALLEL = 2
ERR_DEGENERATE_REFERENCE = 3
ERR_DEGENERATE_ARM = 4
ERR_ALL_COEFFS_ZERO = 5

# per-leaf rejection codes (one of 16 = 4 root slots x 2 elbow signs x 2 q2 signs)
REJ_COMPLEX_ROOT = 1
REJ_COS_DOMAIN = 2
REJ_EQ_RESIDUAL = 3
REJ_Q8_DEGENERATE = 4
REJ_ARM_EQ_MISMATCH = 5
REJ_UNREACHABLE = 6
REJ_ELBOW_DEGENERATE = 7
REJ_CONSISTENCY = 8
REJ_WRIST_DEGENERATE = 9
REJ_POSE_MISMATCH = 10
REJ_PSI_MISMATCH = 11
REJ_DUPLICATE = 12
REJ_QUARTIC_ZERO = 13


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    w = a - TWO_PI * math.floor((a + math.pi) / TWO_PI)
    if w <= -math.pi:
        w = math.pi
    return w


def mat33_mul(A, B, out):
    for i in range(3):
        for j in range(3):
            s = 0.0
            for t in range(3):
                s += A[i, t] * B[t, j]
            out[i, j] = s


def mat33_mul_nt(A, B, out):
    """out = A @ B.T"""
    for i in range(3):
        for j in range(3):
            s = 0.0
            for t in range(3):
                s += A[i, t] * B[j, t]
            out[i, j] = s


def mat44_mul(A, B, out):
    for i in range(4):
        for j in range(4):
            s = 0.0
            for t in range(4):
                s += A[i, t] * B[t, j]
            out[i, j] = s


def cross3(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


def dot3(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def norm3(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def mdh_matrix(alpha, a, d, theta, out):
    """Single-link transform RotX(alpha) TransX(a) RotZ(theta) TransZ(d)."""
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    ct = math.cos(theta)
    st = math.sin(theta)
    out[0, 0] = ct
    out[0, 1] = -st
    out[0, 2] = 0.0
    out[0, 3] = a
    out[1, 0] = ca * st
    out[1, 1] = ca * ct
    out[1, 2] = -sa
    out[1, 3] = -sa * d
    out[2, 0] = sa * st
    out[2, 1] = sa * ct
    out[2, 2] = ca
    out[2, 3] = ca * d
    out[3, 0] = 0.0
    out[3, 1] = 0.0
    out[3, 2] = 0.0
    out[3, 3] = 1.0


def mdh_rot(alpha, theta, out):
    """Rotation block of mdh_matrix."""
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    ct = math.cos(theta)
    st = math.sin(theta)
    out[0, 0] = ct
    out[0, 1] = -st
    out[0, 2] = 0.0
    out[1, 0] = ca * st
    out[1, 1] = ca * ct
    out[1, 2] = -sa
    out[2, 0] = sa * st
    out[2, 1] = sa * ct
    out[2, 2] = ca


def fk_chain(mdh, q, T, S, E, W):
    """Full chain product; T = base-to-end, S/E/W = origins of frames 2/4/6."""
    M = np.empty((4, 4))
    acc = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            T[i, j] = 1.0 if i == j else 0.0
    for i in range(7):
        mdh_matrix(mdh[i, 0], mdh[i, 1], mdh[i, 2], mdh[i, 3] + q[i], M)
        mat44_mul(T, M, acc)
        for r in range(4):
            for c in range(4):
                T[r, c] = acc[r, c]
        if i == 1:
            S[0] = T[0, 3]
            S[1] = T[1, 3]
            S[2] = T[2, 3]
        elif i == 3:
            E[0] = T[0, 3]
            E[1] = T[1, 3]
            E[2] = T[2, 3]
        elif i == 5:
            W[0] = T[0, 3]
            W[1] = T[1, 3]
            W[2] = T[2, 3]


def rot_geodesic(Ra, Rb):
    """Geodesic angle between two rotations, atan2 form (stable near 0 and pi)."""
    t00 = Ra[0, 0] * Rb[0, 0] + Ra[0, 1] * Rb[0, 1] + Ra[0, 2] * Rb[0, 2]
    t11 = Ra[1, 0] * Rb[1, 0] + Ra[1, 1] * Rb[1, 1] + Ra[1, 2] * Rb[1, 2]
    t22 = Ra[2, 0] * Rb[2, 0] + Ra[2, 1] * Rb[2, 1] + Ra[2, 2] * Rb[2, 2]
    m21 = Ra[2, 0] * Rb[1, 0] + Ra[2, 1] * Rb[1, 1] + Ra[2, 2] * Rb[1, 2]
    m12 = Ra[1, 0] * Rb[2, 0] + Ra[1, 1] * Rb[2, 1] + Ra[1, 2] * Rb[2, 2]
    m02 = Ra[0, 0] * Rb[2, 0] + Ra[0, 1] * Rb[2, 1] + Ra[0, 2] * Rb[2, 2]
    m20 = Ra[2, 0] * Rb[0, 0] + Ra[2, 1] * Rb[0, 1] + Ra[2, 2] * Rb[0, 2]
    m10 = Ra[1, 0] * Rb[0, 0] + Ra[1, 1] * Rb[0, 1] + Ra[1, 2] * Rb[0, 2]
    m01 = Ra[0, 0] * Rb[1, 0] + Ra[0, 1] * Rb[1, 1] + Ra[0, 2] * Rb[1, 2]
    sx = m21 - m12
    sy = m02 - m20
    sz = m10 - m01
    sn = 0.5 * math.sqrt(sx * sx + sy * sy + sz * sz)
    cn = 0.5 * (t00 + t11 + t22 - 1.0)
    return math.atan2(sn, cn)


def _cbrt(x):
    if x >= 0.0:
        return x ** (1.0 / 3.0)
    return -((-x) ** (1.0 / 3.0))


def solve_cubic_monic(a2, a1, a0, roots):
    """Real roots of x^3 + a2 x^2 + a1 x + a0, ascending. Returns count."""
    p = a1 - a2 * a2 / 3.0
    qq = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0
    shift = -a2 / 3.0
    disc = 0.25 * qq * qq + p * p * p / 27.0
    if disc > 0.0:
        sq = math.sqrt(disc)
        u = _cbrt(-0.5 * qq + sq)
        v = _cbrt(-0.5 * qq - sq)
        roots[0] = u + v + shift
        return 1
    if p >= 0.0:
        # p ~ 0 with disc <= 0 forces q ~ 0: triple root
        roots[0] = shift
        roots[1] = shift
        roots[2] = shift
        return 3
    rho = math.sqrt(-p * p * p / 27.0)
    arg = -0.5 * qq / rho
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    th = math.acos(arg)
    amp = 2.0 * math.sqrt(-p / 3.0)
    r0 = amp * math.cos(th / 3.0) + shift
    r1 = amp * math.cos((th - TWO_PI) / 3.0) + shift
    r2 = amp * math.cos((th + TWO_PI) / 3.0) + shift
    # manual ascending sort of three values
    if r0 > r1:
        t = r0
        r0 = r1
        r1 = t
    if r1 > r2:
        t = r1
        r1 = r2
        r2 = t
    if r0 > r1:
        t = r0
        r0 = r1
        r1 = t
    roots[0] = r0
    roots[1] = r1
    roots[2] = r2
    return 3


def solve_quartic_core(g4, g3, g2, g1, g0, degree_tol, root_merge_tol,
                       complex_accept, roots, mult):
    """Real roots of g4 t^4 + ... + g0, ascending, merged with multiplicities.

    Ferrari resolvent-cubic closed form with degree degradation and a
    guarded Newton polish with step backtracking. Returns (count, status).
    """
    scale = abs(g4)
    if abs(g3) > scale:
        scale = abs(g3)
    if abs(g2) > scale:
        scale = abs(g2)
    if abs(g1) > scale:
        scale = abs(g1)
    if abs(g0) > scale:
        scale = abs(g0)
    if scale < 1e-300:
        return 0, ERR_ALL_COEFFS_ZERO
    c4 = g4 / scale
    c3 = g3 / scale
    c2 = g2 / scale
    c1 = g1 / scale
    c0 = g0 / scale

    raw = np.empty(8)
    nraw = 0
    cut = degree_tol
    if abs(c4) > cut:
        a = c3 / c4
        b = c2 / c4
        c = c1 / c4
        d = c0 / c4
        # depressed quartic y^4 + p y^2 + q y + r, t = y - a/4
        p = b - 3.0 * a * a / 8.0
        q = c - 0.5 * a * b + a * a * a / 8.0
        r = d - 0.25 * a * c + a * a * b / 16.0 - 3.0 * a * a * a * a / 256.0
        shift = -a / 4.0
        use_biquad = False
        s2 = 0.0
        m = 0.0
        if abs(q) <= 1e-13 * (1.0 + abs(p) + abs(r)):
            use_biquad = True
        else:
            # resolvent m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0; largest root
            cr = np.empty(3)
            ncr = solve_cubic_monic(p, 0.25 * p * p - r, -q * q / 8.0, cr)
            m = cr[ncr - 1]
            s2 = 2.0 * m
            if s2 <= 1e-14 * (1.0 + abs(p) + math.sqrt(abs(r))) ** 2:
                use_biquad = True
        if use_biquad:
            # y^4 + p y^2 + r = 0
            zd = p * p - 4.0 * r
            if zd >= 0.0:
                sz = math.sqrt(zd)
                z1 = 0.5 * (-p - sz)
                z2 = 0.5 * (-p + sz)
                for z in (z1, z2):
                    if z >= 0.0:
                        yv = math.sqrt(z)
                        raw[nraw] = yv + shift
                        nraw += 1
                        if yv > 0.0:
                            raw[nraw] = -yv + shift
                            nraw += 1
                        else:
                            raw[nraw] = shift
                            nraw += 1
                    elif math.sqrt(-z) < complex_accept:
                        raw[nraw] = shift
                        nraw += 1
                        raw[nraw] = shift
                        nraw += 1
            else:
                # complex z pair; real y only if imaginary parts are noise
                zre = -0.5 * p
                if zre > 0.0:
                    yre = math.sqrt(zre)
                    yim = 0.5 * math.sqrt(-zd) / (2.0 * yre)
                    if yim < complex_accept * max(1.0, yre):
                        raw[nraw] = yre + shift
                        nraw += 1
                        raw[nraw] = yre + shift
                        nraw += 1
                        raw[nraw] = -yre + shift
                        nraw += 1
                        raw[nraw] = -yre + shift
                        nraw += 1
        else:
            s = math.sqrt(s2)
            u = 0.5 * p + m
            v = 0.5 * q / s
            # (y^2 + s y + u - v)(y^2 - s y + u + v)
            for half in (0, 1):
                if half == 0:
                    B = s
                    C = u - v
                else:
                    B = -s
                    C = u + v
                disc = B * B - 4.0 * C
                if disc >= 0.0:
                    sd = math.sqrt(disc)
                    if B >= 0.0:
                        y1 = 0.5 * (-B - sd)
                    else:
                        y1 = 0.5 * (-B + sd)
                    if y1 != 0.0:
                        y2 = C / y1
                    else:
                        y2 = -0.5 * B
                    raw[nraw] = y1 + shift
                    nraw += 1
                    raw[nraw] = y2 + shift
                    nraw += 1
                else:
                    re = -0.5 * B
                    im = 0.5 * math.sqrt(-disc)
                    if im < complex_accept * max(1.0, abs(re)):
                        raw[nraw] = re + shift
                        nraw += 1
                        raw[nraw] = re + shift
                        nraw += 1
    elif abs(c3) > cut:
        cr = np.empty(3)
        ncr = solve_cubic_monic(c2 / c3, c1 / c3, c0 / c3, cr)
        for i in range(ncr):
            raw[nraw] = cr[i]
            nraw += 1
    elif abs(c2) > cut:
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc >= 0.0:
            sd = math.sqrt(disc)
            if c1 >= 0.0:
                y1 = 0.5 * (-c1 - sd) / c2
            else:
                y1 = 0.5 * (-c1 + sd) / c2
            raw[nraw] = y1
            nraw += 1
            if y1 != 0.0:
                raw[nraw] = (c0 / c2) / y1
            else:
                raw[nraw] = -0.5 * c1 / c2
            nraw += 1
        else:
            re = -0.5 * c1 / c2
            im = 0.5 * math.sqrt(-disc) / abs(c2)
            if im < complex_accept * max(1.0, abs(re)):
                raw[nraw] = re
                nraw += 1
                raw[nraw] = re
                nraw += 1
    elif abs(c1) > cut:
        raw[nraw] = -c0 / c1
        nraw += 1
    else:
        # nonzero constant: no roots
        return 0, OK

    # Newton polish on the scaled polynomial; a full step that increases |P|
    # is halved up to 4 times (closed form can overshoot badly when the
    # depressed-quartic shift cancels against a small root)
    for i in range(nraw):
        x = raw[i]
        fx = (((c4 * x + c3) * x + c2) * x + c1) * x + c0
        for _ in range(8):
            if fx == 0.0:
                break
            dfx = ((4.0 * c4 * x + 3.0 * c3) * x + 2.0 * c2) * x + c1
            if abs(dfx) < 1e-300:
                break
            step = fx / dfx
            accepted = False
            for _ in range(5):
                xn = x - step
                fn = (((c4 * xn + c3) * xn + c2) * xn + c1) * xn + c0
                if abs(fn) <= abs(fx):
                    if xn == x:
                        accepted = False
                        break
                    x = xn
                    fx = fn
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
        raw[i] = x

    # insertion sort ascending
    for i in range(1, nraw):
        key = raw[i]
        j = i - 1
        while j >= 0 and raw[j] > key:
            raw[j + 1] = raw[j]
            j -= 1
        raw[j + 1] = key

    # merge within root_merge_tol
    count = 0
    i = 0
    while i < nraw and count < 4:
        j = i + 1
        while j < nraw and raw[j] - raw[i] <= root_merge_tol:
            j += 1
        best = raw[i]
        bestf = abs((((c4 * best + c3) * best + c2) * best + c1) * best + c0)
        for t in range(i + 1, j):
            ft = abs((((c4 * raw[t] + c3) * raw[t] + c2) * raw[t] + c1) * raw[t] + c0)
            if ft < bestf:
                best = raw[t]
                bestf = ft
        roots[count] = best
        mm = j - i
        if mm > 4:
            mm = 4
        mult[count] = mm
        count += 1
        i = j
    return count, OK


def reduce_pose_core(R, p, d_bs, tol_len, tol_parallel, A):
    """Reduce an end pose to (d_sc, q, al) and the aligning rotation A."""
    scx = p[0]
    scy = p[1]
    scz = p[2] - d_bs
    d_sc = math.sqrt(scx * scx + scy * scy + scz * scz)
    if d_sc < tol_len:
        return 0.0, 0.0, 0.0, ERR_ZERO_SC
    zvx = scx / d_sc
    zvy = scy / d_sc
    zvz = scz / d_sc
    z7x = R[0, 2]
    z7y = R[1, 2]
    z7z = R[2, 2]
    crx = z7y * zvz - z7z * zvy
    cry = z7z * zvx - z7x * zvz
    crz = z7x * zvy - z7y * zvx
    cn = math.sqrt(crx * crx + cry * cry + crz * crz)
    if cn < tol_parallel:
        return d_sc, 0.0, 0.0, ERR_AXIS_PARALLEL
    yvx = crx / cn
    yvy = cry / cn
    yvz = crz / cn
    dd = zvx * z7x + zvy * z7y + zvz * z7z
    if dd > 1.0:
        dd = 1.0
    elif dd < -1.0:
        dd = -1.0
    q = -math.acos(dd)
    # A rows: yv x zv, yv, zv
    A[0, 0] = yvy * zvz - yvz * zvy
    A[0, 1] = yvz * zvx - yvx * zvz
    A[0, 2] = yvx * zvy - yvy * zvx
    A[1, 0] = yvx
    A[1, 1] = yvy
    A[1, 2] = yvz
    A[2, 0] = zvx
    A[2, 1] = zvy
    A[2, 2] = zvz
    # al: signed angle from x72 = yv x z7 to x7 about z7
    x72x = yvy * z7z - yvz * z7y
    x72y = yvz * z7x - yvx * z7z
    x72z = yvx * z7y - yvy * z7x
    x7x = R[0, 0]
    x7y = R[1, 0]
    x7z = R[2, 0]
    cxx = x72y * x7z - x72z * x7y
    cxy = x72z * x7x - x72x * x7z
    cxz = x72x * x7y - x72y * x7x
    al = math.atan2(cxx * z7x + cxy * z7y + cxz * z7z,
                    x72x * x7x + x72y * x7y + x72z * x7z)
    return d_sc, q, al, OK


def arm_dihedral(S, E, C, z7, tol_len, tol_parallel):
    """Signed dihedral about SC from plane(SC, z7) to plane(SC, SE)."""
    ux = C[0] - S[0]
    uy = C[1] - S[1]
    uz = C[2] - S[2]
    un = math.sqrt(ux * ux + uy * uy + uz * uz)
    if un < tol_len:
        return 0.0, ERR_ZERO_SC
    ux /= un
    uy /= un
    uz /= un
    # reference direction: z7 projected off u (z7 is unit)
    dzu = z7[0] * ux + z7[1] * uy + z7[2] * uz
    ax = z7[0] - dzu * ux
    ay = z7[1] - dzu * uy
    az = z7[2] - dzu * uz
    if math.sqrt(ax * ax + ay * ay + az * az) < tol_parallel:
        return 0.0, ERR_DEGENERATE_REFERENCE
    sex = E[0] - S[0]
    sey = E[1] - S[1]
    sez = E[2] - S[2]
    sen = math.sqrt(sex * sex + sey * sey + sez * sez)
    if sen < tol_len:
        return 0.0, ERR_DEGENERATE_ARM
    dsu = (sex * ux + sey * uy + sez * uz)
    bx = sex - dsu * ux
    by = sey - dsu * uy
    bz = sez - dsu * uz
    if math.sqrt(bx * bx + by * by + bz * bz) < tol_parallel * sen:
        return 0.0, ERR_DEGENERATE_ARM
    cxx = ay * bz - az * by
    cxy = az * bx - ax * bz
    cxz = ax * by - ay * bx
    psi = math.atan2(cxx * ux + cxy * uy + cxz * uz,
                     ax * bx + ay * by + az * bz)
    return wrap_angle(psi), OK


def arm_angle_core(mdh, q, tol_len, tol_parallel):
    """Arm angle of a joint configuration via the FK frame points."""
    T = np.empty((4, 4))
    S = np.empty(3)
    E = np.empty(3)
    W = np.empty(3)
    fk_chain(mdh, q, T, S, E, W)
    C = np.empty(3)
    C[0] = T[0, 3]
    C[1] = T[1, 3]
    C[2] = T[2, 3]
    z7 = np.empty(3)
    z7[0] = T[0, 2]
    z7[1] = T[1, 2]
    z7[2] = T[2, 2]
    return arm_dihedral(S, E, C, z7, tol_len, tol_parallel)


def quartic_setup_core(d_sc, q, psi, d_se, d_ew, a_wr):
    """k, y, tm1..tm3 and the quartic coefficients for given (d_sc, q, psi)."""
    k = 0.5 * (a_wr * a_wr + d_se * d_se - d_sc * d_sc - d_ew * d_ew)
    y = 2.0 * d_sc * math.cos(q)
    cp = math.cos(psi)
    sp = math.sin(psi)
    cq = math.cos(q)
    c2q = math.cos(2.0 * q)
    aw2 = a_wr * a_wr
    de2 = d_ew * d_ew
    ds2 = d_sc * d_sc
    tm1 = (cp * cp * (k * k - (aw2 - de2) * ds2 * cq * cq)
           + 0.5 * (-2.0 * aw2 * ds2 + 2.0 * de2 * ds2 + k * k
                    + k * k * c2q) * sp * sp)
    tm2 = (-2.0 * a_wr * cp * cp * (k - ds2 * cq * cq)
           + a_wr * (2.0 * ds2 - k - k * c2q) * sp * sp)
    tm3 = (6.0 * aw2 - 8.0 * ds2 + 2.0 * aw2 * math.cos(2.0 * psi)
           - aw2 * math.cos(2.0 * (psi - q)) + 2.0 * aw2 * c2q
           - aw2 * math.cos(2.0 * (psi + q))) / 8.0
    g4 = tm3 * tm3 + aw2 * y * y
    g3 = 2.0 * tm2 * tm3 - 2.0 * a_wr * (aw2 + k) * y * y
    g2 = (tm2 * tm2 + 2.0 * tm1 * tm3
          + (aw2 * aw2 - aw2 * (de2 - 4.0 * k) + k * k) * y * y)
    g1 = 2.0 * tm1 * tm2 - 2.0 * a_wr * k * (aw2 - de2 + k) * y * y
    g0 = tm1 * tm1 + (aw2 - de2) * k * k * y * y
    return k, y, tm1, tm2, tm3, g4, g3, g2, g1, g0


def eq7_residual(t6, r6, k, y, a_wr, tm1, tm2, tm3):
    """Residual and scale of the pre-squaring combined constraint."""
    t1 = tm1
    t2 = t6 * tm2
    t3 = t6 * t6 * tm3
    t4 = r6 * y * (k - a_wr * t6)
    res = t1 + t2 + t3 + t4
    sc = abs(t1)
    if abs(t2) > sc:
        sc = abs(t2)
    if abs(t3) > sc:
        sc = abs(t3)
    if abs(t4) > sc:
        sc = abs(t4)
    if sc < 1.0e-300:
        sc = 1.0e-300
    return res, sc


def ik_solve_core(mdh, delta, d_se, d_ew, a_wr, R07, p07, d_sc, q, al, psi,
                  pose_tol, angle_merge_tol, branch_residual_tol,
                  sin_domain_tol, psi_tol, tol_len, tol_parallel, degree_tol,
                  root_merge_tol, complex_accept):
    """Enumerate all 16 candidate branches for a reduced pose.

    R07/p07 is the pose every branch is verified against (and the rotation fed
    to the q1..q3 decomposition); the caller passes the original pose for the
    general solve and the synthesized canonical pose for the special solve.
    Every one of the 16 leaves is either accepted or lands in the rejection
    table with a reason code; nothing is silently dropped.
    """
    joints_out = np.zeros((16, 7))
    meta_out = np.zeros((16, 8))
    perr_out = np.zeros(16)
    rej_out = np.zeros((16, 2), dtype=np.int64)
    n_acc = 0
    n_rej = 0

    k, y, tm1, tm2, tm3, g4, g3, g2, g1, g0 = quartic_setup_core(
        d_sc, q, psi, d_se, d_ew, a_wr)
    roots = np.empty(4)
    mults = np.empty(4, dtype=np.int64)
    nroots, qstatus = solve_quartic_core(
        g4, g3, g2, g1, g0, degree_tol, root_merge_tol, complex_accept,
        roots, mults)
    if qstatus != OK:
        for leaf in range(16):
            rej_out[n_rej, 0] = leaf
            rej_out[n_rej, 1] = REJ_QUARTIC_ZERO
            n_rej += 1
        return joints_out, meta_out, perr_out, rej_out, n_acc, n_rej

    # expand multiplicities into the 4 root slots; a slot born from a double
    # root is retried with the opposite elbow-plane sign (branch fold)
    slot_t6 = np.zeros(4)
    slot_dup = np.zeros(4, dtype=np.int64)
    n_slot = 0
    for i in range(nroots):
        for mcopy in range(mults[i]):
            if n_slot < 4:
                slot_t6[n_slot] = roots[i]
                slot_dup[n_slot] = mcopy
                n_slot += 1
    for slot in range(n_slot, 4):
        for leaf4 in range(4):
            rej_out[n_rej, 0] = slot * 4 + leaf4
            rej_out[n_rej, 1] = REJ_COMPLEX_ROOT
            n_rej += 1

    sq = math.sin(q)
    cq = math.cos(q)
    cp = math.cos(psi)
    sp = math.sin(psi)

    Rtmp = np.empty((3, 3))
    Racc = np.empty((3, 3))
    Racc2 = np.empty((3, 3))
    qu = np.empty(7)
    Tb = np.empty((4, 4))
    Sb = np.empty(3)
    Eb = np.empty(3)
    Wb = np.empty(3)
    Cb = np.empty(3)
    z7b = np.empty(3)
    prev_sign = 1.0

    for slot in range(n_slot):
        t6 = slot_t6[slot]
        u6 = (t6 - a_wr) / d_ew
        if abs(u6) > 1.0 + sin_domain_tol:
            for leaf4 in range(4):
                rej_out[n_rej, 0] = slot * 4 + leaf4
                rej_out[n_rej, 1] = REJ_COS_DOMAIN
                n_rej += 1
            continue
        if u6 > 1.0:
            u6 = 1.0
        elif u6 < -1.0:
            u6 = -1.0
        r6_mag = d_ew * math.sqrt(max(0.0, 1.0 - u6 * u6))

        res_p, sc_p = eq7_residual(t6, r6_mag, k, y, a_wr, tm1, tm2, tm3)
        res_m, sc_m = eq7_residual(t6, -r6_mag, k, y, a_wr, tm1, tm2, tm3)
        if slot_dup[slot] == 0:
            if abs(res_p) <= abs(res_m):
                sgn6 = 1.0
                res6 = res_p
                sc6 = sc_p
            else:
                sgn6 = -1.0
                res6 = res_m
                sc6 = sc_m
            prev_sign = sgn6
        else:
            # duplicate slot: the merged second branch has the opposite sign
            sgn6 = -prev_sign
            if sgn6 > 0.0:
                res6 = res_p
                sc6 = sc_p
            else:
                res6 = res_m
                sc6 = sc_m
            if abs(res6) > branch_residual_tol * sc6 or r6_mag == 0.0:
                for leaf4 in range(4):
                    rej_out[n_rej, 0] = slot * 4 + leaf4
                    rej_out[n_rej, 1] = REJ_DUPLICATE
                    n_rej += 1
                continue
        if abs(res6) > branch_residual_tol * sc6:
            for leaf4 in range(4):
                rej_out[n_rej, 0] = slot * 4 + leaf4
                rej_out[n_rej, 1] = REJ_EQ_RESIDUAL
                n_rej += 1
            continue
        r6 = sgn6 * r6_mag
        q6 = math.atan2(r6, t6 - a_wr)

        # q8: cos from the pose equation, sign of sin from the arm equation
        if abs(t6) < tol_len:
            for leaf4 in range(4):
                rej_out[n_rej, 0] = slot * 4 + leaf4
                rej_out[n_rej, 1] = REJ_Q8_DEGENERATE
                n_rej += 1
            continue
        xv = a_wr * t6 - k - d_sc * r6 * cq
        cq8 = -xv / (d_sc * sq * t6)
        if abs(cq8) > 1.0 + sin_domain_tol:
            for leaf4 in range(4):
                rej_out[n_rej, 0] = slot * 4 + leaf4
                rej_out[n_rej, 1] = REJ_COS_DOMAIN
                n_rej += 1
            continue
        if cq8 > 1.0:
            cq8 = 1.0
        elif cq8 < -1.0:
            cq8 = -1.0
        sq8_mag = math.sqrt(max(0.0, 1.0 - cq8 * cq8))
        best_res = 1.0e300
        s8 = 1.0
        for cand in (1.0, -1.0):
            ey = t6 * cand * sq8_mag
            ex = -r6 * sq - t6 * cq * cq8
            rr = abs(wrap_angle(math.atan2(ey, ex) + math.pi - psi))
            if rr < best_res:
                best_res = rr
                s8 = cand
        if best_res > 1.0e-2:
            for leaf4 in range(4):
                rej_out[n_rej, 0] = slot * 4 + leaf4
                rej_out[n_rej, 1] = REJ_ARM_EQ_MISMATCH
                n_rej += 1
            continue
        q8 = math.atan2(s8 * sq8_mag, cq8)

        # two guarded Newton steps on (q6, q8) against the unsquared pair
        for _ in range(2):
            t6n = a_wr + d_ew * math.cos(q6)
            r6n = d_ew * math.sin(q6)
            c8 = math.cos(q8)
            s8v = math.sin(q8)
            F1 = a_wr * t6n - d_sc * (r6n * cq - t6n * c8 * sq) - k
            F2 = t6n * s8v * cp + sp * (r6n * sq + t6n * cq * c8)
            dt6 = -r6n
            dr6 = t6n - a_wr
            J11 = a_wr * dt6 - d_sc * (dr6 * cq - dt6 * c8 * sq)
            J12 = -d_sc * t6n * sq * s8v
            J21 = dt6 * s8v * cp + sp * (dr6 * sq + dt6 * cq * c8)
            J22 = t6n * c8 * cp - sp * t6n * cq * s8v
            det = J11 * J22 - J12 * J21
            jsc = max(abs(J11), max(abs(J12), max(abs(J21), abs(J22))))
            if abs(det) < 1e-13 * jsc * jsc:
                break
            dq6 = (J22 * F1 - J12 * F2) / det
            dq8 = (-J21 * F1 + J11 * F2) / det
            q6 -= dq6
            q8 -= dq8
        t6 = a_wr + d_ew * math.cos(q6)
        r6 = d_ew * math.sin(q6)
        cq8 = math.cos(q8)
        sq8 = math.sin(q8)
        pose_eq_res = a_wr * t6 - d_sc * (r6 * cq - t6 * cq8 * sq) - k
        arm_eq_res = wrap_angle(
            math.atan2(t6 * sq8, -r6 * sq - t6 * cq * cq8) + math.pi - psi)

        q7 = wrap_angle(q8 + al)

        s6x = a_wr + d_sc * sq * cq8
        s6y = d_sc * cq
        s6z = d_sc * sq * sq8
        n2 = s6x * s6x + s6y * s6y + s6z * s6z
        carg = (n2 - d_ew * d_ew - d_se * d_se) / (2.0 * d_se * d_ew)
        if abs(carg) > 1.0 + sin_domain_tol:
            for leaf4 in range(4):
                rej_out[n_rej, 0] = slot * 4 + leaf4
                rej_out[n_rej, 1] = REJ_UNREACHABLE
                n_rej += 1
            continue
        if carg > 1.0:
            carg = 1.0
        elif carg < -1.0:
            carg = -1.0
        q4a = math.acos(carg)

        c6 = math.cos(q6)
        s6 = math.sin(q6)
        a1 = -s6x * s6 - s6y * c6
        a2 = s6z
        cons = s6y * s6 - s6x * c6 - (d_ew + d_se * carg)
        for s4i in (1.0, -1.0):
            base = slot * 4 + (0 if s4i > 0.0 else 2)
            q4 = s4i * q4a
            if abs(a1) < 1e-10 and abs(a2) < 1e-10:
                for leaf2 in range(2):
                    rej_out[n_rej, 0] = base + leaf2
                    rej_out[n_rej, 1] = REJ_ELBOW_DEGENERATE
                    n_rej += 1
                continue
            if abs(cons) > 1e-6:
                for leaf2 in range(2):
                    rej_out[n_rej, 0] = base + leaf2
                    rej_out[n_rej, 1] = REJ_CONSISTENCY
                    n_rej += 1
                continue
            q5 = math.atan2(s4i * a1, s4i * a2)

            # R03 = R07 R67' R56' R45' R34' (primes are transposes)
            mdh_rot(mdh[6, 0], BASE_OFFSETS[6] + q7, Rtmp)
            mat33_mul_nt(R07, Rtmp, Racc)
            mdh_rot(mdh[5, 0], BASE_OFFSETS[5] + q6, Rtmp)
            mat33_mul_nt(Racc, Rtmp, Racc2)
            mdh_rot(mdh[4, 0], BASE_OFFSETS[4] + q5, Rtmp)
            mat33_mul_nt(Racc2, Rtmp, Racc)
            mdh_rot(mdh[3, 0], BASE_OFFSETS[3] + q4, Rtmp)
            mat33_mul_nt(Racc, Rtmp, Racc2)
            r33 = Racc2[2, 2]
            if abs(r33) >= 1.0 - 1e-10:
                for leaf2 in range(2):
                    rej_out[n_rej, 0] = base + leaf2
                    rej_out[n_rej, 1] = REJ_WRIST_DEGENERATE
                    n_rej += 1
                continue
            r13 = Racc2[0, 2]
            r23 = Racc2[1, 2]
            r31 = Racc2[2, 0]
            r32 = Racc2[2, 1]
            ac2 = math.acos(max(-1.0, min(1.0, r33)))
            for s2i in (1.0, -1.0):
                leaf = base + (0 if s2i > 0.0 else 1)
                q2 = wrap_angle(s2i * ac2 + HALF_PI)
                sgn2 = -s2i
                q1 = math.atan2(-r23 * sgn2, -r13 * sgn2)
                q3 = math.atan2(-r31 * sgn2, -r32 * sgn2)

                qu[0] = wrap_angle(q1 - delta[0])
                qu[1] = wrap_angle(q2 - delta[1])
                qu[2] = wrap_angle(q3 - delta[2])
                qu[3] = wrap_angle(q4 - delta[3])
                qu[4] = wrap_angle(q5 - delta[4])
                qu[5] = wrap_angle(q6 - delta[5])
                qu[6] = wrap_angle(q7 - delta[6])

                fk_chain(mdh, qu, Tb, Sb, Eb, Wb)
                dx = Tb[0, 3] - p07[0]
                dy = Tb[1, 3] - p07[1]
                dz = Tb[2, 3] - p07[2]
                perr = (rot_geodesic(Tb[:3, :3], R07)
                        + math.sqrt(dx * dx + dy * dy + dz * dz))
                if perr > pose_tol:
                    rej_out[n_rej, 0] = leaf
                    rej_out[n_rej, 1] = REJ_POSE_MISMATCH
                    n_rej += 1
                    continue
                Cb[0] = Tb[0, 3]
                Cb[1] = Tb[1, 3]
                Cb[2] = Tb[2, 3]
                z7b[0] = Tb[0, 2]
                z7b[1] = Tb[1, 2]
                z7b[2] = Tb[2, 2]
                psi_b, pst = arm_dihedral(Sb, Eb, Cb, z7b, tol_len,
                                          tol_parallel)
                if pst != OK or abs(wrap_angle(psi_b - psi)) > psi_tol:
                    rej_out[n_rej, 0] = leaf
                    rej_out[n_rej, 1] = REJ_PSI_MISMATCH
                    n_rej += 1
                    continue
                dup = False
                for jb in range(n_acc):
                    same = True
                    for ji in range(7):
                        if abs(wrap_angle(qu[ji] - joints_out[jb, ji])) > angle_merge_tol:
                            same = False
                            break
                    if same:
                        dup = True
                        break
                if dup:
                    rej_out[n_rej, 0] = leaf
                    rej_out[n_rej, 1] = REJ_DUPLICATE
                    n_rej += 1
                    continue
                for ji in range(7):
                    joints_out[n_acc, ji] = qu[ji]
                meta_out[n_acc, 0] = slot
                meta_out[n_acc, 1] = t6
                meta_out[n_acc, 2] = r6
                meta_out[n_acc, 3] = q8
                meta_out[n_acc, 4] = s4i
                meta_out[n_acc, 5] = s2i
                meta_out[n_acc, 6] = arm_eq_res
                meta_out[n_acc, 7] = pose_eq_res
                perr_out[n_acc] = perr
                n_acc += 1

    return joints_out, meta_out, perr_out, rej_out, n_acc, n_rej
