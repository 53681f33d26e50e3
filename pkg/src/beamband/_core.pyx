# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled environment kernel.

Statement-for-statement mirror of ``_core_py.py`` (the pure-Python twin);
both must produce bit-identical doubles. Keep the arithmetic order and branch
structure in sync with that file whenever either changes.
"""

from libc.math cimport atan2, cos, fabs, floor, fmod, log, log10, log2, pow, sin, sqrt

BACKEND_NAME = "c"

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586
cdef double FULL_SPHERE_DEG2 = 41253.0


cdef inline double _wrap(double a) noexcept nogil:
    a = fmod(a, TWO_PI)
    if a > PI:
        a -= TWO_PI
    elif a < -PI:
        a += TWO_PI
    return a


cdef inline double _kl_bern(double p, double q) noexcept nogil:
    cdef double out = 0.0
    if q < 1e-15:
        q = 1e-15
    elif q > 1.0 - 1e-15:
        q = 1.0 - 1e-15
    if p > 0.0:
        out += p * log(p / q)
    if p < 1.0:
        out += (1.0 - p) * log((1.0 - p) / (1.0 - q))
    return out


cpdef double kl_ucb_bisect(double mean, long pulls, double log_total, double tol):
    """Largest q in [mean, 1] with pulls * kl(mean, q) <= log_total."""
    cdef double lo, hi, mid
    cdef int it = 0
    if log_total <= 0.0:
        return mean
    if pulls * _kl_bern(mean, 1.0) <= log_total:
        return 1.0
    lo = mean
    hi = 1.0
    while hi - lo > tol and it < 200:
        mid = 0.5 * (lo + hi)
        if pulls * _kl_bern(mean, mid) <= log_total:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo


cdef inline void _advance(double* x, double* y, double* heading, double speed,
                          double dt, double cx, double cy, double radius) noexcept nogil:
    cdef double nx, ny, dxc, dyc, d, nhx, nhy, nd, vx, vy, dot
    cdef int it = 0
    nx = x[0] + speed * dt * cos(heading[0])
    ny = y[0] + speed * dt * sin(heading[0])
    dxc = nx - cx
    dyc = ny - cy
    d = sqrt(dxc * dxc + dyc * dyc)
    while d > radius and it < 8:
        nhx = dxc / d
        nhy = dyc / d
        nd = 2.0 * radius - d
        nx = cx + nhx * nd
        ny = cy + nhy * nd
        vx = cos(heading[0])
        vy = sin(heading[0])
        dot = vx * nhx + vy * nhy
        vx -= 2.0 * dot * nhx
        vy -= 2.0 * dot * nhy
        heading[0] = atan2(vy, vx)
        dxc = nx - cx
        dyc = ny - cy
        d = sqrt(dxc * dxc + dyc * dyc)
        it += 1
    if d > radius:
        nx = cx + dxc / d * radius
        ny = cy + dyc / d * radius
    x[0] = nx
    y[0] = ny


cdef class EnvCore:
    """Scalar environment kernel: mobility step, two-stage sweep, data phase.

    The world state travels as a 6-slot double array:
    [x, y, heading, speed, orientation, rotation_rate].
    """

    cdef public double cx, cy, radius, bs_x, bs_y, tx_dbm, fc_db, noise_floor_dbm
    cdef public double block_db, se_cap, bandwidth_hz, sidelobe_dbi, ue_omni_dbi
    cdef public double el_bw_deg, ue_gain_dbi, substep_s, heading_noise_rad, min_dist_m
    cdef public long n_ue

    def __init__(self, cx, cy, radius, bs_x, bs_y, tx_dbm, fc_db, noise_floor_dbm,
                 block_db, se_cap, bandwidth_hz, sidelobe_dbi, ue_omni_dbi,
                 el_bw_deg, n_ue, ue_gain_dbi, substep_s, heading_noise_rad,
                 min_dist_m):
        self.cx = cx
        self.cy = cy
        self.radius = radius
        self.bs_x = bs_x
        self.bs_y = bs_y
        self.tx_dbm = tx_dbm
        self.fc_db = fc_db
        self.noise_floor_dbm = noise_floor_dbm
        self.block_db = block_db
        self.se_cap = se_cap
        self.bandwidth_hz = bandwidth_hz
        self.sidelobe_dbi = sidelobe_dbi
        self.ue_omni_dbi = ue_omni_dbi
        self.el_bw_deg = el_bw_deg
        self.n_ue = n_ue
        self.ue_gain_dbi = ue_gain_dbi
        self.substep_s = substep_s
        self.heading_noise_rad = heading_noise_rad
        self.min_dist_m = min_dist_m

    cpdef step(self, double[::1] w, double dt, double noise):
        cdef double x = w[0]
        cdef double y = w[1]
        cdef double heading = w[2]
        _advance(&x, &y, &heading, w[3], dt, self.cx, self.cy, self.radius)
        heading = heading + noise * self.heading_noise_rad * sqrt(dt)
        heading = _wrap(heading)
        w[0] = x
        w[1] = y
        w[2] = heading
        w[4] = w[4] + w[5] * dt

    cdef inline double _path_loss(self, double dist, double shadow_db) noexcept nogil:
        if dist < self.min_dist_m:
            dist = self.min_dist_m
        return 28.0 + 22.0 * log10(dist) + self.fc_db + shadow_db

    cpdef sweep(self, double[::1] w, long n_bs, long[::1] swept, bint blocked,
                double shadow_db, double[::1] snr1_out, double[::1] snr2_out):
        """Stage 1: swept BS beams vs quasi-omni UE; stage 2: UE beams vs the
        stage-1 winner. Fills the per-beam SNR buffers, returns
        (best_bs, best_ue, best_snr_db)."""
        cdef double dx = w[0] - self.bs_x
        cdef double dy = w[1] - self.bs_y
        cdef double dist = sqrt(dx * dx + dy * dy)
        cdef double pl = self._path_loss(dist, shadow_db)
        cdef double blockpen = self.block_db if blocked else 0.0
        cdef double common = self.tx_dbm - pl - blockpen - self.noise_floor_dbm

        cdef double bs_spacing = TWO_PI / n_bs
        cdef double bs_half = PI / n_bs
        cdef double bs_gain = 10.0 * log10(FULL_SPHERE_DEG2 / ((360.0 / n_bs) * self.el_bw_deg))
        cdef double los_bs = atan2(dy, dx)

        cdef Py_ssize_t n_swept = swept.shape[0]
        cdef double best1 = -1e30
        cdef Py_ssize_t best_j = 0
        cdef Py_ssize_t j, u
        cdef double off, g, snr
        for j in range(n_swept):
            off = _wrap(swept[j] * bs_spacing - los_bs)
            if fabs(off) <= bs_half:
                g = bs_gain
            else:
                g = self.sidelobe_dbi
            snr = common + g + self.ue_omni_dbi
            snr1_out[j] = snr
            if snr > best1:
                best1 = snr
                best_j = j
        cdef long best_bs = swept[best_j]

        off = _wrap(best_bs * bs_spacing - los_bs)
        cdef double g_bs
        if fabs(off) <= bs_half:
            g_bs = bs_gain
        else:
            g_bs = self.sidelobe_dbi

        cdef double ue_spacing = TWO_PI / self.n_ue
        cdef double ue_half = PI / self.n_ue
        cdef double los_ue = atan2(-dy, -dx)
        cdef double orientation = w[4]
        cdef double best2 = -1e30
        cdef Py_ssize_t best_u = 0
        for u in range(self.n_ue):
            off = _wrap(orientation + u * ue_spacing - los_ue)
            if fabs(off) <= ue_half:
                g = self.ue_gain_dbi
            else:
                g = self.sidelobe_dbi
            snr = common + g_bs + g
            snr2_out[u] = snr
            if snr > best2:
                best2 = snr
                best_u = u
        return int(best_bs), int(best_u), best2

    cpdef double data_phase(self, double[::1] w, double slot_s, double data_s,
                            long n_bs, long bs_beam, long ue_beam, bint blocked,
                            double shadow_db, double[::1] noise):
        """Advance the world through the data window in sub-steps while the
        chosen pair stays fixed; returns the slot's effective rate in bit/s."""
        cdef double substep = self.substep_s
        cdef long n_full = <long>floor(data_s / substep + 1e-9)
        cdef double rem = data_s - n_full * substep
        if rem < 1e-12:
            rem = 0.0
        cdef long steps = n_full + (1 if rem > 0.0 else 0)

        cdef double bs_spacing = TWO_PI / n_bs
        cdef double bs_half = PI / n_bs
        cdef double bs_gain = 10.0 * log10(FULL_SPHERE_DEG2 / ((360.0 / n_bs) * self.el_bw_deg))
        cdef double ue_spacing = TWO_PI / self.n_ue
        cdef double ue_half = PI / self.n_ue
        cdef double blockpen = self.block_db if blocked else 0.0
        cdef double base = self.tx_dbm - blockpen - self.noise_floor_dbm

        cdef double x = w[0]
        cdef double y = w[1]
        cdef double heading = w[2]
        cdef double speed = w[3]
        cdef double orientation = w[4]
        cdef double rot_rate = w[5]
        cdef double acc_bits = 0.0
        cdef long i
        cdef double dt, dx, dy, dist, pl, los_bs, los_ue, off, g_tx, g_rx, snr_db, se
        for i in range(steps):
            dt = substep if i < n_full else rem
            _advance(&x, &y, &heading, speed, dt, self.cx, self.cy, self.radius)
            heading = heading + noise[i] * self.heading_noise_rad * sqrt(dt)
            heading = _wrap(heading)
            orientation = orientation + rot_rate * dt

            dx = x - self.bs_x
            dy = y - self.bs_y
            dist = sqrt(dx * dx + dy * dy)
            pl = self._path_loss(dist, shadow_db)
            los_bs = atan2(dy, dx)
            off = _wrap(bs_beam * bs_spacing - los_bs)
            if fabs(off) <= bs_half:
                g_tx = bs_gain
            else:
                g_tx = self.sidelobe_dbi
            los_ue = atan2(-dy, -dx)
            off = _wrap(orientation + ue_beam * ue_spacing - los_ue)
            if fabs(off) <= ue_half:
                g_rx = self.ue_gain_dbi
            else:
                g_rx = self.sidelobe_dbi

            snr_db = base + g_tx + g_rx - pl
            se = log2(1.0 + pow(10.0, snr_db * 0.1))
            if se > self.se_cap:
                se = self.se_cap
            acc_bits += self.bandwidth_hz * se * dt

        w[0] = x
        w[1] = y
        w[2] = heading
        w[4] = orientation
        return acc_bits / slot_s
