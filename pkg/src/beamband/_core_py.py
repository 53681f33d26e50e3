"""Pure-Python twin of the compiled kernel.

Every function here mirrors ``_core.pyx`` statement for statement: same
operation order, same branch structure, same libm calls. That is a hard
constraint, not style — the two backends must produce bit-identical doubles
so that a trace computed on either one is the same trace. Change both files
together or not at all (tests/test_backend_parity.py enforces this).
"""

from __future__ import annotations

from math import atan2, cos, fabs, floor, fmod, log, log10, log2, sin, sqrt

BACKEND_NAME = "python"

PI = 3.141592653589793
TWO_PI = 6.283185307179586
FULL_SPHERE_DEG2 = 41253.0


def _wrap(a):
    a = fmod(a, TWO_PI)
    if a > PI:
        a -= TWO_PI
    elif a < -PI:
        a += TWO_PI
    return a


def _kl_bern(p, q):
    if q < 1e-15:
        q = 1e-15
    elif q > 1.0 - 1e-15:
        q = 1.0 - 1e-15
    out = 0.0
    if p > 0.0:
        out += p * log(p / q)
    if p < 1.0:
        out += (1.0 - p) * log((1.0 - p) / (1.0 - q))
    return out


def kl_ucb_bisect(mean, pulls, log_total, tol):
    """Largest q in [mean, 1] with pulls * kl(mean, q) <= log_total."""
    if log_total <= 0.0:
        return mean
    if pulls * _kl_bern(mean, 1.0) <= log_total:
        return 1.0
    lo = mean
    hi = 1.0
    it = 0
    while hi - lo > tol and it < 200:
        mid = 0.5 * (lo + hi)
        if pulls * _kl_bern(mean, mid) <= log_total:
            lo = mid
        else:
            hi = mid
        it += 1
    return lo


def _advance(x, y, heading, speed, dt, cx, cy, radius):
    """One kinematic step with mirror reflection at the disc boundary."""
    nx = x + speed * dt * cos(heading)
    ny = y + speed * dt * sin(heading)
    dxc = nx - cx
    dyc = ny - cy
    d = sqrt(dxc * dxc + dyc * dyc)
    it = 0
    while d > radius and it < 8:
        nhx = dxc / d
        nhy = dyc / d
        nd = 2.0 * radius - d
        nx = cx + nhx * nd
        ny = cy + nhy * nd
        vx = cos(heading)
        vy = sin(heading)
        dot = vx * nhx + vy * nhy
        vx -= 2.0 * dot * nhx
        vy -= 2.0 * dot * nhy
        heading = atan2(vy, vx)
        dxc = nx - cx
        dyc = ny - cy
        d = sqrt(dxc * dxc + dyc * dyc)
        it += 1
    if d > radius:
        nx = cx + dxc / d * radius
        ny = cy + dyc / d * radius
    return nx, ny, heading


class EnvCore:
    """Scalar environment kernel: mobility step, two-stage sweep, data phase.

    The world state travels as a 6-slot double array:
    [x, y, heading, speed, orientation, rotation_rate].
    """

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

    def step(self, w, dt, noise):
        x, y, heading = _advance(w[0], w[1], w[2], w[3], dt, self.cx, self.cy, self.radius)
        heading = heading + noise * self.heading_noise_rad * sqrt(dt)
        heading = _wrap(heading)
        w[0] = x
        w[1] = y
        w[2] = heading
        w[4] = w[4] + w[5] * dt

    def _path_loss(self, dist, shadow_db):
        if dist < self.min_dist_m:
            dist = self.min_dist_m
        return 28.0 + 22.0 * log10(dist) + self.fc_db + shadow_db

    def sweep(self, w, n_bs, swept, blocked, shadow_db, snr1_out, snr2_out):
        """Stage 1: swept BS beams vs quasi-omni UE; stage 2: UE beams vs the
        stage-1 winner. Fills the per-beam SNR buffers, returns
        (best_bs, best_ue, best_snr_db)."""
        dx = w[0] - self.bs_x
        dy = w[1] - self.bs_y
        dist = sqrt(dx * dx + dy * dy)
        pl = self._path_loss(dist, shadow_db)
        blockpen = self.block_db if blocked else 0.0
        common = self.tx_dbm - pl - blockpen - self.noise_floor_dbm

        bs_spacing = TWO_PI / n_bs
        bs_half = PI / n_bs
        bs_gain = 10.0 * log10(FULL_SPHERE_DEG2 / ((360.0 / n_bs) * self.el_bw_deg))
        los_bs = atan2(dy, dx)

        n_swept = len(swept)
        best1 = -1e30
        best_j = 0
        for j in range(n_swept):
            off = _wrap(swept[j] * bs_spacing - los_bs)
            g = bs_gain if fabs(off) <= bs_half else self.sidelobe_dbi
            snr = common + g + self.ue_omni_dbi
            snr1_out[j] = snr
            if snr > best1:
                best1 = snr
                best_j = j
        best_bs = swept[best_j]

        off = _wrap(best_bs * bs_spacing - los_bs)
        g_bs = bs_gain if fabs(off) <= bs_half else self.sidelobe_dbi

        ue_spacing = TWO_PI / self.n_ue
        ue_half = PI / self.n_ue
        los_ue = atan2(-dy, -dx)
        orientation = w[4]
        best2 = -1e30
        best_u = 0
        for u in range(self.n_ue):
            off = _wrap(orientation + u * ue_spacing - los_ue)
            g = self.ue_gain_dbi if fabs(off) <= ue_half else self.sidelobe_dbi
            snr = common + g_bs + g
            snr2_out[u] = snr
            if snr > best2:
                best2 = snr
                best_u = u
        return int(best_bs), best_u, best2

    def data_phase(self, w, slot_s, data_s, n_bs, bs_beam, ue_beam, blocked,
                   shadow_db, noise):
        """Advance the world through the data window in sub-steps while the
        chosen pair stays fixed; returns the slot's effective rate in bit/s."""
        substep = self.substep_s
        n_full = int(floor(data_s / substep + 1e-9))
        rem = data_s - n_full * substep
        if rem < 1e-12:
            rem = 0.0
        steps = n_full + (1 if rem > 0.0 else 0)

        bs_spacing = TWO_PI / n_bs
        bs_half = PI / n_bs
        bs_gain = 10.0 * log10(FULL_SPHERE_DEG2 / ((360.0 / n_bs) * self.el_bw_deg))
        ue_spacing = TWO_PI / self.n_ue
        ue_half = PI / self.n_ue
        blockpen = self.block_db if blocked else 0.0
        base = self.tx_dbm - blockpen - self.noise_floor_dbm

        x = w[0]
        y = w[1]
        heading = w[2]
        speed = w[3]
        orientation = w[4]
        rot_rate = w[5]
        acc_bits = 0.0
        for i in range(steps):
            dt = substep if i < n_full else rem
            x, y, heading = _advance(x, y, heading, speed, dt, self.cx, self.cy, self.radius)
            heading = heading + noise[i] * self.heading_noise_rad * sqrt(dt)
            heading = _wrap(heading)
            orientation = orientation + rot_rate * dt

            dx = x - self.bs_x
            dy = y - self.bs_y
            dist = sqrt(dx * dx + dy * dy)
            pl = self._path_loss(dist, shadow_db)
            los_bs = atan2(dy, dx)
            off = _wrap(bs_beam * bs_spacing - los_bs)
            g_tx = bs_gain if fabs(off) <= bs_half else self.sidelobe_dbi
            los_ue = atan2(-dy, -dx)
            off = _wrap(orientation + ue_beam * ue_spacing - los_ue)
            g_rx = self.ue_gain_dbi if fabs(off) <= ue_half else self.sidelobe_dbi

            snr_db = base + g_tx + g_rx - pl
            se = log2(1.0 + 10.0 ** (snr_db * 0.1))
            if se > self.se_cap:
                se = self.se_cap
            acc_bits += self.bandwidth_hz * se * dt

        w[0] = x
        w[1] = y
        w[2] = heading
        w[4] = orientation
        return acc_bits / slot_s
