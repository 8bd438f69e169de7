"""Compiled path engine.

Contains a scalar mirror of the counter-based RNG (pinned to the vectorized
implementation by a test), membership/boundary-distance kernels over the
flat shape encoding, and the path loops: truncated-process exit (optionally
accumulating occupation time), exact stable ball-exit sampling, and
walk-on-spheres.  Everything is addressed by ``(seed, stream_id = base +
path index, counter)`` so results are independent of batching and worker
count.

Draw protocol (one counter = one generator block = a pair of values):
exponential waits and jump radii consume one block each using the first
value; a block of normals yields two coordinates; rejection loops consume
whole blocks per attempt.  The number of blocks consumed is a deterministic
function of the consumed values, so replaying a stream reproduces a path
exactly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_SHIFT11 = np.uint64(11)
_ONE64 = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


@njit(cache=True)
def _block(seed, sid, ctr):
    """Philox4x32-10 block -> two uniforms in (0, 1)."""
    c0 = ctr & _MASK32
    c1 = ctr >> _SHIFT32
    c2 = sid & _MASK32
    c3 = sid >> _SHIFT32
    k0 = seed & _MASK32
    k1 = seed >> _SHIFT32
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        n0 = (p1 >> _SHIFT32) ^ c1 ^ k0
        n1 = p1 & _MASK32
        n2 = (p0 >> _SHIFT32) ^ c3 ^ k1
        n3 = p0 & _MASK32
        c0 = n0
        c1 = n1
        c2 = n2
        c3 = n3
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    a = ((c0 << _SHIFT32) | c1) >> _SHIFT11
    b = ((c2 << _SHIFT32) | c3) >> _SHIFT11
    return (np.float64(a) + 0.5) * _INV53, (np.float64(b) + 0.5) * _INV53


@njit(cache=True)
def _normal_block(seed, sid, ctr):
    """One block -> two standard normals (Box-Muller)."""
    u1, u2 = _block(seed, sid, ctr)
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(_TWO_PI * u2), r * math.sin(_TWO_PI * u2)


# --------------------------------------------------------------------------
# shape kernels over the flat encoding (see domains.encode_shape)
# --------------------------------------------------------------------------

KIND_BALL = 0
KIND_ANNULUS = 1
KIND_BOX = 2
KIND_POLYTOPE = 3
KIND_BOX_MINUS_SLAB = 4
KIND_BALL_UNION = 5


@njit(cache=True)
def _inside(kind, data, cap, p):
    d = p.shape[0]
    if cap[d] >= 0.0:
        s = 0.0
        for i in range(d):
            t = p[i] - cap[i]
            s += t * t
        if s >= cap[d] * cap[d]:
            return False
    if kind == KIND_BALL:
        s = 0.0
        for i in range(d):
            t = p[i] - data[i]
            s += t * t
        return s < data[d] * data[d]
    if kind == KIND_ANNULUS:
        s = 0.0
        for i in range(d):
            t = p[i] - data[i]
            s += t * t
        return data[d] * data[d] < s < data[d + 1] * data[d + 1]
    if kind == KIND_BOX:
        for i in range(d):
            if not (data[i] < p[i] < data[d + i]):
                return False
        return True
    if kind == KIND_POLYTOPE:
        k = int(data[0])
        for j in range(k):
            base = 1 + j * (d + 1)
            s = 0.0
            for i in range(d):
                s += data[base + i] * p[i]
            if s >= data[base + d]:
                return False
        return True
    if kind == KIND_BOX_MINUS_SLAB:
        for i in range(d):
            if not (data[i] < p[i] < data[d + i]):
                return False
        for i in range(d):
            if p[i] < data[2 * d + i] or p[i] > data[3 * d + i]:
                return True
        return False
    if kind == KIND_BALL_UNION:
        k = int(data[0])
        for j in range(k):
            base = 1 + j * (d + 1)
            s = 0.0
            for i in range(d):
                t = p[i] - data[base + i]
                s += t * t
            if s < data[base + d] * data[base + d]:
                return True
        return False
    return False


@njit(cache=True)
def _bdist(kind, data, cap, p):
    """Interior distance lower bound; assumes ``_inside(kind, data, cap, p)``."""
    d = p.shape[0]
    best = math.inf
    if cap[d] >= 0.0:
        s = 0.0
        for i in range(d):
            t = p[i] - cap[i]
            s += t * t
        best = cap[d] - math.sqrt(s)
    if kind == KIND_BALL:
        s = 0.0
        for i in range(d):
            t = p[i] - data[i]
            s += t * t
        g = data[d] - math.sqrt(s)
        return g if g < best else best
    if kind == KIND_ANNULUS:
        s = 0.0
        for i in range(d):
            t = p[i] - data[i]
            s += t * t
        rho = math.sqrt(s)
        g = min(data[d + 1] - rho, rho - data[d])
        return g if g < best else best
    if kind == KIND_BOX:
        g = math.inf
        for i in range(d):
            a = p[i] - data[i]
            b = data[d + i] - p[i]
            if a < g:
                g = a
            if b < g:
                g = b
        return g if g < best else best
    if kind == KIND_POLYTOPE:
        k = int(data[0])
        g = math.inf
        for j in range(k):
            base = 1 + j * (d + 1)
            s = 0.0
            for i in range(d):
                s += data[base + i] * p[i]
            gap = data[base + d] - s
            if gap < g:
                g = gap
        return g if g < best else best
    if kind == KIND_BOX_MINUS_SLAB:
        g = math.inf
        for i in range(d):
            a = p[i] - data[i]
            b = data[d + i] - p[i]
            if a < g:
                g = a
            if b < g:
                g = b
        s = 0.0
        for i in range(d):
            lo = data[2 * d + i] - p[i]
            hi = p[i] - data[3 * d + i]
            e = lo if lo > hi else hi
            if e > 0.0:
                s += e * e
        ds = math.sqrt(s)
        if ds < g:
            g = ds
        return g if g < best else best
    if kind == KIND_BALL_UNION:
        k = int(data[0])
        g = 0.0
        for j in range(k):
            base = 1 + j * (d + 1)
            s = 0.0
            for i in range(d):
                t = p[i] - data[base + i]
                s += t * t
            gap = data[base + d] - math.sqrt(s)
            if gap > g:
                g = gap
        return g if g < best else best
    return 0.0


# --------------------------------------------------------------------------
# truncated-process paths
# --------------------------------------------------------------------------


@njit(cache=True)
def _run_paths(
    seed,
    stream_base,
    ctr0,
    n_paths,
    alpha,
    start,
    kind,
    data,
    cap,
    lam,
    ena,
    sigma,
    h,
    max_time,
    refine,
    use_gauss,
    track_occ,
    occ_low,
    occ_width,
    occ_cells,
    occ_times,
    occ_sq,
    out_pos,
    out_time,
    out_jump,
    out_last,
    out_cens,
    out_ctr,
):
    """Simulate ``n_paths`` truncated-process paths to exit.

    ``lam`` is the compound-Poisson rate, ``ena = epsilon**(-alpha)`` feeds
    the jump-radius inverse CDF, ``sigma`` the per-coordinate small-jump
    standard deviation (0 disables the diffusive channel together with
    ``use_gauss``).  With ``track_occ`` every waiting interval is added to
    the grid cell of the position occupied during it; per-path cell totals
    are folded into ``occ_times`` (sums) and ``occ_sq`` (sums of squares)
    when the path exits in time, so callers can form means and standard
    errors across paths.  Censored paths contribute no occupation.
    """
    d = start.shape[0]
    n_npairs = (d + 1) // 2
    inv_alpha = 1.0 / alpha
    sqrt_d = math.sqrt(d)
    pos = np.empty(d)
    last = np.empty(d)
    vec = np.empty(d)
    scratch = np.zeros(occ_times.shape[0])
    h_floor = h / 64.0
    for path in range(n_paths):
        sid = np.uint64(stream_base + path)
        ctr = np.uint64(ctr0)
        for i in range(d):
            pos[i] = start[i]
            last[i] = start[i]
        t = 0.0
        censored = False
        by_jump = False
        u1, _u2 = _block(seed, sid, ctr)
        ctr += _ONE64
        t_jump = -math.log(u1) / lam
        while True:
            if t >= max_time:
                censored = True
                break
            if use_gauss and t < t_jump:
                dt = h
                if refine:
                    bd = _bdist(kind, data, cap, pos)
                    cap_dt = bd / (3.0 * sigma * sqrt_d)
                    cap_dt = cap_dt * cap_dt
                    if cap_dt < dt:
                        dt = cap_dt
                    if dt < h_floor:
                        dt = h_floor
                at_jump = False
                if t + dt >= t_jump:
                    dt = t_jump - t
                    at_jump = True
                if track_occ and dt > 0.0:
                    _occ_add(occ_low, occ_width, occ_cells, scratch, pos, dt)
                if dt > 0.0:
                    scale = sigma * math.sqrt(dt)
                    for i in range(d):
                        last[i] = pos[i]
                    j = 0
                    for _ in range(n_npairs):
                        g1, g2 = _normal_block(seed, sid, ctr)
                        ctr += _ONE64
                        if j < d:
                            vec[j] = g1
                            j += 1
                        if j < d:
                            vec[j] = g2
                            j += 1
                    for i in range(d):
                        pos[i] += scale * vec[i]
                t = t_jump if at_jump else t + dt
                if dt > 0.0 and not _inside(kind, data, cap, pos):
                    by_jump = False
                    break
                continue
            if not use_gauss and t < t_jump:
                # pure-jump mode: fast-forward the clock in place
                if t_jump >= max_time:
                    if track_occ and max_time > t:
                        _occ_add(
                            occ_low, occ_width, occ_cells, scratch, pos, max_time - t
                        )
                    t = max_time
                else:
                    if track_occ:
                        _occ_add(
                            occ_low, occ_width, occ_cells, scratch, pos, t_jump - t
                        )
                    t = t_jump
                continue
            # at the jump epoch: apply an exact truncated jump
            u1, _u2 = _block(seed, sid, ctr)
            ctr += _ONE64
            radius = (ena - u1 * (ena - 1.0)) ** (-inv_alpha)
            j = 0
            for _ in range(n_npairs):
                g1, g2 = _normal_block(seed, sid, ctr)
                ctr += _ONE64
                if j < d:
                    vec[j] = g1
                    j += 1
                if j < d:
                    vec[j] = g2
                    j += 1
            norm = 0.0
            for i in range(d):
                norm += vec[i] * vec[i]
            norm = math.sqrt(norm)
            if norm == 0.0:
                norm = 1.0
            for i in range(d):
                last[i] = pos[i]
                pos[i] += radius * vec[i] / norm
            u1, _u2 = _block(seed, sid, ctr)
            ctr += _ONE64
            t_jump = t - math.log(u1) / lam
            if not _inside(kind, data, cap, pos):
                by_jump = True
                break
        if track_occ:
            for k in range(scratch.shape[0]):
                v = scratch[k]
                if v != 0.0:
                    if not censored:
                        occ_times[k] += v
                        occ_sq[k] += v * v
                    scratch[k] = 0.0
        for i in range(d):
            out_pos[path, i] = pos[i]
            out_last[path, i] = last[i]
        out_time[path] = t
        out_jump[path] = by_jump
        out_cens[path] = censored
        out_ctr[path] = ctr


@njit(cache=True)
def _occ_add(occ_low, occ_width, occ_cells, occ_times, p, dt):
    flat = 0
    for i in range(p.shape[0]):
        idx = int(math.floor((p[i] - occ_low[i]) / occ_width[i]))
        if idx < 0 or idx >= occ_cells[i]:
            return
        flat = flat * occ_cells[i] + idx
    occ_times[flat] += dt


# --------------------------------------------------------------------------
# column-exit weights (planar case)
# --------------------------------------------------------------------------


@njit(cache=True)
def _column_intensity(a, y, top, w_half, a_const, p_exp, closed, nb, wb, nt, wt):
    """Jump intensity from the point ``(a, y)`` into the half-infinite column
    ``{(b, c): |b| <= w_half, c <= top}``, restricted to jump length < 1.

    The caller must keep ``y > top`` (the point strictly above the column).
    The inner vertical integral is exact when ``closed`` (exponent 3/2, the
    planar unit-index case) and Gauss-Legendre otherwise; the horizontal
    integral uses the supplied Gauss nodes on the active window.
    """
    dy = y - top
    if dy >= 1.0 or dy <= 0.0:
        return 0.0
    bmax2 = 1.0 - dy * dy
    bmax = math.sqrt(bmax2)
    lo = a - bmax
    if lo < -w_half:
        lo = -w_half
    hi = a + bmax
    if hi > w_half:
        hi = w_half
    if lo >= hi:
        return 0.0
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    total = 0.0
    for i in range(nb.shape[0]):
        b = mid + half * nb[i]
        q = b - a
        q2 = q * q
        if q2 >= bmax2:
            continue
        if closed:
            # exponent 3/2: integral of (q^2 + t^2)^(-3/2) over the active
            # t-range, written without the cancelling 1/q^2 split so it stays
            # accurate when the window is thin and q is tiny
            rr = math.sqrt(q2 + dy * dy)
            s = math.sqrt(1.0 - q2)
            inner = (bmax2 - q2) / (rr * (s * rr + dy))
        else:
            s = math.sqrt(1.0 - q2)
            tm = -0.5 * (s + dy)
            th = 0.5 * (s - dy)
            inner = 0.0
            for j in range(nt.shape[0]):
                t = tm + th * nt[j]
                inner += wt[j] * (q2 + t * t) ** (-p_exp)
            inner *= th
        total += wb[i] * inner
    return a_const * half * total


@njit(cache=True)
def _cn_add(out_w, path, tops, a, y, dt, w_half, a_const, p_exp, closed, nb, wb, nt, wt):
    """Add ``dt`` times the per-column intensity at ``(a, y)``; ``tops`` must
    descend so inactive columns form a suffix once the first is out of range.
    """
    for k in range(tops.shape[0]):
        if y - tops[k] >= 1.0:
            break
        out_w[path, k] += dt * _column_intensity(
            a, y, tops[k], w_half, a_const, p_exp, closed, nb, wb, nt, wt
        )


@njit(cache=True)
def _run_paths_cn(
    seed,
    stream_base,
    ctr0,
    n_paths,
    alpha,
    start,
    kind,
    data,
    cap,
    lam,
    ena,
    sigma,
    h,
    max_time,
    refine,
    use_gauss,
    tops,
    w_half,
    a_const,
    p_exp,
    closed,
    nb,
    wb,
    nt,
    wt,
    out_w,
    out_pos,
    out_time,
    out_jump,
    out_last,
    out_cens,
    out_ctr,
):
    """Planar variant of ``_run_paths`` that also accumulates, per path and
    per column, the pathwise time integral of the jump intensity into the
    half-infinite columns ``{|z1| <= w_half, z2 <= tops[k]}``.

    The expectation of that integral is the expected number of jumps into a
    column before exit.  When the columns lie outside the domain and farther
    from it than the jump-size floor, at most one such jump can occur and it
    ends the path, so the expectation equals the probability of exiting into
    the column — the same target as hit counting on exit positions, but with
    every path that visits the active layer contributing.  Draw layout and
    path law are identical to ``_run_paths``, so the exit arrays match that
    function bit for bit at equal seeds.  ``tops`` must be descending.
    """
    inv_alpha = 1.0 / alpha
    sqrt_d = math.sqrt(2.0)
    pos = np.empty(2)
    last = np.empty(2)
    h_floor = h / 64.0
    for path in range(n_paths):
        sid = np.uint64(stream_base + path)
        ctr = np.uint64(ctr0)
        pos[0] = start[0]
        pos[1] = start[1]
        last[0] = start[0]
        last[1] = start[1]
        for k in range(tops.shape[0]):
            out_w[path, k] = 0.0
        t = 0.0
        censored = False
        by_jump = False
        u1, _u2 = _block(seed, sid, ctr)
        ctr += _ONE64
        t_jump = -math.log(u1) / lam
        while True:
            if t >= max_time:
                censored = True
                break
            if use_gauss and t < t_jump:
                dt = h
                if refine:
                    bd = _bdist(kind, data, cap, pos)
                    cap_dt = bd / (3.0 * sigma * sqrt_d)
                    cap_dt = cap_dt * cap_dt
                    if cap_dt < dt:
                        dt = cap_dt
                    if dt < h_floor:
                        dt = h_floor
                at_jump = False
                if t + dt >= t_jump:
                    dt = t_jump - t
                    at_jump = True
                if dt > 0.0:
                    _cn_add(
                        out_w, path, tops, pos[0], pos[1], dt,
                        w_half, a_const, p_exp, closed, nb, wb, nt, wt,
                    )
                    scale = sigma * math.sqrt(dt)
                    last[0] = pos[0]
                    last[1] = pos[1]
                    g1, g2 = _normal_block(seed, sid, ctr)
                    ctr += _ONE64
                    pos[0] += scale * g1
                    pos[1] += scale * g2
                t = t_jump if at_jump else t + dt
                if dt > 0.0 and not _inside(kind, data, cap, pos):
                    by_jump = False
                    break
                continue
            if not use_gauss and t < t_jump:
                # pure-jump mode: fast-forward the clock in place
                if t_jump >= max_time:
                    if max_time > t:
                        _cn_add(
                            out_w, path, tops, pos[0], pos[1], max_time - t,
                            w_half, a_const, p_exp, closed, nb, wb, nt, wt,
                        )
                    t = max_time
                else:
                    _cn_add(
                        out_w, path, tops, pos[0], pos[1], t_jump - t,
                        w_half, a_const, p_exp, closed, nb, wb, nt, wt,
                    )
                    t = t_jump
                continue
            # at the jump epoch: apply an exact truncated jump
            u1, _u2 = _block(seed, sid, ctr)
            ctr += _ONE64
            radius = (ena - u1 * (ena - 1.0)) ** (-inv_alpha)
            g1, g2 = _normal_block(seed, sid, ctr)
            ctr += _ONE64
            norm = math.sqrt(g1 * g1 + g2 * g2)
            if norm == 0.0:
                norm = 1.0
            last[0] = pos[0]
            last[1] = pos[1]
            pos[0] += radius * g1 / norm
            pos[1] += radius * g2 / norm
            u1, _u2 = _block(seed, sid, ctr)
            ctr += _ONE64
            t_jump = t - math.log(u1) / lam
            if not _inside(kind, data, cap, pos):
                by_jump = True
                break
        out_pos[path, 0] = pos[0]
        out_pos[path, 1] = pos[1]
        out_last[path, 0] = last[0]
        out_last[path, 1] = last[1]
        out_time[path] = t
        out_jump[path] = by_jump
        out_cens[path] = censored
        out_ctr[path] = ctr


# --------------------------------------------------------------------------
# exact stable ball exits and walk-on-spheres
# --------------------------------------------------------------------------


@njit(cache=True)
def _johnk_beta(seed, sid, ctr, half_alpha):
    """Beta(alpha/2, 1 - alpha/2) variate; returns (value, next counter)."""
    inv_a = 1.0 / half_alpha
    inv_b = 1.0 / (1.0 - half_alpha)
    while True:
        u1, u2 = _block(seed, sid, ctr)
        ctr += _ONE64
        x = u1**inv_a
        y = u2**inv_b
        s = x + y
        if s <= 1.0:
            return x / s, ctr


@njit(cache=True)
def _unit_direction(seed, sid, ctr, vec):
    """Uniform direction on the sphere via normalized normals."""
    d = vec.shape[0]
    j = 0
    for _ in range((d + 1) // 2):
        g1, g2 = _normal_block(seed, sid, ctr)
        ctr += _ONE64
        if j < d:
            vec[j] = g1
            j += 1
        if j < d:
            vec[j] = g2
            j += 1
    norm = 0.0
    for i in range(d):
        norm += vec[i] * vec[i]
    norm = math.sqrt(norm)
    if norm == 0.0:
        norm = 1.0
    for i in range(d):
        vec[i] /= norm
    return ctr


@njit(cache=True)
def _ball_exit_one(seed, sid, ctr, alpha, center, radius, x, vec, out):
    """One exact stable exit position from ``B(center, radius)`` started at x.

    Radial law: with ``u ~ Beta(alpha/2, 1-alpha/2)``, the exit norm is
    ``rho = sqrt(a**2 + (radius**2 - a**2)/u)`` (a = |x - center|); the
    angular law given rho has density proportional to ``|x - z|**-d`` on
    the sphere, sampled by rejection from the uniform direction with
    acceptance ``((rho - a) / |x - z|)**d`` (always accepts when a = 0).
    """
    d = center.shape[0]
    a2 = 0.0
    for i in range(d):
        t = x[i] - center[i]
        a2 += t * t
    a = math.sqrt(a2)
    u, ctr = _johnk_beta(seed, sid, ctr, 0.5 * alpha)
    rho = math.sqrt(a2 + (radius * radius - a2) / u)
    if a == 0.0:
        ctr = _unit_direction(seed, sid, ctr, vec)
        for i in range(d):
            out[i] = center[i] + rho * vec[i]
        return ctr
    gap = rho - a
    while True:
        ctr = _unit_direction(seed, sid, ctr, vec)
        dist2 = 0.0
        for i in range(d):
            z_i = center[i] + rho * vec[i]
            t = x[i] - z_i
            dist2 += t * t
        accept = (gap * gap / dist2) ** (0.5 * d)
        u1, _u2 = _block(seed, sid, ctr)
        ctr += _ONE64
        if u1 <= accept:
            for i in range(d):
                out[i] = center[i] + rho * vec[i]
            return ctr


@njit(cache=True)
def _ball_exit_batch(seed, stream_base, ctr0, n, alpha, center, radius, x, out, out_ctr):
    d = center.shape[0]
    vec = np.empty(d)
    for path in range(n):
        sid = np.uint64(stream_base + path)
        out_ctr[path] = _ball_exit_one(
            seed, sid, np.uint64(ctr0), alpha, center, radius, x, vec, out[path]
        )


@njit(cache=True)
def _wos_batch(
    seed,
    stream_base,
    ctr0,
    n,
    alpha,
    start,
    kind,
    data,
    cap,
    step_limit,
    out,
    out_steps,
    out_ctr,
):
    """Walk-on-spheres: iterate exact ball exits from inscribed balls.

    ``out_steps[i] < 0`` flags a path that hit ``step_limit`` while still
    interior (the caller raises).
    """
    d = start.shape[0]
    vec = np.empty(d)
    pos = np.empty(d)
    nxt = np.empty(d)
    for path in range(n):
        sid = np.uint64(stream_base + path)
        ctr = np.uint64(ctr0)
        for i in range(d):
            pos[i] = start[i]
        steps = 0
        while True:
            if steps >= step_limit:
                out_steps[path] = -1
                for i in range(d):
                    out[path, i] = pos[i]
                break
            bd = _bdist(kind, data, cap, pos)
            ctr = _ball_exit_one(seed, sid, ctr, alpha, pos, bd, pos, vec, nxt)
            steps += 1
            for i in range(d):
                pos[i] = nxt[i]
            if not _inside(kind, data, cap, pos):
                out_steps[path] = steps
                for i in range(d):
                    out[path, i] = pos[i]
                break
        out_ctr[path] = ctr
