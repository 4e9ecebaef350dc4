#cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping engine.

Replicates the draw protocol and floating-point expressions of
``_engine_py`` exactly (see its docstring); the build disables FMA
contraction so results are bit-identical across the two backends.  All
loops run without the GIL, so blocks can be dispatched to threads.
"""

from libc.math cimport sqrt, fabs

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (random_standard_exponential_fill,
                                           random_standard_gamma,
                                           random_standard_normal_fill,
                                           random_standard_uniform_fill)

name = "cython"

DEF KIND_FIXED = 0
DEF KIND_GAMMA_HALF = 1
DEF KIND_BETA_HALF = 2
DEF KIND_TABLE = 3


cdef bitgen_t *_get_bitgen(object bit_generator):
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule,
                                             "BitGenerator")


cdef void _draw_thetas(bitgen_t *rng, int kind, double a, int n_extra,
                       const double[::1] grid, const double[::1] cdf,
                       const double[::1] dens, double *theta, double *work,
                       Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double t1, g1, g2, u
    if kind == KIND_FIXED:
        for i in range(m):
            theta[i] = a
    elif kind == KIND_GAMMA_HALF:
        random_standard_normal_fill(rng, m, work)
        for i in range(m):
            t1 = work[i] * work[i]
            theta[i] = 0.5 * t1
        for k in range(n_extra):
            random_standard_exponential_fill(rng, m, work)
            for i in range(m):
                theta[i] = theta[i] + work[i]
        for i in range(m):
            theta[i] = theta[i] / a
    elif kind == KIND_BETA_HALF:
        random_standard_normal_fill(rng, m, work)
        for i in range(m):
            t1 = work[i] * work[i]
            theta[i] = 0.5 * t1
        for i in range(m):
            g1 = theta[i]
            g2 = random_standard_gamma(rng, a)
            theta[i] = g1 / (g1 + g2)
    else:
        random_standard_uniform_fill(rng, m, work)
        for i in range(m):
            u = work[i]
            theta[i] = _table_inverse_cdf(grid, cdf, dens, u)


cdef inline double _table_inverse_cdf(const double[::1] grid,
                                      const double[::1] cdf,
                                      const double[::1] dens,
                                      double u) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = cdf.shape[0], mid, i
    cdef Py_ssize_t imax = grid.shape[0] - 2
    cdef double h, d0, slope, du, disc, denom, s, out
    # np.searchsorted(cdf, u, side="right") - 1, clipped
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    i = lo - 1
    if i < 0:
        i = 0
    if i > imax:
        i = imax
    h = grid[i + 1] - grid[i]
    d0 = dens[i]
    slope = (dens[i + 1] - d0) / h
    du = u - cdf[i]
    disc = sqrt(d0 * d0 + 2.0 * slope * du)
    denom = d0 + disc
    if denom > 0.0:
        s = 2.0 * du / denom
    else:
        s = 0.0
    out = grid[i] + s
    if out > grid[i + 1]:
        out = grid[i + 1]
    return out


def run_stopping_block(object bit_generator, int kind, double a, int n_extra,
                       const double[::1] grid, const double[::1] cdf,
                       const double[::1] dens, double t0, double x0,
                       double dt, const double[:, ::1] bounds,
                       double[:, ::1] payoffs, cnp.uint8_t[:, ::1] stopped):
    cdef Py_ssize_t n = payoffs.shape[0]
    cdef int n_rules = <int> payoffs.shape[1]
    cdef Py_ssize_t last = bounds.shape[1] - 1
    cdef bitgen_t *rng = _get_bitgen(bit_generator)

    theta_arr = np.empty(n)
    work_arr = np.empty(n)
    x_arr = np.empty(n)
    idx_arr = np.empty(n, dtype=np.int64)
    un_arr = np.empty((n, 16), dtype=np.uint8)
    if n_rules > 16:
        raise ValueError("at most 16 simultaneous rules supported")

    cdef double[::1] theta = theta_arr
    cdef double[::1] work = work_arr
    cdef double[::1] x = x_arr
    cdef cnp.int64_t[::1] idx = idx_arr
    cdef cnp.uint8_t[:, ::1] un = un_arr

    cdef Py_ssize_t i, j, w, n_act, n_alive, kk
    cdef int r, any_un
    cdef long k
    cdef double t_prev, t_k, rem, aa, xi, b0

    with bit_generator.lock, nogil:
        _draw_thetas(rng, kind, a, n_extra, grid, cdf, dens, &theta[0],
                     &work[0], n)

        # immediate stop at the start point
        for r in range(n_rules):
            b0 = bounds[r, 0]
            if x0 >= b0:
                for i in range(n):
                    payoffs[i, r] = x0
                    stopped[i, r] = 1

        n_act = 0
        for i in range(n):
            any_un = 0
            for r in range(n_rules):
                if stopped[i, r]:
                    un[n_act, r] = 0
                else:
                    un[n_act, r] = 1
                    any_un = 1
            if any_un:
                idx[n_act] = i
                x[n_act] = x0
                theta[n_act] = theta[i]
                n_act += 1

        k = 0
        while n_act > 0:
            k += 1
            t_prev = t0 + (k - 1) * dt
            t_k = t0 + k * dt

            # drop paths that pin during this step (ascending order kept)
            n_alive = 0
            for i in range(n_act):
                if theta[i] > t_k:
                    if n_alive != i:
                        theta[n_alive] = theta[i]
                        x[n_alive] = x[i]
                        idx[n_alive] = idx[i]
                        for r in range(n_rules):
                            un[n_alive, r] = un[i, r]
                    n_alive += 1
            n_act = n_alive
            if n_act == 0:
                break

            random_standard_normal_fill(rng, n_act, &work[0])
            kk = k if k < last else last

            w = 0
            for i in range(n_act):
                rem = theta[i] - t_prev
                aa = (rem - dt) / rem
                xi = x[i] * aa + sqrt(dt * aa) * work[i]
                any_un = 0
                for r in range(n_rules):
                    if un[i, r]:
                        if xi >= bounds[r, kk]:
                            payoffs[idx[i], r] = xi
                            stopped[idx[i], r] = 1
                            un[i, r] = 0
                        else:
                            any_un = 1
                if any_un:
                    if w != i:
                        theta[w] = theta[i]
                        idx[w] = idx[i]
                        for r in range(n_rules):
                            un[w, r] = un[i, r]
                    x[w] = xi
                    w += 1
            n_act = w


def snapshot_block(object bit_generator, int kind, double a, int n_extra,
                   const double[::1] grid, const double[::1] cdf,
                   const double[::1] dens, double t0, double x0, double dt,
                   long k_query, double[::1] x_out, double[::1] theta_out):
    cdef Py_ssize_t n = x_out.shape[0]
    cdef bitgen_t *rng = _get_bitgen(bit_generator)

    theta_arr = np.empty(n)
    work_arr = np.empty(n)
    x_arr = np.empty(n)
    idx_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] theta = theta_arr
    cdef double[::1] work = work_arr
    cdef double[::1] x = x_arr
    cdef cnp.int64_t[::1] idx = idx_arr

    cdef Py_ssize_t i, n_act, n_alive
    cdef long k
    cdef double t_prev, t_k, rem, aa

    with bit_generator.lock, nogil:
        _draw_thetas(rng, kind, a, n_extra, grid, cdf, dens, &theta[0],
                     &work[0], n)
        for i in range(n):
            theta_out[i] = theta[i]
            x_out[i] = 0.0
            x[i] = x0
            idx[i] = i
        n_act = n

        for k in range(1, k_query + 1):
            t_prev = t0 + (k - 1) * dt
            t_k = t0 + k * dt
            n_alive = 0
            for i in range(n_act):
                if theta[i] > t_k:
                    if n_alive != i:
                        theta[n_alive] = theta[i]
                        x[n_alive] = x[i]
                        idx[n_alive] = idx[i]
                    n_alive += 1
            n_act = n_alive
            if n_act == 0:
                break
            random_standard_normal_fill(rng, n_act, &work[0])
            for i in range(n_act):
                rem = theta[i] - t_prev
                aa = (rem - dt) / rem
                x[i] = x[i] * aa + sqrt(dt * aa) * work[i]
        for i in range(n_act):
            x_out[idx[i]] = x[i]


def compensator_block(object bit_generator, int kind, double a, int n_extra,
                      const double[::1] grid, const double[::1] cdf,
                      const double[::1] dens, double x0, double dt,
                      long k_mark, long k_end, const double[::1] qvals,
                      double bandwidth, double[::1] theta_out,
                      double[::1] local_out):
    cdef Py_ssize_t n = theta_out.shape[0]
    cdef bitgen_t *rng = _get_bitgen(bit_generator)

    theta_arr = np.empty(n)
    work_arr = np.empty(n)
    x_arr = np.empty(n)
    idx_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] theta = theta_arr
    cdef double[::1] work = work_arr
    cdef double[::1] x = x_arr
    cdef cnp.int64_t[::1] idx = idx_arr

    cdef Py_ssize_t i, n_act, n_alive
    cdef long j, k
    cdef double t_prev, t_k, rem, aa, scale

    scale = dt / (2.0 * bandwidth)
    with bit_generator.lock, nogil:
        _draw_thetas(rng, kind, a, n_extra, grid, cdf, dens, &theta[0],
                     &work[0], n)
        for i in range(n):
            theta_out[i] = theta[i]
            local_out[i] = 0.0
            x[i] = x0
            idx[i] = i
        n_act = n

        for j in range(k_end):
            if j >= k_mark:
                for i in range(n_act):
                    if fabs(x[i]) <= bandwidth:
                        local_out[idx[i]] += qvals[j - k_mark] * scale
            k = j + 1
            t_prev = j * dt
            t_k = k * dt
            n_alive = 0
            for i in range(n_act):
                if theta[i] > t_k:
                    if n_alive != i:
                        theta[n_alive] = theta[i]
                        x[n_alive] = x[i]
                        idx[n_alive] = idx[i]
                    n_alive += 1
            n_act = n_alive
            if n_act == 0:
                break
            random_standard_normal_fill(rng, n_act, &work[0])
            for i in range(n_act):
                rem = theta[i] - t_prev
                aa = (rem - dt) / rem
                x[i] = x[i] * aa + sqrt(dt * aa) * work[i]
