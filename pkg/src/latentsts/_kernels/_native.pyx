# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled latent-path kernels.

Call-for-call mirror of ``_fallback``: the same numpy C distribution
functions are invoked in the same order on the same bit generator state, so
paths are bit-identical between the two implementations.  Keep the
recursion arithmetic in sync with ``_fallback`` (and compile with
-ffp-contract=off) when editing.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_gamma,
    random_poisson,
    random_standard_normal,
)

cnp.import_array()

IMPLEMENTATION = "native"

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen_state(object bitgen) except NULL:
    capsule = bitgen.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("expected a numpy BitGenerator")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


def gaussian_ar1_path(object bitgen, Py_ssize_t n, double c, double rho,
                      double start_mean, double start_sd, double innov_sd):
    """alpha_0 ~ N(start_mean, start_sd^2), alpha_t = c + rho alpha_{t-1} + innov_sd xi_t."""
    cdef bitgen_t *state = _bitgen_state(bitgen)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = out
    cdef Py_ssize_t t
    cdef double prev
    with bitgen.lock, nogil:
        prev = start_mean + start_sd * random_standard_normal(state)
        buf[0] = prev
        for t in range(1, n):
            prev = (c + rho * prev) + (innov_sd * random_standard_normal(state))
            buf[t] = prev
    return out


def gar1_path(object bitgen, Py_ssize_t n, double shape, double start_scale,
              double pois_coef, double thin_scale, double innov_scale):
    """First-order gamma autoregression via Poisson-compounded exponential thinning."""
    cdef bitgen_t *state = _bitgen_state(bitgen)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] buf = out
    cdef Py_ssize_t t
    cdef double z, thinned
    cdef long long count
    with bitgen.lock, nogil:
        z = random_gamma(state, shape, start_scale)
        buf[0] = z
        for t in range(1, n):
            count = random_poisson(state, pois_coef * z)
            thinned = random_gamma(state, <double> count, thin_scale)
            z = thinned + random_gamma(state, shape, innov_scale)
            buf[t] = z
    return out
