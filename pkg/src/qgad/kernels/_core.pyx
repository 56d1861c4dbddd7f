# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled amplitude kernels.

Same contract as the numpy backend (see _numpy.py): contiguous complex128
state of length 2**q, qubit 0 at the least significant bit of the basis
label.  These run as single in-place passes without whole-array temporaries.
"""

import numpy as np

from libc.math cimport sqrt


def hadamard(double complex[::1] amps, int qubit):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t stride = (<Py_ssize_t>1) << qubit
    cdef Py_ssize_t block = stride << 1
    cdef Py_ssize_t base, off, i0, i1
    cdef double complex a0, a1
    cdef double s = 1.0 / sqrt(2.0)
    for base in range(0, n, block):
        for off in range(stride):
            i0 = base + off
            i1 = i0 + stride
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = (a0 + a1) * s
            amps[i1] = (a0 - a1) * s


def controlled_bit_flip(double complex[::1] amps, long long control_mask, int target_bit):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t cmask = <Py_ssize_t>control_mask
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << target_bit
    cdef Py_ssize_t b, p
    cdef double complex tmp
    for b in range(n):
        if (b & tbit) == 0 and (b & cmask) == cmask:
            p = b | tbit
            tmp = amps[b]
            amps[b] = amps[p]
            amps[p] = tmp


def phase_flip(double complex[::1] amps, long long mask):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t m = <Py_ssize_t>mask
    cdef Py_ssize_t b
    for b in range(n):
        if (b & m) == m:
            amps[b] = -amps[b]


def xor_indexed(double complex[::1] amps, int src_offset, int src_width,
                long long[::1] table, int tgt_offset):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t smask = ((<Py_ssize_t>1) << src_width) - 1
    cdef Py_ssize_t b, p, v
    cdef double complex tmp
    for b in range(n):
        v = (<Py_ssize_t>table[(b >> src_offset) & smask]) << tgt_offset
        if v != 0:
            p = b ^ v
            if p > b:
                tmp = amps[b]
                amps[b] = amps[p]
                amps[p] = tmp


def comparator_flip(double complex[::1] amps, int a_offset, int b_offset,
                    int width, int flag_bit):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t mask = ((<Py_ssize_t>1) << width) - 1
    cdef Py_ssize_t flag = (<Py_ssize_t>1) << flag_bit
    cdef Py_ssize_t b, p
    cdef double complex tmp
    for b in range(n):
        if (b & flag) == 0 and ((b >> a_offset) & mask) > ((b >> b_offset) & mask):
            p = b | flag
            tmp = amps[b]
            amps[b] = amps[p]
            amps[p] = tmp


def pattern_probability(double complex[::1] amps, long long mask, long long value):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t m = <Py_ssize_t>mask
    cdef Py_ssize_t v = <Py_ssize_t>value
    cdef Py_ssize_t b
    cdef double acc = 0.0
    cdef double complex a
    for b in range(n):
        if (b & m) == v:
            a = amps[b]
            acc += a.real * a.real + a.imag * a.imag
    return acc


def collapse(double complex[::1] amps, long long mask, long long value, double scale):
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t m = <Py_ssize_t>mask
    cdef Py_ssize_t v = <Py_ssize_t>value
    cdef Py_ssize_t b
    for b in range(n):
        if (b & m) == v:
            amps[b] = amps[b] * scale
        else:
            amps[b] = 0.0


def permute(double complex[::1] amps, long long[::1] perm):
    out_arr = np.empty(amps.shape[0], dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t n = amps.shape[0]
    cdef Py_ssize_t b
    for b in range(n):
        out[perm[b]] = amps[b]
    return out_arr
