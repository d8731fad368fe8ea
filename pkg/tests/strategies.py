"""
Hypothesis strategies for positive forms, contractive shift weights and arcs
"""

import numpy as np
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from core.random_models import make_rng, random_unitary
from core.shifts import ShiftWeights

MAX_DIM = 6
MIN_EIGENVALUE = 0.1
MAX_EIGENVALUE = 10.0
MAX_ENTRY = 10.0
MIN_ARC = 1e-2

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def complex_arrays(shape) -> st.SearchStrategy:
    return arrays(
        np.complex128,
        shape,
        elements=st.complex_numbers(max_magnitude=MAX_ENTRY, allow_nan=False,
                                    allow_infinity=False, allow_subnormal=False),
    )


@st.composite
def square_matrices(draw, max_dim: int = 4) -> np.ndarray:
    dim = draw(st.integers(min_value=1, max_value=max_dim))
    return draw(complex_arrays((dim, dim)))


@st.composite
def positive_forms(draw, max_dim: int = MAX_DIM) -> np.ndarray:
    """V diag(s) V^H with s in [0.1, 10] and V the first rank columns of a unitary"""
    dim = draw(st.integers(min_value=1, max_value=max_dim))
    rank = draw(st.integers(min_value=1, max_value=dim))
    spectrum = draw(arrays(np.float64, (rank,),
                           elements=st.floats(min_value=MIN_EIGENVALUE, max_value=MAX_EIGENVALUE)))
    V = random_unitary(make_rng(draw(seeds)), dim)[:, :rank]
    return (V * spectrum) @ V.conj().T


@st.composite
def positive_forms_with_vectors(draw, max_dim: int = 4):
    M = draw(positive_forms(max_dim))
    dim = M.shape[0]
    return M, draw(complex_arrays((dim,))), draw(complex_arrays((dim,)))


@st.composite
def contractive_weights(draw, max_window: int = 8) -> ShiftWeights:
    """Moduli in [0, 1] with arbitrary phases"""
    window = draw(st.integers(min_value=1, max_value=max_window))
    moduli = draw(arrays(np.float64, (2 * window,),
                         elements=st.floats(min_value=0.0, max_value=1.0, allow_subnormal=False)))
    phases = draw(arrays(np.float64, (2 * window,),
                         elements=st.floats(min_value=0.0, max_value=2 * np.pi)))
    return ShiftWeights(window, moduli * np.exp(1j * phases))


@st.composite
def arcs(draw, min_length: float = MIN_ARC):
    end = 2 * np.pi
    t0 = draw(st.floats(min_value=0.0, max_value=end - min_length))
    t1 = draw(st.floats(min_value=min(t0 + min_length, end), max_value=end))
    return t0, t1


@st.composite
def split_arcs(draw, min_length: float = MIN_ARC):
    """t0 < t1 < t2 with both pieces about min_length long or more"""
    end = 2 * np.pi
    t0 = draw(st.floats(min_value=0.0, max_value=end - 2 * min_length))
    t1 = draw(st.floats(min_value=min(t0 + min_length, end - min_length), max_value=end - min_length))
    t2 = draw(st.floats(min_value=min(t1 + min_length, end), max_value=end))
    return t0, t1, t2
