"""Hypothesis strategies for small simple graphs."""
import numpy as np
from hypothesis import strategies as st

from sublinear_graphs.graph_core import Graph


@st.composite
def graphs(draw, min_n=0, max_n=20):
    n = draw(st.integers(min_n, max_n))
    if n < 2:
        return Graph.from_edges(n, [])
    iu = np.stack(np.triu_indices(n, 1), axis=1)
    mask = draw(st.lists(st.booleans(), min_size=len(iu), max_size=len(iu)))
    return Graph.from_edges(n, iu[np.array(mask, dtype=bool)])
