"""Hypothesis strategies shared by the test modules."""

from pathlib import Path

from hypothesis import strategies as st

from core import BOT, ONE, Bang, Lolli, Plus, Query, Tensor, With

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

labels = st.sampled_from(["l", "m", "r"])


def _compound(inner):
    return st.one_of(
        st.builds(Tensor, inner, inner),
        st.builds(Lolli, inner, inner),
        st.builds(Bang, inner),
        st.builds(Query, inner),
        st.dictionaries(labels, inner, min_size=1, max_size=3).map(Plus),
        st.dictionaries(labels, inner, min_size=1, max_size=3).map(With),
    )


types = st.recursive(st.sampled_from([ONE, BOT]), _compound, max_leaves=10)
