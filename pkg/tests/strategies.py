from fractions import Fraction

from hypothesis import strategies as st

binary_words = st.text(alphabet="01", min_size=0, max_size=12)
nonempty_words = st.text(alphabet="01", min_size=1, max_size=12)


def fractions(lo=-10, hi=10, max_den=1000):
    return st.fractions(min_value=Fraction(lo), max_value=Fraction(hi), max_denominator=max_den)


unit = fractions(0, 1)


@st.composite
def intervals(draw, lo=-10, hi=10):
    a, b = draw(fractions(lo, hi)), draw(fractions(lo, hi))
    from wildblender.numerics import RatInterval

    return RatInterval(min(a, b), max(a, b))
