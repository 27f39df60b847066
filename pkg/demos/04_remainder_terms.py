"""Truncation remainders of the desired states, from the data alone."""

from mhfem import get_example

for ident in (1, 2, 3):
    ds = get_example(ident).desired_state
    values = ", ".join(f"E_{N} = {ds.remainder(N):.6g}" for N in (2, 4, 6, 8, 10))
    print(f"Example {ident}: {values}")
