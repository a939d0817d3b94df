"""Uniform MCMC sampling of naturally labeled partial orders.

Core pieces: bit-packed poset representation (`poset`), the relation/link
Monte Carlo moves with an exact-kernel builder (`moves`), a compiled chain
loop (`kernel`), exhaustive small-n oracles (`enumeration`), per-sweep
invariants (`observables`), trace post-processing (`analysis`), and the
run/validate/analyze operator surface (`runner`, `validation`, `pipeline`,
`cli`).
"""

__version__ = "0.1.0"
