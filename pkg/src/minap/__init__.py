"""OFDM physical-layer security via minimum-phase / all-pass channel decomposition.

The package simulates a single-antenna OFDM link in which the transmitter
factors the reciprocal channel into a minimum-phase part and a unit-modulus
all-pass part, then hides either the data subcarriers, the pilot subcarriers,
or both behind the all-pass phase. A legitimate receiver sharing the channel
can undo the precoding from what it observes; an eavesdropper on a different
channel cannot.

Modules
-------
numerics        FFT wrappers, polynomial roots, cepstral minimum-phase, unwrap.
channel         Rayleigh tapped-delay-line channels, correlated draws, CIR/CFR.
decomposition   Minimum-phase / all-pass factorization and square roots.
ofdm            QPSK mapping, OFDM symbol assembly, AWGN, LS/MMSE estimation.
security        Alice precoder and Bob/Eve receivers for the four scheme modes.
analysis        Closed-form BEP formulas, correlation attenuation, NMSE, PAPR.
harness         Deterministic Monte-Carlo sweeps and CSV output.
cli             Command-line front end (`minap`).
"""

__version__ = "0.1.0"

from . import analysis, channel, decomposition, harness, numerics, ofdm, security

__all__ = [
    "analysis",
    "channel",
    "decomposition",
    "harness",
    "numerics",
    "ofdm",
    "security",
    "__version__",
]
