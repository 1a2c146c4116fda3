"""Two-way unclonable-encryption protocol simulator and verification toolkit.

Subpackages by responsibility:

- qmath: dense complex linear algebra and quantum-state helpers (dim <= 64)
- classical: GF(2^nu) arithmetic, invertible pairwise-independent hashing,
  one-time MAC, linear codes with syndrome decoding
- attack: the collective two-EPR-pair attack model and its conditional states
- monitor: statistical channel-monitoring verdicts
- protocol: executable prepare-and-measure and EPR protocol runs
- security: entropies, distinguishability bounds, rate formulas, and the
  reject-case entropy maximization
- checks: the numerical verification battery
- cli: command-line front end (simulate / verify-lemmas / rates)
"""

from . import attack, checks, classical, cli, monitor, protocol, qmath, security

__version__ = "0.1.0"

__all__ = ["attack", "checks", "classical", "cli", "monitor", "protocol",
           "qmath", "security", "__version__"]
