"""Lindblad simulations of a mechanical resonator coupled to two parametrically
coupled cavities driven by a two-mode squeezed bath."""

__version__ = "0.1.0"
