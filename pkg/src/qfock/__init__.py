"""Finite-truncation workbench for wavelet filter banks, Cuntz relations, Mellin
multiresolution ladders, q-oscillators and twisted Fock spaces."""

__version__ = "0.1.0"
