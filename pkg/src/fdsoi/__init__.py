"""Two-dimensional drift-diffusion simulation of FD-SOI NMOSFETs and gate
work-function studies."""

__version__ = "0.1.0"
