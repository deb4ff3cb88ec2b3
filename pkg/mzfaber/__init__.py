"""
mzfaber: núcleos de memória de Mori-Zwanzig para sistemas lineares.

Expansões Dyson, Faber, Lagrange e Newton do operador de memória, o
integrador da equação de Langevin generalizada, os modelos de teste
(cadeias harmônicas e ondas no anel) e os oráculos de verificação.
"""

__version__ = "1.0.0"
