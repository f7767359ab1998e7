"""
SensorSCAN - Detecção e diagnóstico não supervisionado de falhas em processos industriais.
"""

__version__ = "0.1.0"
