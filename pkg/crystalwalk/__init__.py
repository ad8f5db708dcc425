"""
CrystalWalk
Random walks on the ice-1h and graphite-2h lattices: sampling, closed-form asymptotics, verification
"""

__version__ = "0.1.0"
