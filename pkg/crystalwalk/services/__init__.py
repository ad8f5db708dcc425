"""
Business logic: lattice arithmetic, kernels, sampling, asymptotics, verification
"""
