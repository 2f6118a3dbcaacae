"""
Geometry kernels: weights, graph geometry, the correspondence, rotational profiles
"""
