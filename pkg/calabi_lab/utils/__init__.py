"""
Support code: ODE stepping, meshes, file formats, errors
"""
