"""
Expanding curvature flows of rotationally symmetric convex hypersurfaces in
support-function form, and their solitons (the L_p-Christoffel-Minkowski
problem).
"""
__version__ = "0.1.0"
