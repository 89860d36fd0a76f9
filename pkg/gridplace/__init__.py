"""
gridplace: frequency-disturbance performance measures, inertia and damping susceptibilities,
and placement of inertia and primary control in power grids.
"""

__version__ = "1.0.0"
