"""
DQLS Toolkit - Source Package
"""

__version__ = "1.0.0"
__description__ = "Numerical toolkit for dissipative quasi-local stabilizability of multipartite pure states"
