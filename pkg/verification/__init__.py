"""Residual checks of the integrable structure on (rho, v) grids"""
